"""Versioned registry of recommendation profiles with atomic hot updates."""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

from socialrec.errors import NotFoundError, ValidationError


class Algorithm(str, enum.Enum):
    POPULAR = "uc1"
    CF_INTERACTIONS = "uc2"
    CF_TAGS = "uc3"
    CONTENT = "uc4"
    SIMILAR = "uc5"
    CONTEXTUAL = "uc6"
    GOAL = "uc7"


class Signal(str, enum.Enum):
    INTERACTIONS = "interactions"
    TAGS = "tags"


ALGORITHM_LABELS = {
    Algorithm.POPULAR: "UC1: MP",
    Algorithm.CF_INTERACTIONS: "UC2: CF_i",
    Algorithm.CF_TAGS: "UC3: CF_t",
    Algorithm.CONTENT: "UC4: CBF",
    Algorithm.SIMILAR: "UC5: Similar",
    Algorithm.CONTEXTUAL: "UC6: Contextual CF",
    Algorithm.GOAL: "UC7: Goal",
}


@dataclass(frozen=True)
class RecommendationProfile:
    profile_id: str
    algorithm_id: Algorithm
    n: int = 20
    k_default: int = 20
    lambda_: float = 0.5
    signal: Signal = Signal.INTERACTIONS
    headroom: int = 5
    version: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.profile_id, str) or not self.profile_id:
            raise ValidationError("profile_id must be a non-empty string")
        try:
            object.__setattr__(self, "algorithm_id", Algorithm(self.algorithm_id))
            object.__setattr__(self, "signal", Signal(self.signal))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        for name in ("n", "k_default", "headroom", "version"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"{name} must be an integer")
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.k_default < 1:
            raise ValidationError("k_default must be >= 1")
        if self.headroom < 1:
            raise ValidationError("headroom must be >= 1")
        if isinstance(self.lambda_, bool) or not isinstance(self.lambda_, (int, float)):
            raise ValidationError("lambda must be a number")
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValidationError("lambda must lie in [0, 1]")
        object.__setattr__(self, "lambda_", float(self.lambda_))

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["algorithm_id"] = self.algorithm_id.value
        d["signal"] = self.signal.value
        return d

    @classmethod
    def from_json(cls, obj: dict[str, Any], profile_id: str | None = None) -> "RecommendationProfile":
        if not isinstance(obj, dict):
            raise ValidationError("profile must be a JSON object")
        data = dict(obj)
        if "lambda" in data:
            data["lambda_"] = data.pop("lambda")
        if profile_id is not None:
            if data.get("profile_id", profile_id) != profile_id:
                raise ValidationError("profile_id in body does not match path")
            data["profile_id"] = profile_id
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValidationError(f"unknown profile fields: {sorted(unknown)}")
        if "algorithm_id" not in data or "profile_id" not in data:
            raise ValidationError("profile_id and algorithm_id are required")
        return cls(**data)


def default_profiles() -> list[RecommendationProfile]:
    return [
        RecommendationProfile("uc1-popular", Algorithm.POPULAR),
        RecommendationProfile("cf-default", Algorithm.CF_INTERACTIONS, n=20),
        RecommendationProfile("cf-tags", Algorithm.CF_TAGS, n=20, signal=Signal.TAGS),
        RecommendationProfile("cbf-default", Algorithm.CONTENT),
        RecommendationProfile("similar-default", Algorithm.SIMILAR),
        RecommendationProfile("contextual-default", Algorithm.CONTEXTUAL, n=20),
        RecommendationProfile("goal-default", Algorithm.GOAL, n=20, lambda_=0.5, headroom=5),
    ]


# profile used when a request names only the use case
DEFAULT_PROFILE_FOR = {
    Algorithm.POPULAR: "uc1-popular",
    Algorithm.CF_INTERACTIONS: "cf-default",
    Algorithm.CF_TAGS: "cf-tags",
    Algorithm.CONTENT: "cbf-default",
    Algorithm.SIMILAR: "similar-default",
    Algorithm.CONTEXTUAL: "contextual-default",
    Algorithm.GOAL: "goal-default",
}


class ProfileRegistry:
    """Holds one immutable profile per id.

    Reads return the current object without locking; updates are serialized
    and swap in a new object with the next version number.
    """

    def __init__(self, profiles: list[RecommendationProfile] | None = None) -> None:
        self._lock = threading.RLock()
        self._profiles: dict[str, RecommendationProfile] = {}
        for p in default_profiles() if profiles is None else profiles:
            self._profiles[p.profile_id] = replace(p, version=max(p.version, 1))

    def get(self, profile_id: str) -> RecommendationProfile:
        try:
            return self._profiles[profile_id]
        except KeyError:
            raise NotFoundError(f"unknown profile {profile_id!r}") from None

    def ids(self) -> list[str]:
        return sorted(self._profiles)

    def all(self) -> list[RecommendationProfile]:
        profiles = self._profiles
        return [profiles[k] for k in sorted(profiles)]

    def set(self, profile: RecommendationProfile) -> int:
        """Replace a profile; returns its new version."""
        if not isinstance(profile, RecommendationProfile):
            raise ValidationError("expected a RecommendationProfile")
        with self._lock:
            current = self._profiles.get(profile.profile_id)
            version = current.version + 1 if current else 1
            self._profiles = {**self._profiles, profile.profile_id: replace(profile, version=version)}
            return version

    def update(self, profile_id: str, **changes: Any) -> RecommendationProfile:
        """Apply field changes to the current profile and store the result."""
        with self._lock:
            current = self.get(profile_id)
            candidate = replace(current, **changes)
            self.set(candidate)
            return self._profiles[profile_id]

    def to_json(self) -> list[dict[str, Any]]:
        return [p.to_json() for p in self.all()]

    @classmethod
    def from_file(cls, path: str | Path) -> "ProfileRegistry":
        """Defaults overlaid with the profiles listed in a ``profiles.json`` file."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = data.get("profiles", [])
        if not isinstance(data, list):
            raise ValidationError("profiles file must hold a list of profile objects")
        registry = cls()
        for obj in data:
            p = RecommendationProfile.from_json(obj)
            registry._profiles[p.profile_id] = replace(p, version=max(p.version, 1))
        return registry

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({"profiles": self.to_json()}, indent=2) + "\n", encoding="utf-8")
