"""Recommendation engine covering the seven use cases.

=====  ==========================================  =========================
UC     operation                                    method
=====  ==========================================  =========================
UC1    most popular                                 ``recommend_popular``
UC2    user-based CF on clicks                      ``recommend_cf(signal=interactions)``
UC3    user-based CF on tag profiles                ``recommend_cf(signal=tags)``
UC4    content-based filtering on the user history  ``recommend_cbf``
UC5    resources similar to a resource              ``similar_resources``
UC6    CF restricted to users of a context item     ``recommend_contextual``
UC7    goal-aware re-ranking                        ``recommend_goal``
=====  ==========================================  =========================

Every operation reads one consistent store view and one profile snapshot
taken when the request starts, and keeps no state between requests.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Any, Iterable

from socialrec.errors import ValidationError
from socialrec.profiles import (
    DEFAULT_PROFILE_FOR,
    Algorithm,
    ProfileRegistry,
    RecommendationProfile,
    Signal,
)
from socialrec.store import Store, StoreView, TermVector


@dataclass(frozen=True)
class RankedEntry:
    resource_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...]
    algorithm_id: Algorithm
    profile_version: int
    cold_start: bool = False
    neighborhood_size: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resource_ids(self) -> list[str]:
        return [e.resource_id for e in self.entries]

    def scores(self) -> list[float]:
        return [e.score for e in self.entries]

    def to_json(self) -> dict[str, Any]:
        return {
            "items": [{"resource_id": e.resource_id, "score": e.score, "rank": e.rank} for e in self.entries],
            "algorithm_id": self.algorithm_id.value,
            "profile_version": self.profile_version,
            "cold_start": self.cold_start,
            "neighborhood_size": self.neighborhood_size,
        }


@dataclass(frozen=True)
class Neighborhood:
    members: tuple[tuple[str, float], ...] = ()

    def __len__(self) -> int:
        return len(self.members)

    def user_ids(self) -> list[str]:
        return [u for u, _ in self.members]


@dataclass(frozen=True)
class GoalSpec:
    kind: str
    term: str | None = None

    KINDS = ("harder", "easier", "topic")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValidationError(f"unknown goal kind {self.kind!r}")
        if self.kind == "topic":
            if not self.term or not self.term.strip():
                raise ValidationError("topic goal needs a term")
            object.__setattr__(self, "term", self.term.strip().lower())

    @classmethod
    def parse(cls, text: str) -> "GoalSpec":
        """Parse ``harder``, ``easier`` or ``topic:<term>``."""
        kind, _, term = text.partition(":")
        kind = kind.strip().lower()
        return cls(kind, term or None) if kind == "topic" else cls(kind)


def _top_k(scores: dict[str, float], k: int, view: StoreView) -> list[tuple[str, float]]:
    items = scores.items()
    if len(scores) > 4 * k:
        # cheap cut on the raw scores first; ties at the cut all survive
        kth = heapq.nlargest(k, scores.values())[-1]
        items = [(r, s) for r, s in items if s >= kth]
    # equal scores: more popular first, then resource id
    return heapq.nsmallest(k, items, key=lambda kv: (-kv[1], -view.popularity(kv[0]), kv[0]))


def _ranked(items: Iterable[tuple[str, float]], algorithm: Algorithm, version: int,
            cold_start: bool = False, neighborhood_size: int | None = None) -> RankedList:
    entries = tuple(RankedEntry(rid, float(score), rank) for rank, (rid, score) in enumerate(items, 1))
    return RankedList(entries, algorithm, version, cold_start, neighborhood_size)


class Engine:
    """Computes ranked lists from a ``Store`` using profiles from a registry.

    ``suppress_zero`` drops zero-score entries so an algorithm that cannot
    score anything returns an empty list (this is what coverage measures).
    """

    def __init__(self, store: Store, profiles: ProfileRegistry | None = None,
                 suppress_zero: bool = True) -> None:
        self.store = store
        self.profiles = profiles if profiles is not None else ProfileRegistry()
        self.suppress_zero = suppress_zero

    # -- profile plumbing ----------------------------------------------------

    def _profile(self, profile_id: str | None, algorithm: Algorithm) -> RecommendationProfile:
        return self.profiles.get(profile_id or DEFAULT_PROFILE_FOR[algorithm])

    @staticmethod
    def _k(k: int | None, profile: RecommendationProfile) -> int:
        k = profile.k_default if k is None else k
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ValidationError("k must be a positive integer")
        return k

    # -- UC1 -----------------------------------------------------------------

    def recommend_popular(self, k: int | None = None, profile_id: str | None = None) -> RankedList:
        profile = self._profile(profile_id, Algorithm.POPULAR)
        k = self._k(k, profile)
        with self.store.reading() as view:
            ranking = view.popularity_ranking()[:k]
        return _ranked(((rid, float(c)) for rid, c in ranking), Algorithm.POPULAR, profile.version)

    # -- similarities ----------------------------------------------------------

    def user_similarity_interactions(self, u: str, v: str) -> float:
        """Cosine of the binary distinct-interaction sets of two users."""
        with self.store.reading() as view:
            iu, iv = view.user_items(u), view.user_items(v)
            if not iu or not iv:
                return 0.0
            return len(iu & iv) / math.sqrt(len(iu) * len(iv))

    def user_similarity_tags(self, u: str, v: str) -> float:
        """Cosine of the tag-frequency vectors of two users."""
        with self.store.reading() as view:
            tu, tv = view.user_tags(u), view.user_tags(v)
            if not tu or not tv:
                return 0.0
            dot = sum(c * tv.get(t, 0) for t, c in tu.items())
            return dot / math.sqrt(view.user_tag_norm2(u) * view.user_tag_norm2(v))

    def _similar_users(self, view: StoreView, u: str, signal: Signal) -> dict[str, float]:
        if signal is Signal.INTERACTIONS:
            iu = view.user_items(u)
            if not iu:
                return {}
            overlap: Counter[str] = Counter()
            for r in iu:
                overlap.update(view.item_users(r))
            overlap.pop(u, None)
            nu = len(iu)
            return {v: c / math.sqrt(nu * len(view.user_items(v))) for v, c in overlap.items()}
        tu = view.user_tags(u)
        if not tu:
            return {}
        dots: dict[str, int] = defaultdict(int)
        for t, cu in tu.items():
            for v, cv in view.tag_users(t).items():
                dots[v] += cu * cv
        dots.pop(u, None)
        nu2 = view.user_tag_norm2(u)
        norm2 = view.user_tag_norm2
        return {v: d / math.sqrt(nu2 * norm2(v)) for v, d in dots.items()}

    def _neighborhood(self, view: StoreView, u: str, signal: Signal, n: int,
                      require_item: str | None = None) -> Neighborhood:
        sims = self._similar_users(view, u, signal)
        if require_item is not None:
            sims = {v: s for v, s in sims.items() if require_item in view.user_items(v)}
        top = heapq.nsmallest(n, ((v, s) for v, s in sims.items() if s > 0.0),
                              key=lambda vs: (-vs[1], vs[0]))
        return Neighborhood(tuple(top))

    def neighborhood(self, u: str, signal: Signal | str = Signal.INTERACTIONS, n: int = 20) -> Neighborhood:
        """Top-``n`` most similar users with positive similarity, best first."""
        if n < 1:
            raise ValidationError("n must be >= 1")
        with self.store.reading() as view:
            return self._neighborhood(view, u, Signal(signal), n)

    def _score_neighbors(self, view: StoreView, hood: Neighborhood,
                         exclude: set[str] | frozenset[str]) -> dict[str, float]:
        scores: dict[str, float] = defaultdict(float)
        for v, sim in hood.members:
            for r in view.user_items(v):
                if r not in exclude:
                    scores[r] += sim
        return scores

    # -- UC2 / UC3 -------------------------------------------------------------

    def recommend_cf(self, u: str, k: int | None = None, signal: Signal | str | None = None,
                     profile_id: str | None = None) -> RankedList:
        if profile_id is None and signal is not None and Signal(signal) is Signal.TAGS:
            profile_id = DEFAULT_PROFILE_FOR[Algorithm.CF_TAGS]
        profile = self._profile(profile_id, Algorithm.CF_INTERACTIONS)
        signal = Signal(signal) if signal is not None else profile.signal
        algorithm = Algorithm.CF_TAGS if signal is Signal.TAGS else Algorithm.CF_INTERACTIONS
        k = self._k(k, profile)
        with self.store.reading() as view:
            has_profile = bool(view.user_items(u) if signal is Signal.INTERACTIONS else view.user_tags(u))
            if not has_profile:
                return _ranked((), algorithm, profile.version, cold_start=True, neighborhood_size=0)
            hood = self._neighborhood(view, u, signal, profile.n)
            scores = self._score_neighbors(view, hood, view.user_items(u))
            return _ranked(self._finish(scores, k, view), algorithm, profile.version,
                           neighborhood_size=len(hood))

    def _finish(self, scores: dict[str, float], k: int, view: StoreView) -> list[tuple[str, float]]:
        if self.suppress_zero:
            scores = {r: s for r, s in scores.items() if s > 0.0}
        return _top_k(scores, k, view)

    # -- UC4 -------------------------------------------------------------------

    def recommend_cbf(self, u: str, k: int | None = None, profile_id: str | None = None) -> RankedList:
        """Rank unseen resources by cosine to the centroid of the user's item vectors."""
        profile = self._profile(profile_id, Algorithm.CONTENT)
        k = self._k(k, profile)
        with self.store.reading() as view:
            seen = view.user_items(u)
            index = view.text_index()
            centroid: dict[str, float] = defaultdict(float)
            for r in sorted(seen):
                for t, w in index.vector(r).weights.items():
                    centroid[t] += w
            if not centroid:
                return _ranked((), Algorithm.CONTENT, profile.version, cold_start=True)
            query = TermVector.from_weights({t: w / len(seen) for t, w in centroid.items()})
            scores = self._content_scores(index, query, exclude=seen)
            return _ranked(self._finish(scores, k, view), Algorithm.CONTENT, profile.version)

    def _content_scores(self, index, query: TermVector, exclude) -> dict[str, float]:
        scores = {r: s for r, s in index.dot_all(query).items() if r not in exclude}
        if not self.suppress_zero:
            for r in index.vectors:
                if r not in exclude:
                    scores.setdefault(r, 0.0)
        return scores

    # -- UC5 -------------------------------------------------------------------

    def similar_resources(self, r: str, k: int | None = None, profile_id: str | None = None) -> RankedList:
        profile = self._profile(profile_id, Algorithm.SIMILAR)
        k = self._k(k, profile)
        with self.store.reading() as view:
            view.require_resource(r)
            index = view.text_index()
            scores = self._content_scores(index, index.vector(r), exclude={r})
            # zero-score entries never carry information for item-to-item lists
            scores = {x: s for x, s in scores.items() if s > 0.0}
            return _ranked(_top_k(scores, k, view), Algorithm.SIMILAR, profile.version)

    # -- UC6 -------------------------------------------------------------------

    def recommend_contextual(self, u: str, r_ctx: str, k: int | None = None,
                             profile_id: str | None = None) -> RankedList:
        profile = self._profile(profile_id, Algorithm.CONTEXTUAL)
        k = self._k(k, profile)
        with self.store.reading() as view:
            view.require_resource(r_ctx)
            seen = view.user_items(u)
            if not seen:
                return _ranked((), Algorithm.CONTEXTUAL, profile.version, cold_start=True,
                               neighborhood_size=0)
            hood = self._neighborhood(view, u, Signal.INTERACTIONS, profile.n, require_item=r_ctx)
            scores = self._score_neighbors(view, hood, set(seen) | {r_ctx})
            return _ranked(self._finish(scores, k, view), Algorithm.CONTEXTUAL, profile.version,
                           neighborhood_size=len(hood))

    # -- UC7 -------------------------------------------------------------------

    def complexity_score(self, r: str) -> float:
        """Readability-based complexity of a resource, min-max scaled to [0, 1]."""
        with self.store.reading() as view:
            view.require_resource(r)
            return self._complexity(view).get(r, 0.0)

    def _complexity(self, view: StoreView) -> dict[str, float]:
        raw = {r: c for r, c in view.raw_complexity().items() if c > 0.0}
        if not raw:
            return {}
        lo, hi = min(raw.values()), max(raw.values())
        if hi == lo:
            return {r: 1.0 for r in raw}
        return {r: (c - lo) / (hi - lo) for r, c in raw.items()}

    def _goal_feature(self, view: StoreView, goal: GoalSpec, candidates: list[str]) -> dict[str, float]:
        if goal.kind in ("harder", "easier"):
            cx = self._complexity(view)
            feature = {r: cx.get(r, 0.0) for r in candidates}
            if goal.kind == "easier":
                feature = {r: 1.0 - f for r, f in feature.items()}
            return feature
        index = view.text_index()
        query = index.query_vector(goal.term)
        feature = {}
        for r in candidates:
            res = view.resource(r)
            if goal.term in {c.lower() for c in res.categories}:
                feature[r] = 1.0
            else:
                feature[r] = query.cosine(index.vector(r))
        return feature

    def recommend_goal(self, u: str, goal: GoalSpec | str, k: int | None = None,
                       lambda_: float | None = None, profile_id: str | None = None) -> RankedList:
        """Re-rank a CF (or, failing that, popularity) list toward a learning goal.

        final = (1 - lambda) * minmax(base score) + lambda * goal feature
        """
        if isinstance(goal, str):
            goal = GoalSpec.parse(goal)
        profile = self._profile(profile_id, Algorithm.GOAL)
        k = self._k(k, profile)
        lam = profile.lambda_ if lambda_ is None else lambda_
        if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not 0.0 <= lam <= 1.0:
            raise ValidationError("lambda must lie in [0, 1]")
        depth = k * profile.headroom
        with self.store.reading() as view:
            base: list[tuple[str, float]] = []
            hood_size = 0
            if view.user_items(u):
                hood = self._neighborhood(view, u, Signal.INTERACTIONS, profile.n)
                hood_size = len(hood)
                scores = self._score_neighbors(view, hood, view.user_items(u))
                base = self._finish(scores, depth, view)
            if not base:
                base = [(rid, float(c)) for rid, c in view.popularity_ranking()[:depth]]
            if not base:
                return _ranked((), Algorithm.GOAL, profile.version, cold_start=True,
                               neighborhood_size=hood_size)
            lo = min(s for _, s in base)
            hi = max(s for _, s in base)
            feature = self._goal_feature(view, goal, [r for r, _ in base])
            final = {}
            for r, s in base:
                scaled = (s - lo) / (hi - lo) if hi > lo else 1.0
                final[r] = (1.0 - lam) * scaled + lam * feature[r]
            return _ranked(_top_k(final, k, view), Algorithm.GOAL, profile.version,
                           neighborhood_size=hood_size)

    # -- dispatch --------------------------------------------------------------

    def recommend(self, algorithm: Algorithm | str, *, user: str | None = None,
                  resource: str | None = None, k: int | None = None,
                  goal: GoalSpec | str | None = None, lambda_: float | None = None,
                  profile_id: str | None = None) -> RankedList:
        """Route a request to the operation behind ``algorithm``."""
        try:
            algorithm = Algorithm(algorithm)
        except ValueError:
            raise ValidationError(f"unknown algorithm {algorithm!r}") from None

        def need(value: str | None, name: str) -> str:
            if not value:
                raise ValidationError(f"{algorithm.value} requires {name}")
            return value

        if algorithm is Algorithm.POPULAR:
            return self.recommend_popular(k, profile_id)
        if algorithm is Algorithm.CF_INTERACTIONS:
            return self.recommend_cf(need(user, "user"), k, Signal.INTERACTIONS, profile_id)
        if algorithm is Algorithm.CF_TAGS:
            return self.recommend_cf(need(user, "user"), k, Signal.TAGS, profile_id)
        if algorithm is Algorithm.CONTENT:
            return self.recommend_cbf(need(user, "user"), k, profile_id)
        if algorithm is Algorithm.SIMILAR:
            return self.similar_resources(need(resource, "resource"), k, profile_id)
        if algorithm is Algorithm.CONTEXTUAL:
            return self.recommend_contextual(need(user, "user"), need(resource, "resource"), k, profile_id)
        if goal is None:
            raise ValidationError("uc7 requires goal")
        return self.recommend_goal(need(user, "user"), goal, k, lambda_, profile_id)
