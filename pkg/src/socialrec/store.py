"""Embedded in-memory data backend.

Holds interactions, resource metadata and tag assignments together with the
secondary indices the recommender reads: popularity counters, user/resource
incidence sets, user tag profiles and an inverted term index with TF-IDF
weighting.

All writes go through a single writer lock and are visible to the next read;
reads run under a shared lock and never observe a half-applied write.
"""

from __future__ import annotations

import enum
import math
import re
import threading
from collections import Counter, defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from socialrec._locks import RWLock
from socialrec.errors import NotFoundError, ValidationError

_TOKEN_RE = re.compile(r"[^\W_]+")

DEFAULT_REFRESH_MS = 1000


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


class InteractionKind(str, enum.Enum):
    CLICK = "click"


@dataclass(frozen=True)
class Interaction:
    user_id: str
    resource_id: str
    timestamp: int
    kind: InteractionKind = InteractionKind.CLICK

    def __post_init__(self) -> None:
        if not isinstance(self.user_id, str) or not self.user_id.strip():
            raise ValidationError("user_id must be a non-empty string")
        if not isinstance(self.resource_id, str) or not self.resource_id.strip():
            raise ValidationError("resource_id must be a non-empty string")
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise ValidationError("timestamp must be an integer (ms since epoch)")
        if self.timestamp < 0:
            raise ValidationError("timestamp must be >= 0")
        if not isinstance(self.kind, InteractionKind):
            try:
                object.__setattr__(self, "kind", InteractionKind(self.kind))
            except ValueError:
                raise ValidationError(f"unknown interaction kind {self.kind!r}") from None


@dataclass(frozen=True)
class Resource:
    resource_id: str
    title: str = ""
    description: str = ""
    categories: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not isinstance(self.resource_id, str) or not self.resource_id.strip():
            raise ValidationError("resource_id must be a non-empty string")
        if self.title is None or self.description is None:
            raise ValidationError("title and description may be empty but not absent")
        if not isinstance(self.categories, frozenset):
            object.__setattr__(self, "categories", frozenset(self.categories))

    @property
    def text(self) -> str:
        return " ".join([self.title, self.description, *sorted(self.categories)])


@dataclass(frozen=True)
class TagAssignment:
    user_id: str
    resource_id: str
    tag: str
    timestamp: int

    def __post_init__(self) -> None:
        if not isinstance(self.user_id, str) or not self.user_id.strip():
            raise ValidationError("user_id must be a non-empty string")
        if not isinstance(self.resource_id, str) or not self.resource_id.strip():
            raise ValidationError("resource_id must be a non-empty string")
        if not isinstance(self.tag, str):
            raise ValidationError("tag must be a string")
        tag = self.tag.strip().lower()
        if not tag:
            raise ValidationError("tag is empty after normalization")
        object.__setattr__(self, "tag", tag)
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise ValidationError("timestamp must be an integer (ms since epoch)")
        if self.timestamp < 0:
            raise ValidationError("timestamp must be >= 0")


@dataclass(frozen=True)
class DatasetStats:
    n_interactions: int
    n_users: int
    n_resources: int
    n_tag_assignments: int
    avg_interactions_per_user: float
    avg_interactions_per_resource: float
    avg_tags_per_resource: float

    @classmethod
    def from_counts(
        cls, n_interactions: int, n_users: int, n_resources: int, n_tag_assignments: int
    ) -> "DatasetStats":
        def ratio(a: int, b: int) -> float:
            return a / b if b else 0.0

        return cls(
            n_interactions=n_interactions,
            n_users=n_users,
            n_resources=n_resources,
            n_tag_assignments=n_tag_assignments,
            avg_interactions_per_user=ratio(n_interactions, n_users),
            avg_interactions_per_resource=ratio(n_interactions, n_resources),
            avg_tags_per_resource=ratio(n_tag_assignments, n_resources),
        )

    def as_dict(self) -> dict[str, float | int]:
        return {
            "n_interactions": self.n_interactions,
            "n_users": self.n_users,
            "n_resources": self.n_resources,
            "n_tag_assignments": self.n_tag_assignments,
            "avg_interactions_per_user": round(self.avg_interactions_per_user, 2),
            "avg_interactions_per_resource": round(self.avg_interactions_per_resource, 2),
            "avg_tags_per_resource": round(self.avg_tags_per_resource, 2),
        }


@dataclass(frozen=True)
class TermVector:
    weights: dict[str, float]
    norm: float

    @classmethod
    def from_weights(cls, weights: dict[str, float]) -> "TermVector":
        return cls(weights, math.sqrt(sum(w * w for w in weights.values())))

    def __bool__(self) -> bool:
        return self.norm > 0.0

    def cosine(self, other: "TermVector") -> float:
        if not self or not other:
            return 0.0
        common = sorted(self.weights.keys() & other.weights.keys())
        dot = sum(self.weights[t] * other.weights[t] for t in common)
        return min(1.0, max(0.0, dot / (self.norm * other.norm)))


EMPTY_VECTOR = TermVector({}, 0.0)


@dataclass(frozen=True)
class WriteAck:
    version: int


class _TextIndex:
    """Immutable TF-IDF view over the indexed resources at one text version."""

    def __init__(self, term_counts: dict[str, Counter], postings: dict[str, set[str]]):
        n_docs = len(term_counts)
        self.idf = {t: math.log((1 + n_docs) / (1 + len(docs))) + 1.0 for t, docs in postings.items()}
        self.vectors: dict[str, TermVector] = {}
        for rid, counts in term_counts.items():
            if counts:
                self.vectors[rid] = TermVector.from_weights(
                    {t: c * self.idf[t] for t, c in counts.items()}
                )
        # term -> (document positions, weights) over non-empty vectors, positions ascending
        self.doc_ids = sorted(self.vectors)
        self._norms = np.array([self.vectors[rid].norm for rid in self.doc_ids], dtype=np.float64)
        lists: dict[str, tuple[list[int], list[float]]] = {}
        for pos, rid in enumerate(self.doc_ids):
            for t, w in self.vectors[rid].weights.items():
                idx, ws = lists.setdefault(t, ([], []))
                idx.append(pos)
                ws.append(w)
        self.postings: dict[str, tuple[np.ndarray, np.ndarray]] = {
            t: (np.array(idx, dtype=np.int64), np.array(ws, dtype=np.float64)) for t, (idx, ws) in lists.items()
        }

    def vector(self, resource_id: str) -> TermVector:
        return self.vectors.get(resource_id, EMPTY_VECTOR)

    def query_vector(self, text: str) -> TermVector:
        counts = Counter(tokenize(text))
        weights = {t: c * self.idf[t] for t, c in counts.items() if t in self.idf}
        return TermVector.from_weights(weights) if weights else EMPTY_VECTOR

    def dot_all(self, query: TermVector) -> dict[str, float]:
        """Cosine of ``query`` against every indexed vector it shares a term with."""
        terms = [t for t in sorted(query.weights) if t in self.postings] if query else []
        if not terms:
            return {}
        idx = np.concatenate([self.postings[t][0] for t in terms])
        contrib = np.concatenate([self.postings[t][1] * query.weights[t] for t in terms])
        # bincount adds in array order, so each document sums its terms in sorted order
        dots = np.bincount(idx, weights=contrib, minlength=len(self.doc_ids))
        hit = np.unique(idx)
        cos = np.clip(dots[hit] / (query.norm * self._norms[hit]), 0.0, 1.0)
        doc_ids = self.doc_ids
        return {doc_ids[i]: c for i, c in zip(hit.tolist(), cos.tolist())}


class Store:
    """In-memory store with secondary indices for recommendation."""

    def __init__(self, refresh_ms: int = DEFAULT_REFRESH_MS) -> None:
        if refresh_ms < 0:
            raise ValidationError("refresh_ms must be >= 0")
        # Writes are visible on the next read, so any bound >= 0 is met.
        self.refresh_ms = refresh_ms
        self._lock = RWLock()
        self._version = 0

        self._interactions: list[Interaction] = []
        self._history: dict[str, list[Interaction]] = defaultdict(list)
        self._popularity: Counter[str] = Counter()
        self._user_items: dict[str, set[str]] = defaultdict(set)
        self._item_users: dict[str, set[str]] = defaultdict(set)
        self._catalog: set[str] = set()

        self._resources: dict[str, Resource] = {}
        self._term_counts: dict[str, Counter] = {}
        self._postings: dict[str, set[str]] = defaultdict(set)
        self._text_version = 0

        self._tag_counts: dict[tuple[str, str, str], int] = {}
        self._tag_events: list[TagAssignment] = []
        self._user_tags: dict[str, Counter[str]] = defaultdict(Counter)
        self._user_tag_norm2: dict[str, int] = defaultdict(int)
        # tag -> {user: use count}; mirrors _user_tags for posting-list scans
        self._tag_users: dict[str, dict[str, int]] = defaultdict(dict)
        self._resource_tags: dict[str, Counter[str]] = defaultdict(Counter)

        self._cache_lock = threading.Lock()
        self._text_index: tuple[int, _TextIndex] | None = None
        self._popular: tuple[int, list[tuple[str, int]]] | None = None
        self._complexity: tuple[int, dict[str, float]] | None = None

    @property
    def version(self) -> int:
        return self._version

    # -- writes ------------------------------------------------------------

    def add_interaction(self, interaction: Interaction) -> WriteAck:
        with self._lock.write():
            self._apply_interaction(interaction)
            self._version += 1
            return WriteAck(self._version)

    def add_interactions(self, interactions: Iterable[Interaction]) -> WriteAck:
        with self._lock.write():
            for i in interactions:
                self._apply_interaction(i)
            self._version += 1
            return WriteAck(self._version)

    def _apply_interaction(self, i: Interaction) -> None:
        self._interactions.append(i)
        self._history[i.user_id].append(i)
        self._popularity[i.resource_id] += 1
        self._user_items[i.user_id].add(i.resource_id)
        self._item_users[i.resource_id].add(i.user_id)
        self._catalog.add(i.resource_id)

    def add_resource(self, resource: Resource) -> WriteAck:
        with self._lock.write():
            self._apply_resource(resource)
            self._version += 1
            return WriteAck(self._version)

    def add_resources(self, resources: Iterable[Resource]) -> WriteAck:
        with self._lock.write():
            for r in resources:
                self._apply_resource(r)
            self._version += 1
            return WriteAck(self._version)

    def _apply_resource(self, r: Resource) -> None:
        for t in self._term_counts.get(r.resource_id, ()):
            docs = self._postings[t]
            docs.discard(r.resource_id)
            if not docs:
                del self._postings[t]
        counts = Counter(tokenize(r.text))
        self._resources[r.resource_id] = r
        self._term_counts[r.resource_id] = counts
        for t in counts:
            self._postings[t].add(r.resource_id)
        self._catalog.add(r.resource_id)
        self._text_version += 1

    def add_tag_assignment(self, tag: TagAssignment) -> WriteAck:
        with self._lock.write():
            self._apply_tag(tag)
            self._version += 1
            return WriteAck(self._version)

    def add_tag_assignments(self, tags: Iterable[TagAssignment]) -> WriteAck:
        with self._lock.write():
            for t in tags:
                self._apply_tag(t)
            self._version += 1
            return WriteAck(self._version)

    def _apply_tag(self, t: TagAssignment) -> None:
        key = (t.user_id, t.resource_id, t.tag)
        self._tag_counts[key] = self._tag_counts.get(key, 0) + 1
        self._tag_events.append(t)
        profile = self._user_tags[t.user_id]
        # (c + 1)^2 - c^2 keeps the squared norm exact without a rescan
        self._user_tag_norm2[t.user_id] += 2 * profile[t.tag] + 1
        profile[t.tag] += 1
        users = self._tag_users[t.tag]
        users[t.user_id] = users.get(t.user_id, 0) + 1
        self._resource_tags[t.resource_id][t.tag] += 1
        self._catalog.add(t.resource_id)

    # -- reads -------------------------------------------------------------

    @contextmanager
    def reading(self) -> Iterator["StoreView"]:
        """Hold the read lock and yield an unlocked view of the current state."""
        with self._lock.read():
            yield StoreView(self)

    def has_resource(self, resource_id: str) -> bool:
        return resource_id in self._catalog

    def get_resource(self, resource_id: str) -> Resource:
        """Metadata for a resource; stubs come back with empty text."""
        with self.reading() as view:
            return view.resource(resource_id)

    def resource_ids(self) -> list[str]:
        with self._lock.read():
            return sorted(self._catalog)

    def user_ids(self) -> list[str]:
        """Users with at least one interaction."""
        with self._lock.read():
            return sorted(self._user_items)

    def popularity(self, resource_id: str) -> int:
        return self._popularity.get(resource_id, 0)

    def user_items(self, user_id: str) -> frozenset[str]:
        """Distinct resources the user interacted with."""
        with self._lock.read():
            return frozenset(self._user_items.get(user_id, ()))

    def item_users(self, resource_id: str) -> frozenset[str]:
        with self._lock.read():
            return frozenset(self._item_users.get(resource_id, ()))

    def user_tags(self, user_id: str) -> dict[str, int]:
        with self._lock.read():
            return dict(self._user_tags.get(user_id, {}))

    def resource_tags(self, resource_id: str) -> dict[str, int]:
        with self._lock.read():
            return dict(self._resource_tags.get(resource_id, {}))

    def tag_count(self, user_id: str, resource_id: str, tag: str) -> int:
        return self._tag_counts.get((user_id, resource_id, tag.strip().lower()), 0)

    def postings(self, term: str) -> frozenset[str]:
        with self._lock.read():
            return frozenset(self._postings.get(term, ()))

    def get_user_history(self, user_id: str) -> list[Interaction]:
        """Interactions of a user, oldest first; ties keep insertion order."""
        with self._lock.read():
            return sorted(self._history.get(user_id, ()), key=lambda i: i.timestamp)

    def interactions(self) -> list[Interaction]:
        with self._lock.read():
            return list(self._interactions)

    def resources(self) -> list[Resource]:
        """Resources with metadata, ordered by id."""
        with self._lock.read():
            return [self._resources[r] for r in sorted(self._resources)]

    def tag_events(self) -> list[TagAssignment]:
        with self._lock.read():
            return list(self._tag_events)

    def term_vector(self, resource_id: str) -> TermVector:
        with self.reading() as view:
            view.require_resource(resource_id)
            return view.text_index().vector(resource_id)

    def text_similarity(self, a: str, b: str) -> float:
        """Cosine similarity of the TF-IDF vectors of two resources, in [0, 1]."""
        with self.reading() as view:
            view.require_resource(a)
            view.require_resource(b)
            index = view.text_index()
            return index.vector(a).cosine(index.vector(b))

    def compute_stats(self) -> DatasetStats:
        with self._lock.read():
            return DatasetStats.from_counts(
                n_interactions=len(self._interactions),
                n_users=len(self._user_items),
                n_resources=len(self._catalog),
                n_tag_assignments=len(self._tag_counts),
            )


class StoreView:
    """Read accessors over a store whose read lock the caller holds.

    Returned containers are the live index structures; callers must not
    mutate them or keep them past the ``Store.reading()`` block.
    """

    __slots__ = ("_s",)

    def __init__(self, store: Store) -> None:
        self._s = store

    @property
    def version(self) -> int:
        return self._s._version

    def has_resource(self, resource_id: str) -> bool:
        return resource_id in self._s._catalog

    def require_resource(self, resource_id: str) -> None:
        if resource_id not in self._s._catalog:
            raise NotFoundError(f"unknown resource {resource_id!r}")

    def resource(self, resource_id: str) -> Resource:
        self.require_resource(resource_id)
        return self._s._resources.get(resource_id) or Resource(resource_id)

    def popularity(self, resource_id: str) -> int:
        return self._s._popularity.get(resource_id, 0)

    def user_items(self, user_id: str) -> set[str] | frozenset[str]:
        return self._s._user_items.get(user_id) or frozenset()

    def item_users(self, resource_id: str) -> set[str] | frozenset[str]:
        return self._s._item_users.get(resource_id) or frozenset()

    def user_tags(self, user_id: str) -> dict[str, int]:
        return self._s._user_tags.get(user_id) or {}

    def user_tag_norm2(self, user_id: str) -> int:
        return self._s._user_tag_norm2.get(user_id, 0)

    def tag_users(self, tag: str) -> dict[str, int]:
        """Users of a tag with their use counts."""
        return self._s._tag_users.get(tag) or {}

    def is_known_user(self, user_id: str) -> bool:
        return user_id in self._s._user_items or user_id in self._s._user_tags

    def popularity_ranking(self) -> list[tuple[str, int]]:
        """(resource_id, count) for every clicked resource, most popular first."""
        s = self._s
        key = len(s._interactions)
        cached = s._popular
        if cached is not None and cached[0] == key:
            return cached[1]
        ranking = sorted(s._popularity.items(), key=lambda kv: (-kv[1], kv[0]))
        s._popular = (key, ranking)
        return ranking

    def text_index(self) -> _TextIndex:
        s = self._s
        cached = s._text_index
        if cached is not None and cached[0] == s._text_version:
            return cached[1]
        with s._cache_lock:
            cached = s._text_index
            if cached is None or cached[0] != s._text_version:
                cached = (s._text_version, _TextIndex(s._term_counts, s._postings))
                s._text_index = cached
            return cached[1]

    def raw_complexity(self) -> dict[str, float]:
        """Readability-style raw complexity per resource with metadata."""
        s = self._s
        cached = s._complexity
        if cached is not None and cached[0] == s._text_version:
            return cached[1]
        with s._cache_lock:
            cached = s._complexity
            if cached is None or cached[0] != s._text_version:
                raw = {rid: raw_complexity(r.description) for rid, r in s._resources.items()}
                cached = (s._text_version, raw)
                s._complexity = cached
            return cached[1]


_SENTENCE_RE = re.compile(r"[.!?]+")
_WORD_RE = re.compile(r"[^\W_]+")


def raw_complexity(text: str) -> float:
    """Mean words per sentence plus mean characters per word; 0 for empty text."""
    sentences = [_WORD_RE.findall(chunk) for chunk in _SENTENCE_RE.split(text)]
    sentences = [words for words in sentences if words]
    if not sentences:
        return 0.0
    n_words = sum(len(words) for words in sentences)
    n_chars = sum(len(w) for words in sentences for w in words)
    return n_words / len(sentences) + n_chars / n_words
