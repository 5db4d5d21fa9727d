"""Synthetic implicit-feedback datasets with latent topics.

Every user and resource belongs to one latent topic. A click lands on the
user's own topic with probability ``p_topic_click`` and on a uniformly
chosen other topic otherwise; tags follow the same scheme with fidelity
``q_topic_tag``. Setting both to ``1 / n_topics`` removes all topical signal.
Per-user click and tag counts are Zipf distributed, so most users have very
few interactions, as in real learning platforms.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from socialrec.dataio import Dataset, write_snapshot
from socialrec.errors import ValidationError
from socialrec.store import Interaction, Resource, TagAssignment

START_MS = 1_488_067_200_000  # 2017-02-26
SPAN_MS = 456 * 24 * 3600 * 1000

_SYLLABLES = ["ba", "ce", "di", "fo", "gu", "la", "me", "ni", "po", "ru", "sa", "te", "vi", "zo"]
_COMMON_WORDS = ["de", "la", "el", "en", "los", "las", "con", "para", "una", "del", "por"]


@dataclass(frozen=True)
class SyntheticConfig:
    n_users: int = 2000
    n_resources: int = 300
    n_topics: int = 10
    p_topic_click: float = 0.6
    q_topic_tag: float = 0.95
    activity_tail: float = 1.8
    seed: int = 0
    max_activity: int = 60
    tagger_fraction: float = 0.85
    tag_tail: float = 1.8
    max_tags: int = 40
    tags_per_topic: int = 12
    popularity_skew: float = 0.0
    words_per_topic: int = 30

    def __post_init__(self) -> None:
        for name in ("n_users", "n_resources", "n_topics", "max_activity", "max_tags",
                     "tags_per_topic", "words_per_topic"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.n_resources < self.n_topics:
            raise ValidationError("need at least one resource per topic")
        for name in ("p_topic_click", "q_topic_tag", "tagger_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must be a probability")
        if self.q_topic_tag < self.p_topic_click:
            raise ValidationError("q_topic_tag must be >= p_topic_click")
        if self.n_topics == 1 and self.p_topic_click < 1.0:
            raise ValidationError("with one topic every click is on-topic; use p_topic_click=1")
        if self.activity_tail <= 1.0 or self.tag_tail <= 1.0:
            raise ValidationError("Zipf exponents must be > 1")
        if self.popularity_skew < 0:
            raise ValidationError("popularity_skew must be >= 0")


def _word(rng: np.random.Generator, n_syllables: int) -> str:
    return "".join(rng.choice(_SYLLABLES, size=n_syllables))


def _zipf(rng: np.random.Generator, a: float, cap: int) -> int:
    return int(min(rng.zipf(a), cap))


def generate_synthetic(
    n_users: int = 2000,
    n_resources: int = 300,
    n_topics: int = 10,
    p_topic_click: float = 0.6,
    q_topic_tag: float = 0.95,
    activity_tail: float = 1.8,
    seed: int = 0,
    **extra,
) -> Dataset:
    cfg = SyntheticConfig(n_users, n_resources, n_topics, p_topic_click, q_topic_tag,
                          activity_tail, seed, **extra)
    return generate_from_config(cfg)


def generate_from_config(cfg: SyntheticConfig) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    T = cfg.n_topics

    res_topic = rng.permutation(np.arange(cfg.n_resources) % T)
    by_topic = [np.flatnonzero(res_topic == t) for t in range(T)]
    # within-topic popularity: Zipf-like weights over a random order
    weights = []
    for members in by_topic:
        rng.shuffle(members)
        w = 1.0 / np.arange(1, len(members) + 1) ** cfg.popularity_skew
        weights.append(w / w.sum())

    vocab = [[_word(rng, int(rng.integers(2, 5))) for _ in range(cfg.words_per_topic)] for _ in range(T)]
    tag_vocab = [[f"{_word(rng, 2)}{t}x{j}" for j in range(cfg.tags_per_topic)] for t in range(T)]

    resources = []
    for idx in range(cfg.n_resources):
        t = int(res_topic[idx])
        sentences = []
        for _ in range(int(rng.integers(1, 6))):
            n_words = int(rng.integers(3, 16))
            words = [
                vocab[t][int(rng.integers(cfg.words_per_topic))] if rng.random() < 0.7
                else _COMMON_WORDS[int(rng.integers(len(_COMMON_WORDS)))]
                for _ in range(n_words)
            ]
            sentences.append(" ".join(words).capitalize() + ".")
        title = " ".join(vocab[t][int(rng.integers(cfg.words_per_topic))] for _ in range(3)).title()
        resources.append(Resource(f"r{idx:05d}", title, " ".join(sentences), frozenset({f"topic-{t}"})))

    def pick_topic(own: int, fidelity: float) -> int:
        if T == 1 or rng.random() < fidelity:
            return own
        other = int(rng.integers(T - 1))
        return other if other < own else other + 1

    def pick_resource(topic: int) -> int:
        members = by_topic[topic]
        return int(members[rng.choice(len(members), p=weights[topic])])

    interactions: list[Interaction] = []
    tags: list[TagAssignment] = []
    for u in range(cfg.n_users):
        uid = f"u{u:06d}"
        own = int(rng.integers(T))
        n_clicks = _zipf(rng, cfg.activity_tail, cfg.max_activity)
        for _ in range(n_clicks):
            r = pick_resource(pick_topic(own, cfg.p_topic_click))
            ts = START_MS + int(rng.integers(SPAN_MS))
            interactions.append(Interaction(uid, f"r{r:05d}", ts))
        if rng.random() < cfg.tagger_fraction:
            for _ in range(_zipf(rng, cfg.tag_tail, cfg.max_tags)):
                topic = pick_topic(own, cfg.q_topic_tag)
                r = pick_resource(topic)
                tag = tag_vocab[topic][int(rng.integers(cfg.tags_per_topic))]
                ts = START_MS + int(rng.integers(SPAN_MS))
                tags.append(TagAssignment(uid, f"r{r:05d}", tag, ts))

    interactions.sort(key=lambda i: (i.timestamp, i.user_id, i.resource_id))
    tags.sort(key=lambda t: (t.timestamp, t.user_id, t.resource_id, t.tag))
    return Dataset(interactions, resources, tags)


def write_synthetic(directory: str | Path, cfg: SyntheticConfig) -> dict:
    """Generate a dataset and write it as a snapshot directory; returns the manifest."""
    dataset = generate_from_config(cfg)
    return write_snapshot(directory, dataset, extra={"generator": asdict(cfg)})
