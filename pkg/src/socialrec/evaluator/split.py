"""Per-user chronological train/test split."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from socialrec.errors import ValidationError
from socialrec.store import Interaction, TagAssignment


@dataclass
class SplitResult:
    train: list[Interaction]
    test: dict[str, set[str]]
    test_users: list[str]
    # earliest held-out timestamp per test user; later tags are not trained on
    cutoff: dict[str, int] = field(default_factory=dict)
    train_tags: list[TagAssignment] = field(default_factory=list)

    def train_pairs(self) -> set[tuple[str, str]]:
        return {(i.user_id, i.resource_id) for i in self.train}

    def test_pairs(self) -> set[tuple[str, str]]:
        return {(u, r) for u, items in self.test.items() for r in items}


def n_test_items(m: int, test_fraction: float) -> int:
    # round() guards against 0.2 * 15 == 3.0000000000000004 pushing ceil up
    return math.ceil(round(test_fraction * m, 9))


def chronological_split(
    interactions: Iterable[Interaction],
    test_fraction: float = 0.2,
    tags: Iterable[TagAssignment] = (),
) -> SplitResult:
    """Hold out the most recent ``ceil(fraction * m)`` distinct resources of each user.

    Repeated clicks on the same resource collapse to their latest occurrence
    before the split. Train keeps every click event of a train pair (so
    popularity still counts repeats); earlier clicks of a held-out pair are
    dropped. Tag assignments are kept for training only when they precede
    the user's first held-out click.
    """
    if isinstance(test_fraction, bool) or not isinstance(test_fraction, (int, float)) \
            or not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must lie strictly between 0 and 1")

    events: dict[str, list[tuple[int, int, Interaction]]] = defaultdict(list)
    for seq, i in enumerate(interactions):
        events[i.user_id].append((i.timestamp, seq, i))

    train: list[tuple[int, Interaction]] = []
    test: dict[str, set[str]] = {}
    cutoff: dict[str, int] = {}
    for user in sorted(events):
        latest: dict[str, tuple[int, int]] = {}
        for ts, seq, i in events[user]:
            if i.resource_id not in latest or (ts, seq) >= latest[i.resource_id]:
                latest[i.resource_id] = (ts, seq)
        ordered = sorted(latest, key=lambda r: latest[r])
        n_test = n_test_items(len(ordered), test_fraction)
        held_out = ordered[len(ordered) - n_test:]
        test[user] = set(held_out)
        cutoff[user] = latest[held_out[0]][0]
        for ts, seq, i in events[user]:
            if i.resource_id not in test[user]:
                train.append((seq, i))

    train.sort(key=lambda x: x[0])
    train_tags = [t for t in tags if t.user_id not in cutoff or t.timestamp < cutoff[t.user_id]]
    return SplitResult(
        train=[i for _, i in train],
        test=test,
        test_users=sorted(test),
        cutoff=cutoff,
        train_tags=train_tags,
    )
