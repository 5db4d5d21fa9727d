"""Top-k ranking metrics with binary relevance.

``recommended`` is any ordered sequence of resource ids (or a ``RankedList``);
``relevant`` is the set of held-out resource ids.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from socialrec.errors import ValidationError


def _ids(recommended) -> list[str]:
    if hasattr(recommended, "resource_ids"):
        return recommended.resource_ids()
    return list(recommended)


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValidationError("k must be a positive integer")


def hit_ranks(recommended, relevant: Iterable[str], k: int) -> list[int]:
    """1-based ranks within the top ``k`` that hold a relevant item."""
    _check_k(k)
    relevant = set(relevant)
    return [i for i, r in enumerate(_ids(recommended)[:k], 1) if r in relevant]


def recall_at_k(recommended, relevant, k: int) -> float:
    relevant = set(relevant)
    if not relevant:
        return 0.0
    return len(hit_ranks(recommended, relevant, k)) / len(relevant)


def precision_at_k(recommended, relevant, k: int) -> float:
    return len(hit_ranks(recommended, relevant, k)) / k


def f1_at_k(recommended, relevant, k: int) -> float:
    p = precision_at_k(recommended, relevant, k)
    r = recall_at_k(recommended, relevant, k)
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def mrr_at_k(recommended, relevant, k: int) -> float:
    """Reciprocal rank of the first hit; 0 when nothing relevant is in the top k."""
    hits = hit_ranks(recommended, relevant, k)
    return 1.0 / hits[0] if hits else 0.0


def map_at_k(recommended, relevant, k: int) -> float:
    """Average precision at the hit ranks, normalized by ``min(|relevant|, k)``."""
    relevant = set(relevant)
    hits = hit_ranks(recommended, relevant, k)
    if not hits:
        return 0.0
    total = sum(n / rank for n, rank in enumerate(hits, 1))
    return total / min(len(relevant), k)


def dcg(hits: Sequence[int]) -> float:
    return sum(1.0 / math.log2(rank + 1) for rank in hits)


def ndcg_at_k(recommended, relevant, k: int) -> float:
    relevant = set(relevant)
    hits = hit_ranks(recommended, relevant, k)
    if not hits:
        return 0.0
    ideal = dcg(range(1, min(len(relevant), k) + 1))
    return dcg(hits) / ideal


def coverage(per_user_lists) -> float:
    """Fraction of test users whose list is non-empty.

    Accepts a mapping user -> list or a sequence of lists (one per test user).
    """
    lists = list(per_user_lists.values()) if hasattr(per_user_lists, "values") else list(per_user_lists)
    if not lists:
        raise ValidationError("coverage needs at least one test user")
    return sum(1 for lst in lists if len(lst) > 0) / len(lists)


METRICS = {
    "recall": recall_at_k,
    "precision": precision_at_k,
    "f1": f1_at_k,
    "mrr": mrr_at_k,
    "map": map_at_k,
    "ndcg": ndcg_at_k,
}
