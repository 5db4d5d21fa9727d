"""Naive reference implementations used as test oracles.

These walk every user and every resource explicitly and never touch the
store's secondary indices.
"""

from __future__ import annotations

import math
from collections import Counter


def distinct_items(interactions):
    items = {}
    for u, r, _ in interactions:
        items.setdefault(u, set()).add(r)
    return items


def tag_vectors(tag_rows):
    vecs = {}
    for u, _, t in tag_rows:
        vecs.setdefault(u, Counter())[t] += 1
    return vecs


def sim_interactions(items, u, v):
    iu, iv = items.get(u, set()), items.get(v, set())
    if not iu or not iv:
        return 0.0
    return len(iu & iv) / math.sqrt(len(iu) * len(iv))


def sim_tags(vecs, u, v):
    tu, tv = vecs.get(u, Counter()), vecs.get(v, Counter())
    if not tu or not tv:
        return 0.0
    dot = sum(tu[t] * tv[t] for t in tu)
    return dot / math.sqrt(sum(c * c for c in tu.values()) * sum(c * c for c in tv.values()))


def cf_reference(interactions, tag_rows, u, n, k, signal="interactions", context=None):
    """O(U^2 R) user-based CF: returns [(resource_id, score)] best first."""
    items = distinct_items(interactions)
    popularity = Counter(r for _, r, _ in interactions)
    vecs = tag_vectors(tag_rows)
    users = sorted(set(items) | set(vecs))
    if signal == "interactions" and not items.get(u):
        return []
    if signal == "tags" and not vecs.get(u):
        return []
    sims = []
    for v in users:
        if v == u:
            continue
        if context is not None and context not in items.get(v, set()):
            continue
        s = sim_interactions(items, u, v) if signal == "interactions" else sim_tags(vecs, u, v)
        if s > 0:
            sims.append((v, s))
    sims.sort(key=lambda vs: (-vs[1], vs[0]))
    hood = sims[:n]
    exclude = set(items.get(u, set()))
    if context is not None:
        exclude.add(context)
    all_resources = sorted(popularity)
    scores = {}
    for r in all_resources:
        if r in exclude:
            continue
        total = 0.0
        for v, s in hood:
            if r in items.get(v, set()):
                total += s
        if total > 0:
            scores[r] = total
    ranked = sorted(scores.items(), key=lambda rs: (-rs[1], -popularity[rs[0]], rs[0]))
    return ranked[:k]


def random_instance(rng, max_users=50, max_resources=100):
    """A random click/tag log as plain tuples."""
    n_users = rng.randint(2, max_users)
    n_res = rng.randint(2, max_resources)
    interactions = []
    for _ in range(rng.randint(1, 4 * n_users)):
        interactions.append((f"u{rng.randrange(n_users)}", f"r{rng.randrange(n_res)}", rng.randrange(1000)))
    tag_rows = []
    vocab = [f"t{i}" for i in range(rng.randint(1, 12))]
    for _ in range(rng.randint(0, 2 * n_users)):
        tag_rows.append((f"u{rng.randrange(n_users)}", f"r{rng.randrange(n_res)}", rng.choice(vocab)))
    return interactions, tag_rows


# naive metric definitions, written from the textbook formulas

def ref_recall(ranked, relevant, k):
    return len([r for r in ranked[:k] if r in relevant]) / len(relevant) if relevant else 0.0


def ref_precision(ranked, relevant, k):
    return len([r for r in ranked[:k] if r in relevant]) / k


def ref_f1(ranked, relevant, k):
    p, r = ref_precision(ranked, relevant, k), ref_recall(ranked, relevant, k)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def ref_mrr(ranked, relevant, k):
    for i, r in enumerate(ranked[:k]):
        if r in relevant:
            return 1.0 / (i + 1)
    return 0.0


def ref_map(ranked, relevant, k):
    if not relevant:
        return 0.0
    total, hits = 0.0, 0
    for i, r in enumerate(ranked[:k]):
        if r in relevant:
            hits += 1
            total += hits / (i + 1)
    return total / min(len(relevant), k)


def ref_ndcg(ranked, relevant, k):
    if not relevant:
        return 0.0
    dcg = sum(1 / math.log2(i + 2) for i, r in enumerate(ranked[:k]) if r in relevant)
    idcg = sum(1 / math.log2(i + 2) for i in range(min(len(relevant), k)))
    return dcg / idcg


def ref_coverage(lists):
    return sum(1 for lst in lists if lst) / len(lists)


def check_split_invariants(interactions, result, fraction):
    """Partition, ceil rule and per-user temporal ordering."""
    latest = {}
    for seq, i in enumerate(interactions):
        key = (i.user_id, i.resource_id)
        if key not in latest or (i.timestamp, seq) >= latest[key]:
            latest[key] = (i.timestamp, seq)
    all_pairs = set(latest)
    train_pairs, test_pairs = result.train_pairs(), result.test_pairs()
    assert train_pairs | test_pairs == all_pairs
    assert not train_pairs & test_pairs
    per_user = Counter(u for u, _ in all_pairs)
    assert result.test_users == sorted(per_user)
    for u, m in per_user.items():
        # ceil with a small slack so 0.2 * 15 counts as exactly 3
        assert len(result.test[u]) == math.ceil(fraction * m - 1e-9) >= 1
        test_times = [latest[(u, r)] for r in result.test[u]]
        train_times = [latest[(u, r)] for (v, r) in train_pairs if v == u]
        if train_times:
            assert min(test_times) >= max(train_times)
    # every training event belongs to a train pair and none is dropped
    assert Counter((i.user_id, i.resource_id) for i in result.train) == Counter(
        (i.user_id, i.resource_id) for i in interactions if (i.user_id, i.resource_id) in train_pairs
    )
