"""Offline evaluation: train on the split, recommend for every test user, score."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from socialrec.dataio import Dataset
from socialrec.engine import Engine, RankedList
from socialrec.errors import ValidationError
from socialrec.evaluator import metrics
from socialrec.evaluator.split import SplitResult, chronological_split
from socialrec.profiles import ALGORITHM_LABELS, Algorithm, ProfileRegistry
from socialrec.store import Resource, Store

# metric name -> cutoff, in report column order
DEFAULT_K_SETTINGS = {"recall": 20, "precision": 1, "f1": 10, "mrr": 20, "map": 20, "ndcg": 20}

_HEADINGS = {"recall": "R", "precision": "P", "f1": "F1", "mrr": "MRR", "map": "MAP", "ndcg": "nDCG"}

ALIASES = {
    "mp": Algorithm.POPULAR,
    "popular": Algorithm.POPULAR,
    "cf_i": Algorithm.CF_INTERACTIONS,
    "cfi": Algorithm.CF_INTERACTIONS,
    "cf_t": Algorithm.CF_TAGS,
    "cft": Algorithm.CF_TAGS,
    "cbf": Algorithm.CONTENT,
}


def parse_algorithm(name: str | Algorithm) -> Algorithm:
    if isinstance(name, Algorithm):
        return name
    key = name.strip().lower()
    if key in ALIASES:
        return ALIASES[key]
    try:
        return Algorithm(key)
    except ValueError:
        raise ValidationError(f"unknown algorithm {name!r}") from None


@dataclass
class ReportRow:
    algorithm_id: Algorithm
    metrics: dict[str, float]
    coverage: float
    n_test_users: int
    n_covered: int

    @property
    def label(self) -> str:
        return ALGORITHM_LABELS[self.algorithm_id]

    def __getattr__(self, name: str) -> float:
        # recall_at_20, ndcg_at_20, ... resolve against the metric dict
        m = self.__dict__.get("metrics", {})
        if name in m:
            return m[name]
        raise AttributeError(name)


@dataclass
class EvaluationReport:
    rows: list[ReportRow]
    k_settings: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_K_SETTINGS))

    def row(self, algorithm: str | Algorithm) -> ReportRow:
        algorithm = parse_algorithm(algorithm)
        for r in self.rows:
            if r.algorithm_id is algorithm:
                return r
        raise KeyError(algorithm.value)

    def metric_columns(self) -> list[str]:
        return [f"{name}_at_{k}" for name, k in self.k_settings.items()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm_id", "approach", *self.metric_columns(), "coverage", "n_test_users"])
        for r in self.rows:
            w.writerow([r.algorithm_id.value, r.label,
                        *(f"{r.metrics[c]:.4f}" for c in self.metric_columns()),
                        f"{r.coverage:.4f}", r.n_test_users])
        return buf.getvalue()

    def to_table(self) -> str:
        heads = ["Approach", *(f"{_HEADINGS.get(n, n)}@{k}" for n, k in self.k_settings.items()), "C"]
        body = [[r.label, *(f"{r.metrics[c]:.4f}" for c in self.metric_columns()),
                 f"{100 * r.coverage:.1f}%"] for r in self.rows]
        widths = [max(len(row[i]) for row in [heads, *body]) for i in range(len(heads))]
        lines = []
        for row in [heads, *body]:
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "k_settings": dict(self.k_settings),
            "rows": [
                {"algorithm_id": r.algorithm_id.value, "approach": r.label, **r.metrics,
                 "coverage": r.coverage, "n_test_users": r.n_test_users, "n_covered": r.n_covered}
                for r in self.rows
            ],
            "csv": self.to_csv(),
            "table": self.to_table(),
        }


def build_train_store(split: SplitResult, resources: Iterable[Resource] = ()) -> Store:
    store = Store()
    store.add_resources(resources)
    store.add_interactions(split.train)
    store.add_tag_assignments(split.train_tags)
    return store


def _last_train_item(store: Store, user: str) -> str | None:
    history = store.get_user_history(user)
    return history[-1].resource_id if history else None


def recommend_for(engine: Engine, algorithm: Algorithm, user: str, k: int) -> RankedList | list:
    """One offline request. UC5/UC6 use the user's latest training click as context."""
    if algorithm in (Algorithm.SIMILAR, Algorithm.CONTEXTUAL):
        context = _last_train_item(engine.store, user)
        if context is None:
            return []
        if algorithm is Algorithm.SIMILAR:
            lst = engine.similar_resources(context, k)
            seen = engine.store.user_items(user)
            return [r for r in lst.resource_ids() if r not in seen]
        return engine.recommend_contextual(user, context, k)
    if algorithm is Algorithm.GOAL:
        return engine.recommend_goal(user, "harder", k)
    return engine.recommend(algorithm, user=user, k=k)


def evaluate(
    algorithms: Sequence[str | Algorithm],
    split: SplitResult,
    k_settings: dict[str, int] | None = None,
    *,
    resources: Iterable[Resource] = (),
    profiles: ProfileRegistry | None = None,
) -> EvaluationReport:
    """Score each algorithm over all test users of ``split``.

    Users that get an empty list score 0 on every accuracy metric and count
    against coverage. Rows come out in use-case order.
    """
    k_settings = dict(DEFAULT_K_SETTINGS if k_settings is None else k_settings)
    for name, k in k_settings.items():
        if name not in metrics.METRICS:
            raise ValidationError(f"unknown metric {name!r}")
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ValidationError(f"cutoff for {name} must be a positive integer")
    chosen = sorted({parse_algorithm(a) for a in algorithms}, key=lambda a: int(a.value[2:]))
    if not chosen:
        raise ValidationError("no algorithms requested")
    if not split.test_users:
        raise ValidationError("split has no test users")

    store = build_train_store(split, resources)
    engine = Engine(store, profiles if profiles is not None else ProfileRegistry())
    depth = max(k_settings.values())
    columns = [f"{name}_at_{k}" for name, k in k_settings.items()]

    rows = []
    for algorithm in chosen:
        per_metric: dict[str, list[float]] = {c: [] for c in columns}
        lists = []
        for user in split.test_users:
            ids = recommend_for(engine, algorithm, user, depth)
            ids = ids.resource_ids() if isinstance(ids, RankedList) else list(ids)
            lists.append(ids)
            relevant = split.test[user]
            for (name, k), col in zip(k_settings.items(), columns):
                per_metric[col].append(metrics.METRICS[name](ids, relevant, k))
        n = len(split.test_users)
        covered = sum(1 for lst in lists if lst)
        rows.append(ReportRow(
            algorithm_id=algorithm,
            # fsum is exactly rounded, so the mean does not depend on user order
            metrics={c: math.fsum(v) / n for c, v in per_metric.items()},
            coverage=metrics.coverage(lists),
            n_test_users=n,
            n_covered=covered,
        ))
    return EvaluationReport(rows, k_settings)


def evaluate_dataset(
    dataset: Dataset,
    algorithms: Sequence[str | Algorithm],
    test_fraction: float = 0.2,
    k_settings: dict[str, int] | None = None,
    profiles: ProfileRegistry | None = None,
) -> EvaluationReport:
    """Split a dataset chronologically and evaluate on it (shared by CLI and service)."""
    split = chronological_split(dataset.interactions, test_fraction, dataset.tags)
    return evaluate(algorithms, split, k_settings, resources=dataset.resources, profiles=profiles)
