from __future__ import annotations

import pytest

from socialrec.dataio import Dataset
from socialrec.store import Interaction, Resource, Store, TagAssignment


def clicks(*triples) -> list[Interaction]:
    """``clicks(("u1", "r1", 1), ...)`` -> interactions."""
    return [Interaction(u, r, t) for u, r, t in triples]


def make_store(interactions=(), resources=(), tags=()) -> Store:
    store = Store()
    store.add_resources(resources)
    store.add_interactions(interactions)
    store.add_tag_assignments(tags)
    return store


@pytest.fixture
def toy_dataset() -> Dataset:
    """7 clicks by 3 users on 4 resources, with text and a few tags."""
    interactions = clicks(
        ("u1", "r1", 1), ("u1", "r2", 2), ("u1", "r3", 9),
        ("u2", "r1", 3), ("u2", "r2", 4),
        ("u3", "r4", 5), ("u3", "r1", 6),
    )
    resources = [
        Resource("r1", "Algebra lineal", "Matrices y vectores. Sistemas de ecuaciones.", frozenset({"matematicas"})),
        Resource("r2", "Geometria", "Triangulos y circulos en el plano.", frozenset({"matematicas"})),
        Resource("r3", "Algebra avanzada", "Espacios vectoriales, transformaciones lineales y valores propios.",
                 frozenset({"matematicas"})),
        Resource("r4", "Historia", "La revolucion francesa.", frozenset({"historia"})),
    ]
    tags = [
        TagAssignment("u1", "r1", "algebra", 1),
        TagAssignment("u2", "r2", "algebra", 4),
        TagAssignment("u3", "r4", "historia", 5),
    ]
    return Dataset(interactions, resources, tags)


@pytest.fixture
def toy_store(toy_dataset) -> Store:
    return toy_dataset.to_store()


# -- acceptance verdicts ------------------------------------------------------

ACCEPTANCE_TITLES = {
    1: "metric oracle suite",
    2: "brute-force CF equivalence",
    3: "directional CF_t vs CF_i vs MP comparison",
    4: "split protocol invariants",
    5: "ingestion fidelity",
    6: "service latency, visibility and soak",
    7: "profile hot-swap",
    8: "deterministic evaluation reports",
}
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def record_verdict(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[criterion] = (ok, detail)
    print(_verdict_line(criterion))


def _verdict_line(criterion: int) -> str:
    title = ACCEPTANCE_TITLES[criterion]
    if criterion not in ACCEPTANCE_RESULTS:
        return f"[NOT RUN] {criterion}. {title}"
    ok, detail = ACCEPTANCE_RESULTS[criterion]
    return f"[{'PASS' if ok else 'FAIL'}] {criterion}. {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in ACCEPTANCE_TITLES:
        terminalreporter.write_line(_verdict_line(criterion))
