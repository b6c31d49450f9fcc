import itertools

import numpy as np
import pytest

from seqopt.objectives import EvaluationLedger
from seqopt.pareto import dominates
from seqopt.space import DesignSpace, VariableSpec


def make_space(*cards, tags=None):
    tags = tags or [("geometry", "architecture")] * len(cards)
    return DesignSpace(tuple(
        VariableSpec(f"x{k}", tuple(f"o{j}" for j in range(m)), *tags[k]) for k, m in enumerate(cards)
    ))


def brute_front(space, backend):
    """O(n^2) reference Pareto set of the whole space: {vector: objectives}."""
    items = [(v, backend(v)) for v in itertools.product(*(range(m) for m in space.cardinalities))]
    return {v: y for v, y in items if not any(dominates(z, y) for _, z in items)}


@pytest.fixture
def small_space():
    return make_space(3, 2, 4, tags=[
        ("geometry", "architecture"), ("hvac", "engineering"), ("controls", "engineering"),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ledger_for():
    return EvaluationLedger


# acceptance criteria register here; the summary prints one line per criterion
ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.append((name, ok, detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
