import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from repeater_alloc.ilp import EQ, GE, LE, IlpModel
from repeater_alloc.network import load_network
from repeater_alloc.requirements import load_requirements

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def data_dir():
    return DATA


def load(name):
    return load_network(DATA / name)


@pytest.fixture
def toy_req():
    return load_requirements(DATA / "toy_requirements.json")


def random_ilp(rng: np.random.Generator, n_vars: int, n_rows: int) -> IlpModel:
    """Small random binary ILP with mixed senses, integer data and a few fixings."""
    m = IlpModel("random")
    for i in range(n_vars):
        m.add_var(f"v{i}")
    for r in range(n_rows):
        k = int(rng.integers(1, min(n_vars, 5) + 1))
        idx = rng.choice(n_vars, size=k, replace=False)
        coef = rng.integers(-3, 4, size=k)
        coef[coef == 0] = 1
        sense = [LE, GE, EQ][int(rng.choice(3, p=[0.6, 0.25, 0.15]))]
        rhs = int(rng.integers(-1, 4))
        m.add_constraint(f"r{r}", list(zip(idx.tolist(), coef.tolist())), sense, rhs)
    m.set_objective({i: int(c) for i, c in enumerate(rng.integers(-4, 6, size=n_vars))})
    if rng.random() < 0.3:
        m.fix(int(rng.integers(n_vars)), int(rng.integers(2)))
    return m


def small_network_doc(rng: np.random.Generator, n_nodes: int, n_ends: int, p_edge: float = 0.6) -> dict:
    """Random connected-ish weighted graph; lengths are integers so ties occur."""
    ids = [f"v{i}" for i in range(n_nodes)]
    nodes = [{"id": v, "type": "end" if i < n_ends else "repeater"} for i, v in enumerate(ids)]
    fibers = []
    for i in range(1, n_nodes):
        j = int(rng.integers(i))
        fibers.append({"a": ids[j], "b": ids[i], "length_km": float(rng.integers(1, 5))})
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < p_edge * 0.5:
                fibers.append({"a": ids[i], "b": ids[j], "length_km": float(rng.integers(1, 5))})
    return {"nodes": nodes, "fibers": fibers}


def read_json(path):
    return json.loads(Path(path).read_text())


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
