import math

import numpy as np
import pytest

from steinercascade.graph import ProbGraph, build_chain, load_graph

G3_TEXT = "a b 0.2\nb a 0.4\nb c 0.5\nc b 0.1\n"
SQUARE_TEXT = "a b 0.5\nb a 0.5\nb c 0.5\nc b 0.5\nc d 0.5\nd c 0.5\nd a 0.5\na d 0.5\n"


@pytest.fixture
def g3():
    return load_graph(G3_TEXT)


@pytest.fixture
def g3_chain(g3):
    return build_chain(g3)


@pytest.fixture
def square():
    return load_graph(SQUARE_TEXT)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_connected_graph(rng: np.random.Generator, n: int, extra: float = 0.4) -> ProbGraph:
    """Random spanning tree plus extra undirected pairs, each direction with its own p."""
    pairs = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        pairs.add((u, v))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                pairs.add((u, v))
    edges = []
    for u, v in sorted(pairs):
        edges.append((u, v, float(rng.uniform(0.05, 1.0))))
        edges.append((v, u, float(rng.uniform(0.05, 1.0))))
    return ProbGraph(n, edges)


def close(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-300)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def report(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
