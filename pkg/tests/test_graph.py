import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steinercascade.graph import (GraphError, ProbGraph, Tree, build_chain, complete_graph,
                                  cycle_graph, from_undirected, grid_graph, load_graph,
                                  path_graph, restrict_graph, serialize_graph,
                                  target_log_probability, tree_log_weight)
from steinercascade.sampling import random_tree_with_root

from conftest import random_connected_graph


def test_g3_parses_to_three_nodes(g3):
    assert g3.n == 3
    assert g3.labels == ["a", "b", "c"]
    assert g3.labeled_edges() == {("a", "b", 0.2), ("b", "a", 0.4), ("b", "c", 0.5), ("c", "b", 0.1)}


def test_comments_and_blank_lines_are_ignored():
    g = load_graph("# header\n\na b 0.2\n  b   a 0.4  \n")
    assert g.n == 2 and g.n_edges == 2


@pytest.mark.parametrize("text, message", [
    ("a b 0.2\n", "missing reciprocal edge"),
    ("a b 1.5\nb a 0.5\n", r"outside \(0, 1\]"),
    ("a b 0\nb a 0.5\n", r"outside \(0, 1\]"),
    ("a a 0.5\n", "self-loop"),
    ("a b 0.5\nb a 0.5\na b 0.3\n", "duplicate"),
    ("a b\n", "expected"),
    ("a b x\nb a 0.5\n", "bad probability"),
])
def test_malformed_graphs_are_rejected(text, message):
    with pytest.raises(GraphError, match=message):
        load_graph(text)


def test_serialization_round_trips(g3):
    assert load_graph(serialize_graph(g3)) == g3


def test_restrict_removes_uninfected(g3):
    h, old = restrict_graph(g3, [g3.index("c")])
    assert old == [0, 1]
    assert h.labeled_edges() == {("a", "b", 0.2), ("b", "a", 0.4)}


def test_restrict_with_nothing_removed_is_identity(g3):
    h, old = restrict_graph(g3, [])
    assert h == g3 and old == [0, 1, 2]


def test_restrict_everything_is_an_error(g3):
    with pytest.raises(GraphError, match="empty"):
        restrict_graph(g3, [0, 1, 2])


def test_restrict_rejects_uninfected_terminal(g3):
    with pytest.raises(GraphError, match="terminals"):
        restrict_graph(g3, [2], terminals=[2])


def test_g3_chain_weights(g3_chain):
    a, b, c = 0, 1, 2
    assert g3_chain.weight(a, b) == pytest.approx(1.0, abs=1e-15)
    assert g3_chain.weight(b, a) == pytest.approx(2 / 3, abs=1e-15)
    assert g3_chain.weight(b, c) == pytest.approx(1 / 3, abs=1e-15)
    assert g3_chain.weight(c, b) == pytest.approx(1.0, abs=1e-15)
    assert [math.exp(x) for x in g3_chain.log_norm] == pytest.approx([0.4, 0.3, 0.5])


def test_two_node_chain_weights_are_one():
    chain = build_chain(load_graph("a b 0.13\nb a 0.77\n"))
    assert chain.weight(0, 1) == 1.0 and chain.weight(1, 0) == 1.0


def test_missing_chain_edge_raises(g3_chain):
    with pytest.raises(GraphError):
        g3_chain.weight(0, 2)


def test_chain_rows_are_stochastic(rng):
    for _ in range(20):
        chain = build_chain(random_connected_graph(rng, int(rng.integers(2, 9))))
        for u in range(chain.n):
            assert math.fsum(chain.w[u].values()) == pytest.approx(1.0, abs=1e-12)


def test_tree_log_weight_g3(g3_chain):
    t = Tree(0, {2: 1, 1: 0})
    assert tree_log_weight(g3_chain, t) == pytest.approx(math.log(2 / 3), abs=1e-15)
    assert tree_log_weight(g3_chain, Tree(0)) == 0.0
    with pytest.raises(GraphError):
        tree_log_weight(g3_chain, Tree(0, {2: 0}))


def test_target_log_probability_g3(g3):
    t = Tree(0, {2: 1, 1: 0})
    assert sorted(t.graph_edges()) == [(0, 1), (1, 2)]
    assert target_log_probability(g3, t) == pytest.approx(math.log(0.1), abs=1e-15)
    assert target_log_probability(g3, Tree(1)) == 0.0


def test_tree_rejects_cycles():
    with pytest.raises(GraphError):
        Tree(0, {1: 2, 2: 1}).validate()


def test_tree_key_is_order_independent():
    assert Tree(0, {1: 0, 2: 1}) == Tree(0, {2: 1, 1: 0})
    assert len({Tree(0, {1: 0, 2: 1}), Tree(0, {2: 1, 1: 0})}) == 1


def test_generators_have_expected_shapes():
    g = grid_graph(32, 32)
    assert g.n == 1024 and g.n_edges == 2 * 2 * 32 * 31
    assert path_graph(5).n_edges == 8
    assert cycle_graph(5).n_edges == 10
    assert complete_graph(4).n_edges == 12
    u = from_undirected("x y\ny z 0.3\nx y\nz z\n", p=0.7)
    assert u.labeled_edges() == {("x", "y", 0.7), ("y", "x", 0.7), ("y", "z", 0.3), ("z", "y", 0.3)}


def test_components():
    g = ProbGraph(5, [(0, 1, .5), (1, 0, .5), (3, 4, .5), (4, 3, .5)])
    assert sorted(map(sorted, g.components())) == [[0, 1], [2], [3, 4]]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_weight_identity_on_random_trees(seed, n):
    # log prod p_uv = log w(T) + sum_{u != r} log p(u)
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n)
    chain = build_chain(g)
    r = int(rng.integers(n))
    t = random_tree_with_root(chain, r, rng)
    rhs = tree_log_weight(chain, t) + math.fsum(chain.log_norm[u] for u in t.parent)
    assert target_log_probability(g, t) == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_restrict_then_chain_matches_chain_of_induced_graph(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, 7, extra=0.8)
    removed = [int(u) for u in rng.choice(7, size=2, replace=False)]
    h, old = restrict_graph(g, removed)
    if any(not h.inn[u] for u in range(h.n)):
        return
    chain = build_chain(h)
    for u in range(h.n):
        preds = {v: g.p(old[v], old[u]) for v in h.inn[u]}
        z = sum(preds.values())
        for v, p in preds.items():
            assert chain.weight(u, v) == pytest.approx(p / z, rel=1e-12)
