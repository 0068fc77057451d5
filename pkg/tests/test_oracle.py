
import pytest

from steinercascade.checks import benchmark_instances, oracle_report
from steinercascade.graph import Tree, build_chain, complete_graph
from steinercascade.oracle import (EnumerationCapExceeded, ExactDistribution, empirical,
                                   enumerate_in_trees, enumerate_steiner_trees, tv_distance)

A, B, C, D = range(4)


def test_in_trees_of_g3(g3_chain):
    dist = enumerate_in_trees(g3_chain, A)
    assert [t for t in dist.trees] == [Tree(A, {B: A, C: B})]
    assert dist.total == pytest.approx(2 / 3)


def test_in_trees_of_complete_graphs():
    three = enumerate_in_trees(build_chain(complete_graph(3)), 0)
    assert len(three.trees) == 3 and three.mass == pytest.approx([1 / 3] * 3)
    assert len(enumerate_in_trees(build_chain(complete_graph(2)), 1).trees) == 1
    assert len(enumerate_in_trees(build_chain(complete_graph(5)), 0).trees) == 5 ** 3


def test_steiner_trees_small(g3_chain, square):
    assert enumerate_steiner_trees(g3_chain, A, [C]).trees == [Tree(A, {C: B, B: A})]
    assert len(enumerate_steiner_trees(build_chain(square), A, [C]).trees) == 2


def test_all_terminals_gives_spanning_trees():
    chain = build_chain(benchmark_instances()["bowtie"][0])
    a = enumerate_steiner_trees(chain, 0, range(chain.n))
    b = enumerate_in_trees(chain, 0)
    assert a.as_dict() == pytest.approx(b.as_dict())


def test_steiner_trees_are_unions_of_paths():
    for g, r, X in benchmark_instances().values():
        chain = build_chain(g)
        for t in enumerate_steiner_trees(chain, r, X).trees:
            t.validate()
            assert t.leaves() - {r} <= set(X)
            assert set(X) <= t.nodes


def test_enumeration_cap_is_a_hard_error():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_in_trees(build_chain(complete_graph(9)), 0)


def test_tv_distance_extremes():
    dist = ExactDistribution([Tree(0, {1: 0}), Tree(0, {2: 0})], [1.0, 3.0])
    assert tv_distance({Tree(0, {1: 0}).key(): 1, Tree(0, {2: 0}).key(): 3}, dist) == pytest.approx(0.0)
    assert tv_distance({"x": 5}, dist) == 1.0
    assert tv_distance({"x": 1}, {"y": 2}) == 1.0
    with pytest.raises(ValueError):
        tv_distance({}, dist)


def test_exact_sampling_calibration(rng):
    chain = build_chain(benchmark_instances()["heptagon"][0])
    dist = enumerate_steiner_trees(chain, 1, [4, 6, 1])
    assert tv_distance(empirical(dist.sample(100_000, rng)), dist) < 0.01


def test_oracle_report_small_run():
    report = oracle_report(samples=2000, seed=1)
    names = [row["instance"] for row in report["instances"]]
    assert names == list(benchmark_instances())
    for row in report["instances"]:
        assert row["matrix_tree_max_rel_err"] < 1e-9
        assert row["tv"]["trim"] <= row["tv_bound"]["trim"]
        assert row["tv"]["sir_trim"] <= row["tv_bound"]["sir_trim"]
