"""Random-walk samplers for spanning and Steiner in-trees.

All samplers walk on a :class:`~steinercascade.graph.MarkovChain` and take a
``numpy.random.Generator``.  Uniform variates are drawn from the generator in
blocks, so a fixed seed gives a fixed sequence of trees.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .graph import GraphError, MarkovChain, Tree

DEFAULT_STEP_BUDGET = 10**9


class StepBudgetExceeded(RuntimeError):
    """A walk ran longer than its step budget (reducible chain or bad input)."""


def uniform_stream(rng: np.random.Generator, block: int = 4096) -> Iterator[float]:
    while True:
        yield from rng.random(block).tolist()


def random_successor(chain: MarkovChain, u: int, rng: np.random.Generator) -> int:
    """Draw ``v`` with probability ``w(u, v)``."""
    if not chain.succ[u]:
        raise GraphError(f"node {u} has no successors")
    return chain.step(u, rng.random())


def _successor_fn(chain: MarkovChain, uniforms: Iterator[float]) -> Callable[[int], int]:
    succ, cum = chain.succ, chain.cum
    step = chain.step
    draw = uniforms.__next__

    def successor(u: int) -> int:
        c = cum[u]
        if len(c) == 1:
            draw()
            return succ[u][0]
        x = draw()
        if len(c) > 8:
            return step(u, x)
        i = 0
        while c[i] <= x:
            i += 1
        return succ[u][i]

    return successor


def loop_erased_tree(n: int, root: int, starts: Iterable[int],
                     successor: Callable[[int], int],
                     budget: int = DEFAULT_STEP_BUDGET) -> Tree:
    """Attach each start node to the growing tree by a loop-erased walk.

    ``successor(u)`` supplies the next state of the walk.  Revisiting a node
    overwrites its pending successor, which erases the loop in place.
    """
    nxt = [-1] * n
    in_tree = [False] * n
    in_tree[root] = True
    steps = 0
    for start in starts:
        u = start
        while not in_tree[u]:
            v = successor(u)
            nxt[u] = v
            u = v
            steps += 1
            if steps > budget:
                raise StepBudgetExceeded(
                    f"walk from node {start} exceeded {budget} steps without reaching the tree")
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return Tree(root, {u: nxt[u] for u in range(n) if in_tree[u] and u != root})


def _check_nodes(chain: MarkovChain, root: int, terminals: Sequence[int]) -> None:
    for u in (root, *terminals):
        if not 0 <= u < chain.n:
            raise GraphError(f"node {u} is not in the chain")


def lerw_steiner(chain: MarkovChain, root: int, terminals: Sequence[int],
                 rng: np.random.Generator, budget: int = DEFAULT_STEP_BUDGET,
                 _uniforms: Iterator[float] | None = None) -> Tree:
    """Steiner tree rooted at ``root`` spanning ``terminals`` by loop-erased walks.

    Terminals are processed in the given order; the root may itself be a
    terminal.  The walks are the opening phase of Wilson's algorithm, so the
    result has the law of a trimmed uniform-weight spanning tree,
    ∝ w(T) · det L_r(G_c), and not w(T) alone unless the determinant is
    constant over the support (e.g. a single terminal on a cycle).
    """
    terminals = list(terminals)
    if not terminals:
        raise GraphError("terminal set is empty")
    _check_nodes(chain, root, terminals)
    uniforms = _uniforms if _uniforms is not None else uniform_stream(rng)
    return loop_erased_tree(chain.n, root, terminals, _successor_fn(chain, uniforms), budget)


def random_tree_with_root(chain: MarkovChain, root: int, rng: np.random.Generator,
                          budget: int = DEFAULT_STEP_BUDGET,
                          _uniforms: Iterator[float] | None = None) -> Tree:
    """Wilson's sampler: spanning in-tree toward ``root`` with probability ∝ w(T)."""
    _check_nodes(chain, root, ())
    uniforms = _uniforms if _uniforms is not None else uniform_stream(rng)
    return loop_erased_tree(chain.n, root, range(chain.n), _successor_fn(chain, uniforms), budget)


def trim_tree(spanning: Tree, root: int, terminals: Iterable[int]) -> Tree:
    """Keep only the union of the paths from each terminal to the root."""
    if spanning.root != root:
        raise GraphError(f"tree is rooted at {spanning.root}, not {root}")
    parent = spanning.parent
    kept: dict[int, int] = {}
    for x in terminals:
        u = x
        while u != root and u not in kept:
            if u not in parent:
                raise GraphError(f"terminal {x} is not in the spanning tree")
            kept[u] = parent[u]
            u = parent[u]
    return Tree(root, kept)


def trim_steiner(chain: MarkovChain, root: int, terminals: Sequence[int],
                 rng: np.random.Generator, budget: int = DEFAULT_STEP_BUDGET,
                 _uniforms: Iterator[float] | None = None,
                 _bias_cache: dict | None = None) -> tuple[Tree, float]:
    """Sample a spanning tree and trim it to the terminals.

    Returns the Steiner tree and its log bias ``log det L_r(G_c)``; the tree
    alone is distributed ∝ w(T) · det L_r(G_c).
    """
    from .bias import trim_bias

    terminals = list(terminals)
    if not terminals:
        raise GraphError("terminal set is empty")
    _check_nodes(chain, root, terminals)
    spanning = random_tree_with_root(chain, root, rng, budget, _uniforms)
    t = trim_tree(spanning, root, terminals)
    if _bias_cache is None:
        return t, trim_bias(chain, t)
    # the bias only depends on the node set of t
    key = frozenset(t.parent)
    if key not in _bias_cache:
        _bias_cache[key] = trim_bias(chain, t)
    return t, _bias_cache[key]


class StackOracle:
    """Lazily materialized successor stacks ``S_u = [S_u1, S_u2, ...]``.

    Each entry is an independent draw from the chain's transition law.
    ``top(u)`` peeks, ``pop(u)`` discards the top.
    """

    def __init__(self, chain: MarkovChain, rng: np.random.Generator):
        self.chain = chain
        self._uniforms = uniform_stream(rng, 256)
        self.stacks: list[list[int]] = [[] for _ in range(chain.n)]
        self.depth = [0] * chain.n

    def entry(self, u: int, i: int) -> int:
        stack = self.stacks[u]
        while len(stack) <= i:
            stack.append(self.chain.step(u, next(self._uniforms)))
        return stack[i]

    def top(self, u: int) -> int:
        return self.entry(u, self.depth[u])

    def pop(self, u: int) -> None:
        self.depth[u] += 1


def cycle_popping_steiner(chain: MarkovChain, root: int, terminals: Sequence[int],
                          rng: np.random.Generator | None = None,
                          budget: int = DEFAULT_STEP_BUDGET,
                          stacks: StackOracle | None = None) -> Tree:
    """Reference sampler: pop stack-graph cycles until the terminals reach the root.

    A cycle counts as soon as it is reachable from a terminal along the
    stack graph; otherwise that terminal could never reach the root.  Used to
    cross-check :func:`lerw_steiner`.
    """
    terminals = list(terminals)
    if not terminals:
        raise GraphError("terminal set is empty")
    _check_nodes(chain, root, terminals)
    if stacks is None:
        if rng is None:
            raise ValueError("either rng or stacks is required")
        stacks = StackOracle(chain, rng)
    pops = 0
    while True:
        cycle = None
        for x in terminals:
            seen: dict[int, int] = {}
            u = x
            while u != root and u not in seen:
                seen[u] = len(seen)
                u = stacks.top(u)
            if u != root:
                order = list(seen)
                cycle = order[seen[u]:]
                break
        if cycle is None:
            break
        for u in cycle:
            stacks.pop(u)
        pops += len(cycle)
        if pops > budget:
            raise StepBudgetExceeded(f"cycle popping exceeded {budget} pops")
    parent: dict[int, int] = {}
    for x in terminals:
        u = x
        while u != root and u not in parent:
            parent[u] = stacks.top(u)
            u = parent[u]
    return Tree(root, parent)


def _sample_chunk(chain, root, terminals, count, rng, sampler, budget):
    uniforms = uniform_stream(rng)
    trees, biases = [], []
    if sampler == "lerw":
        for _ in range(count):
            trees.append(lerw_steiner(chain, root, terminals, rng, budget, uniforms))
        return trees, None
    if sampler == "trim":
        cache: dict = {}
        for _ in range(count):
            t, b = trim_steiner(chain, root, terminals, rng, budget, uniforms, cache)
            trees.append(t)
            biases.append(b)
        return trees, biases
    if sampler == "cycle-popping":
        for _ in range(count):
            trees.append(cycle_popping_steiner(chain, root, terminals, rng, budget))
        return trees, None
    raise ValueError(f"unknown sampler {sampler!r}")


def sample_trees(chain: MarkovChain, root: int, terminals: Sequence[int], n_samples: int,
                 rng: np.random.Generator, sampler: str = "lerw", workers: int = 1,
                 budget: int = DEFAULT_STEP_BUDGET) -> tuple[list[Tree], list[float] | None]:
    """Draw ``n_samples`` Steiner trees.

    Returns the trees and, for ``sampler="trim"``, the per-tree log biases.
    With ``workers > 1`` the count is split into contiguous chunks, chunk
    ``i`` drawing from ``rng.spawn(workers)[i]``; results are concatenated in
    chunk order, so output depends on ``workers`` but not on scheduling.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    terminals = list(terminals)
    if workers <= 1:
        return _sample_chunk(chain, root, terminals, n_samples, rng, sampler, budget)
    counts = [n_samples // workers + (i < n_samples % workers) for i in range(workers)]
    streams = rng.spawn(workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_sample_chunk, [chain] * workers, [root] * workers,
                              [terminals] * workers, counts, streams,
                              [sampler] * workers, [budget] * workers))
    trees = [t for part, _ in parts for t in part]
    if sampler == "trim":
        return trees, [b for _, bs in parts for b in bs]
    return trees, None
