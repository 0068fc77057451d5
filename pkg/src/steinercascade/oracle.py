"""Exhaustive enumeration of in-trees and Steiner trees on tiny chains.

Ground truth for the samplers and determinant code; nothing here is used by
the samplers themselves.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .graph import MarkovChain, ProbGraph, Tree

MAX_NODES = 8


class EnumerationCapExceeded(ValueError):
    pass


@dataclass
class ExactDistribution:
    """Trees with unnormalized weights and normalized masses."""

    trees: list[Tree]
    weights: np.ndarray

    def __post_init__(self):
        if not self.trees:
            raise ValueError("empty support")
        self.weights = np.asarray(self.weights, dtype=float)
        self.total = math.fsum(self.weights)
        self.mass = self.weights / self.total
        self._index = {t.key(): i for i, t in enumerate(self.trees)}
        if len(self._index) != len(self.trees):
            raise ValueError("duplicate trees in support")

    @property
    def support(self) -> list[tuple]:
        return [t.key() for t in self.trees]

    def prob(self, key: Hashable) -> float:
        i = self._index.get(key)
        return 0.0 if i is None else float(self.mass[i])

    def as_dict(self) -> dict[Hashable, float]:
        return {t.key(): float(m) for t, m in zip(self.trees, self.mass)}

    def reweight(self, factors: Sequence[float]) -> "ExactDistribution":
        return ExactDistribution(self.trees, self.weights * np.asarray(factors, dtype=float))

    def sample(self, size: int, rng: np.random.Generator) -> list[Tree]:
        idx = rng.choice(len(self.trees), size=size, p=self.mass)
        return [self.trees[i] for i in idx]


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise EnumerationCapExceeded(f"{n} nodes exceeds the enumeration cap of {cap}")


def _in_trees(chain: MarkovChain, root: int, nodes: Sequence[int]) -> Iterator[tuple[dict, float]]:
    """All in-trees on ``nodes`` toward ``root`` using only edges inside ``nodes``."""
    allowed = set(nodes)
    order = [u for u in nodes if u != root]
    choices = [[(v, q) for v, q in zip(chain.succ[u], chain.probs[u]) if v in allowed]
               for u in order]
    parent: dict[int, int] = {}

    def closes_cycle(u: int) -> bool:
        v = parent[u]
        while v in parent:
            if v == u:
                return True
            v = parent[v]
        return False

    def rec(k: int, weight: float):
        if k == len(order):
            yield dict(parent), weight
            return
        u = order[k]
        for v, q in choices[k]:
            parent[u] = v
            if not closes_cycle(u):
                yield from rec(k + 1, weight * q)
            del parent[u]

    yield from rec(0, 1.0)


def enumerate_in_trees(chain: MarkovChain, root: int, cap: int = MAX_NODES) -> ExactDistribution:
    """Every spanning in-tree toward ``root``, weighted by w(T)."""
    _check_cap(chain.n, cap)
    trees, weights = [], []
    for parent, w in _in_trees(chain, root, range(chain.n)):
        trees.append(Tree(root, parent))
        weights.append(w)
    return ExactDistribution(trees, weights)


def enumerate_steiner_trees(chain: MarkovChain, root: int, terminals: Iterable[int],
                            cap: int = MAX_NODES) -> ExactDistribution:
    """Every Steiner tree rooted at ``root`` spanning ``terminals`` whose leaves are terminals.

    Enumerates candidate node sets, then in-trees on each induced subchain.
    """
    _check_cap(chain.n, cap)
    required = set(terminals) | {root}
    optional = [u for u in range(chain.n) if u not in required]
    trees, weights = [], []
    for k in range(len(optional) + 1):
        for extra in combinations(optional, k):
            nodes = sorted(required.union(extra))
            for parent, w in _in_trees(chain, root, nodes):
                inner = set(parent.values())
                if all(u in required or u in inner for u in parent):
                    trees.append(Tree(root, parent))
                    weights.append(w)
    return ExactDistribution(trees, weights)


def target_distribution(g: ProbGraph, steiner: ExactDistribution) -> ExactDistribution:
    """Same support, reweighted by ∏ p_uv over the root-outward edges."""
    weights = [math.prod(g.p(p, c) for c, p in t.parent.items()) for t in steiner.trees]
    return ExactDistribution(steiner.trees, weights)


def trim_distribution(chain: MarkovChain, root: int, terminals: Iterable[int],
                      cap: int = MAX_NODES) -> ExactDistribution:
    """Law of the trimmed Wilson tree, by summing spanning trees that contain each Steiner tree."""
    steiner = enumerate_steiner_trees(chain, root, terminals, cap)
    spanning = enumerate_in_trees(chain, root, cap)
    weights = [contained_weight(t, spanning) for t in steiner.trees]
    return ExactDistribution(steiner.trees, weights)


def contained_weight(t: Tree, spanning: ExactDistribution) -> float:
    """Σ w(T) over spanning trees ``T`` that contain ``t`` as a subgraph."""
    items = t.parent.items()
    return math.fsum(w for T, w in zip(spanning.trees, spanning.weights)
                     if all(T.parent.get(c) == p for c, p in items))


def exact_node_marginals(dist: ExactDistribution, n: int) -> np.ndarray:
    out = np.zeros(n)
    for t, m in zip(dist.trees, dist.mass):
        for u in t.nodes:
            out[u] += m
    return out


def empirical(trees: Iterable[Tree]) -> Counter:
    return Counter(t.key() for t in trees)


def tv_distance(counts: Mapping[Hashable, float],
                exact: ExactDistribution | Mapping[Hashable, float]) -> float:
    """Total-variation distance between empirical counts and a distribution.

    ``exact`` may also be another count mapping (two-sample comparison).
    Keys missing on either side count fully.
    """
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("empty sample")
    p_hat = {k: c / total for k, c in counts.items()}
    if isinstance(exact, ExactDistribution):
        p = exact.as_dict()
    else:
        z = sum(exact.values())
        p = {k: c / z for k, c in exact.items()}
    keys = set(p_hat) | set(p)
    return 0.5 * math.fsum(abs(p_hat.get(k, 0.0) - p.get(k, 0.0)) for k in keys)
