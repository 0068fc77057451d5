"""Contraction, Laplacian minors and importance resampling.

TRIM samples a Steiner tree ``t`` with probability ∝ w(t) · det L_r(G_c),
where ``G_c`` is the chain with ``t`` merged into one supernode.  The helpers
here compute that determinant and turn sampler output into importance
weights for the target law ∝ ∏ p_uv.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .graph import GraphError, MarkovChain, ProbGraph, Tree, target_log_probability, tree_log_weight

MAX_MINOR_SIZE = 4096


@dataclass
class ContractedGraph:
    """Chain with a tree merged into supernode ``0``.

    ``members[i]`` is the original node behind contracted node ``i``
    (``None`` for the supernode).  ``edges[(i, j)] = (weight, label)`` where
    the label counts the original edges merged into ``(i, j)``.
    """

    members: list[int | None]
    edges: dict[tuple[int, int], tuple[float, int]] = field(default_factory=dict)

    SUPERNODE = 0

    @property
    def n(self) -> int:
        return len(self.members)

    def weighted_edges(self, use_labels: bool = False) -> list[tuple[int, int, float]]:
        k = 1 if use_labels else 0
        return [(i, j, float(val[k])) for (i, j), val in sorted(self.edges.items())]


def contract(chain: MarkovChain, t: Tree) -> ContractedGraph:
    inside = t.nodes
    outside = [u for u in range(chain.n) if u not in inside]
    index = {u: i + 1 for i, u in enumerate(outside)}
    for u in inside:
        index[u] = 0
    cg = ContractedGraph([None] + outside)
    acc: dict[tuple[int, int], list] = {}
    for u, v, q in chain.edges():
        i, j = index[u], index[v]
        if i == j:
            continue  # edge inside the supernode
        cell = acc.setdefault((i, j), [[], 0])
        cell[0].append(q)
        cell[1] += 1
    cg.edges = {key: (math.fsum(qs), k) for key, (qs, k) in acc.items()}
    return cg


def laplacian_minor_logdet(n_nodes: int, edges: Iterable[tuple[int, int, float]], root: int,
                           max_size: int = MAX_MINOR_SIZE) -> float:
    """Log of the total weight of spanning in-trees directed toward ``root``.

    Uses the out-degree Laplacian ``L = D_out - W`` with the root's row and
    column deleted (matrix-tree theorem for arborescences).  Returns ``-inf``
    when no in-tree exists; an empty minor has determinant 1.
    """
    if not 0 <= root < n_nodes:
        raise GraphError(f"root {root} is not a node")
    m = n_nodes - 1
    if m == 0:
        return 0.0
    if m > max_size:
        raise ValueError(f"Laplacian minor of size {m} exceeds the limit {max_size}")
    W = np.zeros((n_nodes, n_nodes))
    for u, v, q in edges:
        W[u, v] += q
    L = np.diag(W.sum(axis=1)) - W
    keep = np.r_[0:root, root + 1:n_nodes]
    sign, logdet = np.linalg.slogdet(L[np.ix_(keep, keep)])
    if sign <= 0:
        return -math.inf
    return float(logdet)


def trim_bias(chain: MarkovChain, t: Tree) -> float:
    """``log det L_r(G_c)`` for the contraction of ``t`` on ``chain``."""
    cg = contract(chain, t)
    return laplacian_minor_logdet(cg.n, cg.weighted_edges(), ContractedGraph.SUPERNODE)


@dataclass
class WeightedSample:
    tree: Tree
    log_proposal: float
    log_target: float

    @property
    def log_sir_weight(self) -> float:
        return self.log_target - self.log_proposal


def attach_target_weights(g: ProbGraph, chain: MarkovChain,
                          trees: Iterable[Tree]) -> list[WeightedSample]:
    """Importance weights for samples drawn ∝ w(T) (e.g. from LERW).

    The weight ``target/proposal`` reduces to ∏ p(u) over the non-root tree
    nodes, ``p(u)`` being the weighted in-degree.
    """
    return [WeightedSample(t, tree_log_weight(chain, t), target_log_probability(g, t))
            for t in trees]


def attach_trim_weights(g: ProbGraph, chain: MarkovChain, trees: Iterable[Tree],
                        biases: Iterable[float]) -> list[WeightedSample]:
    """Importance weights for TRIM samples, whose proposal is ∝ w(T) · det L_r(G_c)."""
    out = []
    for t, b in zip(trees, biases, strict=True):
        out.append(WeightedSample(t, tree_log_weight(chain, t) + b, target_log_probability(g, t)))
    return out


def attach_lerw_weights(g: ProbGraph, chain: MarkovChain, trees: Iterable[Tree]) -> list[WeightedSample]:
    """Importance weights for LERW samples using their actual law.

    Running the loop-erased walk from the terminals is the first phase of
    Wilson's spanning-tree sampler, so the Steiner tree it returns is the
    trimmed Wilson tree and follows the same law as TRIM:
    ∝ w(T) · det L_r(G_c).  The determinant is computed once per node set.
    """
    trees = list(trees)
    cache: dict[frozenset, float] = {}
    biases = []
    for t in trees:
        key = frozenset(t.parent)
        if key not in cache:
            cache[key] = trim_bias(chain, t)
        biases.append(cache[key])
    return attach_trim_weights(g, chain, trees, biases)


def normalized_weights(samples: Sequence[WeightedSample]) -> np.ndarray:
    logw = np.array([s.log_sir_weight for s in samples], dtype=float)
    if not len(logw):
        raise ValueError("no samples to weight")
    if np.any(np.isnan(logw)) or np.any(logw == np.inf):
        raise ValueError("importance weights must be finite")
    total = logsumexp(logw)
    if not np.isfinite(total):
        raise ValueError("all importance weights are zero")
    return np.exp(logw - total)


def sir_resample(samples: Sequence[WeightedSample], m: int, rng: np.random.Generator,
                 method: str = "multinomial") -> list[Tree]:
    """Draw ``m`` trees with replacement, probability ∝ exp(log_sir_weight)."""
    probs = normalized_weights(samples)
    if method == "multinomial":
        idx = rng.choice(len(samples), size=m, p=probs)
    elif method == "systematic":
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        positions = (rng.random() + np.arange(m)) / m
        idx = np.searchsorted(cdf, positions, side="right")
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    return [samples[i].tree for i in idx]
