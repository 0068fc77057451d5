"""Cascade reconstruction: restrict, pick a root, sample trees, correct, estimate."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .bias import attach_lerw_weights, attach_target_weights, attach_trim_weights, normalized_weights, sir_resample
from .cascade import Observation
from .graph import GraphError, ProbGraph, Tree, build_chain, restrict_graph
from .sampling import DEFAULT_STEP_BUDGET, sample_trees

DAMPING = 0.85
PAGERANK_TOL = 1e-10


@dataclass
class ReconConfig:
    sampler: str = "lerw"            # lerw | trim
    n_samples: int = 1000
    resample: str = "sir"            # sir | none
    root_strategy: str = "min_dist"  # min_dist | pagerank | true_root | given
    root: int | None = None          # for "given" and "true_root"
    seed: int | None = 0
    estimator: str = "resampled"     # resampled | weighted
    lerw_weights: str = "determinant"  # determinant | degree
    resample_method: str = "multinomial"
    workers: int = 1
    budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.sampler not in ("lerw", "trim"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.resample not in ("sir", "none"):
            raise ValueError(f"unknown resample mode {self.resample!r}")
        if self.root_strategy not in ("min_dist", "pagerank", "true_root", "given"):
            raise ValueError(f"unknown root strategy {self.root_strategy!r}")
        if self.estimator not in ("resampled", "weighted"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.lerw_weights not in ("determinant", "degree"):
            raise ValueError(f"unknown LERW weighting {self.lerw_weights!r}")


@dataclass
class MarginalEstimate:
    """Infection probabilities for unobserved nodes and for directed edges.

    Edges are in infection direction ``(infector, infected)``; edges never
    used by a sampled tree are absent (probability 0).
    """

    node_prob: dict[int, float]
    edge_prob: dict[tuple[int, int], float] = field(default_factory=dict)
    root: int | None = None

    def node_csv(self, g: ProbGraph) -> str:
        lines = ["node,probability"]
        lines += [f"{g.labels[u]},{p!r}" for u, p in sorted(self.node_prob.items())]
        return "\n".join(lines) + "\n"

    def edge_csv(self, g: ProbGraph) -> str:
        """All edges of ``g`` in ``(src, dst)`` order, unused ones with 0."""
        lines = ["src,dst,probability"]
        for u, v, _ in g.edges():
            lines.append(f"{g.labels[u]},{g.labels[v]},{self.edge_prob.get((u, v), 0.0)!r}")
        return "\n".join(lines) + "\n"


def _neglog_matrix(g: ProbGraph) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for u, v, p in g.edges():
        rows.append(u)
        cols.append(v)
        vals.append(-math.log(p))
    return sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))


def root_min_dist(g: ProbGraph, terminals: Sequence[int]) -> int:
    """Node minimizing the summed ``-log p`` shortest-path distance to the terminals.

    Distances run from the candidate to each terminal along edge direction.
    Equal sums are broken by the smaller largest distance (the more central
    node), then by the smallest id.
    """
    terminals = list(terminals)
    if not terminals:
        raise GraphError("terminal set is empty")
    # distances from every node to x = distances from x on the transposed graph
    dist = dijkstra(_neglog_matrix(g).T.tocsr(), directed=True, indices=terminals)
    total = dist.sum(axis=0)
    if not np.isfinite(total).any():
        raise GraphError("no node reaches all terminals")
    tied = np.flatnonzero(np.isclose(total, total.min(), rtol=1e-12, atol=1e-12))
    return int(tied[np.argmin(dist[:, tied].max(axis=0))])


def personalized_pagerank(g: ProbGraph, personalization: Iterable[int], damping: float = DAMPING,
                          tol: float = PAGERANK_TOL, max_iter: int = 10_000) -> np.ndarray:
    """Power iteration on the walk that leaves ``u`` along ``(u, v)`` w.p. ∝ p_uv.

    Restarts go uniformly to the personalization nodes; mass at nodes without
    out-edges also restarts.
    """
    nodes = sorted(set(personalization))
    if not nodes:
        raise ValueError("personalization set is empty")
    s = np.zeros(g.n)
    s[nodes] = 1.0 / len(nodes)
    rows, cols, vals = [], [], []
    for u in range(g.n):
        total = math.fsum(g.out[u].values())
        for v, p in g.out[u].items():
            rows.append(v)
            cols.append(u)
            vals.append(p / total)
    PT = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    dangling = np.array([not g.out[u] for u in range(g.n)])
    x = s.copy()
    for _ in range(max_iter):
        nxt = damping * (PT @ x + x[dangling].sum() * s) + (1.0 - damping) * s
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    return x


def root_pagerank(g: ProbGraph, observed: Iterable[int], damping: float = DAMPING) -> int:
    scores = personalized_pagerank(g, observed, damping)
    return int(np.argmax(scores))  # first maximum = smallest id


def estimate_marginals(trees: Sequence[Tree], g: ProbGraph, obs: Observation,
                       weights: Sequence[float] | None = None) -> MarginalEstimate:
    """Fraction of sampled trees that contain each unobserved node / each edge.

    ``weights`` (normalized) turns the plain average into a weighted one.
    """
    if not trees:
        raise ValueError("no trees")
    roots = {t.root for t in trees}
    if len(roots) != 1:
        raise ValueError("trees do not share a root")
    if weights is None:
        weights = np.full(len(trees), 1.0 / len(trees))
    node_mass: Counter = Counter()
    edge_mass: Counter = Counter()
    for t, w in zip(trees, weights):
        node_mass[t.root] += w
        for c, p in t.parent.items():
            node_mass[c] += w
            edge_mass[p, c] += w
    observed = set(obs.infected) | set(obs.uninfected)
    clip = lambda x: min(1.0, max(0.0, float(x)))
    node_prob = {u: clip(node_mass.get(u, 0.0)) for u in range(g.n) if u not in observed}
    edge_prob = {e: clip(m) for e, m in edge_mass.items()}
    return MarginalEstimate(node_prob, edge_prob, roots.pop())


def _select_root(h: ProbGraph, terminals, cfg: ReconConfig, root_in_h):
    if cfg.root_strategy == "min_dist":
        return root_min_dist(h, terminals)
    if cfg.root_strategy == "pagerank":
        return root_pagerank(h, terminals)
    if root_in_h is None:
        raise GraphError(f"root strategy {cfg.root_strategy!r} needs a root node")
    return root_in_h


def reconstruct(g: ProbGraph, obs: Observation, cfg: ReconConfig | None = None,
                true_root: int | None = None) -> MarginalEstimate:
    """Estimate ``Pr[y_u = 1 | O]`` for every unobserved node of ``g``.

    Uninfected observations are removed from the graph, and sampling runs on
    the connected component holding the observed infections; nodes outside
    it get probability 0.  ``true_root`` is used by ``root_strategy="true_root"``.
    """
    cfg = cfg or ReconConfig()
    if not obs.infected:
        raise GraphError("no observed infections")
    root = cfg.root if cfg.root_strategy == "given" else true_root
    if cfg.root_strategy in ("given", "true_root") and root is not None and root in obs.uninfected:
        raise GraphError("root was observed uninfected")

    h, old_ids = restrict_graph(g, obs.uninfected, obs.infected)
    new_id = {u: i for i, u in enumerate(old_ids)}
    terminals = [new_id[u] for u in obs.infected]
    comp = next(c for c in h.components() if terminals[0] in c)
    comp_set = set(comp)
    if any(x not in comp_set for x in terminals):
        raise GraphError("observed infections are disconnected once uninfected nodes are removed")
    if root is not None and new_id.get(root) not in comp_set:
        raise GraphError("root cannot reach the observed infections")
    if len(comp) < h.n:
        h, sub_ids = restrict_graph(h, [u for u in range(h.n) if u not in comp_set])
        old_ids = [old_ids[i] for i in sub_ids]
        new_id = {u: i for i, u in enumerate(old_ids)}
        terminals = [new_id[u] for u in obs.infected]

    r = _select_root(h, terminals, cfg, None if root is None else new_id[root])
    chain = build_chain(h)
    ss = np.random.SeedSequence(cfg.seed)
    sample_rng, resample_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    trees, biases = sample_trees(chain, r, terminals, cfg.n_samples, sample_rng,
                                 cfg.sampler, cfg.workers, cfg.budget)

    weights = None
    if cfg.resample == "sir":
        if cfg.sampler == "trim":
            samples = attach_trim_weights(h, chain, trees, biases)
        elif cfg.lerw_weights == "determinant":
            samples = attach_lerw_weights(h, chain, trees)
        else:
            # treats LERW output as ∝ w(T); only exact when det L_r(G_c) is constant
            samples = attach_target_weights(h, chain, trees)
        if cfg.estimator == "weighted":
            weights = normalized_weights(samples)
        else:
            trees = sir_resample(samples, cfg.n_samples, resample_rng, cfg.resample_method)

    trees = [t.relabel(old_ids) for t in trees]
    return estimate_marginals(trees, g, obs, weights)
