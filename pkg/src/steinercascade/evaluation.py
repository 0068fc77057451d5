"""Baselines, average precision, and the seeded experiment sweep."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .cascade import (DEFAULT_BETA, CascadeDiedOut, Observation, assign_constant_probs,
                      assign_uniform_probs, observe, random_source, simulate_ic, simulate_si)
from .graph import GraphError, ProbGraph, Tree, restrict_graph
from .inference import (ReconConfig, _neglog_matrix, personalized_pagerank, reconstruct,
                        root_min_dist)

log = logging.getLogger(__name__)

METHODS = ("tree-true-root", "tree-min-dist", "tree-pagerank", "pagerank", "min-steiner-tree")
RESULT_COLUMNS = ("graph", "model", "cascade_fraction", "obs_fraction", "method", "level", "rep", "ap")


def pagerank_baseline(g: ProbGraph, obs: Observation, damping: float = 0.85) -> dict[int, float]:
    """Personalized PageRank scores of the unobserved nodes.

    Uninfected observations are dropped from the graph first; the restart
    vector is uniform over the observed infections.
    """
    h, old_ids = restrict_graph(g, obs.uninfected, obs.infected)
    new_id = {u: i for i, u in enumerate(old_ids)}
    scores = personalized_pagerank(h, [new_id[u] for u in obs.infected], damping)
    observed = set(obs.infected)
    return {old_ids[i]: float(s) for i, s in enumerate(scores) if old_ids[i] not in observed}


def min_steiner_tree(g: ProbGraph, terminals: Sequence[int], root: int | None = None) -> Tree:
    """Shortest-path heuristic for the minimum ``-log p`` Steiner tree.

    Starts from ``root`` (default: :func:`root_min_dist`) and repeatedly
    attaches the terminal whose shortest path from the current tree is
    cheapest.  Edges follow infection direction, so the result is rooted.
    """
    terminals = list(dict.fromkeys(terminals))
    if not terminals:
        raise GraphError("terminal set is empty")
    if root is None:
        root = root_min_dist(g, terminals)
    W = _neglog_matrix(g)
    parent: dict[int, int] = {}
    in_tree = {root}
    remaining = [x for x in terminals if x not in in_tree]
    while remaining:
        dist, pred, _ = dijkstra(W, directed=True, indices=sorted(in_tree),
                                 return_predecessors=True, min_only=True)
        best = min(remaining, key=lambda x: (dist[x], x))
        if not np.isfinite(dist[best]):
            raise GraphError(f"terminal {g.labels[best]} is unreachable from the tree")
        u = best
        while u not in in_tree:
            p = int(pred[u])
            parent[u] = p
            in_tree.add(u)
            u = p
        remaining = [x for x in remaining if x not in in_tree]
    return Tree(root, parent)


def steiner_predictions(g: ProbGraph, obs: Observation, root: int | None = None):
    """Binary node and edge scores from :func:`min_steiner_tree` on the restricted graph."""
    h, old_ids = restrict_graph(g, obs.uninfected, obs.infected)
    new_id = {u: i for i, u in enumerate(old_ids)}
    r = None if root is None else new_id[root]
    t = min_steiner_tree(h, [new_id[u] for u in obs.infected], r).relabel(old_ids)
    observed = set(obs.infected) | set(obs.uninfected)
    nodes = t.nodes
    node_scores = {u: float(u in nodes) for u in range(g.n) if u not in observed}
    edge_scores = {e: 1.0 for e in t.graph_edges()}
    return t, node_scores, edge_scores


def average_precision(scores: Mapping[Hashable, float], truth: Iterable[Hashable]) -> float:
    """``sum_n (R_n - R_{n-1}) P_n`` over the score-descending ranking.

    Equal scores are ranked by ascending candidate id.  Positives outside
    ``scores`` are ignored.
    """
    truth = set(truth)
    ranked = sorted(scores, key=lambda k: (-scores[k], k))
    n_pos = sum(1 for k in ranked if k in truth)
    if n_pos == 0:
        raise ValueError("no positive candidates")
    # exact rational sum, rounded once
    hits = 0
    total = Fraction(0)
    for n, k in enumerate(ranked, 1):
        if k in truth:
            hits += 1
            total += Fraction(hits, n)
    return float(total / n_pos)


@dataclass
class ExperimentSpec:
    """One sweep: every (cascade fraction, obs fraction) pair, ``reps`` times."""

    graph: ProbGraph
    graph_name: str = "graph"
    model: str = "si"                     # si | ic
    beta: float = DEFAULT_BETA
    cascade_fractions: Sequence[float] = (0.1,)
    obs_fractions: Sequence[float] = (0.5,)
    methods: Sequence[str] = METHODS
    reps: int = 1
    n_samples: int = 1000
    sampler: str = "lerw"
    resample: str = "sir"
    lerw_weights: str = "determinant"
    seed: int = 0
    workers: int = 1


def _edge_scores_all(g: ProbGraph, scores: Mapping[tuple[int, int], float]) -> dict:
    return {(u, v): scores.get((u, v), 0.0) for u, v, _ in g.edges()}


def run_single(spec: ExperimentSpec, cf: float, of: float, rep: int,
               seed: np.random.SeedSequence) -> list[dict]:
    """Simulate, observe and score every method once; returns result rows."""
    sim_ss, obs_ss, method_ss = seed.spawn(3)
    sim_rng = np.random.default_rng(sim_ss)
    g = spec.graph
    if spec.model == "si":
        g_run = assign_constant_probs(g, spec.beta)
        source = random_source(g_run, sim_rng)
        cascade = simulate_si(g_run, spec.beta, source, cf, sim_rng)
    elif spec.model == "ic":
        g_run = assign_uniform_probs(g, sim_rng)
        source = random_source(g_run, sim_rng)
        cascade = simulate_ic(g_run, source, cf, sim_rng)
    else:
        raise ValueError(f"unknown model {spec.model!r}")
    obs = observe(cascade, of, np.random.default_rng(obs_ss))
    truth_nodes = cascade.infected - set(obs.infected)
    truth_edges = set(cascade.edges())

    base = dict(graph=spec.graph_name, model=spec.model, cascade_fraction=cf, obs_fraction=of, rep=rep)
    rows = []

    def emit(method, level, scores, truth):
        try:
            ap = average_precision(scores, truth)
        except ValueError:
            return
        rows.append(dict(base, method=method, level=level, ap=ap))

    method_seeds = dict(zip(METHODS, method_ss.generate_state(len(METHODS))))
    for method in spec.methods:
        if method.startswith("tree-"):
            strategy = {"tree-true-root": "true_root", "tree-min-dist": "min_dist",
                        "tree-pagerank": "pagerank"}[method]
            cfg = ReconConfig(sampler=spec.sampler, n_samples=spec.n_samples, resample=spec.resample,
                              lerw_weights=spec.lerw_weights, root_strategy=strategy,
                              seed=int(method_seeds[method]))
            est = reconstruct(g_run, obs, cfg, true_root=cascade.source)
            emit(method, "node", est.node_prob, truth_nodes)
            emit(method, "edge", _edge_scores_all(g_run, est.edge_prob), truth_edges)
        elif method == "pagerank":
            emit(method, "node", pagerank_baseline(g_run, obs), truth_nodes)
        elif method == "min-steiner-tree":
            _, node_scores, edge_scores = steiner_predictions(g_run, obs)
            emit(method, "node", node_scores, truth_nodes)
            emit(method, "edge", _edge_scores_all(g_run, edge_scores), truth_edges)
        else:
            raise ValueError(f"unknown method {method!r}")
    return rows


def _run_job(args):
    spec, cf, of, rep, seed = args
    try:
        return run_single(spec, cf, of, rep, seed), None
    except (CascadeDiedOut, GraphError) as exc:
        return [], f"cf={cf} of={of} rep={rep}: {exc}"


@dataclass
class ExperimentResult:
    rows: list[dict]
    failures: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def aggregate(self) -> list[dict]:
        groups: dict[tuple, list[float]] = {}
        for row in self.rows:
            key = tuple(row[k] for k in ("graph", "model", "cascade_fraction", "obs_fraction",
                                         "method", "level"))
            groups.setdefault(key, []).append(row["ap"])
        out = []
        for key, aps in groups.items():
            a = np.asarray(aps)
            stderr = float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
            out.append(dict(zip(("graph", "model", "cascade_fraction", "obs_fraction", "method",
                                 "level"), key), n=len(a), mean=float(a.mean()), stderr=stderr))
        return out

    def aggregate_csv(self) -> str:
        buf = io.StringIO()
        cols = ("graph", "model", "cascade_fraction", "obs_fraction", "method", "level",
                "n", "mean", "stderr")
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.aggregate():
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def mean_ap(self, method: str, level: str = "node") -> float:
        aps = [r["ap"] for r in self.rows if r["method"] == method and r["level"] == level]
        return float(np.mean(aps)) if aps else math.nan


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the whole grid; rows are ordered by (grid point, rep, method, level).

    Each (grid point, rep) gets its own child of ``SeedSequence(spec.seed)``,
    so results do not depend on ``workers``.  Died-out cascades and
    unreachable terminals are logged and reported in ``failures``.
    """
    grid = list(product(spec.cascade_fractions, spec.obs_fractions, range(spec.reps)))
    seeds = np.random.SeedSequence(spec.seed).spawn(len(grid))
    jobs = [(spec, cf, of, rep, s) for (cf, of, rep), s in zip(grid, seeds)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    rows, failures = [], []
    for r, err in results:
        rows += r
        if err:
            log.warning("excluded run %s", err)
            failures.append(err)
    return ExperimentResult(rows, failures)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    d = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
    d.pop("graph")
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}
