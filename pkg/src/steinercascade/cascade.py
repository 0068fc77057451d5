"""Ground-truth cascades (SI and IC) and partial observations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import GraphError, ProbGraph, Tree

PROB_FLOOR = 1e-9
DEFAULT_BETA = 0.1
DEFAULT_RETRIES = 100
DEFAULT_MAX_ROUNDS = 10_000


class CascadeDiedOut(RuntimeError):
    """No attempt reached the requested cascade size within the retry cap."""


@dataclass
class Cascade:
    source: int
    tree: Tree  # chain orientation: parent[child] = infector

    @property
    def infected(self) -> set[int]:
        return self.tree.nodes

    def edges(self) -> list[tuple[int, int]]:
        """Infection edges ``(infector, infected)``."""
        return self.tree.graph_edges()


@dataclass
class Observation:
    infected: list[int]
    uninfected: list[int] = field(default_factory=list)

    def __post_init__(self):
        if set(self.infected) & set(self.uninfected):
            raise ValueError("a node cannot be observed both infected and uninfected")

    @property
    def states(self) -> dict[int, int]:
        out = {u: 1 for u in self.infected}
        out.update({u: 0 for u in self.uninfected})
        return out


def assign_uniform_probs(g: ProbGraph, rng: np.random.Generator,
                         floor: float = PROB_FLOOR) -> ProbGraph:
    """Independent ``p ~ U(floor, 1]`` on every directed edge, in ``(u, v)`` order."""
    edges = list(g.edges())
    draws = 1.0 - rng.random(len(edges))  # (0, 1]
    draws = np.maximum(draws, floor)
    return g.with_probabilities({(u, v): float(p) for (u, v, _), p in zip(edges, draws)})


def assign_constant_probs(g: ProbGraph, beta: float) -> ProbGraph:
    if not 0 < beta <= 1:
        raise GraphError(f"beta={beta} is outside (0, 1]")
    return g.with_probabilities({(u, v): beta for u, v, _ in g.edges()})


def _target_size(n: int, target_fraction: float) -> int:
    if not 0 < target_fraction <= 1:
        raise ValueError(f"target fraction {target_fraction} is outside (0, 1]")
    return max(1, math.ceil(target_fraction * n - 1e-9))


def _attempt(g, source, target, rng, beta, max_rounds):
    """One round-synchronous run; ``beta=None`` means IC with edge probabilities."""
    parent: dict[int, int] = {}
    infected = {source}
    active = [source]  # IC: nodes that still get their single attempt
    for _ in range(max_rounds):
        if len(infected) >= target:
            break
        spreaders = sorted(infected) if beta is not None else active
        candidates: dict[int, list[int]] = {}
        for u in spreaders:
            nbrs = [v for v in sorted(g.out[u]) if v not in infected]
            if not nbrs:
                continue
            if beta is None:
                probs = np.fromiter((g.out[u][v] for v in nbrs), float, len(nbrs))
            else:
                probs = beta
            hits = rng.random(len(nbrs)) < probs
            for v, hit in zip(nbrs, hits):
                if hit:
                    candidates.setdefault(v, []).append(u)
        if beta is not None and not candidates:
            # SI stalls only if nothing is left to infect (or beta == 0)
            if beta == 0 or not any(v not in infected for u in infected for v in g.out[u]):
                return None
            continue
        new = sorted(candidates)
        for v in new:
            infectors = candidates[v]
            parent[v] = infectors[int(rng.integers(len(infectors)))] if len(infectors) > 1 else infectors[0]
            infected.add(v)
        if beta is None:
            if not new:
                return None
            active = new
    if len(infected) < target:
        return None
    return Cascade(source, Tree(source, parent))


def _simulate(g, beta, source, target_fraction, rng, retries, max_rounds):
    if not 0 <= source < g.n:
        raise GraphError(f"source {source} is not a node")
    target = _target_size(g.n, target_fraction)
    for _ in range(retries):
        c = _attempt(g, source, target, rng, beta, max_rounds)
        if c is not None:
            return c
    raise CascadeDiedOut(
        f"no cascade from node {g.labels[source]} reached {target} nodes in {retries} attempts")


def simulate_si(g: ProbGraph, beta: float, source: int, target_fraction: float,
                rng: np.random.Generator, retries: int = DEFAULT_RETRIES,
                max_rounds: int = DEFAULT_MAX_ROUNDS) -> Cascade:
    """Discrete-time SI cascade with per-contact infection probability ``beta``.

    Every infected node tries each susceptible out-neighbour in every round.
    A node hit by several infectors in one round keeps one, chosen uniformly.
    The run stops after the first round that reaches ``target_fraction`` of
    the nodes (overshoot kept).
    """
    if not 0 <= beta <= 1:
        raise ValueError(f"beta={beta} is outside [0, 1]")
    return _simulate(g, float(beta), source, target_fraction, rng, retries, max_rounds)


def simulate_ic(g: ProbGraph, source: int, target_fraction: float, rng: np.random.Generator,
                retries: int = DEFAULT_RETRIES, max_rounds: int = DEFAULT_MAX_ROUNDS) -> Cascade:
    """Independent-cascade run using the edge probabilities of ``g``.

    Each newly infected node gets one attempt per susceptible out-neighbour.
    Same stopping and retry rules as :func:`simulate_si`.
    """
    return _simulate(g, None, source, target_fraction, rng, retries, max_rounds)


def observe(c: Cascade, obs_fraction: float, rng: np.random.Generator, n_nodes: int | None = None,
            uninfected_fraction: float = 0.0) -> Observation:
    """Reveal ``round(obs_fraction * |infected|)`` infected nodes (at least one).

    With ``uninfected_fraction > 0`` (needs ``n_nodes``) a uniform subset of
    the healthy nodes is revealed as well.
    """
    if not 0 < obs_fraction <= 1:
        raise ValueError(f"observation fraction {obs_fraction} is outside (0, 1]")
    infected = sorted(c.infected)
    if not infected:
        raise ValueError("cascade has no infected nodes")
    k = max(1, int(math.floor(obs_fraction * len(infected) + 0.5)))
    seen = sorted(int(u) for u in rng.choice(infected, size=k, replace=False))
    healthy_seen: list[int] = []
    if uninfected_fraction > 0:
        if n_nodes is None:
            raise ValueError("n_nodes is required to observe uninfected nodes")
        healthy = [u for u in range(n_nodes) if u not in c.infected]
        m = int(math.floor(uninfected_fraction * len(healthy) + 0.5))
        if m:
            healthy_seen = sorted(int(u) for u in rng.choice(healthy, size=m, replace=False))
    return Observation(seen, healthy_seen)


def record(g: ProbGraph, c: Cascade, obs: Observation | None = None) -> dict:
    """JSON-ready record keyed by node labels."""
    lab = g.labels
    rec = {
        "source": lab[c.source],
        "infected": [lab[u] for u in sorted(c.infected)],
        "tree_edges": [[lab[p], lab[v]] for p, v in c.edges()],
    }
    if obs is not None:
        rec["observed_infected"] = [lab[u] for u in obs.infected]
        rec["observed_uninfected"] = [lab[u] for u in obs.uninfected]
    return rec


def dump_record(rec: dict) -> str:
    return json.dumps(rec, indent=1, sort_keys=True) + "\n"


def parse_record(g: ProbGraph, rec: dict) -> tuple[Cascade | None, Observation | None]:
    """Inverse of :func:`record`; either part may be absent."""
    cascade = None
    if "source" in rec:
        src = g.index(rec["source"])
        parent = {g.index(v): g.index(p) for p, v in rec.get("tree_edges", [])}
        cascade = Cascade(src, Tree(src, parent))
        if {g.labels[u] for u in cascade.infected} != set(map(str, rec.get("infected", []))):
            raise ValueError("infected list does not match tree edges")
    obs = None
    if "observed_infected" in rec:
        obs = Observation([g.index(u) for u in rec["observed_infected"]],
                          [g.index(u) for u in rec.get("observed_uninfected", [])])
    return cascade, obs


def random_source(g: ProbGraph, rng: np.random.Generator, nodes: Sequence[int] | None = None) -> int:
    pool = range(g.n) if nodes is None else nodes
    return int(pool[int(rng.integers(len(pool)))])
