"""Probabilistic contact graphs, their Markov chains, and rooted trees.

A :class:`ProbGraph` is a reciprocal directed graph whose edges carry
transmission probabilities ``p[u][v]``.  Samplers never walk on it directly:
:func:`build_chain` transposes the edges and normalizes each node's weighted
in-degree so that the walk is row-stochastic.

Trees are always stored in chain orientation, i.e. every non-root node points
to its parent (``parent[u]``), so following parents leads to the root.  The
infection runs the other way, from parent to child.
"""
from __future__ import annotations

import io
import math
from bisect import bisect_right
from itertools import accumulate
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

STOCHASTIC_TOL = 1e-12


class GraphError(ValueError):
    """Raised for malformed graphs and invalid graph operations."""


class ProbGraph:
    """Reciprocal directed graph with per-edge probabilities in (0, 1].

    Nodes are dense integer ids ``0..n-1``; ``labels[i]`` keeps the external
    name of node ``i``.  Instances are treated as immutable.
    """

    __slots__ = ("n", "out", "inn", "labels", "_index")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, float]],
                 labels: Sequence[str] | None = None):
        self.n = n
        self.out: list[dict[int, float]] = [{} for _ in range(n)]
        self.inn: list[dict[int, float]] = [{} for _ in range(n)]
        for u, v, p in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0.0 < p <= 1.0) or math.isnan(p):
                raise GraphError(f"probability {p} of edge ({u}, {v}) is outside (0, 1]")
            if v in self.out[u]:
                raise GraphError(f"duplicate directed edge ({u}, {v})")
            self.out[u][v] = float(p)
            self.inn[v][u] = float(p)
        self.labels = [str(i) for i in range(n)] if labels is None else [str(x) for x in labels]
        if len(self.labels) != n:
            raise GraphError("label map does not match node count")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise GraphError("duplicate node labels")
        for u in range(n):
            for v in self.out[u]:
                if u not in self.out[v]:
                    raise GraphError(
                        f"missing reciprocal edge ({self.labels[v]}, {self.labels[u]})")

    def p(self, u: int, v: int) -> float:
        return self.out[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.out[u]

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Directed edges sorted by ``(u, v)``."""
        for u in range(self.n):
            for v in sorted(self.out[u]):
                yield u, v, self.out[u][v]

    @property
    def n_edges(self) -> int:
        return sum(len(d) for d in self.out)

    def index(self, label: str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise GraphError(f"unknown node {label!r}") from None

    def labeled_edges(self) -> set[tuple[str, str, float]]:
        lab = self.labels
        return {(lab[u], lab[v], p) for u, v, p in self.edges()}

    def with_probabilities(self, probs: Mapping[tuple[int, int], float]) -> "ProbGraph":
        """Copy of the graph with new edge probabilities (same edge set)."""
        return ProbGraph(self.n, ((u, v, probs[u, v]) for u, v, _ in self.edges()), self.labels)

    def components(self) -> list[list[int]]:
        """Connected components (weak = strong, since edges are reciprocal)."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.out[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def __eq__(self, other):
        if not isinstance(other, ProbGraph):
            return NotImplemented
        return self.labels == other.labels and list(self.edges()) == list(other.edges())

    def __repr__(self):
        return f"ProbGraph(n={self.n}, edges={self.n_edges})"


def load_graph(stream: TextIO | str) -> ProbGraph:
    """Parse a ``u<TAB>v<TAB>p`` edge list.

    Any run of whitespace separates fields.  Lines starting with ``#`` and
    blank lines are skipped.  Node ids follow order of first appearance.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    index: dict[str, int] = {}
    labels: list[str] = []
    edges = []
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise GraphError(f"line {lineno}: expected 'u v p', got {line!r}")
        try:
            p = float(fields[2])
        except ValueError:
            raise GraphError(f"line {lineno}: bad probability {fields[2]!r}") from None
        ids = []
        for lab in fields[:2]:
            if lab not in index:
                index[lab] = len(labels)
                labels.append(lab)
            ids.append(index[lab])
        edges.append((ids[0], ids[1], p))
    return ProbGraph(len(labels), edges, labels)


def serialize_graph(g: ProbGraph) -> str:
    lab = g.labels
    return "".join(f"{lab[u]}\t{lab[v]}\t{p!r}\n" for u, v, p in g.edges())


def restrict_graph(g: ProbGraph, uninfected: Iterable[int],
                   terminals: Iterable[int] = ()) -> tuple[ProbGraph, list[int]]:
    """Induced subgraph on ``V \\ uninfected``.

    Returns the restricted graph and ``old_ids`` with ``old_ids[new] = old``.
    Labels carry over, so the result can also be addressed by name.
    """
    removed = set(uninfected)
    bad = removed.intersection(terminals)
    if bad:
        raise GraphError(f"terminals observed as uninfected: {sorted(bad)}")
    old_ids = [u for u in range(g.n) if u not in removed]
    if not old_ids:
        raise GraphError("restriction leaves an empty graph")
    new_id = {u: i for i, u in enumerate(old_ids)}
    edges = [(new_id[u], new_id[v], p) for u, v, p in g.edges()
             if u in new_id and v in new_id]
    return ProbGraph(len(old_ids), edges, [g.labels[u] for u in old_ids]), old_ids


def induced_subgraph(g: ProbGraph, nodes: Iterable[int]) -> tuple[ProbGraph, list[int]]:
    keep = set(nodes)
    return restrict_graph(g, [u for u in range(g.n) if u not in keep])


class MarkovChain:
    """Row-stochastic walk on the transposed graph.

    ``succ[u]`` lists the chain successors of ``u`` (the in-neighbours of
    ``u`` in the source graph) and ``w[u][v] = p_vu / p(u)`` where ``p(u)``
    is the weighted in-degree.  ``log_norm[u] = log p(u)``.
    """

    __slots__ = ("n", "succ", "probs", "cum", "w", "log_norm")

    def __init__(self, n: int, succ, probs, log_norm):
        self.n = n
        self.succ: list[list[int]] = succ
        self.probs: list[list[float]] = probs
        self.w: list[dict[int, float]] = [dict(zip(s, q)) for s, q in zip(succ, probs)]
        self.log_norm: list[float] = log_norm
        self.cum: list[list[float]] = []
        for q in probs:
            c = list(accumulate(q))
            if c:
                c = [x / c[-1] for x in c]
                c[-1] = 1.0
            self.cum.append(c)

    def weight(self, u: int, v: int) -> float:
        try:
            return self.w[u][v]
        except KeyError:
            raise GraphError(f"edge ({u}, {v}) is not in the chain") from None

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for u in range(self.n):
            for v, q in zip(self.succ[u], self.probs[u]):
                yield u, v, q

    def step(self, u: int, x: float) -> int:
        """Successor of ``u`` selected by the uniform variate ``x`` in [0, 1)."""
        c = self.cum[u]
        if len(c) > 8:
            i = bisect_right(c, x)
        else:
            i = 0
            while c[i] <= x:
                i += 1
                if i == len(c):
                    break
        return self.succ[u][min(i, len(c) - 1)]

    def __repr__(self):
        return f"MarkovChain(n={self.n})"


def build_chain(g: ProbGraph) -> MarkovChain:
    succ, probs, log_norm = [], [], []
    for u in range(g.n):
        preds = sorted(g.inn[u])
        total = math.fsum(g.inn[u][v] for v in preds)
        if not total > 0.0:
            raise GraphError(f"node {g.labels[u]} has zero weighted in-degree")
        succ.append(preds)
        probs.append([g.inn[u][v] / total for v in preds])
        log_norm.append(math.log(total))
    return MarkovChain(g.n, succ, probs, log_norm)


def chain_from_weights(n: int, edges: Iterable[tuple[int, int, float]]) -> MarkovChain:
    """Build a chain from explicit ``(u, v, w)`` transitions.

    Rows are normalized; ``log_norm`` is set to zero since there is no
    source graph.
    """
    rows: list[dict[int, float]] = [{} for _ in range(n)]
    for u, v, q in edges:
        if u == v or q <= 0:
            raise GraphError(f"invalid transition ({u}, {v}, {q})")
        rows[u][v] = rows[u].get(v, 0.0) + q
    succ, probs = [], []
    for u, row in enumerate(rows):
        if not row:
            raise GraphError(f"node {u} has no transitions")
        vs = sorted(row)
        total = math.fsum(row.values())
        succ.append(vs)
        probs.append([row[v] / total for v in vs])
    return MarkovChain(n, succ, probs, [0.0] * n)


class Tree:
    """Rooted tree in chain orientation: ``parent[u]`` is the next node toward the root."""

    __slots__ = ("root", "parent", "_key")

    def __init__(self, root: int, parent: Mapping[int, int] | None = None):
        self.root = root
        self.parent: dict[int, int] = dict(parent or {})
        if root in self.parent:
            raise GraphError("root must not have a parent")
        self._key = None

    @property
    def nodes(self) -> set[int]:
        s = set(self.parent)
        s.add(self.root)
        return s

    def __len__(self):
        return len(self.parent) + 1

    def __contains__(self, u):
        return u == self.root or u in self.parent

    def chain_edges(self) -> list[tuple[int, int]]:
        """Edges ``(child, parent)`` as walked in the chain."""
        return sorted(self.parent.items())

    def graph_edges(self) -> list[tuple[int, int]]:
        """Edges ``(parent, child)`` in infection (root-outward) direction."""
        return sorted((p, c) for c, p in self.parent.items())

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {u: [] for u in self.nodes}
        for c, p in self.parent.items():
            kids[p].append(c)
        return kids

    def leaves(self) -> set[int]:
        has_child = set(self.parent.values())
        return {u for u in self.parent if u not in has_child}

    def key(self) -> tuple:
        """Canonical hashable encoding: root plus sorted ``(child, parent)`` pairs."""
        if self._key is None:
            self._key = (self.root, tuple(sorted(self.parent.items())))
        return self._key

    def validate(self) -> None:
        """Check that every node reaches the root without revisiting a node."""
        done = {self.root}
        for start in self.parent:
            path = []
            u = start
            while u not in done:
                if u in path:
                    raise GraphError(f"cycle through node {u}")
                path.append(u)
                if u not in self.parent:
                    raise GraphError(f"node {u} is not attached to the tree")
                u = self.parent[u]
            done.update(path)

    def relabel(self, ids: Sequence[int]) -> "Tree":
        """Map node ``i`` to ``ids[i]`` (e.g. back to pre-restriction ids)."""
        return Tree(ids[self.root], {ids[c]: ids[p] for c, p in self.parent.items()})

    def __eq__(self, other):
        return isinstance(other, Tree) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Tree(root={self.root}, parent={dict(sorted(self.parent.items()))})"


def tree_log_weight(chain: MarkovChain, t: Tree) -> float:
    """``log w(T)``: sum of log chain weights over the tree edges."""
    return math.fsum(math.log(chain.weight(c, p)) for c, p in t.parent.items())


def target_log_probability(g: ProbGraph, t: Tree) -> float:
    """Log of the product of ``p_uv`` over the root-outward edges of ``t``."""
    total = []
    for c, p in t.parent.items():
        if c not in g.out[p]:
            raise GraphError(f"graph edge ({p}, {c}) does not exist")
        total.append(math.log(g.out[p][c]))
    return math.fsum(total)


def grid_graph(rows: int, cols: int, p: float = 1.0) -> ProbGraph:
    """Reciprocal 4-neighbour lattice; node ``i*cols + j`` is cell ``(i, j)``."""
    edges = []
    for i in range(rows):
        for j in range(cols):
            u = i * cols + j
            if j + 1 < cols:
                edges += [(u, u + 1, p), (u + 1, u, p)]
            if i + 1 < rows:
                edges += [(u, u + cols, p), (u + cols, u, p)]
    return ProbGraph(rows * cols, edges)


def path_graph(n: int, p: float = 1.0) -> ProbGraph:
    edges = []
    for u in range(n - 1):
        edges += [(u, u + 1, p), (u + 1, u, p)]
    return ProbGraph(n, edges)


def cycle_graph(n: int, p: float = 1.0) -> ProbGraph:
    if n < 3:
        raise GraphError("cycle needs at least 3 nodes")
    edges = []
    for u in range(n):
        v = (u + 1) % n
        edges += [(u, v, p), (v, u, p)]
    return ProbGraph(n, edges)


def complete_graph(n: int, p: float = 1.0) -> ProbGraph:
    return ProbGraph(n, [(u, v, p) for u in range(n) for v in range(n) if u != v])


def from_undirected(stream: TextIO | str, p: float = 1.0) -> ProbGraph:
    """Directed copies of an undirected edge list (``u v`` or ``u v p`` lines).

    Duplicate undirected edges are collapsed; self-loops are dropped.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    index: dict[str, int] = {}
    labels: list[str] = []
    probs: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v [p]', got {line!r}")
        q = float(fields[2]) if len(fields) == 3 else p
        ids = []
        for lab in fields[:2]:
            if lab not in index:
                index[lab] = len(labels)
                labels.append(lab)
            ids.append(index[lab])
        u, v = ids
        if u == v:
            continue
        probs.setdefault((u, v), q)
        probs.setdefault((v, u), q)
    return ProbGraph(len(labels), ((u, v, q) for (u, v), q in probs.items()), labels)
