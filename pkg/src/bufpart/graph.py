"""Weighted graph model, buffered partitions, and cut arithmetic.

Vertices are dense 0-based integers after ingestion; external ids from edge
files are remapped and the dictionary kept on the graph.  Vertex weights and
edge costs are float64 and must be strictly positive.  Buffer budgets are
checked with exact <= (an input contract, not a numerical estimate).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "BufferedPartition",
    "CutReport",
    "ValidationReport",
    "GraphError",
    "PartitionError",
    "cut_cost",
    "buffered_expansion",
    "partition_cost",
    "validate_partition",
    "load_graph",
    "parse_edge_lines",
    "parse_weight_lines",
]


class GraphError(ValueError):
    """Malformed graph input."""


class PartitionError(ValueError):
    """Operation applied to an invalid buffered partition."""


def _as_vertex_array(vertices: Iterable[int], n: int) -> np.ndarray:
    arr = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= n):
        raise GraphError(f"vertex id out of range [0, {n}): {arr[arr < 0] if arr[0] < 0 else arr[-1]}")
    return arr


@dataclass(frozen=True)
class Graph:
    """Undirected graph with vertex weights w_u > 0 and edge costs c_uv > 0."""

    n: int
    weights: np.ndarray          # (n,) float64, > 0
    edge_u: np.ndarray           # (m,) int64, edge_u[i] < edge_v[i]
    edge_v: np.ndarray
    edge_cost: np.ndarray        # (m,) float64, > 0
    labels: tuple = ()           # external ids in internal order, () when native

    # CSR adjacency, built once in build()
    adj_ptr: np.ndarray = field(repr=False, default=None)
    adj_vert: np.ndarray = field(repr=False, default=None)
    adj_cost: np.ndarray = field(repr=False, default=None)

    @staticmethod
    def build(n: int, edges: Sequence[tuple[int, int, float]],
              weights: Sequence[float] | None = None,
              labels: Sequence | None = None) -> "Graph":
        if n <= 0:
            raise GraphError("graph needs at least one vertex")
        eu, ev, ec = [], [], []
        seen: set[tuple[int, int]] = set()
        for u, v, c in edges:
            u, v, c = int(u), int(v), float(c)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) outside vertex range [0,{n})")
            if c <= 0.0 or not np.isfinite(c):
                raise GraphError(f"edge ({u},{v}) has nonpositive cost {c}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            eu.append(key[0])
            ev.append(key[1])
            ec.append(c)
        eu_a = np.asarray(eu, dtype=np.int64)
        ev_a = np.asarray(ev, dtype=np.int64)
        ec_a = np.asarray(ec, dtype=np.float64)
        order = np.lexsort((ev_a, eu_a))
        eu_a, ev_a, ec_a = eu_a[order], ev_a[order], ec_a[order]

        incident = np.zeros(n)
        np.add.at(incident, eu_a, ec_a)
        np.add.at(incident, ev_a, ec_a)
        if weights is None:
            w = incident.copy()
            if np.any(w <= 0.0):
                bad = int(np.argmin(w))
                raise GraphError(f"vertex {bad} is isolated; give it an explicit weight")
        else:
            w = np.asarray(list(weights), dtype=np.float64)
            if w.shape != (n,):
                raise GraphError(f"expected {n} vertex weights, got {w.shape}")
            if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
                raise GraphError("vertex weights must be positive and finite")

        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, eu_a, 1)
        np.add.at(deg, ev_a, 1)
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=ptr[1:])
        vert = np.empty(ptr[-1], dtype=np.int64)
        cost = np.empty(ptr[-1], dtype=np.float64)
        cursor = ptr[:-1].copy()
        for a, b, c in zip(eu_a, ev_a, ec_a):
            vert[cursor[a]] = b
            cost[cursor[a]] = c
            cursor[a] += 1
            vert[cursor[b]] = a
            cost[cursor[b]] = c
            cursor[b] += 1

        return Graph(n=int(n), weights=w, edge_u=eu_a, edge_v=ev_a, edge_cost=ec_a,
                     labels=tuple(labels) if labels is not None else (),
                     adj_ptr=ptr, adj_vert=vert, adj_cost=cost)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def edge_count(self) -> int:
        return int(self.edge_cost.size)

    def weight_of(self, vertices: np.ndarray) -> float:
        return float(self.weights[np.asarray(vertices, dtype=np.int64)].sum())

    def incident_cost(self) -> np.ndarray:
        inc = np.zeros(self.n)
        np.add.at(inc, self.edge_u, self.edge_cost)
        np.add.at(inc, self.edge_v, self.edge_cost)
        return inc

    def mask(self, vertices: Iterable[int]) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[_as_vertex_array(vertices, self.n)] = True
        return m

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.adj_ptr[u], self.adj_ptr[u + 1]
        return self.adj_vert[lo:hi], self.adj_cost[lo:hi]

    def subgraph(self, vertices: np.ndarray) -> tuple["Graph", np.ndarray]:
        """Induced subgraph with original weights/costs; returns (graph, old ids)."""
        keep = _as_vertex_array(vertices, self.n)
        remap = -np.ones(self.n, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        inside = remap[self.edge_u] >= 0
        inside &= remap[self.edge_v] >= 0
        edges = list(zip(remap[self.edge_u[inside]].tolist(),
                         remap[self.edge_v[inside]].tolist(),
                         self.edge_cost[inside].tolist()))
        sub = Graph.build(keep.size, edges, weights=self.weights[keep])
        return sub, keep


def cut_cost(g: Graph, a: Iterable[int], b: Iterable[int]) -> float:
    """delta_G(A,B): total cost of edges with one endpoint in each set."""
    ma = g.mask(a)
    mb = g.mask(b)
    if np.any(ma & mb):
        raise PartitionError("cut_cost requires disjoint vertex sets")
    crossing = (ma[g.edge_u] & mb[g.edge_v]) | (mb[g.edge_u] & ma[g.edge_v])
    return float(g.edge_cost[crossing].sum())


def cut_cost_masks(g: Graph, ma: np.ndarray, mb: np.ndarray) -> float:
    crossing = (ma[g.edge_u] & mb[g.edge_v]) | (mb[g.edge_u] & ma[g.edge_v])
    return float(g.edge_cost[crossing].sum())


def buffered_expansion(g: Graph, p: Iterable[int], b: Iterable[int]) -> float:
    """phi_G(P || B) = delta_G(P, V minus (P u B)) / w(P); edges into B are free."""
    mp = g.mask(p)
    mb = g.mask(b)
    if not mp.any():
        raise PartitionError("buffered expansion of an empty set is undefined")
    if np.any(mp & mb):
        raise PartitionError("part and buffer must be disjoint")
    outside = ~(mp | mb)
    return cut_cost_masks(g, mp, outside) / float(g.weights[mp].sum())


@dataclass(frozen=True)
class BufferedPartition:
    """Parts P_1..P_k with per-part buffers B_1..B_k and budget epsilon."""

    parts: tuple            # tuple of sorted int64 arrays
    buffers: tuple
    epsilon: float

    @staticmethod
    def from_sets(parts: Sequence[Iterable[int]], buffers: Sequence[Iterable[int]],
                  epsilon: float) -> "BufferedPartition":
        ps = tuple(np.unique(np.asarray(list(p), dtype=np.int64)) for p in parts)
        bs = tuple(np.unique(np.asarray(list(b), dtype=np.int64)) for b in buffers)
        if len(ps) != len(bs):
            raise PartitionError("need one buffer per part (may be empty)")
        return BufferedPartition(parts=ps, buffers=bs, epsilon=float(epsilon))

    @property
    def k(self) -> int:
        return len(self.parts)

    def assignment(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(part index, role) per vertex; role 0 = core, 1 = buffer, -1 = unassigned."""
        part = -np.ones(n, dtype=np.int64)
        role = -np.ones(n, dtype=np.int64)
        for i, (p, b) in enumerate(zip(self.parts, self.buffers)):
            part[p] = i
            role[p] = 0
            part[b] = i
            role[b] = 1
        return part, role


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple

    def first(self) -> str:
        return self.violations[0] if self.violations else ""


@dataclass(frozen=True)
class CutReport:
    per_part_expansion: tuple
    max_expansion: float
    buffer_ratios: tuple
    valid: bool
    violations: tuple

    def to_dict(self) -> dict:
        return {
            "per_part_expansion": list(self.per_part_expansion),
            "max_expansion": self.max_expansion,
            "buffer_ratios": list(self.buffer_ratios),
            "violations": list(self.violations),
        }


def validate_partition(g: Graph, part: BufferedPartition) -> ValidationReport:
    """Check the four buffered-partition conditions; report every violation."""
    violations: list[str] = []
    coverage = np.zeros(g.n, dtype=np.int64)
    for i, p in enumerate(part.parts):
        if p.size and (p[0] < 0 or p[-1] >= g.n):
            violations.append(f"part {i} has out-of-range vertices")
            continue
        coverage[p] += 1
    for i, b in enumerate(part.buffers):
        if b.size and (b[0] < 0 or b[-1] >= g.n):
            violations.append(f"buffer {i} has out-of-range vertices")
            continue
        coverage[b] += 1
    if np.any(coverage > 1):
        dup = int(np.argmax(coverage > 1))
        violations.append(f"condition 1 violated: sets are not pairwise disjoint (vertex {dup})")
    if np.any(coverage == 0):
        missing = int(np.argmax(coverage == 0))
        violations.append(f"condition 2 violated: union does not cover V (vertex {missing})")
    for i, p in enumerate(part.parts):
        if p.size == 0:
            violations.append(f"condition 3 violated: part {i} is empty")
    if not (0.0 <= part.epsilon < 1.0):
        violations.append(f"epsilon {part.epsilon} outside [0,1)")
    for i, (p, b) in enumerate(zip(part.parts, part.buffers)):
        if p.size == 0:
            continue
        wb = g.weight_of(b) if b.size else 0.0
        wp = g.weight_of(p)
        if wb > part.epsilon * wp:
            violations.append(
                f"condition 4 violated: w(B_{i})={wb!r} > eps*w(P_{i})={part.epsilon * wp!r}")
    return ValidationReport(valid=not violations, violations=tuple(violations))


def partition_cost(g: Graph, part: BufferedPartition) -> CutReport:
    """Per-part buffered expansions and their maximum (the partition's cost)."""
    report = validate_partition(g, part)
    if not report.valid:
        raise PartitionError(f"invalid buffered partition: {report.first()}")
    phis = []
    ratios = []
    for p, b in zip(part.parts, part.buffers):
        phis.append(buffered_expansion(g, p, b))
        ratios.append((g.weight_of(b) if b.size else 0.0) / g.weight_of(p))
    return CutReport(per_part_expansion=tuple(phis), max_expansion=max(phis),
                     buffer_ratios=tuple(ratios), valid=True, violations=())


def parse_edge_lines(lines: Iterable[str]):
    """Whitespace 'u v [cost]' lines; returns (edges on raw ids, id order)."""
    edges = []
    order: dict[str, int] = {}
    for ln_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) not in (2, 3):
            raise GraphError(f"edge line {ln_no}: expected 'u v [cost]', got {raw!r}")
        u, v = fields[0], fields[1]
        try:
            cost = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError as exc:
            raise GraphError(f"edge line {ln_no}: bad cost {fields[2]!r}") from exc
        for ident in (u, v):
            if ident not in order:
                order[ident] = len(order)
        edges.append((u, v, cost))
    return edges, list(order)


def parse_weight_lines(lines: Iterable[str]) -> dict[str, float]:
    weights: dict[str, float] = {}
    for ln_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 2:
            raise GraphError(f"weight line {ln_no}: expected 'u weight', got {raw!r}")
        try:
            value = float(fields[1])
        except ValueError as exc:
            raise GraphError(f"weight line {ln_no}: bad weight {fields[1]!r}") from exc
        if fields[0] in weights:
            raise GraphError(f"weight line {ln_no}: duplicate vertex {fields[0]!r}")
        weights[fields[0]] = value
    return weights


def load_graph(edge_source, weight_source=None) -> Graph:
    """Build a Graph from an edge-list text source and optional weight source.

    Sources may be paths or iterables of lines.  Without a weight source every
    w_u defaults to the total cost of edges incident on u.
    """
    def read(source):
        if hasattr(source, "read"):
            return source.read().splitlines()
        if isinstance(source, (list, tuple)):
            return list(source)
        with open(source, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()

    raw_edges, ids = parse_edge_lines(read(edge_source))
    if not ids:
        raise GraphError("edge source contains no edges")
    index = {ident: i for i, ident in enumerate(ids)}
    edges = [(index[u], index[v], c) for u, v, c in raw_edges]

    weights = None
    if weight_source is not None:
        table = parse_weight_lines(read(weight_source))
        unknown = sorted(set(table) - set(index))
        if unknown:
            raise GraphError(f"weight file names unknown vertices: {unknown[:5]}")
        missing = sorted(set(index) - set(table))
        if missing:
            raise GraphError(f"weight file is missing vertices: {missing[:5]}")
        weights = [table[ident] for ident in ids]

    return Graph.build(len(ids), edges, weights=weights, labels=ids)
