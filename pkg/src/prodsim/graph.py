"""Directed graph with per-node opinions and community labels.

Node ids are dense integers 0..N-1.  Adjacency is stored in both
directions so in-neighbor queries stay O(degree); arcs have set semantics
(no duplicates, no self-loops).  Opinions live in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GraphFormatError(ValueError):
    """Malformed or invalid graph file; carries the offending line number."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class DegreeSummary:
    """In/out degree vectors of a graph snapshot."""

    in_degrees: np.ndarray
    out_degrees: np.ndarray

    @property
    def total_degrees(self) -> np.ndarray:
        return self.in_degrees + self.out_degrees

    def percentile(self, q: float) -> float:
        """Total-degree value at quantile q (linear interpolation)."""
        return float(np.quantile(self.total_degrees, q))


class OpinionGraph:
    """Mutable directed graph plus an opinion in [0,1] and a community id per node."""

    def __init__(self, node_count, opinions=None, communities=None):
        if node_count <= 0:
            raise ValueError(f"node_count must be positive, got {node_count}")
        self._n = int(node_count)
        if opinions is None:
            opinions = np.full(self._n, 0.5)
        self.opinions = np.asarray(opinions, dtype=np.float64).copy()
        if self.opinions.shape != (self._n,):
            raise ValueError("opinions must have one entry per node")
        if np.any(self.opinions < 0.0) or np.any(self.opinions > 1.0):
            raise ValueError("opinions must lie in [0, 1]")
        if communities is None:
            communities = np.zeros(self._n, dtype=np.int64)
        self.communities = np.asarray(communities, dtype=np.int64).copy()
        if self.communities.shape != (self._n,):
            raise ValueError("communities must have one entry per node")
        if np.any(self.communities < 0):
            raise ValueError("community ids must be non-negative")
        self._out = [set() for _ in range(self._n)]
        self._in = [set() for _ in range(self._n)]
        self._arc_count = 0

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def arc_count(self) -> int:
        return self._arc_count

    def _check_node(self, u):
        if not 0 <= u < self._n:
            raise ValueError(f"node id {u} out of range [0, {self._n})")

    def add_arc(self, u: int, v: int) -> bool:
        """Add the arc u -> v.  Returns False if it was already present."""
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise ValueError(f"self-loop ({u}, {u}) not allowed")
        if v in self._out[u]:
            return False
        self._out[u].add(v)
        self._in[v].add(u)
        self._arc_count += 1
        return True

    def remove_arc(self, u: int, v: int) -> bool:
        """Remove the arc u -> v.  Returns False if it was absent."""
        self._check_node(u)
        self._check_node(v)
        if v not in self._out[u]:
            return False
        self._out[u].discard(v)
        self._in[v].discard(u)
        self._arc_count -= 1
        return True

    def has_arc(self, u: int, v: int) -> bool:
        self._check_node(u)
        self._check_node(v)
        return v in self._out[u]

    def out_neighbors(self, u: int) -> list:
        """Nodes u follows, ascending."""
        self._check_node(u)
        return sorted(self._out[u])

    def in_neighbors(self, u: int) -> list:
        """Nodes following u, ascending."""
        self._check_node(u)
        return sorted(self._in[u])

    def out_degree(self, u: int) -> int:
        self._check_node(u)
        return len(self._out[u])

    def in_degree(self, u: int) -> int:
        self._check_node(u)
        return len(self._in[u])

    def arcs(self):
        """All arcs as (u, v) pairs in lexicographic order."""
        for u in range(self._n):
            for v in sorted(self._out[u]):
                yield (u, v)

    def degree_summary(self) -> DegreeSummary:
        ind = np.array([len(self._in[v]) for v in range(self._n)], dtype=np.int64)
        out = np.array([len(self._out[v]) for v in range(self._n)], dtype=np.int64)
        return DegreeSummary(in_degrees=ind, out_degrees=out)

    def copy(self) -> "OpinionGraph":
        g = OpinionGraph(self._n, self.opinions, self.communities)
        for u in range(self._n):
            g._out[u] = set(self._out[u])
            g._in[u] = set(self._in[u])
        g._arc_count = self._arc_count
        return g

    def to_csr(self):
        """Out-adjacency as (offsets, targets) arrays with sorted segments."""
        off = np.zeros(self._n + 1, dtype=np.int64)
        for u in range(self._n):
            off[u + 1] = off[u] + len(self._out[u])
        tgt = np.empty(off[-1], dtype=np.int64)
        for u in range(self._n):
            tgt[off[u]:off[u + 1]] = sorted(self._out[u])
        return off, tgt

    def __eq__(self, other):
        if not isinstance(other, OpinionGraph):
            return NotImplemented
        return (self._n == other._n
                and np.array_equal(self.opinions, other.opinions)
                and np.array_equal(self.communities, other.communities)
                and self._out == other._out)

    def __repr__(self):
        return f"OpinionGraph(nodes={self._n}, arcs={self._arc_count})"


def save(g: OpinionGraph, path) -> None:
    """Write the two-section plain-text graph format.

    Header `nodes N`, one `node <id> <opinion> <community>` line per node
    (opinions at 17 significant digits for bit-exact round trips), then one
    `arc <u> <v>` line per arc in lexicographic order.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"nodes {g.node_count}\n")
        for v in range(g.node_count):
            fh.write(f"node {v} {g.opinions[v]:.17g} {g.communities[v]}\n")
        for u, v in g.arcs():
            fh.write(f"arc {u} {v}\n")


def load(path) -> OpinionGraph:
    """Parse a graph file, validating every structural invariant."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise GraphFormatError("empty file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "nodes":
        raise GraphFormatError("expected header 'nodes <N>'", 1)
    try:
        n = int(head[1])
    except ValueError:
        raise GraphFormatError(f"invalid node count {head[1]!r}", 1) from None
    if n <= 0:
        raise GraphFormatError(f"node count must be positive, got {n}", 1)

    opinions = np.full(n, np.nan)
    communities = np.zeros(n, dtype=np.int64)
    arcs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 4:
                raise GraphFormatError("expected 'node <id> <opinion> <community>'", lineno)
            try:
                vid, op, com = int(parts[1]), float(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError(f"unparseable node line {line!r}", lineno) from None
            if not 0 <= vid < n:
                raise GraphFormatError(f"node id {vid} out of range [0, {n})", lineno)
            if not np.isnan(opinions[vid]):
                raise GraphFormatError(f"duplicate node line for id {vid}", lineno)
            if not 0.0 <= op <= 1.0:
                raise GraphFormatError(f"opinion {op} outside [0, 1]", lineno)
            if com < 0:
                raise GraphFormatError(f"negative community id {com}", lineno)
            opinions[vid] = op
            communities[vid] = com
        elif parts[0] == "arc":
            if len(parts) != 3:
                raise GraphFormatError("expected 'arc <u> <v>'", lineno)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphFormatError(f"unparseable arc line {line!r}", lineno) from None
            if not 0 <= u < n or not 0 <= v < n:
                raise GraphFormatError(f"arc ({u}, {v}) references a node id >= {n}", lineno)
            if u == v:
                raise GraphFormatError(f"self-loop ({u}, {u})", lineno)
            arcs.append((u, v, lineno))
        else:
            raise GraphFormatError(f"unknown record type {parts[0]!r}", lineno)

    missing = np.nonzero(np.isnan(opinions))[0]
    if missing.size:
        raise GraphFormatError(f"no node line for id {missing[0]}")
    g = OpinionGraph(n, opinions, communities)
    for u, v, lineno in arcs:
        if not g.add_arc(u, v):
            raise GraphFormatError(f"duplicate arc ({u}, {v})", lineno)
    return g
