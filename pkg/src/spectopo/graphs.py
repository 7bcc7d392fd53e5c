"""Graphs and graph shift operators.

Undirected, unweighted graphs on 0-indexed nodes, random-graph generation,
and construction of the shift operators attached to a graph (adjacency,
normalized Laplacian, combinatorial Laplacian). Everything is immutable
after construction and all functions are pure, so concurrent use is safe.

Edge-list file format: one header line ``# nodes N`` followed by one
``i j`` pair per line, each undirected edge stored once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

SYMMETRY_ATOL = 1e-12  # per-entry tolerance for shift-matrix symmetry


class ShiftKind(str, Enum):
    """Which matrix attached to a graph plays the role of the shift."""

    ADJACENCY = "adjacency"
    NORMALIZED_LAPLACIAN = "nlaplacian"
    COMBINATORIAL_LAPLACIAN = "claplacian"
    GENERIC_SYMMETRIC = "generic"


@dataclass(frozen=True)
class Graph:
    """Undirected unweighted graph: node count plus a set of edges.

    Edges are unordered pairs ``(i, j)`` with ``i < j`` after
    normalization; self-loops and out-of-range indices are rejected.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        normalized = set()
        for pair in self.edges:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", frozenset(normalized))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class ShiftMatrix:
    """A dense symmetric shift operator tagged with its kind.

    The sparsity pattern of a shift built from a graph matches the graph:
    off-diagonal entries are nonzero only on edges. Kind-specific entry
    invariants are checked at construction; the stored array is read-only.
    """

    kind: ShiftKind
    data: np.ndarray

    def __post_init__(self):
        m = np.array(self.data, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"shift matrix must be square, got shape {m.shape}")
        if not np.all(np.abs(m - m.T) <= SYMMETRY_ATOL):
            raise ValueError("shift matrix not symmetric within 1e-12 per entry")
        _check_kind_invariants(self.kind, m)
        m.setflags(write=False)
        object.__setattr__(self, "data", m)

    @property
    def n(self) -> int:
        return self.data.shape[0]


def _check_kind_invariants(kind: ShiftKind, m: np.ndarray) -> None:
    off = m - np.diag(np.diag(m))
    if kind == ShiftKind.ADJACENCY:
        if np.any(np.diag(m) != 0.0):
            raise ValueError("adjacency matrix must have zero diagonal")
        if not np.all((m == 0.0) | (m == 1.0)):
            raise ValueError("adjacency entries must be in {0, 1}")
    elif kind == ShiftKind.NORMALIZED_LAPLACIAN:
        if np.any(np.abs(np.diag(m) - 1.0) > 1e-9):
            raise ValueError("normalized Laplacian must have unit diagonal")
        if np.any(off > 1e-9) or np.any(off < -1.0 - 1e-9):
            raise ValueError("normalized Laplacian off-diagonal entries must lie in [-1, 0]")
    elif kind == ShiftKind.COMBINATORIAL_LAPLACIAN:
        if np.any(np.abs(m.sum(axis=1)) > 1e-9):
            raise ValueError("combinatorial Laplacian rows must sum to zero")
        if np.any(off > 1e-9):
            raise ValueError("combinatorial Laplacian off-diagonal entries must be <= 0")
    # GENERIC_SYMMETRIC carries no constraint beyond symmetry.


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Sample a G(n, p) random graph, each pair independently with prob p.

    Deterministic for a fixed seed (PCG64 stream keyed by ``seed``).
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must lie in [0, 1], got {p!r}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    edges = frozenset(zip(iu[mask].tolist(), ju[mask].tolist()))
    return Graph(int(n), edges)


def path_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n: int) -> Graph:
    """Hub node 0 connected to nodes 1..n-1."""
    return Graph(n, frozenset((0, i) for i in range(1, n)))


def degrees(g: Graph) -> np.ndarray:
    d = np.zeros(g.n, dtype=int)
    for i, j in g.edges:
        d[i] += 1
        d[j] += 1
    return d


def adjacency_matrix(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


def is_connected(g: Graph) -> bool:
    """BFS from node 0; True iff a single component spans all nodes."""
    if g.n == 1:
        return True
    neighbors: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in g.edges:
        neighbors[i].append(j)
        neighbors[j].append(i)
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    frontier = [0]
    count = 1
    while frontier:
        nxt = []
        for u in frontier:
            for v in neighbors[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    nxt.append(v)
        frontier = nxt
    return count == g.n


def build_shift(g: Graph, kind: ShiftKind) -> ShiftMatrix:
    """Build the requested shift operator from a graph.

    The normalized Laplacian needs every node to have degree >= 1; an
    isolated node raises a ValueError.
    """
    kind = ShiftKind(kind)
    a = adjacency_matrix(g)
    if kind == ShiftKind.ADJACENCY or kind == ShiftKind.GENERIC_SYMMETRIC:
        return ShiftMatrix(kind, a)
    d = degrees(g).astype(float)
    if kind == ShiftKind.NORMALIZED_LAPLACIAN:
        if np.any(d == 0):
            raise ValueError("normalized Laplacian undefined: graph has an isolated node")
        rs = 1.0 / np.sqrt(d)
        # Elementwise a_ij * (r_i r_j) keeps the result bitwise symmetric.
        lap = np.eye(g.n) - a * np.outer(rs, rs)
        return ShiftMatrix(kind, lap)
    if kind == ShiftKind.COMBINATORIAL_LAPLACIAN:
        return ShiftMatrix(kind, np.diag(d) - a)
    raise ValueError(f"unsupported shift kind {kind!r}")


def write_edgelist(g: Graph, path) -> None:
    lines = [f"# nodes {g.n}"]
    lines.extend(f"{i} {j}" for i, j in g.sorted_edges())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("# nodes"):
        raise ValueError(f"{path}: missing '# nodes N' header")
    try:
        n = int(lines[0].split()[2])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from exc
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph(n, frozenset(edges))
