"""Bounded-degree graphs and the counted neighbor-query oracle."""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError

BOTTOM = -1  # neighbor slot is empty


class BoundedDegreeGraph:
    """Immutable simple undirected graph on vertices ``0..n-1`` with degree bound ``d``.

    Neighbor lists are kept sorted, which fixes what "the i-th neighbor" means.
    """

    __slots__ = ("_n", "_d", "_adj", "_table", "_m")

    def __init__(self, n: int, d: int, adjacency: Sequence[Iterable[int]]):
        if n < 0:
            raise InputError(f"vertex count must be non-negative, got {n}")
        if d < 1:
            raise InputError(f"degree bound must be a positive integer, got {d}")
        if len(adjacency) != n:
            raise InputError(f"adjacency has {len(adjacency)} lists for {n} vertices")
        adj = tuple(tuple(sorted(int(u) for u in nbrs)) for nbrs in adjacency)
        self._n = n
        self._d = d
        self._adj = adj
        self._check()
        table = np.full((n, d), BOTTOM, dtype=np.int64)
        for v, nbrs in enumerate(adj):
            table[v, : len(nbrs)] = nbrs
        table.setflags(write=False)
        self._table = table
        self._m = sum(len(nbrs) for nbrs in adj) // 2

    def _check(self):
        n, d = self._n, self._d
        for v, nbrs in enumerate(self._adj):
            if len(nbrs) > d:
                raise InputError(f"vertex {v} has degree {len(nbrs)} > d={d}")
            for i, u in enumerate(nbrs):
                if not 0 <= u < n:
                    raise InputError(f"vertex {v} lists out-of-range neighbor {u}")
                if u == v:
                    raise InputError(f"self-loop at vertex {v}")
                if i and nbrs[i - 1] == u:
                    raise InputError(f"parallel edge {v}-{u}")
        for v, nbrs in enumerate(self._adj):
            for u in nbrs:
                if not _contains(self._adj[u], v):
                    raise InputError(f"asymmetric adjacency: {v} lists {u} but not vice versa")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], d: int | None = None):
        """Build from an edge list; ``d`` defaults to the maximum degree (at least 1)."""
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if v in adj[u]:
                raise InputError(f"parallel edge {u}-{v}")
            adj[u].add(v)
            adj[v].add(u)
        if d is None:
            d = max([len(a) for a in adj] + [1])
        return cls(n, d, adj)

    @classmethod
    def from_networkx(cls, g, d: int | None = None):
        """Relabel ``g``'s nodes in sorted order to ``0..n-1``."""
        nodes = sorted(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in g.edges()), d)

    @property
    def n(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._d

    @property
    def num_edges(self) -> int:
        return self._m

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    @property
    def neighbor_table(self) -> np.ndarray:
        """Read-only ``(n, d)`` array of neighbor ids padded with ``BOTTOM``."""
        return self._table

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return _contains(self._adj[u], v)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, nbrs in enumerate(self._adj):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["BoundedDegreeGraph", list[int]]:
        """Induced subgraph relabeled to ``0..k-1`` plus the new-to-old id list."""
        old = sorted(set(int(v) for v in vertices))
        index = {v: i for i, v in enumerate(old)}
        adj = [[index[u] for u in self._adj[v] if u in index] for v in old]
        return BoundedDegreeGraph(len(old), self._d, adj), old

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self._n))
        g.add_edges_from(self.edges())
        return g

    def components(self) -> list[list[int]]:
        seen = [False] * self._n
        comps = []
        for s in range(self._n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self._adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def __eq__(self, other):
        if not isinstance(other, BoundedDegreeGraph):
            return NotImplemented
        return self._n == other._n and self._d == other._d and self._adj == other._adj

    def __hash__(self):
        return hash((self._n, self._d, self._adj))

    def __repr__(self):
        return f"BoundedDegreeGraph(n={self._n}, d={self._d}, m={self._m})"


def _contains(sorted_tuple, x):
    lo, hi = 0, len(sorted_tuple)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_tuple[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < len(sorted_tuple) and sorted_tuple[lo] == x


class NeighborOracle:
    """Counted "i-th neighbor of v" access to a graph.

    Slots are 1-based. An empty slot answers ``None`` (``BOTTOM`` in batch form).
    For concurrent use, ``fork`` a private oracle per worker and ``merge`` it
    back after the parallel phase.
    """

    def __init__(self, graph: BoundedDegreeGraph):
        self._graph = graph
        self._count = 0

    @property
    def n(self) -> int:
        return self._graph.n

    @property
    def d(self) -> int:
        return self._graph.d

    @property
    def query_count(self) -> int:
        return self._count

    def query(self, v: int, i: int) -> int | None:
        n, d = self._graph.n, self._graph.d
        if not 0 <= v < n:
            raise InputError(f"vertex {v} out of range [0, {n})")
        if not 1 <= i <= d:
            raise InputError(f"slot {i} out of range [1, {d}]")
        self._count += 1
        u = self._graph.neighbor_table[v, i - 1]
        return None if u == BOTTOM else int(u)

    def query_many(self, vertices: np.ndarray, slots: np.ndarray) -> np.ndarray:
        """Answer a batch of queries; counts one query per element."""
        vertices = np.asarray(vertices, dtype=np.int64)
        slots = np.asarray(slots, dtype=np.int64)
        if vertices.shape != slots.shape:
            raise InputError("vertices and slots must have the same shape")
        if vertices.size == 0:
            return np.empty(vertices.shape, dtype=np.int64)
        n, d = self._graph.n, self._graph.d
        if vertices.min() < 0 or vertices.max() >= n:
            raise InputError("vertex out of range in batch query")
        if slots.min() < 1 or slots.max() > d:
            raise InputError("slot out of range in batch query")
        self._count += vertices.size
        return self._graph.neighbor_table[vertices, slots - 1]

    def fork(self) -> "NeighborOracle":
        return NeighborOracle(self._graph)

    def merge(self, child: "NeighborOracle") -> None:
        if child._graph is not self._graph:
            raise InputError("cannot merge an oracle over a different graph")
        self._count += child._count


class VertexPartition:
    """Assignment of every vertex to a block ``0..num_blocks-1``."""

    __slots__ = ("assignment", "num_blocks")

    def __init__(self, assignment: Sequence[int]):
        assignment = tuple(int(b) for b in assignment)
        used = sorted(set(assignment))
        if used != list(range(len(used))):
            raise InputError("block ids must be contiguous from 0")
        self.assignment = assignment
        self.num_blocks = len(used)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int) -> "VertexPartition":
        assignment = [-1] * n
        for b, block in enumerate(blocks):
            for v in block:
                if assignment[v] != -1:
                    raise InputError(f"vertex {v} appears in two blocks")
                assignment[v] = b
        if -1 in assignment:
            raise InputError(f"vertex {assignment.index(-1)} is not covered by any block")
        return cls(assignment)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for v, b in enumerate(self.assignment):
            out[b].append(v)
        return out

    def __repr__(self):
        return f"VertexPartition(n={self.n}, blocks={self.num_blocks})"


def _check_partition(graph, partition):
    if partition.n != graph.n:
        raise InputError(f"partition covers {partition.n} vertices, graph has {graph.n}")


def crossing_edges(graph: BoundedDegreeGraph, partition: VertexPartition) -> int:
    """Number of edges whose endpoints lie in different blocks."""
    _check_partition(graph, partition)
    a = partition.assignment
    return sum(1 for u, v in graph.edges() if a[u] != a[v])


def component_sizes(graph: BoundedDegreeGraph, partition: VertexPartition) -> list[int]:
    """Block sizes in block-id order."""
    _check_partition(graph, partition)
    sizes = [0] * partition.num_blocks
    for b in partition.assignment:
        sizes[b] += 1
    return sizes


def validate_graph(graph: BoundedDegreeGraph) -> bool:
    """Re-check symmetry, degree bound, simplicity and canonical order."""
    try:
        BoundedDegreeGraph(graph.n, graph.d, graph.adjacency)
    except InputError:
        return False
    return all(list(nbrs) == sorted(nbrs) for nbrs in graph.adjacency)
