"""Lazy random walks: sampling through the oracle and exact distributions.

From ``v`` the lazy walk moves to each neighbor with probability ``1/(2d)`` and
stays put otherwise. One step draws a single uniform ``u`` and issues exactly
one neighbor query: ``j = floor(2d*u)`` picks slot ``j mod d + 1`` and the
walk moves iff ``j < d`` and the slot is non-empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graph import BOTTOM, BoundedDegreeGraph, NeighborOracle
from .rng import as_generator


@dataclass(frozen=True)
class WalkTrace:
    start: int
    steps: tuple[int, ...]

    @property
    def end(self) -> int:
        return self.steps[-1]

    def __len__(self):
        return len(self.steps)

    def to_csv_row(self) -> str:
        return ",".join(str(v) for v in self.steps)


class ProbabilityVector:
    """Sparse non-negative vector over vertex ids (no stored zeros)."""

    __slots__ = ("indices", "values")

    def __init__(self, indices, values):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.shape != values.shape or indices.ndim != 1:
            raise InputError("indices and values must be 1-d arrays of equal length")
        if values.size and values.min() < 0:
            raise InputError("probability vector entries must be non-negative")
        keep = values > 0
        indices, values = indices[keep], values[keep]
        order = np.argsort(indices, kind="stable")
        indices, values = indices[order], values[order]
        if indices.size > 1 and np.any(indices[1:] == indices[:-1]):
            raise InputError("duplicate vertex ids in probability vector")
        if values.sum() > 1 + 1e-12:
            raise InputError(f"probability vector has total mass {values.sum():.17g} > 1")
        self.indices = indices
        self.values = values

    @classmethod
    def from_dense(cls, x) -> "ProbabilityVector":
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x)
        return cls(idx, x[idx])

    @classmethod
    def from_dict(cls, mapping: Mapping[int, float]) -> "ProbabilityVector":
        items = sorted(mapping.items())
        return cls([k for k, _ in items], [v for _, v in items])

    @classmethod
    def indicator(cls, v: int) -> "ProbabilityVector":
        return cls([v], [1.0])

    def to_dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.indices] = self.values
        return out

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.indices, self.values)}

    def total(self) -> float:
        return float(self.values.sum())

    def norm_sq(self) -> float:
        return float(np.dot(self.values, self.values))

    def max(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def __getitem__(self, v: int) -> float:
        k = np.searchsorted(self.indices, v)
        if k < self.indices.size and self.indices[k] == v:
            return float(self.values[k])
        return 0.0

    def __len__(self):
        return int(self.indices.size)

    def __repr__(self):
        return f"ProbabilityVector(support={len(self)}, total={self.total():.6g})"


# -- sampling ---------------------------------------------------------------


def lazy_step(oracle: NeighborOracle, v: int, rng) -> int:
    rng = as_generator(rng)
    d = oracle.d
    j = int(rng.random() * 2 * d)
    u = oracle.query(v, j % d + 1)
    return u if (j < d and u is not None) else v


def _advance(oracle, pos, u, d):
    j = np.minimum((u * (2 * d)).astype(np.int64), 2 * d - 1)
    nbr = oracle.query_many(pos, j % d + 1)
    move = (j < d) & (nbr != BOTTOM)
    return np.where(move, nbr, pos)


def sample_walks(oracle: NeighborOracle, starts, t: int, rng, record: bool = False):
    """Run one lazy walk of length ``t`` from each entry of ``starts``.

    Walk ``k`` consumes column ``k`` of a ``(t, w)`` block of uniforms.
    Returns endpoints, or the ``(t+1, w)`` position matrix if ``record``.
    """
    if t < 0:
        raise InputError(f"walk length must be non-negative, got {t}")
    rng = as_generator(rng)
    pos = np.array(starts, dtype=np.int64).reshape(-1)
    if pos.size and (pos.min() < 0 or pos.max() >= oracle.n):
        raise InputError("start vertex out of range")
    draws = rng.random((t, pos.size))
    d = oracle.d
    if record:
        out = np.empty((t + 1, pos.size), dtype=np.int64)
        out[0] = pos
        for step in range(t):
            pos = _advance(oracle, pos, draws[step], d)
            out[step + 1] = pos
        return out
    for step in range(t):
        pos = _advance(oracle, pos, draws[step], d)
    return pos


def sample_walk(oracle: NeighborOracle, s: int, t: int, rng) -> WalkTrace:
    traj = sample_walks(oracle, [s], t, rng, record=True)[:, 0]
    return WalkTrace(int(s), tuple(int(v) for v in traj))


# -- exact distributions ----------------------------------------------------


def lazy_transition_matrix(graph: BoundedDegreeGraph) -> sp.csr_matrix:
    """Sparse symmetric lazy transition matrix ``M``."""
    n, d = graph.n, graph.d
    rows, cols = [], []
    for u, v in graph.edges():
        rows += [u, v]
        cols += [v, u]
    data = np.full(len(rows), 1.0 / (2 * d))
    off = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    stay = 1.0 - graph.degrees() / (2.0 * d)
    return (off + sp.diags(stay)).tocsr()


def _check_vertex(graph, s):
    if not 0 <= s < graph.n:
        raise InputError(f"vertex {s} out of range [0, {graph.n})")


def _power(matrix, p, t):
    # M is symmetric, so row-vector propagation p M equals M p
    for _ in range(t):
        p = matrix @ p
    return p


def exact_distribution(graph: BoundedDegreeGraph, s: int, t: int, matrix=None) -> ProbabilityVector:
    """Exact ``p_{s,t}`` by ``t`` sparse applications of the lazy rule."""
    _check_vertex(graph, s)
    if t < 0:
        raise InputError(f"walk length must be non-negative, got {t}")
    if matrix is None:
        matrix = lazy_transition_matrix(graph)
    p = np.zeros(graph.n)
    p[s] = 1.0
    return ProbabilityVector.from_dense(_power(matrix, p, t))


def all_distributions(graph: BoundedDegreeGraph, t: int) -> np.ndarray:
    """Dense ``(n, n)`` array whose row ``s`` is ``p_{s,t}``."""
    matrix = lazy_transition_matrix(graph)
    out = np.eye(graph.n)
    for _ in range(t):
        out = np.asarray(matrix @ out)
    return out.T.copy()


def _subset_index(graph, C):
    members = sorted(set(int(v) for v in C))
    for v in members:
        _check_vertex(graph, v)
    return members, {v: i for i, v in enumerate(members)}


def _restricted_matrices(graph, members, index):
    """Substochastic (cut edges dropped) and restricted (cut edges folded
    into the self-loop) transition matrices on ``C``."""
    d = graph.d
    k = len(members)
    rows, cols = [], []
    inside = np.zeros(k)
    for i, v in enumerate(members):
        for u in graph.neighbors(v):
            j = index.get(u)
            if j is not None:
                rows.append(i)
                cols.append(j)
                inside[i] += 1
    off = sp.csr_matrix((np.full(len(rows), 1.0 / (2 * d)), (rows, cols)), shape=(k, k))
    degs = np.array([graph.degree(v) for v in members], dtype=float)
    absorbing = (off + sp.diags(1.0 - degs / (2 * d))).tocsr()
    restricted = (off + sp.diags(1.0 - inside / (2 * d))).tocsr()
    return absorbing, restricted


def restricted_distribution(graph: BoundedDegreeGraph, C: Iterable[int], s: int, t: int) -> ProbabilityVector:
    """Distribution of the walk restricted to ``C``: each cut edge becomes a
    self-loop of the same probability. Indexed by original vertex ids."""
    members, index = _subset_index(graph, C)
    if s not in index:
        raise InputError(f"start vertex {s} is not in C")
    _, restricted = _restricted_matrices(graph, members, index)
    p = np.zeros(len(members))
    p[index[s]] = 1.0
    p = _power(restricted.T, p, t)
    idx = np.flatnonzero(p)
    return ProbabilityVector(np.asarray(members)[idx], p[idx])


def escape_probability(graph: BoundedDegreeGraph, C: Iterable[int], s: int, t: int) -> float:
    """Probability that a ``t``-step lazy walk from ``s`` visits a vertex outside ``C``."""
    members, index = _subset_index(graph, C)
    if s not in index:
        raise InputError(f"start vertex {s} is not in C")
    absorbing, _ = _restricted_matrices(graph, members, index)
    p = np.zeros(len(members))
    p[index[s]] = 1.0
    p = _power(absorbing.T, p, t)
    return float(min(1.0, max(0.0, 1.0 - p.sum())))
