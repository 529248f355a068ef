"""Exact oracles for the analysis of the tester on small graphs.

Covers the projected chain ``M_S`` with per-hop expected lengths, conductance
and Lovasz-Simonovits curves in ``M_S``, the LS inequality and level-set decay
bound, clipped-norm profiles, the restricted-walk clipping inequality, and a
checker for anchored partitions. Every verifier returns a JSON-ready report;
failures are report entries, not exceptions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clip import clipped_norm_sq
from .errors import InputError, StrandedComponentError
from .graph import BoundedDegreeGraph, VertexPartition, crossing_edges
from .walks import (
    all_distributions,
    escape_probability,
    exact_distribution,
    lazy_transition_matrix,
    restricted_distribution,
)

DENSE_LIMIT = 2000
TOL = 1e-12


# -- projected chain --------------------------------------------------------


@dataclass(frozen=True)
class ProjectedChain:
    """The walk on ``G`` watched only when it sits in ``S``.

    ``P[i, j]`` is the total probability that the next visit to ``S`` after
    leaving ``S[i]`` lands on ``S[j]``; ``L[i, j]`` is the expected number of
    original steps of such a hop, conditioned on its endpoint (1.0 where
    ``P[i, j] == 0``). ``W = P * L`` holds the unconditioned length mass.
    """

    S: tuple[int, ...]
    P: np.ndarray
    L: np.ndarray
    W: np.ndarray
    n: int

    @property
    def size(self) -> int:
        return len(self.S)

    def index(self, v: int) -> int:
        k = int(np.searchsorted(self.S, v))
        if k >= len(self.S) or self.S[k] != v:
            raise InputError(f"vertex {v} is not in S")
        return k

    def hop_lengths(self) -> np.ndarray:
        """Expected length of one hop from each state."""
        return self.W.sum(axis=1)


def _stranded(graph, outside):
    sub, old = graph.induced_subgraph(outside)
    inside = np.ones(graph.n, dtype=bool)
    inside[outside] = False
    for comp in sub.components():
        verts = [old[i] for i in comp]
        if not any(inside[u] for v in verts for u in graph.neighbors(v)):
            raise StrandedComponentError(verts)


def project_chain(graph: BoundedDegreeGraph, S: Iterable[int]) -> ProjectedChain:
    """Exact ``M_S`` by solving the first-entry system through ``V \\ S``."""
    S = sorted(set(int(v) for v in S))
    if not S:
        raise InputError("S must be nonempty")
    if S[0] < 0 or S[-1] >= graph.n:
        raise InputError("S contains a vertex out of range")
    in_s = np.zeros(graph.n, dtype=bool)
    in_s[S] = True
    U = np.flatnonzero(~in_s)
    if len(U) > DENSE_LIMIT:
        raise InputError(f"projected chain solve is dense; |V \\ S| = {len(U)} exceeds {DENSE_LIMIT}")
    M = lazy_transition_matrix(graph)
    M_ss = M[S][:, S].toarray()
    if len(U) == 0:
        return ProjectedChain(tuple(S), M_ss, np.ones_like(M_ss), M_ss.copy(), graph.n)
    _stranded(graph, U.tolist())
    M_su = M[S][:, U].toarray()
    M_us = M[U][:, S].toarray()
    A = np.eye(len(U)) - M[U][:, U].toarray()
    # N = (I - M_UU)^-1; excursions of k inner steps have length k + 1
    X = np.linalg.solve(A, M_us)
    Y = np.linalg.solve(A, X)
    P = M_ss + M_su @ X
    W = M_ss + M_su @ (X + Y)
    L = np.ones_like(P)
    pos = P > 0
    L[pos] = W[pos] / P[pos]
    return ProjectedChain(tuple(S), P, L, W, graph.n)


def hop_distribution(chain: ProjectedChain, s: int, h: int) -> np.ndarray:
    """Distribution over ``S`` (in chain order) after ``h`` hops from ``s``."""
    if h < 0:
        raise InputError("hop count must be non-negative")
    q = np.zeros(chain.size)
    q[chain.index(s)] = 1.0
    for _ in range(h):
        q = q @ chain.P
    return q


def expected_walk_length(chain: ProjectedChain, h: int) -> float:
    """Expected original length of an ``h``-hop walk from the uniform start."""
    if h < 1:
        raise InputError("hop count must be at least 1")
    per_hop = chain.hop_lengths()
    q = np.full(chain.size, 1.0 / chain.size)
    total = 0.0
    for _ in range(h):
        total += float(q @ per_hop)
        q = q @ chain.P
    return total


# -- conductance and LS curves ----------------------------------------------


def conductance(chain: ProjectedChain, T: Iterable[int]) -> float:
    """Cross probability out of ``T`` over ``min(|T|, |S \\ T|)``."""
    idx = sorted({chain.index(int(v)) for v in T})
    if not idx or len(idx) == chain.size:
        raise InputError("conductance needs a nonempty proper subset of S")
    mask = np.zeros(chain.size, dtype=bool)
    mask[idx] = True
    return _conductance_mask(chain.P, mask)


def _conductance_mask(P, mask):
    k = int(mask.sum())
    cross = float(P[mask][:, ~mask].sum())
    return cross / min(k, len(mask) - k)


@dataclass(frozen=True)
class LSCurve:
    t: int
    order: tuple[int, ...]
    probs: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.order)

    def __call__(self, x: float) -> float:
        """Piecewise-linear value, with ``x`` clamped to ``[0, |S|]``."""
        x = min(max(float(x), 0.0), float(self.size))
        k = int(math.floor(x))
        if k >= self.size:
            return float(self.values[-1])
        frac = x - k
        return float(self.values[k] + frac * (self.values[k + 1] - self.values[k]))

    def level_set(self, k: int) -> tuple[frozenset[int], float]:
        """The ``k`` most probable states and the smallest probability among them."""
        if not 0 <= k <= self.size:
            raise InputError(f"level index {k} outside [0, {self.size}]")
        min_prob = float(self.probs[k - 1]) if k else 1.0
        return frozenset(self.order[:k]), min_prob

    def is_concave(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values, 2) <= tol))


def _curve_from(chain, q, t):
    # descending probability, ties by vertex id
    order = np.lexsort((np.asarray(chain.S), -q))
    probs = q[order]
    values = np.concatenate([[0.0], np.cumsum(probs)])
    return LSCurve(t, tuple(chain.S[i] for i in order), probs, values), order


def ls_curve(chain: ProjectedChain, s: int, t: int) -> LSCurve:
    return _curve_from(chain, hop_distribution(chain, s, t), t)[0]


def level_set(curve: LSCurve, k: int) -> tuple[frozenset[int], float]:
    return curve.level_set(k)


def _curves(chain, s, t_max):
    """Curves for hops ``0..t_max`` plus level-set conductances per curve."""
    q = hop_distribution(chain, s, 0)
    out = []
    for t in range(t_max + 1):
        curve, order = _curve_from(chain, q, t)
        phis = np.zeros(chain.size + 1)
        mask = np.zeros(chain.size, dtype=bool)
        for k in range(1, chain.size):
            mask[order[k - 1]] = True
            phis[k] = _conductance_mask(chain.P, mask)
        out.append((curve, phis))
        q = q @ chain.P
    return out


def verify_ls_inequality(chain: ProjectedChain, s: int, t_max: int, tol: float = 1e-10) -> dict:
    """Check the LS recurrence at every integer ``k`` and ``1 <= t <= t_max``."""
    if t_max < 1:
        raise InputError("t_max must be at least 1")
    curves = _curves(chain, s, t_max)
    n = chain.size
    violations = []
    worst = -math.inf
    checked = 0
    for t in range(1, t_max + 1):
        prev, (cur, phis) = curves[t - 1][0], curves[t]
        for k in range(n + 1):
            step = 2 * min(k, n - k) * phis[k]
            rhs = 0.5 * (prev(k - step) + prev(k + step))
            lhs = float(cur.values[k])
            worst = max(worst, lhs - rhs)
            checked += 1
            if lhs > rhs + tol:
                violations.append({"t": t, "k": k, "lhs": lhs, "rhs": rhs})
    return {
        "check": "ls_inequality",
        "start": int(s),
        "t_max": t_max,
        "states": n,
        "checked": checked,
        "max_excess": worst,
        "violations": violations,
        "ok": not violations,
    }


def verify_decay_bound(chain: ProjectedChain, s: int, t: int, p: float, tol: float = 1e-10) -> dict:
    """Check ``h_t'(k) <= sqrt(k) (1 - phi^2/2)^t' + p k`` for ``t' <= t``.

    ``phi`` is the smallest conductance over level sets ``L_{k,t'}`` with
    ``t' <= t`` whose minimum probability is at least ``p`` (1 if none), so the
    hypothesis holds by construction and is reported alongside.
    """
    n = chain.size
    if not p > 2 / n:
        raise InputError(f"decay bound needs p > 2/|S| = {2 / n:.6g}, got {p}")
    curves = _curves(chain, s, t)
    phi = 1.0
    for curve, phis in curves:
        for k in range(1, n):
            if curve.probs[k - 1] >= p:
                phi = min(phi, float(phis[k]))
    violations = []
    worst = -math.inf
    for tt, (curve, _) in enumerate(curves):
        for k in range(n + 1):
            rhs = math.sqrt(k) * (1 - phi * phi / 2) ** tt + p * k
            lhs = float(curve.values[k])
            worst = max(worst, lhs - rhs)
            if lhs > rhs + tol:
                violations.append({"t": tt, "k": k, "lhs": lhs, "rhs": rhs})
    return {
        "check": "decay_bound",
        "start": int(s),
        "t": t,
        "p": p,
        "phi": phi,
        "max_excess": worst,
        "violations": violations,
        "ok": not violations,
    }


# -- clipped norms ----------------------------------------------------------


@dataclass(frozen=True)
class ClippedNormProfile:
    walk_length: int
    xi: float
    values: np.ndarray

    def median(self) -> float:
        return float(np.median(self.values))

    def fraction_above(self, threshold: float) -> float:
        return float(np.mean(self.values >= threshold))

    def as_dict(self) -> dict[int, float]:
        return {v: float(x) for v, x in enumerate(self.values)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "clipped_norm_sq"])
        for v, x in enumerate(self.values):
            w.writerow([v, repr(float(x))])
        return buf.getvalue()

    def summary(self) -> dict:
        q = np.quantile(self.values, [0.0, 0.1, 0.5, 0.9, 1.0])
        return {
            "walk_length": self.walk_length,
            "xi": self.xi,
            "vertices": int(self.values.size),
            "min": float(q[0]),
            "p10": float(q[1]),
            "median": float(q[2]),
            "p90": float(q[3]),
            "max": float(q[4]),
        }


def clipped_norm_profile(graph: BoundedDegreeGraph, ell: int, xi: float) -> ClippedNormProfile:
    """``||clip(p_{v,ell}, xi)||^2`` for every vertex ``v``, exactly."""
    if graph.n > DENSE_LIMIT * 4:
        raise InputError(f"profile uses dense n x n distributions; n = {graph.n} is too large")
    rows = all_distributions(graph, ell)
    values = np.array([clipped_norm_sq(row[row > 0], xi) for row in rows])
    return ClippedNormProfile(ell, xi, values)


def verify_restricted_clip_claim(graph: BoundedDegreeGraph, C: Iterable[int], s: int, t: int, sigma: float) -> bool:
    """``||clip(p_{s,t}, sigma - eta)||^2 >= ||clip(q_{s,t}, sigma)||^2`` with
    ``q`` the walk restricted to ``C`` and ``eta`` its escape probability."""
    return restricted_clip_report(graph, C, s, t, sigma)["ok"]


def restricted_clip_report(graph, C, s, t, sigma, tol=TOL) -> dict:
    C = sorted(set(int(v) for v in C))
    eta = escape_probability(graph, C, s, t)
    if not sigma > eta:
        raise InputError(f"need sigma > eta; sigma = {sigma}, eta = {eta}")
    if not sigma < 1:
        raise InputError(f"sigma must be below 1, got {sigma}")
    lhs = clipped_norm_sq(exact_distribution(graph, s, t), sigma - eta)
    rhs = clipped_norm_sq(restricted_distribution(graph, C, s, t), sigma)
    return {"s": int(s), "t": t, "sigma": sigma, "eta": eta, "lhs": lhs, "rhs": rhs, "ok": lhs >= rhs - tol}


# -- partitions ---------------------------------------------------------------


def _cumulative_mass(graph, anchors, T):
    """Columns ``sum_{t<T} p_{a,t}`` for each anchor ``a`` (as an n x k array)."""
    M = lazy_transition_matrix(graph)
    X = np.zeros((graph.n, len(anchors)))
    X[anchors, np.arange(len(anchors))] = 1.0
    if T <= 1 << 14:
        acc = np.zeros_like(X)
        for _ in range(T):
            acc += X
            X = M @ X
        return acc
    if graph.n > DENSE_LIMIT:
        raise InputError(f"horizon {T} needs dense powers; n = {graph.n} is too large")
    # binary doubling on (sum_{t<m} M^t, M^m)
    D = M.toarray()
    total, power = np.zeros_like(D), np.eye(graph.n)
    block_sum, block_pow = np.eye(graph.n), D
    m = T
    while m:
        if m & 1:
            total = total + power @ block_sum
            power = power @ block_pow
        block_sum = block_sum + block_pow @ block_sum
        block_pow = block_pow @ block_pow
        m >>= 1
    return total @ X


def verify_partition_theorem(
    graph: BoundedDegreeGraph, ell: int, c: float, partition: VertexPartition, anchors
) -> dict:
    """Check an anchored partition against the decomposition bounds.

    (a) every ``v`` in block ``i`` has ``sum_{t < 16 l^{c+1}} p_{anchor(i),t}(v)
    >= 1/(8 l^{c+1})``; (b) at most ``8 d n sqrt(c l^{-1/5} ln l)`` edges cross.
    """
    if partition.n != graph.n:
        raise InputError("partition does not cover the graph")
    blocks = partition.blocks()
    anchors = [int(anchors[i]) for i in range(len(blocks))]
    for i, a in enumerate(anchors):
        if not 0 <= a < graph.n:
            raise InputError(f"anchor {a} of block {i} out of range")
    horizon = int(math.ceil(16 * ell ** (c + 1)))
    need = 1 / (8 * ell ** (c + 1))
    mass = _cumulative_mass(graph, anchors, horizon)
    block_min = [float(mass[b, i].min()) for i, b in enumerate(blocks)]
    failing = [i for i, m in enumerate(block_min) if m < need]
    cross = crossing_edges(graph, partition)
    bound = 8 * graph.d * graph.n * math.sqrt(c * ell ** -0.2 * math.log(ell)) if ell > 1 else 0.0
    return {
        "check": "partition",
        "walk_length": ell,
        "c": c,
        "horizon": horizon,
        "anchor_bound": need,
        "block_min_mass": block_min,
        "failing_blocks": failing,
        "anchors_ok": not failing,
        "crossing_edges": cross,
        "crossing_bound": bound,
        "crossing_ok": cross <= bound,
        "ok": not failing and cross <= bound,
    }


def hop_norm_fraction(graph: BoundedDegreeGraph, S: Iterable[int], ell: int, c: float) -> dict:
    """Fraction of ``s`` in ``S`` with ``||hop-h distribution||_inf >= 1/(2 l^{c+1})``,
    ``h = floor(l^{1/5})``. Measured, not asserted."""
    chain = project_chain(graph, S)
    h = max(1, int(math.floor(ell**0.2 + 1e-12)))
    bound = 1 / (2 * ell ** (c + 1))
    Q = np.linalg.matrix_power(chain.P, h)
    norms = Q.max(axis=1)
    return {
        "check": "hop_norm",
        "hops": h,
        "bound": bound,
        "fraction": float(np.mean(norms >= bound)),
        "min_norm": float(norms.min()),
    }


# -- batteries ----------------------------------------------------------------


def _random_instance(rng, n_max, d_choices=(3, 4)):
    from .generators import random_bounded

    n = int(rng.integers(4, n_max + 1))
    d = int(rng.choice(d_choices))
    p = float(rng.uniform(0.05, 0.5))
    return random_bounded(n, d, p, seed=int(rng.integers(2**31)), connected=True)


def kac_battery(seed: int = 0, instances: int = 20, n_max: int = 50, tol: float = 1e-6) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(instances):
        g = _random_instance(rng, n_max)
        k = int(rng.integers(1, g.n + 1))
        S = sorted(rng.choice(g.n, size=k, replace=False).tolist())
        h = int(rng.integers(1, 6))
        got = expected_walk_length(project_chain(g, S), h)
        want = h * g.n / len(S)
        cases.append({"n": g.n, "S": len(S), "h": h, "expected": want, "computed": got, "ok": abs(got - want) <= tol})
    return _summary("kac", seed, cases)


def ls_battery(seed: int = 0, instances: int = 20, n_max: int = 30, t_max: int = 8) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(instances):
        g = _random_instance(rng, n_max)
        chain = project_chain(g, range(g.n))
        s = int(rng.integers(g.n))
        rep = verify_ls_inequality(chain, s, t_max)
        cases.append({"n": g.n, "s": s, "violations": len(rep["violations"]), "ok": rep["ok"]})
    return _summary("ls", seed, cases)


def decay_battery(seed: int = 0, instances: int = 20, n_max: int = 30, t_max: int = 8) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(instances):
        g = _random_instance(rng, n_max)
        if g.n < 5:
            continue
        S = range(g.n) if rng.random() < 0.5 else sorted(rng.choice(g.n, size=max(5, g.n // 2), replace=False))
        chain = project_chain(g, S)
        s = int(chain.S[int(rng.integers(chain.size))])
        p = float(rng.uniform(2 / chain.size, 1.0)) + 1e-9
        rep = verify_decay_bound(chain, s, int(rng.integers(1, t_max + 1)), p)
        cases.append({"n": g.n, "S": chain.size, "p": p, "phi": rep["phi"], "violations": len(rep["violations"]), "ok": rep["ok"]})
    return _summary("decay", seed, cases)


def clip_claim_battery(seed: int = 0, instances: int = 50, n_max: int = 40) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < instances:
        g = _random_instance(rng, n_max)
        k = int(rng.integers(1, g.n + 1))
        C = sorted(rng.choice(g.n, size=k, replace=False).tolist())
        s = int(rng.choice(C))
        t = int(rng.integers(0, 9))
        eta = escape_probability(g, C, s, t)
        if eta >= 0.99:
            continue
        sigma = float(rng.uniform(eta, 1.0))
        if not eta < sigma < 1:
            continue
        rep = restricted_clip_report(g, C, s, t, sigma)
        cases.append({"n": g.n, "C": len(C), **rep})
    return _summary("clip-claim", seed, cases)


def profile_battery(seed: int = 0, ell: int = 32, xi: float = 0.25) -> dict:
    from .generators import grid, random_regular

    planar = clipped_norm_profile(grid(32, 32), ell, xi)
    expander = clipped_norm_profile(random_regular(1024, 3, seed=seed), ell, xi)
    ratio = planar.median() / expander.median()
    return {
        "battery": "profile",
        "seed": seed,
        "grid": planar.summary(),
        "expander": expander.summary(),
        "median_ratio": ratio,
        "ok": ratio >= 4,
    }


def partition_battery(seed: int = 0, ell: int = 4, c: float = 1.0) -> dict:
    from .generators import disjoint_cliques, grid

    cases = []
    g = disjoint_cliques(5, 25)
    part = VertexPartition.from_blocks(g.components(), g.n)
    anchors = [b[0] for b in part.blocks()]
    cases.append({"instance": "disjoint_cliques(5,25)", **verify_partition_theorem(g, ell, c, part, anchors)})
    g = grid(16, 16)
    blocks = [[r * 16 + q for r in range(br, br + 4) for q in range(bc, bc + 4)] for br in range(0, 16, 4) for bc in range(0, 16, 4)]
    part = VertexPartition.from_blocks(blocks, g.n)
    anchors = [b[5] for b in part.blocks()]
    cases.append({"instance": "grid(16,16) 4x4 tiles", **verify_partition_theorem(g, ell, c, part, anchors)})
    singles = VertexPartition(list(range(g.n)))
    cases.append(
        {"instance": "grid(16,16) singletons", **verify_partition_theorem(g, ell, c, singles, list(range(g.n)))}
    )
    for case in cases:
        # the crossing bound is asymptotic in l; only the anchor mass is a hard check here
        case["ok"] = case["anchors_ok"]
        case.pop("block_min_mass")
    return _summary("partition", seed, cases)


BATTERIES = {
    "kac": kac_battery,
    "ls": ls_battery,
    "decay": decay_battery,
    "clip-claim": clip_claim_battery,
    "profile": profile_battery,
    "partition": partition_battery,
}


def _summary(name, seed, cases):
    failures = sum(not c["ok"] for c in cases)
    return {"battery": name, "seed": seed, "instances": len(cases), "failures": failures, "ok": failures == 0, "cases": cases}


def run_battery(name: str, seed: int = 0) -> dict:
    if name not in BATTERIES:
        raise InputError(f"unknown battery {name!r}; expected one of {', '.join(BATTERIES)}")
    return BATTERIES[name](seed=seed)
