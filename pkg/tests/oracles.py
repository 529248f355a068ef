"""Independent reference computations shared by the unit and acceptance tests."""

import itertools

import numpy as np
from scipy.optimize import minimize


def clip_by_subsets(x, xi):
    """Exact clip by enumerating which coordinates are cut to a common level.

    Every candidate is feasible and the optimum is one of them, so the
    minimum-norm candidate is the optimum. Exponential in ``len(x)``.
    """
    x = np.asarray(x, dtype=float)
    if xi >= x.sum():
        return np.zeros_like(x)
    masks = np.array(list(itertools.product((False, True), repeat=x.size)))
    sizes = masks.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = (masks @ x - xi) / sizes
    cand = np.where(masks, theta[:, None], x)
    ok = (theta >= 0) & np.all(~masks | (theta[:, None] <= x), axis=1)
    ok[0] = xi == 0  # the empty cut removes nothing
    norms = np.where(ok, np.einsum("ij,ij->i", cand, cand), np.inf)
    return cand[int(np.argmin(norms))]


def clip_by_theta_search(x, xi, grid=64, rounds=12):
    """Smallest feasible level ``theta`` for ``min(x, theta)`` by repeated grid refinement."""
    x = np.asarray(x, dtype=float)
    if xi >= x.sum():
        return np.zeros_like(x)
    lo, hi = 0.0, float(x.max())
    for _ in range(rounds):
        thetas = np.linspace(lo, hi, grid + 1)
        removed = np.maximum(x[None, :] - thetas[:, None], 0).sum(axis=1)
        first = thetas[int(np.argmax(removed <= xi))]
        lo, hi = max(lo, first - (hi - lo) / grid), first
    return np.minimum(x, hi)


def clip_by_slsqp(x, xi):
    """Generic constrained minimisation; good to about 1e-6."""
    x = np.asarray(x, dtype=float)
    cons = [{"type": "ineq", "fun": lambda y: xi - np.sum(x - y), "jac": lambda y: np.ones_like(y)}]
    res = minimize(
        lambda y: np.dot(y, y),
        x.copy(),
        jac=lambda y: 2 * y,
        bounds=[(0, v) for v in x],
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    return res.x


def brute_lazy_distribution(graph, s, t):
    """``p_{s,t}`` by summing over every sequence of slot draws."""
    d = graph.d
    out = np.zeros(graph.n)
    w = (2 * d) ** -t
    for draws in itertools.product(range(2 * d), repeat=t):
        v = s
        for j in draws:
            nbrs = graph.neighbors(v)
            if j < len(nbrs):
                v = nbrs[j]
        out[v] += w
    return out


def naive_has_minor(graph, pattern_edges, r):
    """Literal enumeration of labelings ``V -> {unused, 0..r-1}``, checked with networkx.

    Only for a handful of vertices: ``(r+1)^n`` labelings.
    """
    import networkx as nx

    g = graph.to_networkx()
    for labels in itertools.product(range(-1, r), repeat=graph.n):
        sets = [[v for v in range(graph.n) if labels[v] == h] for h in range(r)]
        if any(not s for s in sets):
            continue
        if not all(nx.is_connected(g.subgraph(s)) for s in sets):
            continue
        if all(any(g.has_edge(a, b) for a in sets[i] for b in sets[j]) for i, j in pattern_edges):
            return True
    return False


def excursion_sums(graph, S, max_len=64, tol=None):
    """``P`` and ``W`` of the projected chain by summing excursions term by term.

    An excursion with ``k`` inner steps contributes ``M_SU M_UU^k M_US`` to
    ``P`` and ``(k + 2)`` times that to ``W``; direct ``S -> S`` steps add
    ``M_SS`` to both. Stops after ``max_len`` inner steps, or once the
    remaining mass is below ``tol`` when that is given.
    """
    from minorwalk.walks import lazy_transition_matrix

    M = lazy_transition_matrix(graph).toarray()
    S = sorted(S)
    U = [v for v in range(graph.n) if v not in set(S)]
    P = M[np.ix_(S, S)].copy()
    W = P.copy()
    if not U:
        return P, W
    su, uu, us = M[np.ix_(S, U)], M[np.ix_(U, U)], M[np.ix_(U, S)]
    front = su.copy()
    k = 0
    while k <= max_len or (tol is not None and front.sum() > tol):
        term = front @ us
        P += term
        W += (k + 2) * term
        front = front @ uu
        k += 1
    return P, W
