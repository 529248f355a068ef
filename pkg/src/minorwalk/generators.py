"""Seeded instance generators.

All generators return canonical :class:`BoundedDegreeGraph` objects. Pass ``d``
to declare a degree bound looser than the natural one.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .graph import BoundedDegreeGraph

KINDS = ("grid", "torus", "binary_tree", "ladder", "random_regular", "disjoint_cliques", "random_bounded")


def _positive(name, value, minimum=1):
    if not isinstance(value, (int, np.integer)) or value < minimum:
        raise InputError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _finish(n, edges, natural_d, d):
    if d is None:
        d = natural_d
    return BoundedDegreeGraph.from_edges(n, edges, d)


def grid(rows, cols, d=None):
    rows, cols = _positive("rows", rows), _positive("cols", cols)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return _finish(rows * cols, edges, 4, d)


def torus(rows, cols, d=None):
    rows, cols = _positive("rows", rows, 3), _positive("cols", cols, 3)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            edges.append((v, r * cols + (c + 1) % cols))
            edges.append((v, ((r + 1) % rows) * cols + c))
    return _finish(rows * cols, edges, 4, d)


def binary_tree(n, d=None):
    """Complete binary tree in heap order: children of ``i`` are ``2i+1, 2i+2``."""
    n = _positive("n", n)
    edges = [((i - 1) // 2, i) for i in range(1, n)]
    return _finish(n, edges, 3, d)


def ladder(length, d=None):
    """The 2 x ``length`` grid."""
    return grid(2, _positive("length", length), d=3 if d is None else d)


def random_regular(n, deg, seed=0, d=None):
    import networkx as nx

    n, deg = _positive("n", n), _positive("deg", deg)
    if deg >= n or (n * deg) % 2:
        raise InputError(f"no simple {deg}-regular graph on {n} vertices")
    g = nx.random_regular_graph(deg, n, seed=int(seed) % (2**32))
    return _finish(n, g.edges(), deg, d)


def disjoint_cliques(r, n, d=None):
    r, n = _positive("r", r, 2), _positive("n", n)
    if n % r:
        raise InputError(f"clique size {r} does not divide n={n}")
    edges = [(b + i, b + j) for b in range(0, n, r) for i in range(r) for j in range(i + 1, r)]
    return _finish(n, edges, r - 1, d)


def random_bounded(n, d, p=0.5, seed=0, connected=True):
    """Random graph with maximum degree ``d``.

    Starts from a random spanning tree (when ``connected``) and then offers each
    remaining vertex pair, in random order, with probability ``p`` subject to
    the degree cap.
    """
    n, d = _positive("n", n), _positive("d", d)
    if connected and n > 2 and d < 2:
        raise InputError("a connected graph on more than 2 vertices needs d >= 2")
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=np.int64)
    edges = set()

    def add(u, v):
        edges.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1

    if connected:
        order = rng.permutation(n)
        for i in range(1, n):
            v = int(order[i])
            # attach to an earlier vertex with spare capacity
            cands = [int(u) for u in order[:i] if deg[u] < d]
            add(v, cands[int(rng.integers(len(cands)))])
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    for k in rng.permutation(len(pairs)):
        u, v = pairs[k]
        if deg[u] < d and deg[v] < d and rng.random() < p:
            add(u, v)
    return BoundedDegreeGraph.from_edges(n, sorted(edges), d)


def generate(kind: str, seed: int = 0, **params) -> BoundedDegreeGraph:
    """Dispatch to a generator by name. Only the random kinds consume ``seed``."""
    try:
        if kind == "grid":
            return grid(**params)
        if kind == "torus":
            return torus(**params)
        if kind == "binary_tree":
            return binary_tree(**params)
        if kind == "ladder":
            return ladder(**params)
        if kind == "random_regular":
            return random_regular(seed=seed, **params)
        if kind == "disjoint_cliques":
            return disjoint_cliques(**params)
        if kind == "random_bounded":
            return random_bounded(seed=seed, **params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {kind}: {exc}") from None
    raise InputError(f"unknown generator kind {kind!r}; expected one of {', '.join(KINDS)}")


def parse_instance(text: str) -> tuple[str, dict]:
    """Parse ``kind:key=val,key=val`` into a kind and integer/float params."""
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise InputError(f"malformed parameter {item!r} in {text!r}")
        try:
            params[key.strip()] = int(val)
        except ValueError:
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise InputError(f"parameter {key} is not numeric: {val!r}") from None
    return kind.strip(), params
