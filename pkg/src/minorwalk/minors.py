"""Exact H-minor containment for small host graphs.

``has_minor`` decides containment with a branch-set growth search over bitmask
states, after sound reductions: deletion of degree <= 1 vertices (pattern
minimum degree >= 2), suppression of degree-2 vertices (pattern minimum
degree >= 3), splitting into components or blocks, a planarity shortcut for
non-planar patterns, and splitting along 2-cuts for 3-connected patterns. A
contraction heuristic tries to find a witness first on larger pieces. When the search budget runs out it raises
:class:`MinorBudgetExceeded` instead of answering.

``brute_force_has_minor`` is an independent enumeration over branch-set
assignments, capped at 10 host vertices.
"""

from __future__ import annotations

import functools
import heapq
from dataclasses import dataclass

import networkx as nx
import numpy as np
from networkx.algorithms import isomorphism

from .errors import InputError, MinorBudgetExceeded
from .graph import BoundedDegreeGraph

DEFAULT_VERTEX_BUDGET = 10_000
DEFAULT_NODE_BUDGET = 200_000
BRUTE_FORCE_CAP = 10


@dataclass(frozen=True)
class MinorPattern:
    name: str
    r: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.r < 1:
            raise InputError("a pattern needs at least one vertex")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.r and 0 <= v < self.r):
                raise InputError(f"pattern edge ({u}, {v}) out of range")
            if u == v:
                raise InputError("pattern graphs must not have self-loops")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"parallel pattern edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def from_graph(cls, graph: BoundedDegreeGraph, name: str = "custom") -> "MinorPattern":
        return cls(name, graph.n, tuple(graph.edges()))

    @property
    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.r)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.r))
        g.add_edges_from(self.edges)
        return g

    def to_json(self):
        return {"name": self.name, "r": self.r, "edges": [list(e) for e in self.edges]}


def _complete(r):
    return tuple((i, j) for i in range(r) for j in range(i + 1, r))


BUILTIN_PATTERNS = {
    "K3": MinorPattern("K3", 3, _complete(3)),
    "K4": MinorPattern("K4", 4, _complete(4)),
    "K5": MinorPattern("K5", 5, _complete(5)),
    "K33": MinorPattern("K33", 6, tuple((i, j) for i in range(3) for j in range(3, 6))),
    "C4": MinorPattern("C4", 4, ((0, 1), (1, 2), (2, 3), (0, 3))),
}


def get_pattern(spec) -> MinorPattern:
    """A built-in name (K3, K4, K5, K33, C4), a graph file path, or a JSON dict."""
    if isinstance(spec, MinorPattern):
        return spec
    if isinstance(spec, dict):
        return MinorPattern(spec.get("name", "custom"), int(spec["r"]), tuple(tuple(e) for e in spec["edges"]))
    if spec in BUILTIN_PATTERNS:
        return BUILTIN_PATTERNS[spec]
    from .graphio import load_graph

    return MinorPattern.from_graph(load_graph(spec), name=str(spec))


@dataclass(frozen=True)
class MinorModel:
    branch_sets: tuple[frozenset[int], ...]

    def to_json(self):
        return [sorted(b) for b in self.branch_sets]


@dataclass
class MinorResult:
    found: bool
    model: MinorModel | None = None
    method: str = ""
    nodes: int = 0

    def __bool__(self):
        return self.found


def validate_model(graph: BoundedDegreeGraph, pattern: MinorPattern, model: MinorModel) -> bool:
    sets = model.branch_sets
    if len(sets) != pattern.r:
        return False
    owner = {}
    for i, b in enumerate(sets):
        if not b:
            return False
        for v in b:
            if not 0 <= v < graph.n or v in owner:
                return False
            owner[v] = i
    for i, b in enumerate(sets):
        start = next(iter(b))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in graph.neighbors(v):
                if u in b and u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(b):
            return False
    touching = set()
    for v, i in owner.items():
        for u in graph.neighbors(v):
            j = owner.get(u)
            if j is not None and j != i:
                touching.add((min(i, j), max(i, j)))
    return all(e in touching for e in pattern.edges)


def shrink_model(graph, pattern, model: MinorModel) -> MinorModel:
    """Greedily drop vertices while the model stays valid."""
    sets = [set(b) for b in model.branch_sets]
    changed = True
    while changed:
        changed = False
        for i in range(len(sets)):
            for v in sorted(sets[i]):
                if len(sets[i]) == 1:
                    break
                sets[i].discard(v)
                trial = MinorModel(tuple(frozenset(s) for s in sets))
                if validate_model(graph, pattern, trial):
                    changed = True
                else:
                    sets[i].add(v)
    return MinorModel(tuple(frozenset(s) for s in sets))


# -- bitmask helpers --------------------------------------------------------


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(mask):
    return bin(mask).count("1")


def _nbr_union(mask, nbr):
    out = 0
    while mask:
        low = mask & -mask
        out |= nbr[low.bit_length() - 1]
        mask ^= low
    return out


def _components(mask, nbr):
    comps = []
    while mask:
        comp = mask & -mask
        frontier = comp
        while frontier:
            grow = _nbr_union(frontier, nbr) & mask & ~comp
            comp |= grow
            frontier = grow
        comps.append(comp)
        mask &= ~comp
    return comps


# -- brute force oracle -----------------------------------------------------


def _label_order(pattern):
    adj = pattern.adjacency
    order, placed = [], set()
    remaining = sorted(range(pattern.r), key=lambda h: (-len(adj[h]), h))
    while remaining:
        nxt = next((h for h in remaining if adj[h] & placed), remaining[0])
        remaining.remove(nxt)
        order.append(nxt)
        placed.add(nxt)
    return order


def brute_force_has_minor(graph: BoundedDegreeGraph, pattern: MinorPattern) -> bool:
    """Exhaustive search over assignments of host vertices to branch labels
    (or unused), checking connectivity, disjointness and required adjacencies.
    Hard cap of 10 host vertices."""
    n = graph.n
    if n > BRUTE_FORCE_CAP:
        raise InputError(f"brute force is limited to {BRUTE_FORCE_CAP} vertices, got {n}")
    if pattern.r > n:
        return False
    nbr = [sum(1 << u for u in graph.neighbors(v)) for v in range(n)]
    full = (1 << n) - 1
    connected = [m for m in range(1, full + 1) if len(_components(m, nbr)) == 1]
    reach = {m: _nbr_union(m, nbr) for m in connected}
    adj = pattern.adjacency
    order = _label_order(pattern)
    sets = [0] * pattern.r

    def feasible(used):
        free = full & ~used
        comps = _components(free, nbr)
        for h in order:
            if sets[h]:
                continue
            need = [reach[sets[j]] for j in adj[h] if sets[j]]
            if not any(all(c & nb for nb in need) for c in comps):
                return False
        return True

    def place(k, used):
        if k == len(order):
            return True
        if not feasible(used):
            return False
        h = order[k]
        need = [sets[j] for j in adj[h] if sets[j]]
        for m in connected:
            if m & used:
                continue
            rm = reach[m]
            if all(rm & s for s in need):
                sets[h] = m
                if place(k + 1, used | m):
                    return True
                sets[h] = 0
        return False

    return place(0, 0)


# -- work graphs and reductions ----------------------------------------------


class _Work:
    """Mutable adjacency with, per vertex, the original vertices it stands for."""

    def __init__(self, adj: dict[int, set[int]], members: dict[int, frozenset[int]]):
        self.adj = adj
        self.members = members

    @classmethod
    def from_graph(cls, graph: BoundedDegreeGraph, vertices=None):
        verts = range(graph.n) if vertices is None else vertices
        keep = set(verts)
        adj = {v: {u for u in graph.neighbors(v) if u in keep} for v in keep}
        return cls(adj, {v: frozenset([v]) for v in keep})

    def sub(self, vertices) -> "_Work":
        keep = set(vertices)
        return _Work({v: self.adj[v] & keep for v in keep}, {v: self.members[v] for v in keep})

    @property
    def n(self):
        return len(self.adj)

    def num_edges(self):
        return sum(len(a) for a in self.adj.values()) // 2

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(self.adj)
        g.add_edges_from((u, v) for u, a in self.adj.items() for v in a if u < v)
        return g

    def reduce(self, min_pattern_degree: int):
        if min_pattern_degree < 2:
            return
        queue = list(self.adj)
        while queue:
            v = queue.pop()
            if v not in self.adj:
                continue
            nb = self.adj[v]
            if len(nb) <= 1:
                for u in nb:
                    self.adj[u].discard(v)
                    queue.append(u)
                del self.adj[v]
                del self.members[v]
            elif len(nb) == 2 and min_pattern_degree >= 3:
                u, w = sorted(nb)
                self.adj[u].discard(v)
                self.adj[w].discard(v)
                self.adj[u].add(w)
                self.adj[w].add(u)
                self.members[u] = self.members[u] | self.members[v]
                del self.adj[v]
                del self.members[v]
                queue += [u, w]

    def lift(self, assignment: dict[int, int], r: int) -> MinorModel:
        sets = [set() for _ in range(r)]
        for x, h in assignment.items():
            sets[h] |= self.members[x]
        return MinorModel(tuple(frozenset(s) for s in sets))


@functools.lru_cache(maxsize=64)
def _pattern_info(pattern: MinorPattern):
    g = pattern.to_networkx()
    degs = pattern.degrees()
    # automorphism orbits
    parent = list(range(pattern.r))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for mapping in isomorphism.GraphMatcher(g, g).isomorphisms_iter():
        for a, b in mapping.items():
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    orbit_reps = sorted({find(h) for h in range(pattern.r)}, key=lambda h: (-degs[h], h))
    connected = pattern.r == 1 or nx.is_connected(g)
    biconnected = pattern.r >= 3 and nx.is_biconnected(g)
    planar = nx.check_planarity(g)[0]
    triconnected = pattern.r >= 4 and nx.node_connectivity(g) >= 3
    has_cycle = len(pattern.edges) >= pattern.r - nx.number_connected_components(g) + 1
    return {
        "min_degree": min(degs),
        "orbit_reps": tuple(orbit_reps),
        "connected": connected,
        "biconnected": biconnected,
        "triconnected": triconnected,
        "planar": planar,
        "has_cycle": has_cycle,
    }


# -- contraction heuristic ---------------------------------------------------


def _contraction_heuristic(work: _Work, pattern: MinorPattern, rng, attempts=3) -> dict | None:
    """Contract greedily towards ``r`` vertices, checking for ``H`` as a
    subgraph once the graph is small. Returns a work-vertex -> label map."""
    hg = pattern.to_networkx()
    min_deg = _pattern_info(pattern)["min_degree"]
    if min_deg < 1:
        return None
    check_at = 2 * pattern.r + 6
    for _ in range(attempts):
        adj = {v: set(a) for v, a in work.adj.items()}
        groups = {v: {v} for v in adj}
        # lazy min-heap on degree; random keys break ties
        heap = [(len(a), rng.random(), v) for v, a in adj.items()]
        heapq.heapify(heap)
        while len(adj) >= pattern.r:
            if len(adj) <= check_at:
                found = _monomorphism(adj, hg)
                if found is not None:
                    return {x: found[g] for g in found for x in groups[g]}
            if len(adj) == pattern.r:
                break
            low, _, v = heapq.heappop(heap)
            if v not in adj or len(adj[v]) != low:
                continue
            touched = set(adj[v])
            if low <= 1 and min_deg >= 2:
                for u in adj[v]:
                    adj[u].discard(v)
                del adj[v]
                del groups[v]
            else:
                best = min(len(adj[u] & adj[v]) for u in adj[v])
                opts = sorted(u for u in adj[v] if len(adj[u] & adj[v]) == best)
                u = opts[int(rng.integers(len(opts)))]
                for x in adj[v]:
                    adj[x].discard(v)
                    if x != u:
                        adj[x].add(u)
                        adj[u].add(x)
                del adj[v]
                gv, gu = groups.pop(v), groups[u]
                if len(gu) < len(gv):
                    gu, gv = gv, gu
                gu |= gv
                groups[u] = gu
            for x in touched:
                heapq.heappush(heap, (len(adj[x]), rng.random(), x))
    return None


def _monomorphism(adj, hg):
    g = nx.Graph()
    g.add_nodes_from(adj)
    g.add_edges_from((u, v) for u, a in adj.items() for v in a if u < v)
    matcher = isomorphism.GraphMatcher(g, hg)
    for mapping in matcher.subgraph_monomorphisms_iter():
        return mapping
    return None


# -- exact growth search -----------------------------------------------------


class _GrowSearch:
    """Branch-set growth over bitmask states.

    At each state pick an unsatisfied pattern edge ``(a, b)`` with a non-empty
    side; any completion must either grow a side by an adjacent free vertex or
    root the empty side next to the non-empty one, so branching over those
    moves is exhaustive. States are memoised.
    """

    def __init__(self, work: _Work, pattern: MinorPattern, budget: int, counter: list):
        # higher-degree vertices first so early roots carry the most options
        verts = sorted(work.adj, key=lambda v: (-len(work.adj[v]), v))
        self.verts = verts
        index = {v: i for i, v in enumerate(verts)}
        self.nbr = [sum(1 << index[u] for u in work.adj[v]) for v in verts]
        self.k = len(verts)
        self.pattern = pattern
        self.hadj = pattern.adjacency
        self.budget = budget
        self.counter = counter
        self.seen = set()

    def run(self):
        info = _pattern_info(self.pattern)
        full = (1 << self.k) - 1
        for h0 in info["orbit_reps"]:
            for v in range(self.k):
                sets = [0] * self.pattern.r
                sets[h0] = 1 << v
                free = full & ~((1 << (v + 1)) - 1)
                res = self._dfs(sets, free)
                if res is not None:
                    return {self.verts[i]: h for h, m in enumerate(res) for i in _bits(m)}
        return None

    def _dfs(self, sets, free):
        self.counter[0] += 1
        if self.counter[0] > self.budget:
            raise MinorBudgetExceeded(f"minor search exceeded {self.budget} nodes on {self.k} vertices")
        key = (tuple(sets), free)
        if key in self.seen:
            return None
        self.seen.add(key)
        r = len(sets)
        empty = [h for h in range(r) if not sets[h]]
        if len(empty) > _popcount(free):
            return None
        nbr = self.nbr
        reach = [_nbr_union(s, nbr) if s else 0 for s in sets]
        comps = _components(free, nbr)
        best, best_opts = None, None
        for a, b in self.pattern.edges:
            sa, sb = sets[a], sets[b]
            if sa and sb:
                if reach[a] & sb:
                    continue
                if not any(c & reach[a] and c & reach[b] for c in comps):
                    return None
                opts = _popcount(free & reach[a]) + _popcount(free & reach[b])
            elif sa or sb:
                x = a if sa else b
                opts = 2 * _popcount(free & reach[x])
            else:
                continue
            if opts == 0:
                return None
            if best is None or opts < best_opts:
                best, best_opts = (a, b), opts
        for h in empty:
            need = [reach[j] for j in self.hadj[h] if sets[j]]
            if need and not any(all(c & nb for nb in need) for c in comps):
                return None
        if best is None:
            if not empty:
                return list(sets)
            h = empty[0]
            for x in _bits(free):
                sets[h] = 1 << x
                res = self._dfs(sets, free & ~(1 << x))
                sets[h] = 0
                if res is not None:
                    return res
            return None
        a, b = best
        if sets[a] and sets[b]:
            moves = [(a, x) for x in _bits(free & reach[a])] + [(b, y) for y in _bits(free & reach[b])]
        else:
            x, e = (a, b) if sets[a] else (b, a)
            cand = list(_bits(free & reach[x]))
            moves = [(e, y) for y in cand] + [(x, y) for y in cand]
        for h, y in moves:
            old = sets[h]
            sets[h] = old | (1 << y)
            res = self._dfs(sets, free & ~(1 << y))
            sets[h] = old
            if res is not None:
                return res
        return None


# -- driver -------------------------------------------------------------------


def _is_forest(work: _Work):
    g = work.to_networkx()
    return work.num_edges() == work.n - nx.number_connected_components(g)


def _solve_part(work: _Work, pattern, info, budget, counter, rng, split=True):
    """Returns a model in original vertex ids, or None if the part has no minor."""
    r, m_h = pattern.r, len(pattern.edges)
    work.reduce(info["min_degree"])
    if work.n < r or work.num_edges() < m_h:
        return None
    if split and info["connected"]:
        g = work.to_networkx()
        if info["biconnected"]:
            parts = [p for p in nx.biconnected_components(g) if len(p) >= r]
        else:
            parts = [p for p in nx.connected_components(g) if len(p) >= r]
        if len(parts) != 1 or len(parts[0]) != work.n:
            for p in sorted(parts, key=len):
                model = _solve_part(work.sub(p), pattern, info, budget, counter, rng)
                if model is not None:
                    return model
            return None
    if info["has_cycle"] and _is_forest(work):
        return None
    if not info["planar"] and nx.check_planarity(work.to_networkx())[0]:
        return None
    assignment = None
    if work.n > 8:
        assignment = _contraction_heuristic(work, pattern, rng)
        if assignment is not None:
            return work.lift(assignment, r)
    if info["triconnected"] and work.n > 8:
        cut = _two_cut(work)
        if cut is not None:
            return _solve_two_sum(work, cut, pattern, info, budget, counter, rng)
    assignment = _GrowSearch(work, pattern, budget, counter).run()
    return None if assignment is None else work.lift(assignment, r)


def _two_cut(work: _Work):
    """A separation pair ``(x, y)`` of a 2-connected work graph, or None."""
    g = work.to_networkx()
    for x in sorted(g):
        h = g.copy()
        h.remove_node(x)
        art = sorted(nx.articulation_points(h))
        if art:
            return x, art[0]
    return None


def _solve_two_sum(work, cut, pattern, info, budget, counter, rng):
    # A 3-connected pattern is a minor of a 2-sum iff it is a minor of one of
    # the summands with the virtual edge xy; the virtual edge is realised by
    # contracting an x-y path through another side into x.
    x, y = cut
    g = work.to_networkx()
    g.remove_nodes_from(cut)
    sides = sorted((sorted(c) for c in nx.connected_components(g)), key=len)
    for i, side in enumerate(sides):
        part = work.sub(side + [x, y])
        if y not in part.adj[x]:
            other = sides[1] if i == 0 else sides[0]
            path = nx.shortest_path(work.sub(other + [x, y]).to_networkx(), x, y)
            extra = frozenset().union(*(work.members[p] for p in path[1:-1]))
            part.members[x] = part.members[x] | extra
            part.adj[x].add(y)
            part.adj[y].add(x)
        model = _solve_part(part, pattern, info, budget, counter, rng)
        if model is not None:
            return model
    return None


def has_minor(
    graph: BoundedDegreeGraph,
    pattern: MinorPattern,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
    node_budget: int = DEFAULT_NODE_BUDGET,
    seed: int = 0,
) -> MinorResult:
    """Decide whether ``graph`` contains ``pattern`` as a minor.

    Returns a :class:`MinorResult` (truthy iff found) carrying a validated
    :class:`MinorModel` on success. Raises :class:`MinorBudgetExceeded` if the
    host exceeds ``vertex_budget`` or the search exceeds ``node_budget`` states.
    """
    if graph.n > vertex_budget:
        raise MinorBudgetExceeded(f"host has {graph.n} vertices, budget is {vertex_budget}")
    r = pattern.r
    if r > graph.n or len(pattern.edges) > graph.num_edges:
        return MinorResult(False, method="counting")
    degs = pattern.degrees()
    isolated = [h for h in range(r) if degs[h] == 0]
    if len(isolated) == r:
        model = MinorModel(tuple(frozenset([v]) for v in range(r)))
        return MinorResult(True, model, method="trivial")
    counter = [0]
    if isolated:
        return _with_isolated(graph, pattern, isolated, vertex_budget, node_budget, seed)
    info = _pattern_info(pattern)
    rng = np.random.default_rng(seed)
    model = _solve_part(_Work.from_graph(graph), pattern, info, node_budget, counter, rng)
    return _finish(graph, pattern, model, counter)


def _with_isolated(graph, pattern, isolated, vertex_budget, node_budget, seed):
    # isolated pattern vertices only need spare host vertices
    r = pattern.r
    core_ids = [h for h in range(r) if h not in set(isolated)]
    relabel = {h: i for i, h in enumerate(core_ids)}
    core = MinorPattern(
        pattern.name + "-core", len(core_ids), tuple((relabel[u], relabel[v]) for u, v in pattern.edges)
    )
    res = has_minor(graph, core, vertex_budget, node_budget, seed)
    if not res:
        return MinorResult(False, method=res.method, nodes=res.nodes)
    small = shrink_model(graph, core, res.model)
    used = set().union(*small.branch_sets)
    spare = [v for v in range(graph.n) if v not in used]
    if len(spare) >= len(isolated):
        sets = [None] * r
        for h in core_ids:
            sets[h] = small.branch_sets[relabel[h]]
        for h, v in zip(isolated, spare):
            sets[h] = frozenset([v])
        return _finish(graph, pattern, MinorModel(tuple(sets)), [res.nodes])
    # the shrunken model is not minimum; fall back to searching the full pattern
    counter = [res.nodes]
    work = _Work.from_graph(graph)
    assignment = _GrowSearch(work, pattern, node_budget, counter).run()
    return _finish(graph, pattern, None if assignment is None else work.lift(assignment, r), counter)


def _finish(graph, pattern, model, counter):
    if model is None:
        return MinorResult(False, nodes=counter[0])
    if not validate_model(graph, pattern, model):
        raise AssertionError("internal error: minor search produced an invalid model")
    return MinorResult(True, model, nodes=counter[0])
