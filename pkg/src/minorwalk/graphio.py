"""Plain-text graph files.

Format: first non-comment line ``n d``; then one ``u v`` line per undirected
edge with ``u < v``. Blank lines and ``#`` comments are ignored. Files are
written in canonical (lexicographic) edge order.
"""

from __future__ import annotations

import os

from .errors import GraphFormatError
from .graph import BoundedDegreeGraph


def format_graph(graph: BoundedDegreeGraph) -> str:
    lines = [f"{graph.n} {graph.d}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def save_graph(graph: BoundedDegreeGraph, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_graph(graph))


def _ints(line, lineno, what):
    parts = line.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected two integers for {what}, got {line!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"non-integer {what}: {line!r}", lineno) from None


def parse_graph(text: str) -> BoundedDegreeGraph:
    header = None
    adj: list[set[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            n, d = _ints(line, lineno, "header 'n d'")
            if n < 0:
                raise GraphFormatError(f"negative vertex count {n}", lineno)
            if d < 1:
                raise GraphFormatError(f"degree bound must be positive, got {d}", lineno)
            header = (n, d)
            adj = [set() for _ in range(n)]
            continue
        n, d = header
        u, v = _ints(line, lineno, "edge")
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}", lineno)
        if u > v:
            raise GraphFormatError(f"edge must be written with u < v, got {u} {v}", lineno)
        if v in adj[u]:
            raise GraphFormatError(f"duplicate edge {u} {v}", lineno)
        adj[u].add(v)
        adj[v].add(u)
        for x in (u, v):
            if len(adj[x]) > d:
                raise GraphFormatError(f"vertex {x} exceeds degree bound d={d}", lineno)
    if header is None:
        raise GraphFormatError("missing header line 'n d'")
    return BoundedDegreeGraph(header[0], header[1], adj)


def load_graph(path) -> BoundedDegreeGraph:
    if not os.path.exists(path):
        raise GraphFormatError(f"no such graph file: {path}")
    with open(path, encoding="ascii") as fh:
        return parse_graph(fh.read())
