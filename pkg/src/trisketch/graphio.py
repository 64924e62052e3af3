"""Graph representation, orientation, file I/O, and test-corpus generators.

Graphs are simple and undirected, vertices are 0..n-1. Orientation uses
the fixed total order (degree, vertex id) lexicographic: every edge
{x, y} becomes the arc x -> y for the smaller endpoint under that order,
so arcs always point from lower degree to higher degree (ids break ties).
The file format is plain text: a "n m" header line, then one "u v" line
per edge. The writer emits the canonical form (u < v, lines sorted);
the parser accepts any order but rejects loops and duplicates.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import IdOutOfRange, InfeasibleParams, NotSimple, ParseError


@dataclass
class UndirectedGraph:
    n: int
    edges: List[Tuple[int, int]]  # canonical (u, v) with u < v, sorted
    adj: List[List[int]] = field(repr=False)  # sorted neighbor lists
    planted: Optional[Tuple[int, int, int]] = None  # generator-recorded triangle

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def is_adjacent(self, v: int, w: int) -> bool:
        """Membership of {v, w} in E via bisection on the shorter list."""
        if v == w:
            return False
        if not (0 <= v < self.n and 0 <= w < self.n):
            return False
        a, b = (v, w) if len(self.adj[v]) <= len(self.adj[w]) else (w, v)
        lst = self.adj[a]
        k = bisect_left(lst, b)
        return k < len(lst) and lst[k] == b

    @property
    def m(self) -> int:
        return len(self.edges)


def build_graph(n: int, edge_pairs, planted=None) -> UndirectedGraph:
    """Validate and canonicalize an edge list into an UndirectedGraph."""
    seen = set()
    edges: List[Tuple[int, int]] = []
    adj: List[List[int]] = [[] for _ in range(n)]
    for u, v in edge_pairs:
        if u == v:
            raise NotSimple(f"self-loop at {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise IdOutOfRange(f"edge ({u}, {v}) outside [0, {n})")
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise NotSimple(f"duplicate edge {e}")
        seen.add(e)
        edges.append(e)
        adj[u].append(v)
        adj[v].append(u)
    edges.sort()
    for lst in adj:
        lst.sort()
    return UndirectedGraph(n=n, edges=edges, adj=adj, planted=planted)


def parse_graph(text: str) -> UndirectedGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty graph document")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"header must be 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"non-integer header {lines[0]!r}") from None
    if n < 0 or m < 0:
        raise ParseError("negative n or m")
    if len(lines) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(lines) - 1}")
    pairs = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ParseError(f"malformed edge line {ln!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"non-integer edge line {ln!r}") from None
    return build_graph(n, pairs)


def format_graph(g: UndirectedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def read_graph(path: str) -> UndirectedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: UndirectedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))


@dataclass
class OrientedGraph:
    base: UndirectedGraph
    out_neighbors: List[List[int]]  # sorted by mate id; arcs x -> y with x before y

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    def d(self, v: int) -> int:
        return self.base.degree(v)

    def d_plus(self, v: int) -> int:
        return len(self.out_neighbors[v])

    def arcs(self):
        """Canonical arc stream: ascending anchor, then ascending mate."""
        for x in range(self.base.n):
            for y in self.out_neighbors[x]:
                yield x, y

    def is_adjacent(self, v: int, w: int) -> bool:
        return self.base.is_adjacent(v, w)


def orient(g: UndirectedGraph) -> OrientedGraph:
    """Orient each edge from the (degree, id)-smaller endpoint."""
    out: List[List[int]] = [[] for _ in range(g.n)]
    for u, v in g.edges:
        if (g.degree(u), u) < (g.degree(v), v):
            out[u].append(v)
        else:
            out[v].append(u)
    for lst in out:
        lst.sort()
    return OrientedGraph(base=g, out_neighbors=out)


def _max_edges(n: int) -> int:
    return n * (n - 1) // 2


def gen_er_sparse(n: int, avg_degree: float, seed: int) -> UndirectedGraph:
    """Uniform simple graph with exactly ceil(n * avg_degree / 2) edges."""
    if n < 0 or avg_degree < 0:
        raise InfeasibleParams("n and avg_degree must be nonnegative")
    m = math.ceil(n * avg_degree / 2)
    if m > _max_edges(n):
        raise InfeasibleParams(f"m={m} exceeds simple-graph bound for n={n}")
    rng = random.Random(seed)
    chosen = set()
    while len(chosen) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        chosen.add((u, v) if u < v else (v, u))
    return build_graph(n, sorted(chosen))


def gen_triangle_free(n: int, m: int, seed: int) -> UndirectedGraph:
    """Random bipartite graph on balanced parts; triangle-free by parity."""
    if n < 2 or m < 0:
        raise InfeasibleParams("need n >= 2 and m >= 0")
    left = n // 2
    if m > left * (n - left):
        raise InfeasibleParams(f"m={m} exceeds bipartite bound {left * (n - left)}")
    rng = random.Random(seed)
    chosen = set()
    while len(chosen) < m:
        u = rng.randrange(left)
        v = rng.randrange(left, n)
        chosen.add((u, v))
    return build_graph(n, sorted(chosen))


def gen_planted_triangle(n: int, m: int, seed: int) -> UndirectedGraph:
    """Graph with one designated triangle plus triangle-averse distractors.

    Distractor edges are rejection-sampled to avoid closing further
    triangles; when the rejection budget runs dry (dense requests) the
    closing edges are admitted, so extra triangles are possible but the
    planted triple is always present and recorded.
    """
    if n < 3 or m < 3:
        raise InfeasibleParams("need n >= 3 and m >= 3")
    if m > _max_edges(n):
        raise InfeasibleParams(f"m={m} exceeds simple-graph bound for n={n}")
    rng = random.Random(seed)
    tri = sorted(rng.sample(range(n), 3))
    a, b, c = tri
    chosen = {(a, b), (a, c), (b, c)}
    adj = [set() for _ in range(n)]
    for u, v in chosen:
        adj[u].add(v)
        adj[v].add(u)
    budget = 200 * m
    allow_closing = False
    while len(chosen) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        e = (u, v) if u < v else (v, u)
        if e in chosen:
            continue
        budget -= 1
        if budget < 0:
            allow_closing = True
        if not allow_closing and adj[u] & adj[v]:
            continue
        chosen.add(e)
        adj[u].add(v)
        adj[v].add(u)
    return build_graph(n, sorted(chosen), planted=(a, b, c))
