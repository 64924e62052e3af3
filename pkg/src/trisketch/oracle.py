"""Brute-force ground truth: triangle enumeration and a sketch replayer.

Both oracles exist to check the fast paths, so they deliberately share no
traversal code with them. Triangle enumeration intersects out-neighbor
lists along the degree orientation; the sketch replayer walks the graph
vertex-major (anchor by anchor, layers outermost) instead of the
builder's edge-major scan, and accumulates with its own inline
arithmetic. Within one anchor both traversals see that anchor's arcs in
ascending mate order, which is exactly the condition under which slot
snapshots, class triples, and bucket occupancies must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .errors import InstanceTooLarge
from .graphio import OrientedGraph, UndirectedGraph, orient
from .seedrand import SeedBundle

NAIVE_REPLAY_EDGE_CAP = 10_000


def enumerate_triangles(g: UndirectedGraph) -> List[Tuple[int, int, int]]:
    """All triangles as sorted triples, lexicographically ordered.

    Intersects N+(x) and N+(y) per oriented arc x -> y, so each triangle
    is found exactly once at its orientation-minimal vertex.
    """
    og = orient(g)
    out_sets = [set(lst) for lst in og.out_neighbors]
    found = []
    for x in range(g.n):
        for y in og.out_neighbors[x]:
            common = out_sets[x] & out_sets[y]
            for z in common:
                found.append(tuple(sorted((x, y, z))))
    found.sort()
    return found


def has_triangle(g: UndirectedGraph) -> bool:
    og = orient(g)
    out_sets = [set(lst) for lst in og.out_neighbors]
    for x in range(g.n):
        for y in og.out_neighbors[x]:
            if out_sets[x] & out_sets[y]:
                return True
    return False


@dataclass
class ReplaySummary:
    """State snapshot produced by the vertex-major replay."""

    slots: Dict[Tuple[int, int], Dict[int, Tuple[int, int, int]]] = field(default_factory=dict)
    sigma: Dict[Tuple[int, int, int, int], Tuple[int, int, int]] = field(default_factory=dict)
    loads: Dict[Tuple[int, int, int, int], int] = field(default_factory=dict)
    bin_triples: Dict[Tuple, Tuple[int, int, int]] = field(default_factory=dict)
    bin_counts: Dict[Tuple, int] = field(default_factory=dict)


def naive_sketch_replay(g: OrientedGraph, bundle: SeedBundle) -> ReplaySummary:
    """Recompute slot, class, and probed-bucket state vertex-major."""
    if g.m > NAIVE_REPLAY_EDGE_CAP:
        raise InstanceTooLarge(f"replay oracle capped at {NAIVE_REPLAY_EDGE_CAP} edges")
    params = bundle.params
    p = params.p_field
    key_bits = params.key_bits
    summary = ReplaySummary()

    for x in range(g.n):
        out = g.out_neighbors[x]
        if not out:
            continue
        d_x = g.d(x)
        m_x = params.slots_for_degree(d_x)
        for i in range(1, params.layers + 1):
            horizon = params.level_horizon(d_x, i)
            kx = bundle.prefix_key(i, x)
            for y in out:
                if not bundle.keep_coin(x, y, i):
                    continue
                ident = bundle.id_hash(y)
                sgn = bundle.sign_hash(x, y, i)
                sidx = bundle.slot_index(x, y, i, m_x)
                slot_tab = summary.slots.setdefault((i, x), {})
                a, b, c = slot_tab.get(sidx, (0, 0, 0))
                a = (a + sgn) % p
                b = (b + sgn * ident) % p
                c = (c + sgn * ident * ident) % p
                slot_tab[sidx] = (a, b, c)
                if a == 0 or (b * b - a * c) % p != 0 or (b - a * ident) % p != 0:
                    continue
                ky = bundle.prefix_key(i, y)
                delta = bundle.pk_offset(i, x, y)
                r = 0
                while r <= horizon and (r == 0 or (kx >> (key_bits - r)) == (ky >> (key_bits - r))):
                    b_bits = kx >> (key_bits - r) if r else 0
                    ckey = (i, x, r, b_bits)
                    s0, s1, s2 = summary.sigma.get(ckey, (0, 0, 0))
                    summary.sigma[ckey] = ((s0 + a) % p, (s1 + b) % p, (s2 + c) % p)
                    summary.loads[ckey] = summary.loads.get(ckey, 0) + 1
                    for t in range(1, params.groups + 1):
                        j = bundle.bucket(i, r, t, delta)
                        j_star = (params.buckets - j) % params.buckets
                        pair = (j, j_star) if j <= j_star else (j_star, j)
                        if pair not in bundle.probed_pair_set(i, x, r, b_bits, t):
                            continue
                        bkey = (i, x, r, b_bits, t, j)
                        b0, b1, b2 = summary.bin_triples.get(bkey, (0, 0, 0))
                        summary.bin_triples[bkey] = ((b0 + a) % p, (b1 + b) % p, (b2 + c) % p)
                        summary.bin_counts[bkey] = summary.bin_counts.get(bkey, 0) + 1
                    r += 1
    return summary


def compare_with_state(summary: ReplaySummary, state) -> List[str]:
    """Differences between a replay summary and a built sketch state."""
    diffs: List[str] = []
    built_slots = {
        (i, x, sidx): triple
        for (i, x), tab in state.slots.items()
        for sidx, triple in tab.items()
        if triple != (0, 0, 0)
    }
    replay_slots = {
        (i, x, sidx): triple
        for (i, x), tab in summary.slots.items()
        for sidx, triple in tab.items()
        if triple != (0, 0, 0)
    }
    if built_slots != replay_slots:
        for key in sorted(set(built_slots) | set(replay_slots)):
            if built_slots.get(key) != replay_slots.get(key):
                diffs.append(f"slot {key}: built={built_slots.get(key)} replay={replay_slots.get(key)}")
    if state.sigma != summary.sigma:
        for key in sorted(set(state.sigma) | set(summary.sigma)):
            if state.sigma.get(key) != summary.sigma.get(key):
                diffs.append(f"class {key}: built={state.sigma.get(key)} replay={summary.sigma.get(key)}")
    if state.loads != summary.loads:
        for key in sorted(set(state.loads) | set(summary.loads)):
            if state.loads.get(key) != summary.loads.get(key):
                diffs.append(f"load {key}: built={state.loads.get(key)} replay={summary.loads.get(key)}")
    built_bins = {}
    built_counts = {}
    for gkey, table in state.bins.items():
        for j, rec in table.items():
            built_bins[(*gkey, j)] = rec.triple
            built_counts[(*gkey, j)] = rec.count
    if built_bins != summary.bin_triples or built_counts != summary.bin_counts:
        for key in sorted(set(built_bins) | set(summary.bin_triples)):
            if built_bins.get(key) != summary.bin_triples.get(key):
                diffs.append(
                    f"bin triple {key}: built={built_bins.get(key)} replay={summary.bin_triples.get(key)}"
                )
        for key in sorted(set(built_counts) | set(summary.bin_counts)):
            if built_counts.get(key) != summary.bin_counts.get(key):
                diffs.append(
                    f"bin count {key}: built={built_counts.get(key)} replay={summary.bin_counts.get(key)}"
                )
    return diffs
