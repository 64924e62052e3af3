"""Single-pass sketch construction over the oriented edge stream.

One streaming scan in canonical arc order (ascending anchor, then mate)
fills, for every layer a retention coin admits the arc into:

  * the anchor's slot triple at the hashed slot index,
  * on a slot that is one-sparse and decodes to the mate id (the
    materialization gate), the class triples of every prefix level where
    anchor and mate keys agree, and
  * per bucket group, the bin triple of the arc's pair-key bucket when
    that bucket belongs to the group's probed complementary pairs.

Bins remember their first arc as an immutable witness. A collision is
registered the first time both sides of a probed complementary pair hold
witnesses (for a self-complementary bucket: the second accumulation into
it); the one-shot flag per (class, group, pair) makes registration
happen at most once, which is what caps executed checks at
c0 * groups per class.

Slot arrays and bin tables are sparse dictionaries allocated on first
touch; an absent entry reads as the zero triple, so the layout is
observationally identical to eager preallocation.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .errors import InactiveClass, ParamMismatch
from .graphio import OrientedGraph, format_graph
from .metrics import Counters
from .seedrand import SeedBundle

Witness = Tuple[int, int, int]  # (anchor, mate, slot index)
ClassKey = Tuple[int, int, int, int]  # (layer, anchor, level, prefix bits)
GroupKey = Tuple[int, int, int, int, int]  # class key + group


class BinRecord:
    """One probed bucket: moment triple, first-arrival witness, multiplicity."""

    __slots__ = ("triple", "witness", "count")

    def __init__(self):
        self.triple: Tuple[int, int, int] = (0, 0, 0)
        self.witness: Optional[Witness] = None
        self.count = 0


@dataclass(frozen=True)
class CollisionEntry:
    group: int
    j: int  # bucket of the arc that completed the pair
    j_star: int  # its complementary bucket
    wit_v: Witness  # witness of bucket j
    wit_w: Witness  # witness of bucket j_star

    @property
    def beta(self) -> int:
        return min(self.j, self.j_star)


def graph_fingerprint(g: OrientedGraph) -> str:
    return hashlib.blake2b(format_graph(g.base).encode(), digest_size=16).hexdigest()


class SketchState:
    """Everything the build pass materializes, keyed for replay comparison."""

    def __init__(self, bundle: SeedBundle, g: OrientedGraph, counters: Optional[Counters]):
        self.params = bundle.params
        self.seed_fingerprint = bundle.fingerprint()
        self.graph_fingerprint = graph_fingerprint(g)
        self.slots: Dict[Tuple[int, int], Dict[int, Tuple[int, int, int]]] = {}
        self.sigma: Dict[ClassKey, Tuple[int, int, int]] = {}
        self.loads: Dict[ClassKey, int] = {}
        self.bins: Dict[GroupKey, Dict[int, BinRecord]] = {}
        self.collisions: Dict[GroupKey, List[CollisionEntry]] = {}
        self.paired: Set[Tuple] = set()
        self.counters = counters
        self.gate_log: Optional[List[Tuple[int, int, int, int, Tuple[int, int, int]]]] = None

    def active_class_keys(self) -> List[ClassKey]:
        return sorted(self.sigma.keys())

    def slot_triple(self, i: int, x: int, sidx: int) -> Tuple[int, int, int]:
        return self.slots.get((i, x), {}).get(sidx, (0, 0, 0))

    def collision_items(self):
        """(class key, group, entry) triples in canonical class/group order,
        entries in registration order."""
        for gkey in sorted(self.collisions.keys()):
            for entry in self.collisions[gkey]:
                yield gkey[:4], gkey[4], entry


def build_sketches(
    g: OrientedGraph,
    bundle: SeedBundle,
    with_counters: bool = True,
    instrument: bool = False,
) -> SketchState:
    """Run the streaming pass and return the filled sketch state."""
    params = bundle.params
    if params.n != g.n:
        raise ParamMismatch(f"params built for n={params.n}, graph has n={g.n}")

    ctr = Counters() if with_counters else None
    state = SketchState(bundle, g, ctr)
    if instrument:
        state.gate_log = []

    p = params.p_field
    layers = params.layers
    groups = params.groups
    t_buckets = params.buckets
    key_bits = params.key_bits
    slots = state.slots
    sigma = state.sigma
    loads = state.loads
    bins = state.bins
    collisions = state.collisions
    paired = state.paired

    t0 = time.perf_counter()
    if ctr is not None:
        ctr.d_plus = [g.d_plus(x) for x in range(g.n)]

    for x, y in g.arcs():
        kept_layers = bundle.keep_layers(x, y)
        if not kept_layers:
            continue
        d_x = g.d(x)
        m_x = params.slots_for_degree(d_x)
        id_y = bundle.id_hash(y)
        if ctr is not None:
            ctr.k_e[(x, y)] = len(kept_layers)
        for i in kept_layers:
            if ctr is not None:
                ctr.kept[(x, i)] = ctr.kept.get((x, i), 0) + 1

            sidx = bundle.slot_index(x, y, i, m_x)
            sgn = bundle.sign_hash(x, y, i)
            layer_slots = slots.get((i, x))
            if layer_slots is None:
                layer_slots = {}
                slots[(i, x)] = layer_slots
            a, b, c = layer_slots.get(sidx, (0, 0, 0))
            if sgn == 1:
                a = (a + 1) % p
                b = (b + id_y) % p
                c = (c + id_y * id_y) % p
            else:
                a = (a - 1) % p
                b = (b - id_y) % p
                c = (c - id_y * id_y) % p
            triple = (a, b, c)
            layer_slots[sidx] = triple

            # Materialization gate: the slot must be one-sparse and decode
            # to this arc's mate id at this instant of the scan.
            if a == 0 or (b * b) % p != (a * c) % p or b != (a * id_y) % p:
                continue
            if ctr is not None:
                ctr.w_total += 1
            if state.gate_log is not None:
                state.gate_log.append((i, x, y, sidx, triple))

            kx = bundle.prefix_key(i, x)
            ky = bundle.prefix_key(i, y)
            xor = kx ^ ky
            lcp = key_bits if xor == 0 else key_bits - xor.bit_length()
            r_max = min(params.level_horizon(d_x, i), lcp)
            delta = bundle.pk_offset(i, x, y)
            witness: Witness = (x, y, sidx)

            for r in range(r_max + 1):
                b_bits = kx >> (key_bits - r) if r else 0
                ckey = (i, x, r, b_bits)
                sig = sigma.get(ckey)
                if sig is None:
                    sigma[ckey] = triple
                    loads[ckey] = 1
                    if ctr is not None:
                        row = ctr.level(i, r)
                        row[0] += 1
                        row[1] += 1
                else:
                    sigma[ckey] = ((sig[0] + a) % p, (sig[1] + b) % p, (sig[2] + c) % p)
                    loads[ckey] += 1
                    if ctr is not None:
                        ctr.level(i, r)[1] += 1

                for t in range(1, groups + 1):
                    j = bundle.bucket(i, r, t, delta)
                    j_star = (t_buckets - j) % t_buckets
                    lo, hi = (j, j_star) if j <= j_star else (j_star, j)
                    if (lo, hi) not in bundle.probed_pair_set(i, x, r, b_bits, t):
                        continue
                    gkey = (i, x, r, b_bits, t)
                    table = bins.get(gkey)
                    if table is None:
                        table = {}
                        bins[gkey] = table
                    rec = table.get(j)
                    if rec is None:
                        rec = BinRecord()
                        table[j] = rec
                    ta, tb, tc = rec.triple
                    rec.triple = ((ta + a) % p, (tb + b) % p, (tc + c) % p)
                    rec.count += 1
                    if rec.witness is None:
                        rec.witness = witness

                    pair_id = (i, x, r, b_bits, t, lo)
                    if pair_id in paired:
                        continue
                    if j != j_star:
                        other = table.get(j_star)
                        if other is not None and other.witness is not None:
                            paired.add(pair_id)
                            collisions.setdefault(gkey, []).append(
                                CollisionEntry(t, j, j_star, rec.witness, other.witness)
                            )
                            if ctr is not None:
                                ctr.level(i, r)[2] += 1
                    elif rec.count >= 2:
                        # Self-complementary bucket: one occupant cannot pair
                        # with itself, so require a second accumulation.
                        paired.add(pair_id)
                        collisions.setdefault(gkey, []).append(
                            CollisionEntry(t, j, j, rec.witness, rec.witness)
                        )
                        if ctr is not None:
                            ctr.level(i, r)[2] += 1

    if ctr is not None:
        ctr.phase_times["build"] = time.perf_counter() - t0
    return state


def class_load(state: SketchState, key: ClassKey) -> int:
    """Number of materialized contributions a class triple received."""
    load = state.loads.get(key)
    if load is None:
        raise InactiveClass(f"class {key} never materialized")
    return load


def collisions_of(state: SketchState, key: ClassKey, t: int) -> List[CollisionEntry]:
    """Registered collisions for one (class, group), in registration order."""
    return list(state.collisions.get((*key, t), ()))
