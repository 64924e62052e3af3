"""Zero-false-positive query over the registered collisions.

Enumeration order is canonical and total: layers ascending, levels
ascending, anchors ascending, active prefixes in bit order, groups
ascending, collision entries in registration order. Each entry runs the
gate chain:

  bin j one-sparse and decoding to its witness mate,
  bin j* one-sparse and decoding to its witness mate,
  both witness slots one-sparse and decoding,
  explicit adjacency of the two mates.

A triangle is reported only when the final adjacency lookup succeeds, so
any reported triple exists in the graph regardless of the seeds.

The class-level one-sparse predicate is evaluated and recorded for every
entry (it is also what the certificate's pass_class bit stores), but it
does not veto the chain: a class holding two distinct mate ids always
fails the degree-2 identity, and every registered collision needs two
mates, so a vetoing class predicate would suppress all detections. The
soundness argument never relied on it; the bin, slot, and adjacency
gates alone are sufficient.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import StateMismatch
from .graphio import OrientedGraph
from .seedrand import SeedBundle
from .sketch import SketchState, graph_fingerprint

CheckKey = Tuple[int, int, int, int, int, int]  # (i, x, r, b, t, beta)

VERDICT_CONFIRMED = "confirmed"
VERDICT_CLASS = "class-1sparse"
VERDICT_BIN_J = "bin-1sparse-j"
VERDICT_BIN_JSTAR = "bin-1sparse-jstar"
VERDICT_SLOT_V = "slot-guard-v"
VERDICT_SLOT_W = "slot-guard-w"
VERDICT_ADJACENCY = "adjacency"


@dataclass(frozen=True)
class Triangle:
    x: int
    v: int
    w: int

    def vertices(self) -> Tuple[int, int, int]:
        return tuple(sorted((self.x, self.v, self.w)))


@dataclass(frozen=True)
class TraceEntry:
    key: CheckKey
    class_ok: bool
    verdict: str
    v: int
    w: int
    adjacency_checked: bool
    adjacent: Optional[bool]  # None when the chain died before the lookup


class GateTrace:
    """Ordered record of every examined collision entry."""

    def __init__(self, seed_fingerprint: str, graph_fp: str, early_stop: bool):
        self.entries: List[TraceEntry] = []
        self.seed_fingerprint = seed_fingerprint
        self.graph_fingerprint = graph_fp
        self.early_stop = early_stop

    def __len__(self) -> int:
        return len(self.entries)

    def confirmed(self) -> List[TraceEntry]:
        return [e for e in self.entries if e.verdict == VERDICT_CONFIRMED]


def gate_class(triple: Tuple[int, int, int], p: int) -> bool:
    a, b, c = triple
    return a != 0 and (b * b) % p == (a * c) % p


def gate_bin(triple: Tuple[int, int, int], expected_id: int, p: int) -> bool:
    a, b, c = triple
    return a != 0 and (b * b) % p == (a * c) % p and b == (a * expected_id) % p


gate_slot = gate_bin  # same predicate at slot granularity


def query_triangle(
    state: SketchState,
    g: OrientedGraph,
    bundle: SeedBundle,
    early_stop: bool = True,
) -> Tuple[Optional[Triangle], GateTrace]:
    """Examine registered collisions in canonical order; first confirmed
    triangle wins (or every entry is examined when early_stop is off)."""
    if state.seed_fingerprint != bundle.fingerprint():
        raise StateMismatch("sketch state was built under different seeds")
    if state.graph_fingerprint != graph_fingerprint(g):
        raise StateMismatch("sketch state was built over a different graph")

    p = bundle.params.p_field
    trace = GateTrace(state.seed_fingerprint, state.graph_fingerprint, early_stop)
    ctr = state.counters
    t0 = time.perf_counter()
    found: Optional[Triangle] = None

    class_keys = sorted(state.sigma.keys(), key=lambda k: (k[0], k[2], k[1], k[3]))
    for ckey in class_keys:
        i, x, r, b_bits = ckey
        class_ok = gate_class(state.sigma[ckey], p)
        for t in range(1, bundle.params.groups + 1):
            for entry in state.collisions.get((*ckey, t), ()):
                v = entry.wit_v[1]
                w = entry.wit_w[1]
                key: CheckKey = (i, x, r, b_bits, t, entry.beta)
                table = state.bins[(*ckey, t)]
                id_v = bundle.id_hash(v)
                id_w = bundle.id_hash(w)

                bin_j_ok = gate_bin(table[entry.j].triple, id_v, p)
                bin_jstar_ok = gate_bin(table[entry.j_star].triple, id_w, p)
                slot_v_ok = gate_slot(state.slot_triple(i, x, entry.wit_v[2]), id_v, p)
                slot_w_ok = gate_slot(state.slot_triple(i, x, entry.wit_w[2]), id_w, p)
                chain_ok = bin_j_ok and bin_jstar_ok and slot_v_ok and slot_w_ok
                adjacent: Optional[bool] = g.is_adjacent(v, w) if chain_ok else None

                if chain_ok and adjacent:
                    verdict = VERDICT_CONFIRMED
                elif not class_ok:
                    verdict = VERDICT_CLASS
                elif not bin_j_ok:
                    verdict = VERDICT_BIN_J
                elif not bin_jstar_ok:
                    verdict = VERDICT_BIN_JSTAR
                elif not slot_v_ok:
                    verdict = VERDICT_SLOT_V
                elif not slot_w_ok:
                    verdict = VERDICT_SLOT_W
                else:
                    verdict = VERDICT_ADJACENCY

                trace.entries.append(
                    TraceEntry(
                        key=key,
                        class_ok=class_ok,
                        verdict=verdict,
                        v=v,
                        w=w,
                        adjacency_checked=chain_ok,
                        adjacent=adjacent,
                    )
                )

                if verdict == VERDICT_CONFIRMED and found is None:
                    assert g.is_adjacent(x, v) and g.is_adjacent(x, w) and g.is_adjacent(v, w)
                    found = Triangle(x, v, w)
                    if early_stop:
                        if ctr is not None:
                            ctr.phase_times["query"] = time.perf_counter() - t0
                        return found, trace

    if ctr is not None:
        ctr.phase_times["query"] = time.perf_counter() - t0
    return found, trace
