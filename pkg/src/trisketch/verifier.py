"""Third-party verification of a certificate against the graph it claims.

A YES outcome is self-evidencing: three adjacency lookups settle it. A NO
outcome is checked in three moves, all deterministic given the seeds:

  1. Replay the build from the seeds record and compare every active
     class (triples and stored flags) against class_logs.
  2. Rebuild the obligation domain: the seed-determined set of
     complementary-bucket checks the run was required to perform. This
     reconstruction is an independent second implementation (bucket
     occupancy counting, no one-shot registry) and must equal the key set
     extracted from the logs, exactly.
  3. For every key, re-run the gates from replayed state, cross-check the
     logged slot triples, flags, witnesses, and fingerprints, and demand
     an adjacency log entry exactly where the gate chain reached the
     lookup. Any adjacency bit contradicting the graph rejects; a
     consistent positive bit upgrades the verdict to the triangle it
     proves.

Everything a certificate stores is therefore load-bearing: either it is
replayed from seeds or it is recomputed from the graph, so a single-field
lie in canonical content cannot survive."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Set, Tuple

from .certificate import Certificate, SeedsRecord, log_pairs
from .errors import ParamMismatch
from .ffield import one_sparse_test
from .graphio import OrientedGraph
from .query import Triangle, gate_bin, gate_class
from .seedrand import PRF_NAME, SCAN_ORDER, SeedBundle
from .sketch import build_sketches

CheckKey = Tuple[int, int, int, int, int, int]

ACCEPT_NO = "accept_no"
ACCEPT_YES = "accept_yes"
REJECT_COVERAGE = "reject_coverage"
REJECT_REPLAY = "reject_replay"


@dataclass(frozen=True)
class VerifyVerdict:
    kind: str
    triangle: Optional[Triangle] = None
    missing: Tuple[CheckKey, ...] = ()
    extra: Tuple[CheckKey, ...] = ()
    path: str = ""

    @property
    def accepted(self) -> bool:
        return self.kind in (ACCEPT_NO, ACCEPT_YES)

    def describe(self) -> str:
        if self.kind == ACCEPT_NO:
            return "AcceptNo"
        if self.kind == ACCEPT_YES:
            t = self.triangle
            return f"AcceptYes {t.x} {t.v} {t.w}"
        if self.kind == REJECT_COVERAGE:
            return f"RejectCoverage missing={list(self.missing)} extra={list(self.extra)}"
        return f"RejectReplay {self.path}"


def reconstruct_should_check_domain(g: OrientedGraph, seeds: SeedsRecord) -> Set[CheckKey]:
    """Rebuild, from graph and seeds alone, every obligated pair check.

    Replays retention, slot filtering, prefix matching, and probed-bucket
    occupancy counting, then emits one key per probed complementary pair
    with both buckets occupied (for a self-complementary bucket: occupancy
    at least two). Deliberately maintains only occupancy counts and first
    witnesses, not triples or one-shot flags, so it stays an independent
    derivation of the domain rather than a copy of the builder."""
    params = seeds.params
    if params.n != g.n:
        raise ParamMismatch(f"seeds built for n={params.n}, graph has n={g.n}")
    bundle = SeedBundle(seeds.master_seed, params)

    p = params.p_field
    layers = params.layers
    groups = params.groups
    t_buckets = params.buckets
    key_bits = params.key_bits

    slots: Dict[Tuple[int, int], Dict[int, Tuple[int, int, int]]] = {}
    active: Set[Tuple[int, int, int, int]] = set()
    counts: Dict[Tuple, int] = {}  # (i, x, r, b, t, j) -> occupancy
    witnesses: Dict[Tuple, Tuple[int, int, int]] = {}

    for x, y in g.arcs():
        kept_layers = bundle.keep_layers(x, y)
        if not kept_layers:
            continue
        d_x = g.d(x)
        m_x = params.slots_for_degree(d_x)
        id_y = bundle.id_hash(y)
        for i in kept_layers:
            sidx = bundle.slot_index(x, y, i, m_x)
            sgn = bundle.sign_hash(x, y, i)
            layer_slots = slots.setdefault((i, x), {})
            a, b, c = layer_slots.get(sidx, (0, 0, 0))
            a = (a + sgn) % p
            b = (b + sgn * id_y) % p
            c = (c + sgn * id_y * id_y) % p
            layer_slots[sidx] = (a, b, c)
            if a == 0 or (b * b) % p != (a * c) % p or b != (a * id_y) % p:
                continue
            kx = bundle.prefix_key(i, x)
            ky = bundle.prefix_key(i, y)
            xor = kx ^ ky
            lcp = key_bits if xor == 0 else key_bits - xor.bit_length()
            delta = bundle.pk_offset(i, x, y)
            for r in range(min(params.level_horizon(d_x, i), lcp) + 1):
                b_bits = kx >> (key_bits - r) if r else 0
                active.add((i, x, r, b_bits))
                for t in range(1, groups + 1):
                    j = bundle.bucket(i, r, t, delta)
                    j_star = (t_buckets - j) % t_buckets
                    lo, hi = (j, j_star) if j <= j_star else (j_star, j)
                    if (lo, hi) not in bundle.probed_pair_set(i, x, r, b_bits, t):
                        continue
                    bin_key = (i, x, r, b_bits, t, j)
                    counts[bin_key] = counts.get(bin_key, 0) + 1
                    witnesses.setdefault(bin_key, (x, y, sidx))

    domain: Set[CheckKey] = set()
    for (i, x, r, b_bits) in active:
        for t in range(1, groups + 1):
            for (lo, hi) in bundle.probed_pairs(i, x, r, b_bits, t):
                if lo != hi:
                    if counts.get((i, x, r, b_bits, t, lo), 0) > 0 and counts.get(
                        (i, x, r, b_bits, t, hi), 0
                    ) > 0:
                        domain.add((i, x, r, b_bits, t, lo))
                elif counts.get((i, x, r, b_bits, t, lo), 0) >= 2:
                    domain.add((i, x, r, b_bits, t, lo))
    return domain


def verify_yes(g: OrientedGraph, cert: Certificate) -> VerifyVerdict:
    """A YES claim carries its own witness: three adjacency checks."""
    tri = cert.outcome
    if tri is None:
        return VerifyVerdict(kind=REJECT_REPLAY, path="outcome.kind")
    ids = (tri.x, tri.v, tri.w)
    if len(set(ids)) != 3 or not all(0 <= u < g.n for u in ids):
        return VerifyVerdict(kind=REJECT_REPLAY, path="outcome")
    if g.is_adjacent(tri.x, tri.v) and g.is_adjacent(tri.x, tri.w) and g.is_adjacent(tri.v, tri.w):
        return VerifyVerdict(kind=ACCEPT_YES, triangle=tri)
    return VerifyVerdict(kind=REJECT_REPLAY, path="outcome")


def verify_no(g: OrientedGraph, cert: Certificate) -> VerifyVerdict:
    """Full deterministic verification of a certificate against `g`."""
    seeds = cert.seeds
    if seeds.prf != PRF_NAME:
        return VerifyVerdict(kind=REJECT_REPLAY, path="seeds.prf")
    if seeds.scan_order != SCAN_ORDER:
        return VerifyVerdict(kind=REJECT_REPLAY, path="seeds.scan_order")
    if seeds.params.n != g.n:
        return VerifyVerdict(kind=REJECT_REPLAY, path="seeds.params.n")

    if cert.outcome is not None:
        return verify_yes(g, cert)

    bundle = SeedBundle(seeds.master_seed, seeds.params)
    p = seeds.params.p_field
    t_buckets = seeds.params.buckets
    state = build_sketches(g, bundle, with_counters=False)

    # Step 1: class coverage and class triples.
    logged_classes = {e.key: e for e in cert.class_logs}
    replayed_keys = set(state.sigma.keys())
    if set(logged_classes) != replayed_keys:
        diff = sorted(set(logged_classes) ^ replayed_keys)
        return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs:{diff[0]}")
    for key, entry in sorted(logged_classes.items()):
        sigma = state.sigma[key]
        if entry.sigma != sigma:
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs{list(key)}.sigma")
        if entry.pass_class != gate_class(sigma, p):
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs{list(key)}.pass_class")

    # Step 2: coverage of the obligation domain, via the independent route.
    domain = reconstruct_should_check_domain(g, seeds)
    logged_pairs = log_pairs(cert)
    if logged_pairs != domain:
        return VerifyVerdict(
            kind=REJECT_COVERAGE,
            missing=tuple(sorted(domain - logged_pairs)),
            extra=tuple(sorted(logged_pairs - domain)),
        )

    # Step 3: per-key gate replay and log cross-checks.
    replayed_records: Dict[CheckKey, object] = {}
    for ckey, t, entry in state.collision_items():
        replayed_records[(*ckey, t, entry.beta)] = entry
    logged_records: Dict[CheckKey, object] = {}
    for entry in cert.class_logs:
        for rec in entry.collisions:
            logged_records[(entry.i, entry.x, entry.r, entry.b, rec.t, rec.beta)] = rec

    slot_map = {e.key: e for e in cert.slot_logs}
    referenced = set()
    adj_map = {e.key: e for e in cert.adj_logs}
    consumed_adj = set()
    confirmed: Optional[Triangle] = None

    for key in sorted(logged_records):
        rec = logged_records[key]
        entry = replayed_records.get(key)
        i, x, r, b_bits, t, beta = key
        if (
            entry is None
            or rec.j != entry.j
            or rec.j_star != entry.j_star
            or rec.wit_v != entry.wit_v
            or rec.wit_w != entry.wit_w
        ):
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs{list(key)}.collision")
        if not rec.paired_once:
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs{list(key)}.paired_once")
        if rec.j_star != (t_buckets - rec.j) % t_buckets:
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"class_logs{list(key)}.j_star")

        v, w = rec.wit_v[1], rec.wit_w[1]
        id_v, id_w = bundle.id_hash(v), bundle.id_hash(w)

        ok = True
        for wit, ident in ((rec.wit_v, id_v), (rec.wit_w, id_w)):
            skey = (i, wit[0], wit[2])
            referenced.add(skey)
            logged_slot = slot_map.get(skey)
            if logged_slot is None:
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"slot_logs:{skey} missing")
            replayed_triple = state.slot_triple(*skey)
            if logged_slot.triple != replayed_triple:
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"slot_logs{list(skey)}.triple")
            decoded = one_sparse_test(replayed_triple, p)
            if logged_slot.pass_slot != (decoded is not None) or logged_slot.decoded != (decoded or 0):
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"slot_logs{list(skey)}.decode")
            if decoded != ident:
                ok = False

        table = state.bins[(i, x, r, b_bits, t)]
        if not gate_bin(table[rec.j].triple, id_v, p):
            ok = False
        if not gate_bin(table[rec.j_star].triple, id_w, p):
            ok = False

        adj_entry = adj_map.get(key)
        if ok:
            if adj_entry is None:
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs:{key} missing")
            consumed_adj.add(key)
            fp = tuple(sorted((id_v, id_w)))
            if adj_entry.fp != fp:
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs{list(key)}.fp")
            adjacent = g.is_adjacent(v, w)
            if adj_entry.adjacent != adjacent:
                return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs{list(key)}.adjacent")
            if adjacent and confirmed is None:
                if g.is_adjacent(x, v) and g.is_adjacent(x, w):
                    confirmed = Triangle(x, v, w)
                else:
                    return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs{list(key)}.witness-arcs")
        elif adj_entry is not None:
            return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs{list(key)} not reachable")

    # Step 4: log minimality.
    extra_slots = set(slot_map) - referenced
    if extra_slots:
        return VerifyVerdict(kind=REJECT_REPLAY, path=f"slot_logs:{sorted(extra_slots)[0]} unreferenced")
    extra_adj = set(adj_map) - consumed_adj
    if extra_adj:
        return VerifyVerdict(kind=REJECT_REPLAY, path=f"adj_logs:{sorted(extra_adj)[0]} unreferenced")

    if confirmed is not None:
        return VerifyVerdict(kind=ACCEPT_YES, triangle=confirmed)
    return VerifyVerdict(kind=ACCEPT_NO)
