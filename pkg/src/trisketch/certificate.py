"""The Seeds+Logs artifact: what a run serializes for third-party audit.

A certificate is four blocks plus the outcome:

  seeds      master seed, PRF and scan-order identifiers, preset label,
             and the full parameter block; enough to re-derive every
             random primitive bit-exactly.
  class_logs one entry per active class: its moment triple, the stored
             one-sparse flag, and every registered collision with both
             witnesses.
  slot_logs  final slot triples for exactly the slots referenced by
             collision witnesses, with their one-sparse flag and decode.
  adj_logs   one entry per adjacency probe the query actually performed,
             keyed by the canonical 6-tuple (layer, anchor, level,
             prefix, group, min bucket of the pair), carrying the two
             mate id fingerprints and the answer bit.

Serialization is canonical: JSON with lexicographically sorted keys, no
whitespace, every number a decimal string, arrays sorted by their
canonical keys, one trailing newline. Identical runs therefore serialize
to identical bytes, and a verifier can recompute any stored flag. The
format is versioned by the schema header; see CERTIFICATE_SCHEMA.md.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple

from .errors import InfeasibleParams, SchemaError, TraceMismatch
from .ffield import one_sparse_test
from .query import GateTrace, Triangle, gate_class
from .seedrand import PRF_NAME, SCAN_ORDER, Params, named_preset_of
from .sketch import SketchState

SCHEMA_VERSION = "trisketch-cert/1"

CheckKey = Tuple[int, int, int, int, int, int]
Witness = Tuple[int, int, int]

_DECIMAL = re.compile(r"^(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class SeedsRecord:
    master_seed: str
    prf: str
    scan_order: str
    preset: str
    params: Params


@dataclass(frozen=True)
class CollisionRecord:
    t: int
    j: int
    j_star: int
    wit_v: Witness
    wit_w: Witness
    paired_once: bool

    @property
    def beta(self) -> int:
        return min(self.j, self.j_star)


@dataclass(frozen=True)
class ClassLogEntry:
    i: int
    x: int
    r: int
    b: int  # prefix bits as an integer of width r
    sigma: Tuple[int, int, int]
    pass_class: bool
    collisions: Tuple[CollisionRecord, ...]

    @property
    def key(self) -> Tuple[int, int, int, int]:
        return (self.i, self.x, self.r, self.b)


@dataclass(frozen=True)
class SlotLogEntry:
    i: int
    x: int
    sidx: int
    triple: Tuple[int, int, int]
    pass_slot: bool
    decoded: int  # 0 when the triple does not decode

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.i, self.x, self.sidx)


@dataclass(frozen=True)
class AdjLogEntry:
    i: int
    x: int
    r: int
    b: int
    t: int
    beta: int
    fp: Tuple[int, int]  # sorted mate id fingerprints
    adjacent: bool

    @property
    def key(self) -> CheckKey:
        return (self.i, self.x, self.r, self.b, self.t, self.beta)


@dataclass
class Certificate:
    seeds: SeedsRecord
    class_logs: List[ClassLogEntry] = field(default_factory=list)
    slot_logs: List[SlotLogEntry] = field(default_factory=list)
    adj_logs: List[AdjLogEntry] = field(default_factory=list)
    outcome: Optional[Triangle] = None  # None encodes NO


def emit_certificate(
    state: SketchState,
    outcome: Optional[Triangle],
    trace: GateTrace,
    bundle,
) -> Certificate:
    """Assemble the certificate for one completed run."""
    if trace.seed_fingerprint != state.seed_fingerprint or trace.graph_fingerprint != state.graph_fingerprint:
        raise TraceMismatch("trace does not belong to this sketch state")
    if state.params.groups_override is not None:
        raise InfeasibleParams(
            "runs with a pinned group count are experiments; only the derived "
            "group schedule is certifiable"
        )
    p = state.params.p_field

    class_logs = []
    referenced: Set[Tuple[int, int, int]] = set()
    for ckey in state.active_class_keys():
        i, x, r, b = ckey
        records = []
        for t in range(1, state.params.groups + 1):
            for entry in state.collisions.get((*ckey, t), ()):
                records.append(
                    CollisionRecord(
                        t=t,
                        j=entry.j,
                        j_star=entry.j_star,
                        wit_v=entry.wit_v,
                        wit_w=entry.wit_w,
                        paired_once=True,
                    )
                )
                referenced.add((i, entry.wit_v[0], entry.wit_v[2]))
                referenced.add((i, entry.wit_w[0], entry.wit_w[2]))
        records.sort(key=lambda rec: (rec.t, rec.beta))
        sigma = state.sigma[ckey]
        class_logs.append(
            ClassLogEntry(
                i=i,
                x=x,
                r=r,
                b=b,
                sigma=sigma,
                pass_class=gate_class(sigma, p),
                collisions=tuple(records),
            )
        )

    slot_logs = []
    for (i, x, sidx) in sorted(referenced):
        triple = state.slot_triple(i, x, sidx)
        decoded = one_sparse_test(triple, p)
        slot_logs.append(
            SlotLogEntry(
                i=i,
                x=x,
                sidx=sidx,
                triple=triple,
                pass_slot=decoded is not None,
                decoded=decoded or 0,
            )
        )

    adj_logs = []
    for entry in trace.entries:
        if not entry.adjacency_checked:
            continue
        i, x, r, b, t, beta = entry.key
        fp = tuple(sorted((bundle.id_hash(entry.v), bundle.id_hash(entry.w))))
        adj_logs.append(
            AdjLogEntry(i=i, x=x, r=r, b=b, t=t, beta=beta, fp=fp, adjacent=bool(entry.adjacent))
        )
    adj_logs.sort(key=lambda e: e.key)

    seeds = SeedsRecord(
        master_seed=bundle.master_hex,
        prf=PRF_NAME,
        scan_order=SCAN_ORDER,
        preset=state.params.preset,
        params=state.params,
    )
    return Certificate(
        seeds=seeds,
        class_logs=class_logs,
        slot_logs=slot_logs,
        adj_logs=adj_logs,
        outcome=outcome,
    )


def log_pairs(cert: Certificate) -> Set[CheckKey]:
    """Canonical de-duplicated key set of all logged collisions."""
    keys: Set[CheckKey] = set()
    for entry in cert.class_logs:
        for rec in entry.collisions:
            keys.add((entry.i, entry.x, entry.r, entry.b, rec.t, rec.beta))
    return keys


# -- canonical JSON ------------------------------------------------------------------


def _bits_str(b: int, r: int) -> str:
    return format(b, f"0{r}b") if r else ""


def _witness_obj(w: Witness) -> List[str]:
    return [str(w[0]), str(w[1]), str(w[2])]


def _bool_str(v: bool) -> str:
    return "1" if v else "0"


def certificate_to_obj(cert: Certificate) -> dict:
    seeds = cert.seeds
    obj = {
        "schema": SCHEMA_VERSION,
        "seeds": {
            "master_seed": seeds.master_seed,
            "prf": seeds.prf,
            "scan_order": seeds.scan_order,
            "preset": seeds.preset,
            "params": seeds.params.to_fields(),
        },
        "class_logs": [
            {
                "i": str(e.i),
                "x": str(e.x),
                "r": str(e.r),
                "b": _bits_str(e.b, e.r),
                "sigma": [str(v) for v in e.sigma],
                "pass_class": _bool_str(e.pass_class),
                "collisions": [
                    {
                        "t": str(rec.t),
                        "j": str(rec.j),
                        "j_star": str(rec.j_star),
                        "wit_v": _witness_obj(rec.wit_v),
                        "wit_w": _witness_obj(rec.wit_w),
                        "paired_once": _bool_str(rec.paired_once),
                    }
                    for rec in sorted(e.collisions, key=lambda rec: (rec.t, rec.beta, rec.j))
                ],
            }
            for e in sorted(cert.class_logs, key=lambda e: e.key)
        ],
        "slot_logs": [
            {
                "i": str(e.i),
                "x": str(e.x),
                "sidx": str(e.sidx),
                "triple": [str(v) for v in e.triple],
                "pass_slot": _bool_str(e.pass_slot),
                "decoded": str(e.decoded),
            }
            for e in sorted(cert.slot_logs, key=lambda e: e.key)
        ],
        "adj_logs": [
            {
                "i": str(e.i),
                "x": str(e.x),
                "r": str(e.r),
                "b": _bits_str(e.b, e.r),
                "t": str(e.t),
                "beta": str(e.beta),
                "fp": [str(e.fp[0]), str(e.fp[1])],
                "adjacent": _bool_str(e.adjacent),
            }
            for e in sorted(cert.adj_logs, key=lambda e: e.key)
        ],
        "outcome": (
            {"kind": "NO"}
            if cert.outcome is None
            else {
                "kind": "YES",
                "x": str(cert.outcome.x),
                "v": str(cert.outcome.v),
                "w": str(cert.outcome.w),
            }
        ),
    }
    return obj


def serialize(cert: Certificate) -> bytes:
    return (json.dumps(certificate_to_obj(cert), sort_keys=True, separators=(",", ":")) + "\n").encode(
        "utf-8"
    )


def _want(obj, path: str, key: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    return obj[key]


def _int_of(value, path: str) -> int:
    if not isinstance(value, str) or not _DECIMAL.match(value):
        raise SchemaError(path, f"expected canonical decimal string, got {value!r}")
    return int(value)


def _bool_of(value, path: str) -> bool:
    if value not in ("0", "1"):
        raise SchemaError(path, f"expected '0' or '1', got {value!r}")
    return value == "1"


def _bits_of(value, r: int, path: str) -> int:
    if not isinstance(value, str) or len(value) != r or (r and any(ch not in "01" for ch in value)):
        raise SchemaError(path, f"expected {r} prefix bits, got {value!r}")
    return int(value, 2) if r else 0


def _witness_of(value, path: str) -> Witness:
    if not isinstance(value, list) or len(value) != 3:
        raise SchemaError(path, "witness must be [anchor, mate, sidx]")
    return (
        _int_of(value[0], f"{path}[0]"),
        _int_of(value[1], f"{path}[1]"),
        _int_of(value[2], f"{path}[2]"),
    )


def _triple_of(value, path: str) -> Tuple[int, int, int]:
    if not isinstance(value, list) or len(value) != 3:
        raise SchemaError(path, "expected a 3-element array")
    return tuple(_int_of(v, f"{path}[{k}]") for k, v in enumerate(value))


def deserialize(data) -> Certificate:
    """Parse and structurally validate a serialized certificate.

    Value-level lies (a corrupted triple, a flipped bit) deliberately pass
    here; the verifier catches them by replay. Structural damage, unknown
    schema versions, and duplicate canonical keys are schema errors.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="strict")
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise SchemaError("document", f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("document", "top level must be an object")
    if _want(obj, "", "schema") != SCHEMA_VERSION:
        raise SchemaError("schema", f"unknown schema version {obj.get('schema')!r}")

    seeds_obj = _want(obj, "", "seeds")
    preset = _want(seeds_obj, "seeds", "preset")
    if preset not in ("full", "reduced", "custom"):
        raise SchemaError("seeds.preset", f"unknown preset {preset!r}")
    params_obj = _want(seeds_obj, "seeds", "params")
    if not isinstance(params_obj, dict) or not all(isinstance(v, str) for v in params_obj.values()):
        raise SchemaError("seeds.params", "params must map field names to strings")
    params = Params.from_fields(params_obj, preset)
    if preset == "custom":
        name = named_preset_of(params)
        if name is not None:
            raise SchemaError("seeds.preset", f"constants match preset {name!r}; label must say so")
    master = _want(seeds_obj, "seeds", "master_seed")
    if not isinstance(master, str) or len(master) != 64 or any(c not in "0123456789abcdef" for c in master):
        raise SchemaError("seeds.master_seed", "expected 64 lowercase hex digits")
    seeds = SeedsRecord(
        master_seed=master,
        prf=_want(seeds_obj, "seeds", "prf"),
        scan_order=_want(seeds_obj, "seeds", "scan_order"),
        preset=preset,
        params=params,
    )

    class_logs = []
    seen_class = set()
    raw_classes = _want(obj, "", "class_logs")
    if not isinstance(raw_classes, list):
        raise SchemaError("class_logs", "expected an array")
    for idx, e in enumerate(raw_classes):
        path = f"class_logs[{idx}]"
        r = _int_of(_want(e, path, "r"), f"{path}.r")
        records = []
        seen_pairs = set()
        raw_recs = _want(e, path, "collisions")
        if not isinstance(raw_recs, list):
            raise SchemaError(f"{path}.collisions", "expected an array")
        for k, rec in enumerate(raw_recs):
            rpath = f"{path}.collisions[{k}]"
            record = CollisionRecord(
                t=_int_of(_want(rec, rpath, "t"), f"{rpath}.t"),
                j=_int_of(_want(rec, rpath, "j"), f"{rpath}.j"),
                j_star=_int_of(_want(rec, rpath, "j_star"), f"{rpath}.j_star"),
                wit_v=_witness_of(_want(rec, rpath, "wit_v"), f"{rpath}.wit_v"),
                wit_w=_witness_of(_want(rec, rpath, "wit_w"), f"{rpath}.wit_w"),
                paired_once=_bool_of(_want(rec, rpath, "paired_once"), f"{rpath}.paired_once"),
            )
            pair_key = (record.t, record.beta)
            if pair_key in seen_pairs:
                raise SchemaError(rpath, f"duplicate collision key {pair_key}")
            seen_pairs.add(pair_key)
            records.append(record)
        entry = ClassLogEntry(
            i=_int_of(_want(e, path, "i"), f"{path}.i"),
            x=_int_of(_want(e, path, "x"), f"{path}.x"),
            r=r,
            b=_bits_of(_want(e, path, "b"), r, f"{path}.b"),
            sigma=_triple_of(_want(e, path, "sigma"), f"{path}.sigma"),
            pass_class=_bool_of(_want(e, path, "pass_class"), f"{path}.pass_class"),
            collisions=tuple(records),
        )
        if entry.key in seen_class:
            raise SchemaError(path, f"duplicate class key {entry.key}")
        seen_class.add(entry.key)
        class_logs.append(entry)

    slot_logs = []
    seen_slots = set()
    raw_slots = _want(obj, "", "slot_logs")
    if not isinstance(raw_slots, list):
        raise SchemaError("slot_logs", "expected an array")
    for idx, e in enumerate(raw_slots):
        path = f"slot_logs[{idx}]"
        entry = SlotLogEntry(
            i=_int_of(_want(e, path, "i"), f"{path}.i"),
            x=_int_of(_want(e, path, "x"), f"{path}.x"),
            sidx=_int_of(_want(e, path, "sidx"), f"{path}.sidx"),
            triple=_triple_of(_want(e, path, "triple"), f"{path}.triple"),
            pass_slot=_bool_of(_want(e, path, "pass_slot"), f"{path}.pass_slot"),
            decoded=_int_of(_want(e, path, "decoded"), f"{path}.decoded"),
        )
        if entry.key in seen_slots:
            raise SchemaError(path, f"duplicate slot key {entry.key}")
        seen_slots.add(entry.key)
        slot_logs.append(entry)

    adj_logs = []
    seen_adj = set()
    raw_adj = _want(obj, "", "adj_logs")
    if not isinstance(raw_adj, list):
        raise SchemaError("adj_logs", "expected an array")
    for idx, e in enumerate(raw_adj):
        path = f"adj_logs[{idx}]"
        r = _int_of(_want(e, path, "r"), f"{path}.r")
        fp_raw = _want(e, path, "fp")
        if not isinstance(fp_raw, list) or len(fp_raw) != 2:
            raise SchemaError(f"{path}.fp", "expected two fingerprints")
        fp = (_int_of(fp_raw[0], f"{path}.fp[0]"), _int_of(fp_raw[1], f"{path}.fp[1]"))
        if fp[0] > fp[1]:
            raise SchemaError(f"{path}.fp", "fingerprints must be sorted")
        entry = AdjLogEntry(
            i=_int_of(_want(e, path, "i"), f"{path}.i"),
            x=_int_of(_want(e, path, "x"), f"{path}.x"),
            r=r,
            b=_bits_of(_want(e, path, "b"), r, f"{path}.b"),
            t=_int_of(_want(e, path, "t"), f"{path}.t"),
            beta=_int_of(_want(e, path, "beta"), f"{path}.beta"),
            fp=fp,
            adjacent=_bool_of(_want(e, path, "adjacent"), f"{path}.adjacent"),
        )
        if entry.key in seen_adj:
            raise SchemaError(path, f"duplicate adjacency key {entry.key}")
        seen_adj.add(entry.key)
        adj_logs.append(entry)

    raw_outcome = _want(obj, "", "outcome")
    kind = _want(raw_outcome, "outcome", "kind")
    if kind == "NO":
        outcome = None
    elif kind == "YES":
        outcome = Triangle(
            x=_int_of(_want(raw_outcome, "outcome", "x"), "outcome.x"),
            v=_int_of(_want(raw_outcome, "outcome", "v"), "outcome.v"),
            w=_int_of(_want(raw_outcome, "outcome", "w"), "outcome.w"),
        )
    else:
        raise SchemaError("outcome.kind", f"expected 'YES' or 'NO', got {kind!r}")

    return Certificate(
        seeds=seeds,
        class_logs=class_logs,
        slot_logs=slot_logs,
        adj_logs=adj_logs,
        outcome=outcome,
    )


def write_certificate(cert: Certificate, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(cert))


def read_certificate(path: str) -> Certificate:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
