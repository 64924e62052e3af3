"""Deterministic derivation of every hash, sign, coin, bucket map, and probe list.

One 256-bit master seed plus a parameter block is the sole source of
randomness for a run. Every primitive is a pure function of
(master seed, family label, indices), derived through a keyed PRF
(BLAKE2b in KDF arrangement, recorded in certificates as PRF_NAME so
independent verifiers can interoperate). Nothing here reads graph or
sketch state: the whole module is fixed before the first edge is scanned,
which is what makes certificates replayable.

Derived quantities use exact integer arithmetic (bit lengths, shifts)
rather than floating-point logs, so two processes can never disagree on
a parameter by a rounding ulp.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from .errors import EmptySlotArray, InfeasibleParams, SeedSchemaError, VertexOutOfRange
from .ffield import M61, is_prime

PRF_NAME = "blake2b-kdf/1"
SCAN_ORDER = "arcs-xy-ascending/1"

# Auto-selected moduli, smallest first; all Mersenne primes so the choice
# is canonical and cheap to validate.
_MERSENNE_LADDER = (M61, (1 << 89) - 1, (1 << 107) - 1, (1 << 127) - 1)

_PRESETS = {
    # Table of constants the pipeline was designed around.
    "full": dict(c_m=16, c_b=8, c_t=16, c_r=8, c_g=8, c_k=12, kappa=7, c0=4),
    # Desk-scale constants: the full constants at small n drive per-layer
    # keep rates below anything observable and allocate ~10^5 probed bins
    # per class, so experiments use this scaled-down block.
    "reduced": dict(c_m=4, c_b=8, c_t=4, c_r=2, c_g=2, c_k=12, kappa=7, c0=2),
}


def _ceil_log2(m: int) -> int:
    """Smallest k with 2^k >= m, for m >= 1."""
    return (m - 1).bit_length()


@dataclass(frozen=True)
class Params:
    """All tunable constants plus the resolved field modulus.

    Use Params.make() so the modulus is auto-selected to satisfy
    p_field >= n^kappa; passing p_field explicitly bypasses that floor
    (small-modulus soundness experiments need to) but still requires a
    prime.
    """

    n: int
    c_m: int = 16
    c_b: int = 8
    c_t: int = 16
    c_r: int = 8
    c_g: int = 8
    c_k: int = 12
    kappa: int = 7
    c0: int = 4
    p_field: int = M61
    preset: str = "full"
    coin_mode: str = "prf"  # "prf" = fully independent; "kwise" = polynomial family
    flat_keep_rate: Optional[float] = None  # negative-control override of the dyadic schedule
    groups_override: Optional[int] = None  # experiment knob: pin the group count exactly

    @classmethod
    def make(cls, n: int, preset: str = "full", **overrides) -> "Params":
        if preset not in _PRESETS:
            raise InfeasibleParams(f"unknown preset {preset!r}")
        fields = dict(_PRESETS[preset])
        fields.update(overrides)
        explicit_p = "p_field" in overrides
        if not explicit_p:
            floor = max(2, n) ** fields["kappa"]
            for candidate in _MERSENNE_LADDER:
                if candidate >= floor:
                    fields["p_field"] = candidate
                    break
            else:
                raise InfeasibleParams(f"no built-in modulus reaches n^kappa = {floor}")
        params = cls(n=n, preset=preset, **fields)
        params.validate(explicit_p=explicit_p)
        return params

    def validate(self, explicit_p: bool = True) -> None:
        for name in ("c_m", "c_b", "c_t", "c_r", "c_g", "c_k", "c0"):
            if getattr(self, name) < 1:
                raise InfeasibleParams(f"{name} must be >= 1")
        if self.n < 0:
            raise InfeasibleParams("n must be nonnegative")
        if self.kappa < 1:
            raise InfeasibleParams("kappa must be >= 1")
        if not is_prime(self.p_field):
            raise InfeasibleParams(f"p_field {self.p_field} is not prime")
        if not explicit_p and self.p_field < max(2, self.n) ** self.kappa:
            raise InfeasibleParams("p_field below n^kappa")
        if self.coin_mode not in ("prf", "kwise"):
            raise InfeasibleParams(f"unknown coin_mode {self.coin_mode!r}")
        if self.flat_keep_rate is not None and not 0.0 <= self.flat_keep_rate <= 1.0:
            raise InfeasibleParams("flat_keep_rate must lie in [0, 1]")
        if self.groups_override is not None and self.groups_override < 0:
            raise InfeasibleParams("groups_override must be >= 0 (0 disables probing)")

    # Exact ceil(c * log2 n) via ceil(log2(n^c)); n below 2 behaves as n = 2.
    # Derived values are cached: they sit on hot paths and the dataclass is
    # frozen, so staleness is impossible.
    def _log_scaled(self, c: int) -> int:
        return _ceil_log2(max(2, self.n) ** c)

    @cached_property
    def layers(self) -> int:
        return self._log_scaled(self.c_r)

    @cached_property
    def groups(self) -> int:
        if self.groups_override is not None:
            return self.groups_override
        return self._log_scaled(self.c_g)

    @cached_property
    def buckets(self) -> int:
        return self._log_scaled(self.c_t)

    @cached_property
    def independence(self) -> int:
        return self._log_scaled(self.c_k)

    @cached_property
    def key_bits(self) -> int:
        # Prefix-key length: two bits above ceil(log2 n), which clears every
        # instantiated level horizon (see level_horizon bound test).
        return _ceil_log2(max(2, self.n)) + 2

    def keep_rate(self, i: int) -> float:
        if self.flat_keep_rate is not None:
            return self.flat_keep_rate
        return 2.0 ** -(i + 2)

    def slots_for_degree(self, d: int) -> int:
        return self.c_m * d

    def key_budget(self, d: int, i: int) -> int:
        # ceil(c_b * d * 2^-(i+2)) without floats.
        shift = i + 2
        return (self.c_b * d + (1 << shift) - 1) >> shift

    def level_horizon(self, d: int, i: int) -> int:
        # ceil(log2 max(1, key_budget)).
        return _ceil_log2(max(1, self.key_budget(d, i)))

    def to_fields(self) -> Dict[str, str]:
        """Flat string map, canonical order, for the certificate seeds block."""
        out = {
            "n": str(self.n),
            "c_m": str(self.c_m),
            "c_b": str(self.c_b),
            "c_t": str(self.c_t),
            "c_r": str(self.c_r),
            "c_g": str(self.c_g),
            "c_k": str(self.c_k),
            "kappa": str(self.kappa),
            "c0": str(self.c0),
            "p_field": str(self.p_field),
            "coin_mode": self.coin_mode,
            "flat_keep_rate": "" if self.flat_keep_rate is None else repr(self.flat_keep_rate),
            "groups_override": "" if self.groups_override is None else str(self.groups_override),
        }
        return out

    @classmethod
    def from_fields(cls, fields: Dict[str, str], preset: str) -> "Params":
        try:
            flat = fields.get("flat_keep_rate", "")
            forced = fields.get("groups_override", "")
            params = cls(
                n=int(fields["n"]),
                c_m=int(fields["c_m"]),
                c_b=int(fields["c_b"]),
                c_t=int(fields["c_t"]),
                c_r=int(fields["c_r"]),
                c_g=int(fields["c_g"]),
                c_k=int(fields["c_k"]),
                kappa=int(fields["kappa"]),
                c0=int(fields["c0"]),
                p_field=int(fields["p_field"]),
                preset=preset,
                coin_mode=fields["coin_mode"],
                flat_keep_rate=None if flat == "" else float(flat),
                groups_override=None if forced == "" else int(forced),
            )
        except (KeyError, ValueError) as exc:
            raise SeedSchemaError("seeds.params", str(exc)) from None
        if params.groups_override is not None:
            # A pinned group count shrinks the obligation domain to a slice
            # that the logs of a wider run still cover exactly, so it cannot
            # be audited by replay. Certificates carry the derived schedule
            # only; the pin stays an experiment knob.
            raise SeedSchemaError("seeds.params.groups_override", "not certifiable")
        try:
            params.validate(explicit_p=True)
        except InfeasibleParams as exc:
            raise SeedSchemaError("seeds.params", str(exc)) from None
        if preset in _PRESETS:
            expected = _PRESETS[preset]
            for name, value in expected.items():
                if getattr(params, name) != value:
                    raise SeedSchemaError(
                        "seeds.preset", f"{name}={getattr(params, name)} contradicts preset {preset!r}"
                    )
        return params


def named_preset_of(params: Params) -> Optional[str]:
    """The preset whose constants block this Params matches, if any."""
    constants = {k: getattr(params, k) for k in ("c_m", "c_b", "c_t", "c_r", "c_g", "c_k", "kappa", "c0")}
    for name, block in _PRESETS.items():
        if constants == block:
            return name
    return None


def with_overrides(params: Params, **overrides) -> Params:
    """Copy with field overrides.

    The preset label degrades to "custom" when a preset-named constant
    moves off its preset value; experiment knobs (groups_override,
    flat_keep_rate, coin_mode, p_field) keep the label, since the preset
    names only the constants block.
    """
    new = replace(params, **overrides)
    if params.preset in _PRESETS:
        expected = _PRESETS[params.preset]
        if any(getattr(new, name) != value for name, value in expected.items()):
            new = replace(new, preset="custom")
    new.validate(explicit_p=True)
    return new


def complement(j: int, t_buckets: int) -> int:
    """Complementary bucket under the involution j -> (-j) mod T."""
    if not 0 <= j < t_buckets:
        raise ValueError(f"bucket {j} outside [0, {t_buckets})")
    return (t_buckets - j) % t_buckets


def canonical_pair(j: int, t_buckets: int) -> Tuple[int, int]:
    js = complement(j, t_buckets)
    return (j, js) if j <= js else (js, j)


def max_canonical_pairs(t_buckets: int) -> int:
    # Even T has fixed points 0 and T/2; odd T only 0.
    return t_buckets // 2 + 1


def normalize_master_seed(seed_hex: str) -> str:
    """Canonical 64-hex-digit form of a master seed."""
    s = seed_hex.strip().lower()
    if s.startswith("0x"):
        s = s[2:]
    if not s or len(s) > 64 or any(ch not in "0123456789abcdef" for ch in s):
        raise SeedSchemaError("master_seed", "expected 1..64 hex digits")
    return s.zfill(64)


def _enc(*parts) -> bytes:
    chunks = []
    for part in parts:
        if isinstance(part, int):
            chunks.append(b"i" + part.to_bytes(8, "big"))
        elif isinstance(part, str):
            raw = part.encode("utf-8")
            chunks.append(b"s" + len(raw).to_bytes(2, "big") + raw)
        else:
            raise TypeError(f"unsupported part {part!r}")
    return b"".join(chunks)


_PACK_XY = struct.Struct(">QQ").pack
_PACK_X = struct.Struct(">Q").pack
_PACK_PROBE = struct.Struct(">QQQQQ").pack


class SeedBundle:
    """Master seed, parameters, and every derived primitive.

    Immutable after construction; all methods are pure, so the bundle is
    safe to share across threads. Per-layer and per-family sub-seeds are
    cached once derived (re-derivation is byte-identical by construction).

    Hot primitives (coins, prefix keys, sign and slot hashes) run on
    pre-keyed BLAKE2b prototypes that are copied per call; this is
    bit-identical to re-keying each time and several times faster.
    """

    def __init__(self, master_seed_hex: str, params: Params):
        self.master_hex = normalize_master_seed(master_seed_hex)
        self.master = bytes.fromhex(self.master_hex)
        self.params = params
        self._subseeds: Dict[Tuple, bytes] = {}
        self._poly_cache: Dict[Tuple, Tuple[int, int]] = {}
        self._probe_cache: Dict[Tuple, Tuple[Tuple[Tuple[int, int], ...], frozenset]] = {}
        self._kwise_coeffs: Dict[int, List[int]] = {}
        self._prefix_cache: Dict[Tuple[int, int], int] = {}
        self._prefix_protos: Dict[int, object] = {}
        p = params.p_field
        a, b = self._poly("id", nonzero_a=True)
        self._id_a, self._id_b = a, b
        self._p = p
        self._sign_proto_obj = None
        self._slot_proto_obj = None
        self._probe_proto_obj = None
        self._coin_table_obj: Optional[list] = None
        self._t_buckets = params.buckets
        self._probe_want = min(params.c0, max_canonical_pairs(params.buckets))

    def fingerprint(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(self.master)
        h.update(_enc(*(v for pair in sorted(self.params.to_fields().items()) for v in pair)))
        return h.hexdigest()

    def _sub(self, *label) -> bytes:
        key = tuple(label)
        cached = self._subseeds.get(key)
        if cached is None:
            cached = hashlib.blake2b(_enc(*label), key=self.master, digest_size=32).digest()
            self._subseeds[key] = cached
        return cached

    def _proto(self, *label):
        return hashlib.blake2b(key=self._sub(*label), digest_size=16)

    @property
    def _sign_proto(self):
        if self._sign_proto_obj is None:
            self._sign_proto_obj = self._proto("sign")
        return self._sign_proto_obj

    @property
    def _slot_proto(self):
        if self._slot_proto_obj is None:
            self._slot_proto_obj = self._proto("slot")
        return self._slot_proto_obj

    @property
    def _coin_table(self) -> Optional[list]:
        if self.params.coin_mode != "prf":
            return None
        if self._coin_table_obj is None:
            self._coin_table_obj = [
                (self._proto("coin", i), self._coin_threshold_128(i))
                for i in range(1, self.params.layers + 1)
            ]
        return self._coin_table_obj

    @staticmethod
    def _prf_int(seed: bytes, *parts) -> int:
        return int.from_bytes(
            hashlib.blake2b(_enc(*parts), key=seed, digest_size=16).digest(), "big"
        )

    def _poly(self, family: str, *idx, nonzero_a: bool = False) -> Tuple[int, int]:
        key = (family, *idx)
        cached = self._poly_cache.get(key)
        if cached is None:
            seed = self._sub(family, *idx)
            p = self.params.p_field
            wide = int.from_bytes(
                hashlib.blake2b(_enc("a"), key=seed, digest_size=32).digest(), "big"
            )
            a = 1 + wide % (p - 1) if nonzero_a else wide % p
            b = (
                int.from_bytes(
                    hashlib.blake2b(_enc("b"), key=seed, digest_size=32).digest(), "big"
                )
                % p
            )
            cached = (a, b)
            self._poly_cache[key] = cached
        return cached

    # -- vertex / edge primitives -------------------------------------------------

    def id_hash(self, v: int) -> int:
        """Pairwise-independent map into the nonzero residues (0 remaps to 1)."""
        if not 0 <= v < max(1, self.params.n):
            raise VertexOutOfRange(f"vertex {v} outside [0, {self.params.n})")
        val = (self._id_a * v + self._id_b) % self._p
        return val if val else 1

    def sign_hash(self, x: int, y: int, i: int) -> int:
        h = self._sign_proto.copy()
        h.update(_PACK_XY(x, y) + _PACK_X(i))
        return 1 if h.digest()[-1] & 1 else -1

    def slot_index(self, x: int, y: int, i: int, m_x: int) -> int:
        if m_x <= 0:
            raise EmptySlotArray(f"anchor {x} has no slots")
        h = self._slot_proto.copy()
        h.update(_PACK_XY(x, y) + _PACK_X(i))
        return int.from_bytes(h.digest(), "big") % m_x

    def prefix_key(self, i: int, v: int) -> int:
        """Layer-i key of `v`: the top key_bits of a 128-bit PRF output."""
        cached = self._prefix_cache.get((i, v))
        if cached is None:
            proto = self._prefix_protos.get(i)
            if proto is None:
                proto = self._proto("prefix", i)
                self._prefix_protos[i] = proto
            h = proto.copy()
            h.update(_PACK_X(v))
            cached = int.from_bytes(h.digest(), "big") >> (128 - self.params.key_bits)
            self._prefix_cache[(i, v)] = cached
        return cached

    def pk_offset(self, i: int, x: int, y: int) -> int:
        a, b = self._poly("pairkey", i)
        return ((a * y + b) - (a * x + b)) % self._p

    def bucket(self, i: int, r: int, t: int, delta: int) -> int:
        a, b = self._poly("bucket", i, r, t, nonzero_a=True)
        return (a * delta + b) % self._p % self.params.buckets

    # -- retention coins ------------------------------------------------------------

    def _coin_threshold_128(self, i: int) -> int:
        if self.params.flat_keep_rate is not None:
            return int(self.params.flat_keep_rate * (1 << 128))
        shift = i + 2
        return (1 << (128 - shift)) if shift <= 128 else 0

    def keep_coin(self, x: int, y: int, i: int) -> int:
        """Bernoulli(2^-(i+2)) retention bit for arc (x -> y) at layer i.

        PRF mode draws 128 fresh bits per (edge, layer): the coin is 1 iff
        the drawn value sits below 2^(128-(i+2)), i.e. the top i+2 bits are
        zero, an exact dyadic probability under full independence. kwise
        mode evaluates a degree-(k-1) polynomial at an injective edge
        point, trading speed for the limited-independence family behind
        the same signature.
        """
        if self._coin_table is not None:
            proto, threshold = self._coin_table[i - 1]
            h = proto.copy()
            h.update(_PACK_XY(x, y))
            return 1 if int.from_bytes(h.digest(), "big") < threshold else 0
        return self._keep_coin_kwise(x, y, i)

    def keep_layers(self, x: int, y: int) -> List[int]:
        """All layers whose retention coin keeps arc (x -> y).

        Bit-identical to filtering keep_coin over 1..layers (a property
        test pins that); exists because the scan evaluates every layer's
        coin for every arc, and one call per arc beats one per pair.
        """
        table = self._coin_table
        if table is None:
            return [i for i in range(1, self.params.layers + 1) if self._keep_coin_kwise(x, y, i)]
        msg = _PACK_XY(x, y)
        kept = []
        for i, (proto, threshold) in enumerate(table, start=1):
            h = proto.copy()
            h.update(msg)
            if int.from_bytes(h.digest(), "big") < threshold:
                kept.append(i)
        return kept

    def _keep_coin_kwise(self, x: int, y: int, i: int) -> int:
        p = self._p
        coeffs = self._kwise_coeffs.get(i)
        if coeffs is None:
            seed = self._sub("coin", i)
            k = self.params.independence
            coeffs = [
                int.from_bytes(
                    hashlib.blake2b(_enc("coef", j), key=seed, digest_size=32).digest(), "big"
                )
                % p
                for j in range(k)
            ]
            self._kwise_coeffs[i] = coeffs
        point = (x * max(2, self.params.n) + y) % p
        acc = 0
        for c in coeffs:
            acc = (acc * point + c) % p
        if self.params.flat_keep_rate is not None:
            threshold = int(self.params.flat_keep_rate * p)
        else:
            threshold = p >> (i + 2)
        return 1 if acc < threshold else 0

    # -- probe schedule ---------------------------------------------------------------

    def probed_pairs(self, i: int, x: int, r: int, b: int, t: int):
        """The fixed list of canonical complementary bucket pairs for one
        (layer, anchor, level, prefix, group) cell.

        Pairs are drawn from the probe PRF keyed by the full tuple, stored
        as (min(j, j*), max(j, j*)), de-duplicated, in draw order. The list
        holds c0 distinct pairs (fewer only if T admits fewer pairs total).
        """
        cached = self._probe_cache.get((i, x, r, b, t))
        if cached is None:
            cached = self._probe_generate(i, x, r, b, t)
        return cached[0]

    def _probe_generate(self, i: int, x: int, r: int, b: int, t: int):
        t_buckets = self._t_buckets
        want = self._probe_want
        proto = self._probe_proto_obj
        if proto is None:
            proto = self._probe_proto_obj = self._proto("probe")
        pairs: List[Tuple[int, int]] = []
        seen = set()
        # One digest yields eight 16-bit draws; extend with counter-suffixed
        # digests in the (rare) event de-duplication exhausts a block.
        msg = _PACK_PROBE(i, x, r, b, t)
        block = 0
        from_bytes = int.from_bytes
        while len(pairs) < want:
            h = proto.copy()
            h.update(msg + _PACK_X(block))
            digest = h.digest()
            for off in range(0, 16, 2):
                j = from_bytes(digest[off : off + 2], "big") % t_buckets
                js = (t_buckets - j) % t_buckets
                pair = (j, js) if j <= js else (js, j)
                if pair not in seen:
                    seen.add(pair)
                    pairs.append(pair)
                    if len(pairs) == want:
                        break
            block += 1
        cached = (tuple(pairs), frozenset(pairs))
        self._probe_cache[(i, x, r, b, t)] = cached
        return cached

    def probed_pair_set(self, i: int, x: int, r: int, b: int, t: int) -> frozenset:
        cached = self._probe_cache.get((i, x, r, b, t))
        if cached is None:
            cached = self._probe_generate(i, x, r, b, t)
        return cached[1]
