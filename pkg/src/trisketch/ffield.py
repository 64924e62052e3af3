"""Prime-field arithmetic and the degree-2 one-sparse test.

Field elements are plain Python ints in [0, p), always fully reduced; the
prime modulus is passed explicitly. Python ints absorb the double-width
intermediates, so no special reduction tricks are needed even for the
default Mersenne prime 2^61 - 1.

A signed moment triple (a, b, c) summarises a multiset of signed unit
items with identifiers in the nonzero residues:

    a = sum of signs,  b = sum of sign * id,  c = sum of sign * id^2.

The multiset is consistent with a single identifier iff a != 0 and
b^2 = a*c, in which case the identifier decodes as b / a. The predicate
is a degree-2 polynomial identity, so pairwise-independent ids keep the
false-accept rate at O(1/p) per test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import ZeroId, ZeroInverse

M61 = (1 << 61) - 1  # default modulus: Mersenne prime 2^61 - 1

Triple = Tuple[int, int, int]

ZERO_TRIPLE: Triple = (0, 0, 0)

# Deterministic Miller-Rabin witness set, complete for n < 3.317e24.
_MR_BASES_SMALL = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_BASES_LARGE = tuple(range(2, 102))


def _miller_rabin(n: int, bases) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _lucas_lehmer(exponent: int) -> bool:
    """Primality of 2^exponent - 1 for odd prime exponent (deterministic)."""
    m = (1 << exponent) - 1
    s = 4
    for _ in range(exponent - 2):
        s = (s * s - 2) % m
    return s == 0


def is_prime(n: int) -> bool:
    """Deterministic primality for every modulus this package instantiates.

    Mersenne candidates go through Lucas-Lehmer; everything below
    3.317e24 uses the proven Miller-Rabin witness set. Larger non-Mersenne
    inputs fall back to 100 fixed witnesses (no false positive is known
    for that set; such moduli never arise from the built-in presets).
    """
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    k = n.bit_length()
    if n == (1 << k) - 1:
        return is_prime(k) and _lucas_lehmer(k)
    if n < 3_317_044_064_679_887_385_961_981:
        return _miller_rabin(n, _MR_BASES_SMALL)
    return _miller_rabin(n, _MR_BASES_LARGE)


@dataclass(frozen=True)
class FieldParams:
    """A validated prime modulus."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")


def field_add(x: int, y: int, p: int = M61) -> int:
    s = x + y
    return s - p if s >= p else s


def field_sub(x: int, y: int, p: int = M61) -> int:
    s = x - y
    return s + p if s < 0 else s


def field_mul(x: int, y: int, p: int = M61) -> int:
    return x * y % p


def field_neg(x: int, p: int = M61) -> int:
    return p - x if x else 0


def field_inv(x: int, p: int = M61) -> int:
    """Multiplicative inverse via Fermat; zero has none."""
    if x == 0:
        raise ZeroInverse("0 has no inverse")
    return pow(x, p - 2, p)


def triple_add(t: Triple, u: Triple, p: int = M61) -> Triple:
    return (
        field_add(t[0], u[0], p),
        field_add(t[1], u[1], p),
        field_add(t[2], u[2], p),
    )


def triple_accumulate(t: Triple, sign: int, ident: int, p: int = M61) -> Triple:
    """Fold one signed unit item with identifier `ident` into the triple.

    Identifiers live in the nonzero residues; sign is +1 or -1.
    """
    if ident == 0:
        raise ZeroId("identifiers must be nonzero")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    a, b, c = t
    if sign == 1:
        return (
            field_add(a, 1, p),
            field_add(b, ident, p),
            field_add(c, ident * ident % p, p),
        )
    return (
        field_sub(a, 1, p),
        field_sub(b, ident, p),
        field_sub(c, ident * ident % p, p),
    )


def one_sparse_test(t: Triple, p: int = M61) -> Optional[int]:
    """Decode the unique identifier if the triple is consistent with one item.

    Returns the decoded identifier (b / a) when a != 0 and b^2 = a*c, and
    None otherwise. The zero triple is simply inconsistent, never an error.
    """
    a, b, c = t
    if a == 0 or b * b % p != a * c % p:
        return None
    return b * field_inv(a, p) % p


def decodes_to(t: Triple, ident: int, p: int = M61) -> bool:
    """One-sparse consistency plus decode equality, without an inversion.

    b / a = ident is tested as b = a * ident, valid because a != 0 is
    required first. This is the gate applied to slots and bins.
    """
    a, b, c = t
    return a != 0 and b * b % p == a * c % p and b == a * ident % p
