"""Arithmetic in GF(2^n) for small n.

Elements are plain ints whose bit k is the coefficient of x^k. A coset of
GF(2) inside GF(N) is {a, a ^ 1}; it is labelled by the member with a zero
constant term, so ``a == coset_of(a) ^ constant_term(a)`` always holds.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# x^2+x+1, x^3+x+1, x^4+x+1
MODULI = {2: 0b111, 3: 0b1011, 4: 0b10011}


class FieldError(ValueError):
    """Raised for operations outside the field's domain (e.g. 1/0)."""


def _poly_mod(a: int, m: int) -> int:
    deg = m.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= m << (a.bit_length() - 1 - deg)
    return a


def is_irreducible(m: int) -> bool:
    """Exhaustive trial division of ``m`` by every polynomial of lower degree."""
    deg = m.bit_length() - 1
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if _poly_mod(m, d) == 0:
            return False
    return True


class GF2n:
    """The field GF(2^n) with precomputed multiplication, inverse and trace tables.

    Instances are immutable and safe to share between threads; use
    :func:`field` to get a cached instance.
    """

    def __init__(self, n: int, modulus: int | None = None):
        if n not in MODULI and modulus is None:
            raise FieldError(f"unsupported field degree n={n}; choose one of {sorted(MODULI)}")
        if n < 2:
            raise FieldError("n must be at least 2")
        modulus = MODULI[n] if modulus is None else modulus
        if modulus.bit_length() - 1 != n:
            raise FieldError(f"modulus {modulus:#b} does not have degree {n}")
        if not is_irreducible(modulus):
            raise FieldError(f"modulus {modulus:#b} is reducible")
        self.n = n
        self.N = 1 << n
        self.modulus = modulus

        N = self.N
        mul = np.zeros((N, N), dtype=np.int64)
        for a in range(N):
            for b in range(N):
                mul[a, b] = self._shift_and_reduce(a, b)
        mul.setflags(write=False)
        self.mul_table = mul

        inv = np.zeros(N, dtype=np.int64)
        for a in range(1, N):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        inv.setflags(write=False)
        self.inv_table = inv

        tr = np.zeros(N, dtype=np.int64)
        for a in range(N):
            acc, p = 0, a
            for _ in range(n):
                acc ^= p
                p = int(mul[p, p])
            tr[a] = acc
        if not set(tr.tolist()) <= {0, 1}:
            raise FieldError("trace table left GF(2); modulus is not valid")
        tr.setflags(write=False)
        self.trace_table = tr

    def _shift_and_reduce(self, a: int, b: int) -> int:
        result = 0
        top = 1 << self.n
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= self.modulus
        return result

    def __repr__(self) -> str:
        return f"GF2n(n={self.n}, modulus={self.modulus:#b})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2n) and (self.n, self.modulus) == (other.n, other.modulus)

    def __hash__(self) -> int:
        return hash((self.n, self.modulus))

    def modulus_str(self) -> str:
        terms = [("x^%d" % k if k > 1 else ("x" if k == 1 else "1"))
                 for k in range(self.n, -1, -1) if self.modulus >> k & 1]
        return "+".join(terms)

    def _check(self, *elems: int) -> None:
        for a in elems:
            if not 0 <= a < self.N:
                raise FieldError(f"{a} is not an element of GF({self.N})")

    # arithmetic

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return int(self.inv_table[a])

    def trace(self, a: int) -> int:
        """Absolute trace a + a^2 + a^4 + ... + a^(N/2), a bit."""
        self._check(a)
        return int(self.trace_table[a])

    @staticmethod
    def constant_term(a: int) -> int:
        return a & 1

    @staticmethod
    def coset_of(a: int) -> int:
        return a & ~1

    # enumeration helpers

    @property
    def elements(self) -> range:
        return range(self.N)

    @property
    def nonzero(self) -> range:
        return range(1, self.N)

    @property
    def cosets(self) -> range:
        """Canonical coset representatives 0, 2, 4, ..., N-2."""
        return range(0, self.N, 2)


@lru_cache(maxsize=None)
def field(n: int) -> GF2n:
    """Cached field of order 2^n with the default modulus."""
    return GF2n(n)


def coset_bits(rep: int, n: int) -> list[int]:
    """(n-1)-bit big-endian encoding of a coset label."""
    k = rep >> 1
    return [(k >> (n - 2 - i)) & 1 for i in range(n - 1)]
