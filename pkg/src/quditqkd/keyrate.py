"""Asymptotic secret key rates under one-way entanglement distillation.

K is the number of secret bits per sifted, distilled qudit allowed by the
quantum Gilbert-Varshamov bound,

    K = n - max H({e_uv}),

where the maximum runs over every Pauli distribution consistent with the
observed error rates (the adversarial worst case). For the qubit-like
qudit schemes the maximisation collapses onto distributions with four
distinct values (A, B, C, D); see :class:`SymmetricDistribution`.

Rates ``R`` are in dits per transmitted qudit (bits per qubit for the
qubit protocols). :attr:`KeyRatePoint.R_bits` converts to bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq
from scipy.special import entr, xlogy

from .channel import PauliDistribution, e_raw_from

LN2 = math.log(2.0)
SUM_TOL = 1e-12

SCHEMES = ("A", "B", "C", "BB84", "SixState", "Chau05", "RRDPS")
QUDIT_SCHEMES = ("A", "B", "C")


class KeyRateError(ValueError):
    """Inputs outside the feasible region; ``bound`` names the violated constraint."""

    def __init__(self, message: str, bound: str = ""):
        super().__init__(message)
        self.bound = bound


def _n_of(N: int) -> int:
    n = N.bit_length() - 1
    if N != 1 << n or n < 1:
        raise KeyRateError(f"N={N} is not a power of two", "N = 2^n")
    return n


def shannon_bits(p) -> float:
    """-sum p log2 p with 0 log 0 = 0."""
    return float(np.sum(entr(np.asarray(p, dtype=float)))) / LN2


def h2(e: float) -> float:
    """Binary entropy in bits."""
    return shannon_bits([e, 1.0 - e])


# ------------------------------------------------------------------ symmetric form


@dataclass(frozen=True)
class SymmetricDistribution:
    """Pauli distribution invariant under permutations of nonzero u and of nonzero v.

    A = e00, B = e0v, C = eu0, D = euv for u, v nonzero.
    """

    A: float
    B: float
    C: float
    D: float
    N: int

    def __post_init__(self):
        for name in "ABCD":
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise KeyRateError(f"{name}={x!r} outside [0, 1]", f"0 <= {name} <= 1")
        m = self.N - 1
        total = self.A + m * (self.B + self.C) + m * m * self.D
        if abs(total - 1.0) > SUM_TOL:
            raise KeyRateError(f"A+(N-1)(B+C)+(N-1)^2 D = {total!r} != 1", "normalisation")

    @classmethod
    def clamped(cls, A, B, C, D, N) -> "SymmetricDistribution":
        """Build from values that may carry round-off of order 1e-15 outside [0, 1]."""
        vals = [min(max(float(x), 0.0), 1.0) if -1e-13 < x < 1 + 1e-13 else float(x)
                for x in (A, B, C, D)]
        return cls(*vals, N=N)

    @classmethod
    def from_pauli(cls, d: PauliDistribution) -> "SymmetricDistribution":
        e, m = d.e, d.N - 1
        return cls.clamped(e[0, 0], e[0, 1:].sum() / m, e[1:, 0].sum() / m,
                           e[1:, 1:].sum() / (m * m), d.N)

    @classmethod
    def from_rates(cls, e_c: float, e_a: float, D: float, N: int) -> "SymmetricDistribution":
        """Eliminate B, C and A through the e_c, e_a and normalisation constraints."""
        m = N - 1
        b0, c0 = 2.0 * e_c / N, e_a / m
        return cls.clamped(1.0 - m * (b0 + c0) + m * m * D, b0 - m * D, c0 - m * D, D, N)

    @property
    def e_c(self) -> float:
        return self.N / 2 * (self.B + (self.N - 1) * self.D)

    @property
    def e_a(self) -> float:
        return (self.N - 1) * (self.C + (self.N - 1) * self.D)

    @property
    def e_raw(self) -> float:
        return e_raw_from(self.e_c, self.e_a, self.N)

    def entropy(self) -> float:
        m = self.N - 1
        nats = -(xlogy(self.A, self.A) + m * xlogy(self.B, self.B)
                 + m * xlogy(self.C, self.C) + m * m * xlogy(self.D, self.D))
        return float(nats) / LN2

    def to_pauli(self, F) -> PauliDistribution:
        from .channel import symmetric
        return symmetric(F, self.A, self.B, self.C, self.D)


def K_of_symmetric(s: SymmetricDistribution) -> float:
    """n + A log A + (N-1) B log B + (N-1) C log C + (N-1)^2 D log D."""
    return _n_of(s.N) - s.entropy()


# ------------------------------------------------------------------ optimisers


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _bisect_decreasing(slope, lo: float, hi: float) -> float:
    """Root of a non-increasing function on [lo, hi]; endpoints if it has no sign change."""
    if hi <= lo:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s = slope(mid)
        if s > 0:
            lo = mid
        elif s < 0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def _check_ec_ea(e_c: float, e_a: float, N: int) -> None:
    if e_c < 0:
        raise KeyRateError(f"e_c={e_c} is negative", "e_c >= 0")
    if e_a < 0:
        raise KeyRateError(f"e_a={e_a} is negative", "e_a >= 0")
    ec_max = N / (2.0 * (N - 1))
    if e_c > ec_max + 1e-15:
        raise KeyRateError(f"e_c={e_c} exceeds N/(2(N-1)) = {ec_max:.6g}", "e_c <= N/(2(N-1))")
    if e_a > 1.0 + 1e-15:
        raise KeyRateError(f"e_a={e_a} exceeds 1", "e_a <= 1")


def _worst_D(e_c: float, e_a: float, N: int) -> float:
    """Entropy-maximising D for fixed (e_c, e_a).

    dH/dD has the sign of ln B + ln C - ln A - ln D, which falls monotonically
    across the feasible interval, so bisection on that sign finds the maximum.
    """
    m = N - 1
    b0, c0 = 2.0 * e_c / N, e_a / m
    a0 = 1.0 - m * (b0 + c0)
    lo = max(0.0, -a0 / (m * m))
    hi = min(b0, c0) / m

    def slope(D: float) -> float:
        s = _log(b0 - m * D) + _log(c0 - m * D) - _log(a0 + m * m * D) - _log(D)
        return 0.0 if math.isnan(s) else s

    return _bisect_decreasing(slope, lo, hi)


def optimize_K_given_ec_ea(e_c: float, e_a: float, N: int) -> tuple[float, SymmetricDistribution]:
    """Worst-case K for a given phase-bit error rate and dit error rate."""
    _n_of(N)
    if N < 4:
        raise KeyRateError("the qudit schemes need N >= 4", "N >= 4")
    _check_ec_ea(e_c, e_a, N)
    e_c = min(e_c, N / (2.0 * (N - 1)))
    e_a = min(e_a, 1.0)
    s = SymmetricDistribution.from_rates(e_c, e_a, _worst_D(e_c, e_a, N), N)
    return K_of_symmetric(s), s


def eraw_feasible_max(N: int) -> float:
    n = _n_of(N)
    kappa = (N - 1) * (N - 2) / ((n - 1) * N)
    return (N / (2.0 * (N - 1)) + 1.0 / kappa) / n


def optimize_K_given_eraw(e_raw: float, N: int) -> tuple[float, SymmetricDistribution]:
    """Worst-case K over all (e_c, e_a) splits compatible with a raw bit error rate.

    The outer search runs over e_c (e_a then follows from the raw-rate
    relation); the worst-case entropy as a function of e_c is concave, and
    its slope at the inner optimum is, by the envelope theorem, the partial
    derivative with D held fixed.
    """
    n = _n_of(N)
    if N < 4:
        raise KeyRateError("the qudit schemes need N >= 4", "N >= 4")
    if e_raw < 0:
        raise KeyRateError(f"e_raw={e_raw} is negative", "e_raw >= 0")
    emax = eraw_feasible_max(N)
    if e_raw > emax + 1e-15:
        raise KeyRateError(f"e_raw={e_raw} exceeds the feasible maximum {emax:.6g}",
                           "e_raw <= feasible maximum")
    m = N - 1
    kappa = m * (N - 2) / ((n - 1) * N)
    w = 2.0 * m / N
    total = n * e_raw
    lo = max(0.0, total - 1.0 / kappa)
    hi = min(total, N / (2.0 * m))

    def split(e_c: float) -> tuple[float, float, float]:
        e_a = min(max(kappa * (total - e_c), 0.0), 1.0)
        return e_c, e_a, _worst_D(e_c, e_a, N)

    def slope(e_c: float) -> float:
        e_c, e_a, D = split(e_c)
        b0, c0 = 2.0 * e_c / N, e_a / m
        lnA = _log(1.0 - m * (b0 + c0) + m * m * D)
        lnB = _log(b0 - m * D)
        lnC = _log(c0 - m * D)
        s = w * (lnA - lnB) + kappa * (lnC - lnA)
        if math.isnan(s):
            h = 1e-9 * max(hi - lo, 1e-12)
            return _entropy_at(*split(min(e_c + h, hi)), N) - _entropy_at(*split(max(e_c - h, lo)), N)
        return s

    e_c = _bisect_decreasing(slope, lo, hi)
    s = SymmetricDistribution.from_rates(*split(e_c), N)
    return K_of_symmetric(s), s


def _entropy_at(e_c: float, e_a: float, D: float, N: int) -> float:
    return SymmetricDistribution.from_rates(e_c, e_a, D, N).entropy()


def closed_form_K_N4(e_raw: float) -> float:
    """2 {1 + (1 - 3e/2) log2(1 - 3e/2) + (3e/2) log2(e/2)} for N = 4."""
    if not 0.0 <= e_raw <= 2.0 / 3.0:
        raise KeyRateError(f"e_raw={e_raw} outside [0, 2/3]", "0 <= e_raw <= 2/3")
    x = 1.0 - 1.5 * e_raw
    return 2.0 * (1.0 + float(xlogy(x, x) + xlogy(1.5 * e_raw, e_raw / 2.0)) / LN2)


# ------------------------------------------------------------------ rates


def rate_scheme_b(K: float, n: int, N: int) -> float:
    return max(0.0, K / (n * (N - 1)))


rate_scheme_a = rate_scheme_b


def rate_scheme_c(K: float, n: int, N: int) -> float:
    return 2.0 * rate_scheme_b(K, n, N) / N


def chau05_K(e00: float, N: int) -> float:
    """Depolarised-channel K: n + e00 log e00 + (1-e00) log((1-e00)/(N^2-1))."""
    if not 0.0 <= e00 <= 1.0:
        raise KeyRateError(f"e00={e00} outside [0, 1]", "0 <= e00 <= 1")
    n = _n_of(N)
    q = 1.0 - e00
    return n + float(xlogy(e00, e00) + xlogy(q, q / (N * N - 1))) / LN2


def chau05_eraw_from_e00(e00: float, N: int) -> float:
    return (1.0 - e00) * N / (N * N - 1) * (N / 2) / (N - 1)


def chau05_e00_from_eraw(e_raw: float, N: int) -> float:
    e00 = 1.0 - e_raw * (N * N - 1) * (N - 1) * 2.0 / (N * N)
    if e00 < 0:
        raise KeyRateError(f"e_raw={e_raw} too large for a depolarised channel at N={N}",
                           "e00 >= 0")
    return e00


def chau05_threshold(N: int) -> tuple[float, float]:
    """(e00 where K = 0, the corresponding raw bit error rate)."""
    e00 = brentq(lambda x: chau05_K(x, N), 1.0 / (N * N), 1.0 - 1e-15, xtol=1e-14)
    return e00, chau05_eraw_from_e00(e00, N)


def chau05_rate(e_raw: float, N: int) -> float:
    n = _n_of(N)
    return max(0.0, chau05_K(chau05_e00_from_eraw(e_raw, N), N) / (n * (N * N - 1)))


def _check_half(e_raw: float) -> None:
    if not 0.0 <= e_raw <= 0.5:
        raise KeyRateError(f"e_raw={e_raw} outside [0, 1/2]", "0 <= e_raw <= 1/2")


def rrdps_K(e_raw: float, N: int) -> float:
    _check_half(e_raw)
    return 1.0 - h2(1.0 / (N - 1)) - h2(e_raw)


def rrdps_rate(e_raw: float, N: int) -> float:
    return max(0.0, rrdps_K(e_raw, N) / _n_of(N))


def bb84_K(e_raw: float) -> float:
    _check_half(e_raw)
    return 1.0 - 2.0 * h2(e_raw)


def bb84_rate(e_raw: float) -> float:
    return max(0.0, 0.5 * bb84_K(e_raw))


def sixstate_K(e_raw: float) -> float:
    """One-way rate with non-degenerate codes: 1 + (1-3e/2) log(1-3e/2) + (3e/2) log(e/2)."""
    _check_half(e_raw)
    x = 1.0 - 1.5 * e_raw
    return 1.0 + float(xlogy(x, x) + xlogy(1.5 * e_raw, e_raw / 2.0)) / LN2


def sixstate_rate(e_raw: float) -> float:
    return max(0.0, sixstate_K(e_raw) / 3.0)


# ------------------------------------------------------------------ dispatch


@dataclass(frozen=True)
class KeyRatePoint:
    scheme: str
    n: int
    N: int
    inputs: dict
    K: float
    R: float
    distribution: SymmetricDistribution | None = dc_field(default=None, compare=False)

    @property
    def R_bits(self) -> float:
        return self.R * self.n

    def as_dict(self) -> dict:
        out = {"scheme": self.scheme, "n": self.n, "N": self.N, **self.inputs,
               "K": self.K, "R": self.R, "R_bits": self.R_bits}
        if self.distribution is not None:
            s = self.distribution
            out.update(A=s.A, B=s.B, C=s.C, D=s.D)
        return out


def evaluate(scheme: str, *, N: int = 4, e_raw: float | None = None,
             e_c: float | None = None, e_a: float | None = None,
             e00: float | None = None) -> KeyRatePoint:
    """Key rate of ``scheme`` at one operating point.

    The qudit schemes A, B and C take either ``e_raw`` or the pair
    (``e_c``, ``e_a``). Chau05 takes ``e_raw`` or ``e00``. BB84 and the
    six-state scheme are qubit protocols and ignore ``N``.
    """
    if scheme not in SCHEMES:
        raise KeyRateError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}", "scheme")
    if scheme in ("BB84", "SixState"):
        if e_raw is None:
            raise KeyRateError(f"{scheme} needs e_raw", "e_raw")
        if scheme == "BB84":
            K = bb84_K(e_raw)
            return KeyRatePoint(scheme, 1, 2, {"e_raw": e_raw}, K, max(0.0, K / 2))
        K = sixstate_K(e_raw)
        return KeyRatePoint(scheme, 1, 2, {"e_raw": e_raw}, K, max(0.0, K / 3))

    n = _n_of(N)
    if scheme == "RRDPS":
        if e_raw is None:
            raise KeyRateError("RRDPS needs e_raw", "e_raw")
        K = rrdps_K(e_raw, N)
        return KeyRatePoint(scheme, n, N, {"e_raw": e_raw}, K, max(0.0, K / n))
    if scheme == "Chau05":
        if e00 is None:
            if e_raw is None:
                raise KeyRateError("Chau05 needs e_raw or e00", "e_raw")
            e00 = chau05_e00_from_eraw(e_raw, N)
        else:
            e_raw = chau05_eraw_from_e00(e00, N)
        K = chau05_K(e00, N)
        return KeyRatePoint(scheme, n, N, {"e_raw": e_raw, "e00": e00}, K,
                            max(0.0, K / (n * (N * N - 1))))

    if e_c is not None or e_a is not None:
        if e_c is None or e_a is None:
            raise KeyRateError("give both e_c and e_a", "e_c, e_a")
        K, s = optimize_K_given_ec_ea(e_c, e_a, N)
        inputs = {"e_c": e_c, "e_a": e_a, "e_raw": e_raw_from(e_c, e_a, N)}
    elif e_raw is not None:
        K, s = optimize_K_given_eraw(e_raw, N)
        inputs = {"e_raw": e_raw, "e_c": s.e_c, "e_a": s.e_a}
    else:
        raise KeyRateError(f"scheme {scheme} needs e_raw or (e_c, e_a)", "e_raw")
    R = rate_scheme_c(K, n, N) if scheme == "C" else rate_scheme_b(K, n, N)
    return KeyRatePoint(scheme, n, N, inputs, K, R, s)


def threshold(scheme: str, N: int = 4, xtol: float = 1e-12) -> float:
    """Largest raw bit error rate with K > 0."""
    if scheme == "BB84":
        return brentq(bb84_K, 1e-12, 0.5, xtol=xtol)
    if scheme == "SixState":
        return brentq(sixstate_K, 1e-12, 0.5, xtol=xtol)
    if scheme == "RRDPS":
        return brentq(lambda e: rrdps_K(e, N), 0.0, 0.5, xtol=xtol)
    if scheme == "Chau05":
        return chau05_threshold(N)[1]
    if scheme in QUDIT_SCHEMES:
        return brentq(lambda e: optimize_K_given_eraw(e, N)[0], 0.0, eraw_feasible_max(N),
                      xtol=xtol)
    raise KeyRateError(f"unknown scheme {scheme!r}", "scheme")
