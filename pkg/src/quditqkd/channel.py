"""Pauli channels X_u Z_v on a qudit and the error statistics they induce.

Bit-error conventions (raw key of one sifted round = (n-1) coset bits + 1 phase bit):

* ``e_c``  -- probability that the phase bit flips, averaged over lambda.
* ``e_a``  -- dit error rate normalised as P(u != 0). The coset actually
  observed by Bob is wrong with probability ``(N-2)/(N-1) * e_a`` because
  an error u = lambda leaves the coset unchanged.
* ``e_raw`` -- (1/n) * (e_c + (n-1) N e_a / ((N-1)(N-2))).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .galois import GF2n, field

SUM_TOL = 1e-12


class ChannelError(ValueError):
    pass


class PauliDistribution:
    """Probabilities e[u, v] that a qudit experiences X_u Z_v."""

    def __init__(self, F: GF2n, e):
        e = np.array(e, dtype=float)
        if e.shape != (F.N, F.N):
            raise ChannelError(f"expected a {F.N}x{F.N} table, got shape {e.shape}")
        if (e < 0).any():
            raise ChannelError("negative probability in Pauli distribution")
        total = e.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ChannelError(f"Pauli distribution sums to {total!r}, not 1")
        e.setflags(write=False)
        self.field = F
        self.e = e

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def N(self) -> int:
        return self.field.N

    def __repr__(self) -> str:
        return f"PauliDistribution(n={self.n}, e00={self.e[0, 0]:.6g})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PauliDistribution) and self.field == other.field
                and np.array_equal(self.e, other.e))

    def to_json(self) -> dict:
        entries = [[u, v, float(self.e[u, v])]
                   for u in range(self.N) for v in range(self.N) if self.e[u, v] != 0.0]
        return {"n": self.n, "entries": entries}

    @classmethod
    def from_json(cls, obj: dict) -> "PauliDistribution":
        try:
            F = field(int(obj["n"]))
            e = np.zeros((F.N, F.N))
            for u, v, prob in obj["entries"]:
                u, v = int(u), int(v)
                if not (0 <= u < F.N and 0 <= v < F.N):
                    raise ChannelError(f"entry ({u}, {v}) outside GF({F.N})")
                e[u, v] += float(prob)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ChannelError):
                raise
            raise ChannelError(f"malformed Pauli distribution JSON: {exc}") from exc
        return cls(F, e)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> "PauliDistribution":
        return cls.from_json(json.loads(Path(path).read_text()))


def identity_channel(F: GF2n) -> PauliDistribution:
    e = np.zeros((F.N, F.N))
    e[0, 0] = 1.0
    return PauliDistribution(F, e)


def pure_pauli(F: GF2n, u: int, v: int) -> PauliDistribution:
    e = np.zeros((F.N, F.N))
    e[u, v] = 1.0
    return PauliDistribution(F, e)


def depolarizing(p: float, F: GF2n) -> PauliDistribution:
    """e00 = 1 - p, every other X_u Z_v with probability p / (N^2 - 1)."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"depolarizing probability {p} outside [0, 1]")
    N = F.N
    e = np.full((N, N), p / (N * N - 1))
    e[0, 0] = 1.0 - p
    return PauliDistribution(F, e)


def symmetric(F: GF2n, A: float, B: float, C: float, D: float) -> PauliDistribution:
    """Full table with e00=A, e0v=B, eu0=C, euv=D for u, v nonzero."""
    e = np.full((F.N, F.N), D, dtype=float)
    e[0, :] = B
    e[:, 0] = C
    e[0, 0] = A
    return PauliDistribution(F, e)


def sample_error(d: PauliDistribution, rng: np.random.Generator) -> tuple[int, int]:
    u, v = sample_errors(d, rng, 1)
    return int(u[0]), int(v[0])


def sample_errors(d: PauliDistribution, rng: np.random.Generator, size: int):
    """Arrays (u, v) of ``size`` independent draws from ``d``."""
    cdf = np.cumsum(d.e.ravel())
    k = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
    k = np.minimum(k, d.N * d.N - 1)
    return np.divmod(k, d.N)


def tilde_e(d: PauliDistribution, b: int, c: int) -> float:
    """Sum of e[b, v] over v with Tr(v) = c."""
    F = d.field
    return float(sum(d.e[b, v] for v in F.elements if F.trace(v) == c))


@dataclass(frozen=True)
class ObservedRates:
    """Probability of revealing coset [b] and phase bit c in rounds sifted with lambda.

    ``table[lam - 1, b >> 1, c]``; each lambda slice sums to 1.
    """

    field: GF2n
    table: np.ndarray

    def __getitem__(self, key: tuple[int, int, int]) -> float:
        lam, b, c = key
        return float(self.table[lam - 1, b >> 1, c])

    def for_lambda(self, lam: int) -> np.ndarray:
        return self.table[lam - 1]


def observed_rates(d: PauliDistribution) -> ObservedRates:
    """Statistics revealed in error estimation, one table per sifting value lambda.

    With L_lambda applied before the channel and L_lambda^-1 after it, X_u Z_v
    acts as X_{u/lambda} Z_{lambda v}; Bob sees coset [u/lambda] and phase
    Tr(lambda v). At lambda = 1 this is tilde_e(b, c) + tilde_e(b+1, c).
    """
    F = d.field
    N = F.N
    table = np.zeros((N - 1, N // 2, 2))
    for lam in F.nonzero:
        lam_inv = F.inv(lam)
        for u in F.elements:
            b = F.mul(lam_inv, u) & ~1
            for v in F.elements:
                table[lam - 1, b >> 1, F.trace(F.mul(lam, v))] += d.e[u, v]
    table.setflags(write=False)
    return ObservedRates(F, table)


@dataclass(frozen=True)
class ErrorSummary:
    e_c: float
    e_a: float
    e_raw: float

    def as_dict(self) -> dict:
        return {"e_c": self.e_c, "e_a": self.e_a, "e_raw": self.e_raw}


def e_raw_from(e_c: float, e_a: float, N: int) -> float:
    n = N.bit_length() - 1
    return (e_c + (n - 1) * N * e_a / ((N - 1) * (N - 2))) / n


def e_a_from_coset_mismatch(rate: float, N: int) -> float:
    return rate * (N - 1) / (N - 2)


def mismatch_joint(d: PauliDistribution) -> np.ndarray:
    """Lambda-averaged joint probability P[coset wrong, phase wrong] of one sifted round."""
    F = d.field
    joint = np.zeros((2, 2))
    for lam in F.nonzero:
        lam_inv = F.inv(lam)
        for u in F.elements:
            dit = int(F.mul(lam_inv, u) & ~1 != 0)
            for v in F.elements:
                joint[dit, F.trace(F.mul(lam, v))] += d.e[u, v]
    return joint / (F.N - 1)


def summarize(d: PauliDistribution) -> ErrorSummary:
    joint = mismatch_joint(d)
    N = d.N
    e_c = float(joint[:, 1].sum())
    e_a = e_a_from_coset_mismatch(float(joint[1, :].sum()), N)
    return ErrorSummary(e_c, e_a, e_raw_from(e_c, e_a, N))
