"""Dense state vectors and operators for one or two qudits of dimension N = 2^n.

Single-qudit states are length-N complex arrays indexed by field element.
Two-qudit states are length-N^2 arrays with Alice's index major, i.e. the
amplitude of |i>_A |j>_B sits at ``i * N + j``. Matrices act on column
vectors, ``M[out, in]``.

All randomness is drawn from an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .galois import GF2n, FieldError

SQRT_HALF = 1.0 / np.sqrt(2.0)
NORM_TOL = 1e-12


class QuditError(ValueError):
    pass


class BellLabel(NamedTuple):
    """Index ([a], b, c) of a two-qudit EPR-like basis state."""

    a: int
    b: int
    c: int


class BasisLabel(NamedTuple):
    """Index (lambda, [a], c) of a qubit-like state in the basis B_lambda."""

    lam: int
    a: int
    c: int


# ---------------------------------------------------------------- states


def ket(F: GF2n, i: int) -> np.ndarray:
    out = np.zeros(F.N, dtype=complex)
    out[i] = 1.0
    return out


def bell_state(F: GF2n, label: BellLabel) -> np.ndarray:
    """(1/sqrt2) sum_i (-1)^(i c) |i+a>_A |i+a+b>_B."""
    a, b, c = label
    if a & 1:
        raise QuditError(f"coset label {a} has a nonzero constant term")
    N = F.N
    out = np.zeros(N * N, dtype=complex)
    for i in (0, 1):
        alice = i ^ a
        out[alice * N + (alice ^ b)] += (-1) ** (i * c) * SQRT_HALF
    return out


def b_lambda_state(F: GF2n, label: BasisLabel) -> np.ndarray:
    """(1/sqrt2) sum_i (-1)^(i c) |lambda (i+a)>."""
    lam, a, c = label
    if lam == 0:
        raise QuditError("lambda must be nonzero")
    if a & 1:
        raise QuditError(f"coset label {a} has a nonzero constant term")
    out = np.zeros(F.N, dtype=complex)
    for i in (0, 1):
        out[F.mul(lam, i ^ a)] += (-1) ** (i * c) * SQRT_HALF
    return out


def _check_norm(s: np.ndarray) -> None:
    norm2 = float(np.vdot(s, s).real)
    if abs(norm2 - 1.0) > 1e-9:
        raise QuditError(f"state is not normalized (|s|^2 = {norm2})")


# ---------------------------------------------------------------- operators


def x_matrix(F: GF2n, u: int) -> np.ndarray:
    """X_u |i> = |i+u>."""
    M = np.zeros((F.N, F.N))
    for i in F.elements:
        M[i ^ u, i] = 1.0
    return M


def z_signs(F: GF2n, v: int) -> np.ndarray:
    return np.array([1 - 2 * F.trace(F.mul(v, i)) for i in F.elements], dtype=float)


def z_matrix(F: GF2n, v: int) -> np.ndarray:
    """Z_v |i> = (-1)^Tr(v i) |i>."""
    return np.diag(z_signs(F, v))


def l_matrix(F: GF2n, lam: int) -> np.ndarray:
    """L_lambda |i> = |lambda i>."""
    if lam == 0:
        raise FieldError("L_0 is not invertible")
    M = np.zeros((F.N, F.N))
    for i in F.elements:
        M[F.mul(lam, i), i] = 1.0
    return M


def h_matrix(F: GF2n) -> np.ndarray:
    """Hadamard on every coset pair {r, r+1}: |r> -> (|r>+|r+1>)/sqrt2, |r+1> -> (|r>-|r+1>)/sqrt2."""
    M = np.zeros((F.N, F.N))
    for r in F.cosets:
        M[r, r] = M[r + 1, r] = M[r, r + 1] = SQRT_HALF
        M[r + 1, r + 1] = -SQRT_HALF
    return M


def apply_X(F: GF2n, u: int, s: np.ndarray) -> np.ndarray:
    return s[np.arange(F.N) ^ u]


def apply_Z(F: GF2n, v: int, s: np.ndarray) -> np.ndarray:
    return s * _z_signs_cached(F, v)


def apply_L(F: GF2n, lam: int, s: np.ndarray) -> np.ndarray:
    if lam == 0:
        raise FieldError("L_0 is not invertible")
    return s[F.mul_table[F.inv(lam)]]


def apply_H(F: GF2n, s: np.ndarray) -> np.ndarray:
    even, odd = s[0::2], s[1::2]
    out = np.empty_like(s, dtype=complex)
    out[0::2] = (even + odd) * SQRT_HALF
    out[1::2] = (even - odd) * SQRT_HALF
    return out


def apply_BADD(F: GF2n, s: np.ndarray) -> np.ndarray:
    """|i, j> -> |i, i+j> on a two-qudit state."""
    N = F.N
    i, j = np.divmod(np.arange(N * N), N)
    return s[i * N + (i ^ j)]


def apply_badd_pairs(F: GF2n, s: np.ndarray) -> np.ndarray:
    """BADD on a four-qudit state ordered (A1, B1, A2, B2).

    Alice adds A1 into A2 and Bob adds B1 into B2.
    """
    return s[_badd_pairs_perm(F)]


@lru_cache(maxsize=None)
def _badd_pairs_perm(F: GF2n) -> np.ndarray:
    N = F.N
    a1, b1, a2, b2 = np.unravel_index(np.arange(N ** 4), (N,) * 4)
    # the permutation is an involution in characteristic 2
    src = np.ravel_multi_index((a1, b1, a1 ^ a2, b1 ^ b2), (N,) * 4)
    src.setflags(write=False)
    return src


def on_bob(op: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Apply a single-qudit matrix to the second factor of a two-qudit state."""
    N = op.shape[0]
    return (s.reshape(N, N) @ op.T).reshape(-1)


def on_alice(op: np.ndarray, s: np.ndarray) -> np.ndarray:
    N = op.shape[0]
    return (op @ s.reshape(N, N)).reshape(-1)


@lru_cache(maxsize=None)
def _z_signs_cached(F: GF2n, v: int) -> np.ndarray:
    out = z_signs(F, v)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------- bases


@lru_cache(maxsize=None)
def bell_basis(F: GF2n) -> tuple[tuple[BellLabel, ...], np.ndarray]:
    """All N^2 Bell labels and a matrix whose rows are the matching states."""
    labels = tuple(BellLabel(a, b, c) for a in F.cosets for b in F.elements for c in (0, 1))
    M = np.array([bell_state(F, lab) for lab in labels])
    M.setflags(write=False)
    return labels, M


@lru_cache(maxsize=None)
def b_lambda_basis(F: GF2n, lam: int) -> tuple[tuple[BasisLabel, ...], np.ndarray]:
    labels = tuple(BasisLabel(lam, a, c) for a in F.cosets for c in (0, 1))
    M = np.array([b_lambda_state(F, lab) for lab in labels])
    M.setflags(write=False)
    return labels, M


def same_up_to_phase(x: np.ndarray, y: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(abs(np.vdot(x, y)) - 1.0) <= tol


# ---------------------------------------------------------------- measurement


def _born_sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(k, len(probs) - 1)


def _project_onto_row(M: np.ndarray, s: np.ndarray, rng: np.random.Generator):
    amps = M.conj() @ s
    k = _born_sample(np.abs(amps) ** 2, rng)
    post = M[k] * (amps[k] / abs(amps[k]))
    return k, post


def measure_complete(
    F: GF2n, s: np.ndarray, lam: int, rng: np.random.Generator
) -> tuple[BasisLabel, np.ndarray]:
    """Projective measurement of one qudit in the basis B_lambda."""
    if lam == 0:
        raise QuditError("lambda must be nonzero")
    _check_norm(s)
    labels, M = b_lambda_basis(F, lam)
    k, post = _project_onto_row(M, s, rng)
    return labels[k], post


def measure_incomplete(
    F: GF2n, s: np.ndarray, i: int, j: int, rng: np.random.Generator
) -> tuple[int | None, np.ndarray]:
    """Measure along {(|i> + |j>)/sqrt2, (|i> - |j>)/sqrt2, rest}.

    Returns the sign bit (0 for +, 1 for -) on success and None when the
    state is projected onto the complement of span{|i>, |j>}.
    """
    if i == j:
        raise QuditError("measure_incomplete needs two distinct levels")
    _check_norm(s)
    plus = (ket(F, i) + ket(F, j)) * SQRT_HALF
    minus = (ket(F, i) - ket(F, j)) * SQRT_HALF
    amp_p, amp_m = np.vdot(plus, s), np.vdot(minus, s)
    rest = s.astype(complex, copy=True)
    rest[[i, j]] = 0.0
    probs = np.array([abs(amp_p) ** 2, abs(amp_m) ** 2, float(np.vdot(rest, rest).real)])
    k = _born_sample(probs, rng)
    if k == 0:
        return 0, plus * (amp_p / abs(amp_p))
    if k == 1:
        return 1, minus * (amp_m / abs(amp_m))
    return None, rest / np.sqrt(probs[2])


def measure_bell(F: GF2n, s: np.ndarray, rng: np.random.Generator) -> tuple[BellLabel, np.ndarray]:
    """Joint measurement of a two-qudit state in the Bell basis."""
    _check_norm(s)
    labels, M = bell_basis(F)
    k, post = _project_onto_row(M, s, rng)
    return labels[k], post


def measure_local(
    F: GF2n, s: np.ndarray, party: str, lam: int, rng: np.random.Generator
) -> tuple[BasisLabel, np.ndarray]:
    """Measure Alice's ("A") or Bob's ("B") half of a two-qudit state in B_lambda."""
    _check_norm(s)
    labels, M = b_lambda_basis(F, lam)
    T = s.reshape(F.N, F.N)
    if party == "A":
        cond = M.conj() @ T            # row k: Bob's unnormalized state given outcome k
    elif party == "B":
        cond = (T @ M.conj().T).T      # row k: Alice's unnormalized state
    else:
        raise QuditError(f"party must be 'A' or 'B', not {party!r}")
    probs = np.einsum("kj,kj->k", cond.conj(), cond).real
    k = _born_sample(probs, rng)
    rest = cond[k] / np.sqrt(probs[k])
    post = np.kron(M[k], rest) if party == "A" else np.kron(rest, M[k])
    return labels[k], post
