"""Battery of exact operator identities checked on dense matrices.

Each check returns a :class:`CheckResult`; ``run_suite`` evaluates a field
exhaustively or on random parameter tuples drawn from a seeded generator.
Operators are looked up through the :mod:`quditqkd.qudit` module at call time
so that a deliberately broken operator is caught here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import qudit
from .galois import GF2n, field

TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    N: int
    cases: int
    entries: int
    failures: int
    max_error: float

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.name:<22} N={self.N:<3} cases={self.cases:<6} "
                f"entries={self.entries:<9} failures={self.failures} max_err={self.max_error:.2e}")


class _Tally:
    def __init__(self, name: str, N: int):
        self.name, self.N = name, N
        self.cases = self.entries = self.failures = 0
        self.max_error = 0.0

    def add(self, err: float, entries: int) -> None:
        self.cases += 1
        self.entries += entries
        self.max_error = max(self.max_error, err)
        if not err <= TOL:
            self.failures += 1

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.N, self.cases, self.entries, self.failures, self.max_error)


def _phase_error(x: np.ndarray, y: np.ndarray) -> float:
    return abs(abs(np.vdot(x, y)) - 1.0) + abs(np.linalg.norm(x) - 1.0)


def check_conjugation(F: GF2n, triples) -> CheckResult:
    """L_lam^-1 X_u Z_v L_lam == X_{u/lam} Z_{lam v}, entrywise."""
    t = _Tally("conjugation", F.N)
    for lam, u, v in triples:
        lhs = (qudit.l_matrix(F, F.inv(lam)) @ qudit.x_matrix(F, u)
               @ qudit.z_matrix(F, v) @ qudit.l_matrix(F, lam))
        rhs = qudit.x_matrix(F, F.mul(F.inv(lam), u)) @ qudit.z_matrix(F, F.mul(lam, v))
        t.add(float(np.max(np.abs(lhs - rhs))), lhs.size)
    return t.result()


def check_commutation(F: GF2n, pairs) -> CheckResult:
    """Z_v X_u == (-1)^Tr(uv) X_u Z_v."""
    t = _Tally("commutation", F.N)
    for u, v in pairs:
        lhs = qudit.z_matrix(F, v) @ qudit.x_matrix(F, u)
        rhs = (-1) ** F.trace(F.mul(u, v)) * qudit.x_matrix(F, u) @ qudit.z_matrix(F, v)
        t.add(float(np.max(np.abs(lhs - rhs))), lhs.size)
    return t.result()


def check_badd(F: GF2n, label_pairs) -> CheckResult:
    """BADD(Phi_{a,b,c} (x) Phi_{a',b',c'}) == Phi_{a,b,c-c'} (x) Phi_{a+a',b+b',c'}."""
    t = _Tally("badd", F.N)
    for (a, b, c), (a2, b2, c2) in label_pairs:
        src = np.kron(qudit.bell_state(F, qudit.BellLabel(a, b, c)),
                      qudit.bell_state(F, qudit.BellLabel(a2, b2, c2)))
        want = np.kron(qudit.bell_state(F, qudit.BellLabel(a, b, c ^ c2)),
                       qudit.bell_state(F, qudit.BellLabel(a ^ a2, b ^ b2, c2)))
        got = qudit.apply_badd_pairs(F, src)
        t.add(float(np.max(np.abs(got - want))), got.size)
    return t.result()


def check_hadamard(F: GF2n, labels) -> CheckResult:
    """(H (x) H) Phi_{a,b,c} equals Phi_{a,[b]+c,b0} up to a global phase."""
    t = _Tally("hadamard", F.N)
    H = qudit.h_matrix(F)
    HH = np.kron(H, H)
    for a, b, c in labels:
        got = HH @ qudit.bell_state(F, qudit.BellLabel(a, b, c))
        want = qudit.bell_state(F, qudit.BellLabel(a, (b & ~1) ^ c, b & 1))
        t.add(_phase_error(got, want), got.size)
    return t.result()


def check_phase_equivalence(F: GF2n, triples) -> CheckResult:
    """(I (x) X_u Z_v) Phi_{a,0,0} equals Phi_{a,u,Tr v} up to a phase."""
    t = _Tally("phase_equivalence", F.N)
    for a, u, v in triples:
        op = qudit.x_matrix(F, u) @ qudit.z_matrix(F, v)
        got = qudit.on_bob(op, qudit.bell_state(F, qudit.BellLabel(a, 0, 0)))
        want = qudit.bell_state(F, qudit.BellLabel(a, u, F.trace(v)))
        t.add(_phase_error(got, want), got.size)
    return t.result()


def check_bell_basis(F: GF2n) -> CheckResult:
    t = _Tally("bell_orthonormal", F.N)
    labels = [qudit.BellLabel(a, b, c) for a in F.cosets for b in F.elements for c in (0, 1)]
    M = np.array([qudit.bell_state(F, lab) for lab in labels])
    G = M.conj() @ M.T
    t.add(float(np.max(np.abs(G - np.eye(len(labels))))), G.size)
    return t.result()


def check_b_lambda_bases(F: GF2n) -> CheckResult:
    t = _Tally("b_lambda_orthonormal", F.N)
    for lam in F.nonzero:
        M = np.array([qudit.b_lambda_state(F, qudit.BasisLabel(lam, a, c))
                      for a in F.cosets for c in (0, 1)])
        G = M.conj() @ M.T
        t.add(float(np.max(np.abs(G - np.eye(F.N)))), G.size)
    return t.result()


def run_suite(n: int, exhaustive: bool | None = None, random_cases: int = 200,
              seed: int = 0) -> list[CheckResult]:
    """All identity checks for GF(2^n); exhaustive by default only for n = 2."""
    F = field(n)
    if exhaustive is None:
        exhaustive = n == 2
    bell_labels = [(a, b, c) for a in F.cosets for b in F.elements for c in (0, 1)]
    if exhaustive:
        lam_uv = list(itertools.product(F.nonzero, F.elements, F.elements))
        uv = list(itertools.product(F.elements, F.elements))
        pairs = list(itertools.product(bell_labels, bell_labels))
        hadamard = bell_labels
        auv = list(itertools.product(F.cosets, F.elements, F.elements))
    else:
        rng = np.random.default_rng([seed, n])
        N, k = F.N, random_cases
        el = lambda: rng.integers(0, N, size=k).tolist()  # noqa: E731
        nz = lambda: rng.integers(1, N, size=k).tolist()  # noqa: E731
        co = lambda: (2 * rng.integers(0, N // 2, size=k)).tolist()  # noqa: E731
        bit = lambda: rng.integers(0, 2, size=k).tolist()  # noqa: E731
        lam_uv = list(zip(nz(), el(), el()))
        uv = list(zip(el(), el()))
        pairs = [(p, q) for p, q in zip(zip(co(), el(), bit()), zip(co(), el(), bit()))]
        hadamard = list(zip(co(), el(), bit()))
        auv = list(zip(co(), el(), el()))
    return [
        check_conjugation(F, lam_uv),
        check_commutation(F, uv),
        check_badd(F, pairs),
        check_hadamard(F, hadamard),
        check_phase_equivalence(F, auv),
        check_bell_basis(F),
        check_b_lambda_bases(F),
    ]


def run_default(seed: int = 0, random_cases: int = 200) -> list[CheckResult]:
    """Exhaustive N=4 plus randomised N=8 and N=16."""
    out = run_suite(2, exhaustive=True)
    for n in (3, 4):
        out += run_suite(n, exhaustive=False, random_cases=random_cases, seed=seed)
    return out
