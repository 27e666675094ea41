import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quditqkd import keyrate
from quditqkd.channel import PauliDistribution, summarize
from quditqkd.galois import field
from quditqkd.keyrate import KeyRateError, SymmetricDistribution

E_GRID = np.round(np.arange(0, 0.2001, 0.005), 10)


def shannon_oracle(p) -> float:
    p = np.asarray(p, float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def test_entropy_helpers():
    assert keyrate.h2(0.5) == pytest.approx(1.0)
    assert keyrate.h2(0.0) == 0.0
    p = np.random.default_rng(0).dirichlet(np.ones(10))
    assert keyrate.shannon_bits(p) == pytest.approx(shannon_oracle(p))


def test_symmetric_distribution_validation():
    with pytest.raises(KeyRateError):
        SymmetricDistribution(0.5, 0.1, 0.1, 0.0, 4)
    with pytest.raises(KeyRateError):
        SymmetricDistribution(1.1, 0.0, 0.0, -0.1 / 9, 4)
    s = SymmetricDistribution(1.0, 0.0, 0.0, 0.0, 4)
    assert keyrate.K_of_symmetric(s) == 2.0


def test_symmetric_rates_round_trip():
    s = SymmetricDistribution.from_rates(0.1, 0.2, 0.001, 8)
    assert s.e_c == pytest.approx(0.1) and s.e_a == pytest.approx(0.2) and s.D == 0.001


def test_symmetric_entropy_against_full_table():
    F = field(3)
    s = SymmetricDistribution.from_rates(0.12, 0.2, 0.003, 8)
    assert s.entropy() == pytest.approx(shannon_oracle(s.to_pauli(F).e), abs=1e-12)


@pytest.mark.parametrize("N", [4, 8, 16])
def test_worst_D_closed_form(N):
    rng = np.random.default_rng(N)
    for _ in range(50):
        e_c = rng.uniform(0, N / (2 * (N - 1)))
        e_a = rng.uniform(0, 1)
        _, s = keyrate.optimize_K_given_ec_ea(e_c, e_a, N)
        assert s.D == pytest.approx((2 * e_c / N) * e_a / (N - 1), abs=1e-12)


def test_infeasible_rates_named():
    with pytest.raises(KeyRateError) as exc:
        keyrate.optimize_K_given_ec_ea(0.7, 0.1, 4)
    assert "N/(2(N-1))" in exc.value.bound
    with pytest.raises(KeyRateError):
        keyrate.optimize_K_given_ec_ea(0.1, 1.2, 4)
    with pytest.raises(KeyRateError):
        keyrate.optimize_K_given_eraw(0.7, 4)
    with pytest.raises(KeyRateError):
        keyrate.optimize_K_given_eraw(-0.1, 4)
    with pytest.raises(KeyRateError):
        keyrate.evaluate("Nope", e_raw=0)
    assert keyrate.eraw_feasible_max(4) == pytest.approx(2 / 3)


@pytest.mark.parametrize("e", E_GRID)
def test_n4_optimizer_matches_closed_form(e):
    K, s = keyrate.optimize_K_given_eraw(e, 4)
    assert K == pytest.approx(keyrate.closed_form_K_N4(e), abs=1e-6)
    assert abs(s.D - e * e / 4) <= 1e-8
    assert abs(s.B - s.C) <= 1e-8


@pytest.mark.parametrize("N", [4, 8])
def test_eraw_optimum_is_worst_split(N):
    """No split of e_raw into (e_c, e_a) gives a lower K than the reported one."""
    n = N.bit_length() - 1
    kappa = (N - 1) * (N - 2) / ((n - 1) * N)
    for e in (0.02, 0.05, 0.1):
        K, _ = keyrate.optimize_K_given_eraw(e, N)
        for e_c in np.linspace(0, min(n * e, N / (2 * (N - 1))), 201):
            e_a = kappa * (n * e - e_c)
            if 0 <= e_a <= 1:
                assert keyrate.optimize_K_given_ec_ea(e_c, e_a, N)[0] >= K - 1e-9


# seed: numpy default_rng(2024), 500 pairs per N; D grid step 1e-5
@pytest.mark.parametrize("N", [4, 8])
def test_grid_oracle(N):
    rng = np.random.default_rng(2024)
    m = N - 1
    for _ in range(500):
        e_c, e_a = rng.uniform(0.05, 0.6 if N == 4 else 0.55), rng.uniform(0.05, 0.95)
        K, s = keyrate.optimize_K_given_ec_ea(e_c, e_a, N)
        b0, c0 = 2 * e_c / N, e_a / m
        Dmax = min(b0, c0) / m
        Dmin = max(0.0, (m * (b0 + c0) - 1) / (m * m))
        grid = np.arange(Dmin, Dmax, 1e-5)[1:]
        A = 1 - m * (b0 + c0) + m * m * grid
        B, C = b0 - m * grid, c0 - m * grid
        ok = (A > 0) & (B > 0) & (C > 0)
        A, B, C, D = A[ok], B[ok], C[ok], grid[ok]
        H = -(A * np.log2(A) + m * B * np.log2(B) + m * C * np.log2(C) + m * m * D * np.log2(D))
        assert K <= (N.bit_length() - 1) - H.max() + 1e-12
        assert s.D == pytest.approx(b0 * c0, abs=1e-6)


def random_pauli(F, rng):
    e = rng.dirichlet(np.full(F.N * F.N, 0.3))
    e = e.reshape(F.N, F.N)
    e[0, 0] += 4.0
    return PauliDistribution(F, e / e.sum())


# seed: hypothesis derandomized profile, 200 cases
@given(st.sampled_from([2, 3]), st.integers(0, 2**32 - 1))
def test_symmetrization_soundness(n, seed):
    """Symmetrizing keeps the observed rates and never lowers the entropy, so the
    symmetric worst case bounds the key rate of every compatible channel."""
    F = field(n)
    d = random_pauli(F, np.random.default_rng(seed))
    s = SymmetricDistribution.from_pauli(d)
    obs = summarize(d)
    assert s.e_c == pytest.approx(obs.e_c, abs=1e-12)
    assert s.e_a == pytest.approx(obs.e_a, abs=1e-12)
    assert s.entropy() >= shannon_oracle(d.e) - 1e-12
    K, _ = keyrate.optimize_K_given_ec_ea(obs.e_c, min(obs.e_a, 1.0), F.N)
    assert K <= n - shannon_oracle(d.e) + 1e-9


def test_noiseless_rates():
    assert keyrate.evaluate("B", N=4, e_raw=0).R == pytest.approx(1 / 3, abs=1e-12)
    assert keyrate.evaluate("A", N=8, e_raw=0).R == pytest.approx(1 / 7, abs=1e-12)
    assert keyrate.evaluate("C", N=8, e_raw=0).R == pytest.approx(1 / 28, abs=1e-12)
    assert keyrate.evaluate("C", N=16, e_raw=0).R == pytest.approx(4 / (4 * 15 * 8), abs=1e-12)


def test_rates_clamped_at_zero():
    p = keyrate.evaluate("B", N=4, e_raw=0.3)
    assert p.K < 0 and p.R == 0.0
    assert keyrate.bb84_rate(0.2) == 0.0


def test_chau05():
    e00, e_raw = keyrate.chau05_threshold(4)
    assert e00 == pytest.approx(0.710, abs=1e-3)
    assert keyrate.chau05_K(e00, 4) == pytest.approx(0.0, abs=1e-10)
    assert keyrate.chau05_e00_from_eraw(e_raw, 4) == pytest.approx(e00)
    p = keyrate.evaluate("Chau05", N=4, e00=1.0)
    assert p.R == pytest.approx(1 / 15)


def test_chau05_conversion_inverse():
    for N in (4, 8, 16):
        for e00 in (0.6, 0.8, 0.99):
            e = keyrate.chau05_eraw_from_e00(e00, N)
            assert keyrate.chau05_e00_from_eraw(e, N) == pytest.approx(e00, abs=1e-12)
    with pytest.raises(KeyRateError):
        keyrate.chau05_e00_from_eraw(0.5, 4)


@pytest.mark.parametrize("e", E_GRID)
def test_scheme_b_equals_sixstate_n4(e):
    assert abs(keyrate.evaluate("B", N=4, e_raw=e).R - keyrate.sixstate_rate(e)) <= 1e-6


def test_thresholds():
    assert keyrate.threshold("BB84") == pytest.approx(0.110028, abs=1e-5)
    assert keyrate.threshold("SixState") == pytest.approx(0.126193, abs=1e-5)
    assert keyrate.threshold("B", 4) == pytest.approx(keyrate.threshold("SixState"), abs=1e-9)
    assert keyrate.threshold("B", 8) == pytest.approx(0.0748, abs=1e-3)


def test_fig1_structure():
    assert keyrate.evaluate("B", N=4, e_c=0.45, e_a=0.0).R > 0
    assert keyrate.evaluate("B", N=4, e_c=0.0, e_a=0.7).R > 0
    assert keyrate.evaluate("B", N=4, e_c=0.2, e_a=0.2).R == 0


def test_point_as_dict():
    d = keyrate.evaluate("B", N=4, e_raw=0.05).as_dict()
    assert {"K", "R", "R_bits", "A", "B", "C", "D"} <= set(d)
    assert d["R_bits"] == pytest.approx(2 * d["R"])
