import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtf_lab import landau as L
from mtf_lab.landau import KineticRegime, LtConstants

PI2 = math.pi**2


def brute_pressure(B, nu, p=1.5):
    """Term-by-term Landau sum (no tail acceleration)."""
    out = nu**p
    j = 1
    while 2 * j * B < nu:
        out += 2 * (nu - 2 * j * B) ** p
        j += 1
    return out


# --- scaling ---------------------------------------------------------------

def test_scaling_trivial_cases():
    s = L.scaling_from(1000, 0.0)
    assert s.hbar == pytest.approx(0.1, rel=1e-15) and s.b == 0 and s.k_beta == 0
    s = L.scaling_from(8, 0.0)
    assert s.hbar == pytest.approx(0.5, rel=1e-15) and s.b == 0


def test_scaling_identities():
    s = L.scaling_from(1000, 3.0)
    assert s.hbar**3 * 1000 == pytest.approx(4 ** 0.6, rel=1e-12)
    assert s.hbar * s.b == pytest.approx(3 * 4 ** -0.4, rel=1e-12)
    assert s.b / (s.hbar**2 * 1000) == pytest.approx(3 / 4, rel=1e-12)
    assert s.k_beta == pytest.approx(s.hbar * s.b, rel=1e-12)


@given(st.integers(1, 10**9), st.floats(0, 1e6))
def test_scaling_identities_random(N, beta):
    s = L.scaling_from(N, beta)
    assert s.hbar**3 * N == pytest.approx((1 + beta) ** 0.6, rel=1e-12)
    assert s.hbar * s.b == pytest.approx(beta * (1 + beta) ** -0.4, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("N,beta", [(0, 1.0), (10, -0.1), (10, math.inf), (10, math.nan), (2.5, 1.0)])
def test_scaling_rejects(N, beta):
    with pytest.raises(ValueError):
        L.scaling_from(N, beta)


def test_regime_requires_positive_beta():
    with pytest.raises(ValueError):
        KineticRegime.mtf(0.0)
    assert KineticRegime.tf().label == "TF"


# --- pressure --------------------------------------------------------------

def test_pressure_closed_forms():
    assert L.landau_pressure(1.0, 1.0) == pytest.approx(1 / (3 * PI2), rel=1e-14)
    assert L.landau_pressure(1.0, 0.0) == 0.0
    assert L.landau_pressure_derivative(1.0, 1.0) == pytest.approx(1 / (2 * PI2), rel=1e-14)
    assert L.landau_pressure_derivative(1.0, 2.0) == pytest.approx(math.sqrt(2) / (2 * PI2), rel=1e-14)


def test_weak_field_limit():
    # 2B sum_j f(nu - 2jB) -> int_0^nu f, so P_B(1) -> (1/3pi^2) int_0^1 (1-s)^(3/2) ds
    n = 200000
    mid = (np.arange(n) + 0.5) / n
    oracle = np.sum((1 - mid) ** 1.5) / n / (3 * PI2)
    assert oracle == pytest.approx(L.FREE_PRESSURE_COEFF, rel=1e-8)
    assert abs(L.landau_pressure(1e-3, 1.0) / oracle - 1) < 2e-3


@pytest.mark.parametrize("B", [1e-3, 0.013, 0.2, 1.0, 7.0])
def test_pressure_matches_term_by_term(B):
    # random nu: exactly at a band edge the last term is sqrt(roundoff) and
    # any two summation orders differ at the 1e-8 level
    nus = np.concatenate([[0.0], np.random.default_rng(3).uniform(0, 30, 300)])
    fast = L.landau_pressure(B, nus)
    slow = np.array([B / (3 * PI2) * brute_pressure(B, nu) for nu in nus])
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-300)
    fastd = L.landau_pressure_derivative(B, nus)
    slowd = np.array([B / (2 * PI2) * brute_pressure(B, nu, 0.5) for nu in nus])
    np.testing.assert_allclose(fastd, slowd, rtol=1e-12, atol=1e-300)


def test_derivative_by_central_differences():
    B, h = 0.7, 1e-5
    nus = np.array([0.3, 1.0, 2.1, 3.3, 5.0])  # away from band edges 1.4 j
    fd = (L.landau_pressure(B, nus + h) - L.landau_pressure(B, nus - h)) / (2 * h)
    np.testing.assert_allclose(fd, L.landau_pressure_derivative(B, nus), rtol=1e-8)


def test_derivative_continuous_at_band_edges():
    B = 0.5
    for j in range(1, 5):
        edge = 2 * j * B
        lo, hi = L.landau_pressure_derivative(B, edge * (1 - 1e-12)), L.landau_pressure_derivative(B, edge * (1 + 1e-12))
        assert abs(hi - lo) < 1e-5


def test_pressure_is_integral_of_derivative():
    from scipy.integrate import quad
    for B in (0.3, 1.0):
        for nu in (0.5, 2.7, 6.0):
            edges = [2 * j * B for j in range(1, int(nu / (2 * B)) + 1)]
            val, _ = quad(lambda x: L.landau_pressure_derivative(B, x), 0, nu, points=edges or None,
                          epsabs=0, epsrel=1e-12, limit=200)
            assert val == pytest.approx(L.landau_pressure(B, nu), rel=1e-8)


@settings(max_examples=200)
@given(st.floats(1e-3, 10), st.floats(0, 50), st.floats(0, 50))
def test_derivative_nondecreasing(B, a, b):
    lo, hi = sorted((a, b))
    assert L.landau_pressure_derivative(B, lo) <= L.landau_pressure_derivative(B, hi) * (1 + 1e-14)


def test_pressure_rejects_bad_input():
    for args in ((0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)):
        with pytest.raises(ValueError):
            L.landau_pressure(*args)
    with pytest.raises(ValueError):
        L.spin_pressure(1.0, 1.0, 0)


def test_spin_pressure_examples():
    assert L.spin_pressure(1.0, 1.0, 1) == 0.0
    assert L.spin_pressure(1.0, 1.0, -1) == pytest.approx(1 / (3 * PI2), rel=1e-14)


def test_spin_sum_identity_random():
    rng = np.random.default_rng(7)
    for B, nu in zip(10 ** rng.uniform(-2, 1, 300), rng.uniform(0, 40, 300)):
        tot = L.spin_pressure(B, nu, -1) + L.spin_pressure(B, nu, 1)
        assert tot == pytest.approx(L.landau_pressure(B, nu), rel=1e-14, abs=1e-300)
        dtot = L.spin_pressure_derivative(B, nu, -1) + L.spin_pressure_derivative(B, nu, 1)
        assert dtot == pytest.approx(L.landau_pressure_derivative(B, nu), rel=1e-14, abs=1e-300)


# --- kinetic densities ---------------------------------------------------------

def test_tau_closed_forms():
    assert L.tau(KineticRegime.tf(), 1.0) == pytest.approx(0.6 * (3 * PI2) ** (2 / 3), rel=1e-14)
    assert L.tau(KineticRegime.tf(), 1.0) == pytest.approx(5.74246, abs=1e-5)
    assert L.tau(KineticRegime.stf(), 1.0) == pytest.approx(4 * math.pi**4 / 3, rel=1e-14)
    for R in (KineticRegime.tf(), KineticRegime.stf(), KineticRegime.mtf(1.3)):
        assert L.tau(R, 0.0) == 0.0
    with pytest.raises(ValueError):
        L.tau(KineticRegime.tf(), -1.0)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0, 100.0])
def test_tau_lowest_band_cubic(beta):
    kb = L.k_beta(beta)
    t_edge = L.pressure_prefactor(beta) * L.landau_pressure_derivative(kb, 2 * kb)
    t = np.linspace(0, 0.999 * t_edge, 50)[1:]
    expect = 4 * math.pi**4 / 3 * ((1 + beta) / beta) ** 2 * t**3
    np.testing.assert_allclose(L.tau(KineticRegime.mtf(beta), t), expect, rtol=1e-10)
    r_expect = (2 * PI2 * (1 + beta) ** 0.6 * t / kb) ** 2
    np.testing.assert_allclose(L.r_of_rho(beta, t), r_expect, rtol=1e-10)


@pytest.mark.parametrize("beta", [0.01, 0.5, 2.0, 40.0])
def test_r_of_rho_round_trip(beta):
    t = np.concatenate([[0.0], np.logspace(-6, 2, 400)])
    r = L.r_of_rho(beta, t)
    back = L.pressure_prefactor(beta) * L.landau_pressure_derivative(L.k_beta(beta), r)
    np.testing.assert_allclose(back, t, rtol=1e-10, atol=0)
    assert r[0] == 0.0
    assert np.all(np.diff(r) > 0)


def test_tau_convex_nondecreasing():
    for beta in (0.2, 3.0):
        t = np.linspace(0, 5, 2001)
        v = L.tau(KineticRegime.mtf(beta), t)
        assert np.all(np.diff(v) >= -1e-15)
        assert np.all(np.diff(v, 2) >= -1e-10 * np.abs(v[1:-1]).max())


def test_tau_prime_is_derivative():
    beta, h = 1.7, 1e-6
    t = np.array([0.01, 0.1, 0.5, 2.0])
    R = KineticRegime.mtf(beta)
    fd = (L.tau(R, t + h) - L.tau(R, t - h)) / (2 * h)
    np.testing.assert_allclose(fd, L.tau_prime(R, t), rtol=1e-6)


def test_regime_limits():
    t = np.logspace(-2, 1, 60)
    ratio = L.tau(KineticRegime.mtf(1e-4), t) / L.tau(KineticRegime.tf(), t)
    assert np.max(np.abs(ratio - 1)) < 1e-3
    beta = 1e4
    kb = L.k_beta(beta)
    t_edge = L.pressure_prefactor(beta) * L.landau_pressure_derivative(kb, 2 * kb)
    t = np.logspace(-4, 0, 60) * t_edge * 0.999
    ratio = L.tau(KineticRegime.mtf(beta), t) / L.tau(KineticRegime.stf(), t)
    assert np.max(np.abs(ratio - 1)) < 1e-3


def test_spin_tau_examples_and_chain():
    for beta in (0.1, 1.0, 10.0):
        for s in (-1, 1):
            assert L.tau_spin(beta, 0.0, s) == 0.0
        kb = L.k_beta(beta)
        t = np.logspace(-4, 1, 40)
        down, up = L.tau_spin(beta, t, -1), L.tau_spin(beta, t, 1)
        full = L.tau(KineticRegime.mtf(beta), 2 * t)
        slack = 1e-12 * np.maximum(1, full)
        assert np.all(2 * down <= full + slack)
        assert np.all(full <= down + up + slack)
        assert np.all(down + up <= 2 * down + 4 * kb * t + slack)


def test_spin_tau_lowest_band_reduction():
    # below the first spin-down edge only the j = 0, s = -1 level is filled
    beta = 2.0
    kb = L.k_beta(beta)
    scale = L.pressure_prefactor(beta)
    t_edge = scale * L.spin_pressure_derivative(kb, 2 * kb, -1)
    t = np.linspace(0, 0.99 * t_edge, 30)[1:]
    expect = 4 * math.pi**4 / 3 * ((1 + beta) / beta) ** 2 * t**3
    np.testing.assert_allclose(L.tau_spin(beta, t, -1), expect, rtol=1e-10)
    # and tau(MTF, t) agrees there because the spin-up channel is still empty
    np.testing.assert_allclose(L.tau(KineticRegime.mtf(beta), t), expect, rtol=1e-10)


def test_spin_up_degenerate_branch_takes_largest_maximizer():
    beta = 1.5
    assert L.r_of_rho_spin(beta, 0.0, 1) == pytest.approx(2 * L.k_beta(beta))
    assert L.r_of_rho_spin(beta, 0.0, -1) == 0.0


# --- duality and the Lieb-Thirring transform -------------------------------

@pytest.mark.parametrize("R", [KineticRegime.tf(), KineticRegime.stf(), KineticRegime.mtf(0.8)])
def test_inverse_tau_prime(R):
    assert np.all(L.inverse_tau_prime(R, np.array([-3.0, -1e-9, 0.0])) == 0)
    a = np.linspace(0.01, 20, 200)
    rho = L.inverse_tau_prime(R, a)
    np.testing.assert_allclose(L.tau_prime(R, rho), a, rtol=1e-10)
    # Fenchel equality at the optimum
    lhs = L.tau(R, rho) + L.scaled_pressure(R, a)
    np.testing.assert_allclose(lhs, rho * a, rtol=1e-8)


def test_tf_inverse_round_trip_exact():
    rho = np.logspace(-6, 3, 100)
    back = L.inverse_tau_prime(KineticRegime.tf(), L.C_TF * rho ** (2 / 3))
    np.testing.assert_allclose(back, rho, rtol=1e-12)


def test_lt_constants_default():
    c = LtConstants()
    assert c.L1 == pytest.approx(8 / (3 * math.pi), rel=1e-15)
    assert c.L2 == pytest.approx(32 * math.sqrt(6) / (5 * math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        LtConstants(1.0)


def test_lt_legendre_zero_field_closed_form():
    c = LtConstants(0.3)
    t = np.logspace(-3, 2, 50)
    expect = 0.6 * (2 / (5 * c.L2)) ** (2 / 3) * t ** (5 / 3)
    np.testing.assert_allclose(L.lt_legendre(c, 0.0, t), expect, rtol=1e-12)
    assert L.lt_legendre(c, 1.0, 0.0) == 0.0


@settings(max_examples=300)
@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 50))
def test_fenchel_young(t, v, B):
    c = LtConstants()
    rhs = L.lt_legendre(c, B, t) + c.L1 * B * v**1.5 + c.L2 * v**2.5
    assert t * v <= rhs * (1 + 1e-12) + 1e-300


def test_broadcast_over_field_and_beta_matches_scalar_calls():
    rng = np.random.default_rng(12)
    B = 10.0 ** rng.uniform(-3, 1, 40)
    nu = rng.uniform(0, 30, 40)
    np.testing.assert_array_equal(L.landau_pressure(B, nu), [L.landau_pressure(b, x) for b, x in zip(B, nu)])
    np.testing.assert_array_equal(L.landau_pressure_derivative(B, 2.0),
                                  [L.landau_pressure_derivative(b, 2.0) for b in B])
    beta, t = 10.0 ** rng.uniform(-2, 2, 40), 10.0 ** rng.uniform(-3, 1, 40)
    np.testing.assert_allclose(L.tau_mtf(beta, t), [L.tau(KineticRegime.mtf(b), x) for b, x in zip(beta, t)],
                               rtol=1e-14)
    c = LtConstants()
    np.testing.assert_allclose(L.lt_legendre(c, B, t), [L.lt_legendre(c, b, x) for b, x in zip(B, t)], rtol=1e-14)
    with pytest.raises(ValueError):
        L.r_of_rho(np.array([1.0, -1.0]), 0.5)
    with pytest.raises(ValueError):
        L.landau_pressure(np.array([1.0, 0.0]), 1.0)
