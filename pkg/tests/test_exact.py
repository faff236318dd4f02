import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinsmooth.errors import ConfigurationError, QuadratureError
from kinsmooth.exact import (
    C2,
    MultiplierSpec,
    PhaseParams,
    fdelta_multiplier,
    fp_exact_hat,
    fp_phase,
    fp_phase_quadrature,
    gdelta_homogeneous,
    kolmogorov_hat,
    kolmogorov_phase,
    lemma_constant,
    log_gdelta_fp,
    phi_weight,
    psi_weight,
)
from kinsmooth.quadrature import gauss_legendre, phase_integral
from kinsmooth.scenarios import fp_residual

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])
vec = st.lists(st.floats(-8, 8), min_size=2, max_size=2).map(np.array)


def _samples(rng, n=10_000, d=2, t_max=5.0):
    return rng.uniform(0, t_max, n), rng.uniform(-8, 8, (n, d)), rng.uniform(-8, 8, (n, d))


# -- quadrature ------------------------------------------------------------------


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(8)
    for k in range(16):
        assert math.isclose(float(w @ x**k), 1.0 / (k + 1), rel_tol=1e-13)


@pytest.mark.parametrize("power", [0.5, 1.0, 1.5, 3.0, 4.0])
def test_phase_integral_matches_brute_force(power, rng):
    t, xi, eta = _samples(rng, 50, t_max=2.0)
    got = phase_integral(t, xi, eta, power, sign=-1.0)
    s = np.linspace(0, 1, 200_001)
    for i in range(0, 50, 7):
        vals = np.linalg.norm(xi[i] - np.outer(s * t[i], eta[i]), axis=1) ** power
        ref = t[i] * np.trapezoid(vals, s)
        assert math.isclose(got[i], ref, rel_tol=1e-6)


def test_phase_integral_quadratic_closed_form(rng):
    t, xi, eta = _samples(rng, 1000)
    q = phase_integral(t, xi, eta, 2.0)
    assert np.allclose(q, kolmogorov_phase(t, eta, xi, 1.0), rtol=1e-14)


def test_quadrature_error_carries_diagnostics():
    with pytest.raises(QuadratureError) as err:
        phase_integral(1.0, np.ones((3, 2)), np.ones((3, 2)), 0.5, order=2, levels=1, rtol=1e-300)
    assert err.value.n_failed > 0


# -- Kolmogorov ------------------------------------------------------------------


def _f0hat(eta, xi):
    return np.exp(-0.5 * np.sum(xi**2, axis=-1) - 0.1 * np.sum(eta**2, axis=-1) + 0.3j * xi[..., 0])


def test_kolmogorov_examples():
    eta, xi = E2[None], E1[None]
    assert np.allclose(kolmogorov_hat(0.0, eta, xi, 0.7, _f0hat), _f0hat(eta, xi))
    t = 0.8
    zero = np.zeros((1, 2))
    assert np.allclose(kolmogorov_hat(t, zero, xi, 0.7, _f0hat), np.exp(-t * 1.0) * _f0hat(zero, xi))
    assert math.isclose(float(kolmogorov_phase(1.0, eta, xi, 1.0)[0]), 4.0 / 3.0, rel_tol=1e-14)
    assert np.allclose(kolmogorov_hat(1.0, eta, xi, 1.0, _f0hat), np.exp(-4 / 3) * _f0hat(eta, xi + eta))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 0.75, 1.5])
def test_kolmogorov_phase_branches_agree_with_quadrature(alpha, rng):
    t, xi, eta = _samples(rng, 2000, t_max=2.0)
    got = kolmogorov_phase(t, eta, xi, alpha)
    ref = phase_integral(t, xi, eta, 2 * alpha, sign=1.0)
    assert np.allclose(got, ref, rtol=1e-10)


def test_kolmogorov_rejects_nonpositive_alpha():
    with pytest.raises(ConfigurationError):
        kolmogorov_phase(1.0, E1, E2, 0.0)


# -- Fokker-Planck ----------------------------------------------------------------


def test_fp_phase_examples():
    assert fp_phase(0.0, E1, E2) == 0.0
    assert math.isclose(float(fp_phase(1.0, E1, np.zeros(2))), (1 - math.exp(-2)) / 2, rel_tol=1e-14)
    assert math.isclose(float(fp_phase(1.0, np.zeros(2), E1)), 0.1680912407, rel_tol=1e-9)
    expr = 1 - (3 + math.exp(-2)) / 2 + 2 * math.exp(-1)
    assert math.isclose(float(fp_phase(1.0, np.zeros(2), E1)), expr, rel_tol=1e-13)


def test_fp_phase_matches_quadrature_on_samples(rng):
    t, xi, eta = _samples(rng)
    closed = fp_phase(t, xi, eta)
    quad = fp_phase_quadrature(t, xi, eta)
    scale = fp_phase_quadrature(t, np.abs(xi), np.abs(eta)) + 1e-300
    assert np.max(np.abs(closed - quad) / scale) < 1e-10


def test_fp_phase_small_t_is_cancellation_free():
    t = np.array([1e-8, 1e-5, 1e-3])
    got = fp_phase(t, np.zeros((3, 2)), np.tile(E1, (3, 1)))
    assert np.allclose(got, t**3 / 3 - t**4 / 4, rtol=1e-6)


def test_fp_phase_lower_bound_K_half(rng):
    t, xi, eta = _samples(rng)
    K = 0.5
    X = -np.expm1(-t)
    keep = X < 2 - 1 / K
    ph = fp_phase(t, xi, eta)
    bound = X * (1 - 1 / (2 * K) - X / 2) * np.sum(xi**2, -1) + (1 / 3 - K / 2) * X**3 * np.sum(eta**2, -1)
    assert np.all(ph[keep] >= bound[keep] - 1e-12 * np.abs(ph[keep]))


def test_fp_exact_hat_examples():
    f0 = _f0hat
    eta, xi = np.array([[0.4, -0.2]]), np.array([[1.0, 0.5]])
    assert np.allclose(fp_exact_hat(0.0, eta, xi, f0), f0(eta, xi))
    zero = np.zeros((1, 2))
    t = 0.7
    ref = f0(zero, xi * math.exp(-t)) * np.exp(-fp_phase(t, xi, zero))
    assert np.allclose(fp_exact_hat(t, zero, xi, f0), ref, rtol=1e-14)


def _aniso_f0hat(eta, xi):
    return np.exp(-0.3 * np.sum(eta**2, -1) + 0.2j * eta[..., 0] - 0.35 * xi[..., 0] ** 2 - 0.55 * xi[..., 1] ** 2
                  + 0.3j * xi[..., 0] - 0.6j * xi[..., 1])


def _residual(F, t, eta, xi, h=1e-4):
    ft = (F(t + h, eta, xi) - F(t - h, eta, xi)) / (2 * h)
    grad = np.stack([(F(t, eta, xi + h * e) - F(t, eta, xi - h * e)) / (2 * h) for e in (E1, E2)], -1)
    f = F(t, eta, xi)
    res = ft - np.sum(eta * grad, -1) + np.sum(xi * grad, -1) + np.sum(xi * xi, -1) * f
    scale = np.abs(ft) + np.abs(f) * (1 + np.sum(xi * xi, -1)) + 4 * np.sum(np.abs(grad), -1)
    return float(np.max(np.abs(res) / scale))


def test_fp_exact_residual_and_initial_trace_fix_argument_order(rng):
    t = rng.uniform(0.1, 1.5, 200)
    eta, xi = rng.uniform(-2, 2, (200, 2)), rng.uniform(-2, 2, (200, 2))
    assert fp_residual(t, eta, xi, _aniso_f0hat) < 1e-6

    def swapped(tt, e, x):
        X = -np.expm1(-np.asarray(tt, dtype=float))[..., None]
        return np.exp(-fp_phase(tt, x, e)) * _aniso_f0hat(x * (1 - X) + e * X, e)

    # the swapped reading also solves the equation (it is a function of the
    # characteristic invariants) but starts from the wrong datum
    assert _residual(swapped, t, eta, xi) < 1e-6
    zero = np.zeros_like(t)
    assert np.allclose(fp_exact_hat(zero, eta, xi, _aniso_f0hat), _aniso_f0hat(eta, xi))
    assert np.max(np.abs(swapped(zero, eta, xi) - _aniso_f0hat(eta, xi))) > 1e-1


# -- weights --------------------------------------------------------------------


def test_gdelta_examples():
    p = PhaseParams(t=1.0, alpha=1.0, c0=0.1, c2=C2, delta=0.01, N_exp=2)
    assert math.isclose(float(gdelta_homogeneous(1.0, np.zeros(2), p)), 1 / 1.01, rel_tol=1e-14)
    ref = math.exp(0.4) / ((1 + 0.01 * math.exp(0.4)) * 1.004**2)
    assert math.isclose(float(gdelta_homogeneous(1.0, 2 * E1, p)), ref, rel_tol=1e-14)
    p0 = PhaseParams(t=1.0, alpha=1.0, c0=0.1, c2=C2, delta=0.0, N_exp=2)
    assert math.isclose(float(gdelta_homogeneous(1.0, 2 * E1, p0)), math.exp(0.4), rel_tol=1e-14)


def test_psi_examples():
    c0 = 0.3
    assert math.isclose(float(psi_weight(2.0, np.zeros(2), 3 * E1, c0)), c0 * 6, rel_tol=1e-14)
    assert math.isclose(float(psi_weight(1.0, E2, np.zeros(2), c0)), c0 / 2, rel_tol=1e-14)
    assert math.isclose(float(psi_weight(2.0, E1, E1, c0)), c0, rel_tol=1e-12)


def test_psi_matches_quadrature_and_lemma_bound(rng):
    t, xi, eta = _samples(rng, t_max=3.0)
    psi = psi_weight(t, eta, xi, 1.0)
    assert np.allclose(psi, phase_integral(t, xi, eta, 1.0, sign=-1.0), rtol=1e-10)
    c1 = lemma_constant(1.0)
    bound = c1 * (t * np.linalg.norm(xi, axis=-1) + t**2 * np.linalg.norm(eta, axis=-1))
    assert np.all(psi >= bound * (1 - 1e-12))


def test_phi_examples_and_bound(rng):
    p = PhaseParams(t=1.0, alpha=2.0, c0=0.5, c2=C2, delta=0.1, N_exp=1.25)
    assert math.isclose(float(phi_weight(0.7, np.zeros(2), 2 * E1, p)), 0.5 * 0.7 * 4, rel_tol=1e-14)
    t, xi, eta = _samples(rng)
    phi = phi_weight(t, eta, xi, p)
    bound = 0.5 * p.c0 * p.c2 * (t * np.sum(xi**2, -1) + t**3 * np.sum(eta**2, -1))
    assert np.all(phi >= bound - 1e-12 * np.abs(phi))


def test_fdelta_at_zero_phase():
    p = PhaseParams(t=1.0, alpha=1.0, c0=0.2, c2=C2, delta=0.25, N_exp=3)
    assert math.isclose(float(fdelta_multiplier(0.0, E1, E2, p)), 1 / 1.25, rel_tol=1e-14)


@given(st.floats(0, 5), vec, vec, st.floats(1e-3, 1.0), st.floats(0.01, 2.0))
def test_multipliers_positive_and_bounded(t, xi, eta, delta, c0):
    p = PhaseParams(t=t, alpha=1.0, c0=c0, c2=C2, delta=delta, N_exp=1)
    for m in (gdelta_homogeneous(t, xi, p), fdelta_multiplier(t, eta, xi, p), np.exp(log_gdelta_fp(t, eta, xi, p))):
        assert 0 < float(m) <= 1 / delta * (1 + 1e-12)


def test_phase_params_invariants():
    with pytest.raises(ConfigurationError):
        PhaseParams(t=0, alpha=1, c0=-1, c2=C2, delta=0.1, N_exp=1)
    with pytest.raises(ConfigurationError):
        PhaseParams(t=0, alpha=1, c0=1, c2=C2, delta=1.5, N_exp=1)
    p = PhaseParams.homogeneous(2, 0.1, delta=0.9)
    with pytest.raises(ConfigurationError):
        p.check_homogeneous(2)
    PhaseParams.homogeneous(2, 0.1, delta=0.1).check_homogeneous(2)
    PhaseParams.fokker_planck(1, 0.1, delta=0.01).check_fokker_planck(1)
    PhaseParams.landau_model(2, 0.1, delta=0.1).check_landau_model(2)


def test_lemma_constant_values():
    assert math.isclose(lemma_constant(2.0), 1 / 24)
    assert math.isclose(lemma_constant(1.0), 1 / 8)


def test_multiplier_spec_log_values_consistent():
    from kinsmooth.grid import Grid

    g = Grid(1, 16, 6.0, dim_x=1)
    w = MultiplierSpec.analytic(0.5)
    lv = w.log_values(g, 0.3)
    ref = 0.5 * (0.3 * np.abs(g.xi[..., 0]) + 0.09 * np.abs(g.eta[..., 0]))
    assert np.allclose(np.broadcast_to(lv, g.shape), np.broadcast_to(ref, g.shape))
    assert np.allclose(np.broadcast_to(w.with_c(1.0).log_values(g, 0.3), g.shape), 2 * np.broadcast_to(ref, g.shape))
