import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinsmooth.errors import ConfigurationError, ContractError, DegenerateStateError
from kinsmooth.exact import PhaseParams
from kinsmooth.grid import Field, Grid, l2_norm, moments
from kinsmooth.landau import (
    LandauCoefficients,
    admissible_c0,
    coefficients_from_state,
    collision_rhs,
    evolve,
    growth_constant,
    moment_ode_solution,
    relaxation_rate,
    smoothing_certificate,
    stable_dt,
)
from kinsmooth.presets import gaussian, gaussian_mixture

# the resolved box: dealiasing truncation of the fluxes is below 1e-10 here
G64 = Grid(2, 64, 7.0)
G128 = Grid(2, 128, 12.0)


@pytest.fixture(scope="module")
def aniso_trace():
    return evolve(Field(G64, gaussian(2, [1.5, 0.5]).values(G64.v_mesh)), 0.25, n_records=10, keep_states=False)


@pytest.fixture(scope="module")
def mixture_trace():
    return evolve(Field(G64, gaussian_mixture(2).values(G64.v_mesh)), 0.1, n_records=4, keep_states=False)


def _field(profile, g=G64):
    return Field(g, profile.values(g.v_mesh))


def _weighted_integrals(f: Field):
    g = f.grid
    w = g.cell_volume
    vs = g.v_mesh
    return (
        w * f.values.sum(),
        np.array([w * np.sum(v * f.values) for v in vs]),
        w * np.sum(sum(v * v for v in vs) * f.values),
    )


def test_coefficients_of_isotropic_gaussian():
    c = coefficients_from_state(_field(gaussian(2), G128))
    assert math.isclose(c.C1, 1.0, rel_tol=1e-10)
    v = np.array([[0.7, -1.2], [0.0, 0.0], [2.0, 0.5]])
    ref = (np.sum(v * v, -1)[:, None, None] + 1) * np.eye(2) - v[:, :, None] * v[:, None, :]
    assert np.allclose(c.abar(v), ref, atol=1e-12)


def test_coefficients_at_origin_and_anisotropic_C1():
    f = _field(gaussian(2, [1.5, 0.5]), G128)
    c = coefficients_from_state(f)
    m = moments(f)
    assert math.isclose(c.C1, 0.5, rel_tol=1e-10)
    assert np.allclose(c.abar(np.zeros((1, 2)))[0], np.diag(m.energy_T0 - m.directional_T), atol=1e-12)


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(-1, 1), st.floats(-1, 1))
def test_ellipticity_lower_bound(T1, T2, u1, u2):
    c = LandauCoefficients(1.0, np.array([u1, u2]), np.diag([T1, T2]), min(T1, T2))
    rng = np.random.default_rng(0)
    v = rng.uniform(-8, 8, (500, 2))
    xi = rng.standard_normal((500, 2))
    q = c.quadratic_form(v, xi)
    assert np.all(q >= min(T1, T2) * np.sum(xi**2, -1) * (1 - 1e-12))


def test_degenerate_state_rejected():
    g = Grid(2, 32, 6.0)
    x = g.v_mesh[0]
    line = np.exp(-(x**2)) * (np.abs(g.v_mesh[1]) < 1e-9)
    with pytest.raises(DegenerateStateError):
        coefficients_from_state(Field(g, line))


def test_maxwellian_is_equilibrium():
    f = _field(gaussian(2))
    rhs = collision_rhs(f, coefficients_from_state(f))
    assert l2_norm(rhs) < 1e-8


@pytest.mark.parametrize("profile", [gaussian_mixture(2), gaussian(2, [0.8, 0.6], [0.3, -0.2])])
def test_rhs_conserves_mass_momentum_energy(profile):
    f = _field(profile)
    mass, mom, energy = _weighted_integrals(collision_rhs(f, coefficients_from_state(f)))
    assert abs(mass) < 1e-10
    assert np.max(np.abs(mom)) < 1e-8
    assert abs(energy) < 1e-8


def test_rhs_rejects_mismatched_inputs():
    f = _field(gaussian(2))
    c3 = LandauCoefficients(1.0, np.zeros(3), np.eye(3), 2.0)
    with pytest.raises(ContractError):
        collision_rhs(f, c3)


def test_equilibrium_evolution_is_stationary():
    g = Grid(2, 32, 7.0)
    f0 = _field(gaussian(2), g)
    tr = evolve(f0, 1.0, n_records=4)
    assert np.max(np.abs(np.array(tr.l2_history) - tr.l2_history[0])) < 1e-8


def test_anisotropic_relaxation_matches_moment_ode(aniso_trace):
    tr = aniso_trace
    rate = relaxation_rate(tr)
    assert abs(rate - 8.0) / 8.0 < 0.02
    m0 = tr.moment_history[0]
    for t, m in zip(tr.times, tr.moment_history):
        pred = moment_ode_solution(m0.second_moment, m0.mass, t)
        # variance 1.5 leaves ~1e-7 of the mass outside the box L = 7
        assert np.allclose(m.second_moment, pred, atol=1e-6)


def test_trace_conservation(mixture_trace):
    m0, m1 = mixture_trace.moment_history[0], mixture_trace.moment_history[-1]
    assert abs(m1.mass - m0.mass) < 1e-10
    assert np.max(np.abs(m1.momentum - m0.momentum)) < 1e-8
    assert abs(m1.energy_T0 - m0.energy_T0) < 1e-8


def test_dt_above_stability_rejected():
    g = Grid(2, 32, 7.0)
    f0 = _field(gaussian(2), g)
    limit = stable_dt(g, coefficients_from_state(f0))
    with pytest.raises(ConfigurationError):
        evolve(f0, 0.1, dt=2 * limit)


def test_certificate_passes_small_case_and_rejects_large_c0():
    g = Grid(2, 32, 7.0)
    tr = evolve(_field(gaussian_mixture(2), g), 0.2, n_records=4)
    C1 = tr.moment_history[0].C1
    c0 = C1 / (1 + 4 * 0.2)
    cert = smoothing_certificate(tr, PhaseParams.homogeneous(2, c0), 0.2)
    assert cert["pass"]
    assert cert["rows"][0]["ratio"] <= 1.0 + 1e-12
    with pytest.raises(ConfigurationError):
        smoothing_certificate(tr, PhaseParams.homogeneous(2, 2 * admissible_c0(C1, 0.2)), 0.2)


def test_regularized_certificate_ratio_at_zero_is_below_one():
    g = Grid(2, 32, 7.0)
    tr = evolve(_field(gaussian_mixture(2), g), 0.05, n_records=1)
    C1 = tr.moment_history[0].C1
    cert = smoothing_certificate(tr, PhaseParams.homogeneous(2, C1 / 2, delta=0.1), 0.05)
    assert math.isclose(cert["rows"][0]["ratio"], 1 / 1.1, rel_tol=1e-12)


def test_growth_constant():
    assert growth_constant(2) == 1.0
    assert growth_constant(3) == 3.0


def test_grid_refinement_reduces_rhs_defect():
    # the equilibrium defect of a narrow Maxwellian shrinks as the grid is refined
    defects = []
    for n in (16, 32):
        g = Grid(2, n, 6.0)
        f = _field(gaussian(2, [0.4, 0.4]), g)
        defects.append(l2_norm(collision_rhs(f, coefficients_from_state(f))))
    assert defects[1] < defects[0]


def test_grid_refinement_convergence():
    # coarse nodes are every other fine node on the same box
    coarse, fine = Grid(2, 64, 7.0), Grid(2, 128, 7.0)
    prof = gaussian_mixture(2)
    fc = evolve(_field(prof, coarse), 0.01, n_records=1).states[-1]
    ff = evolve(_field(prof, fine), 0.01, n_records=1).states[-1]
    from kinsmooth.grid import inverse_transform

    a = inverse_transform(fc).values
    b = inverse_transform(ff).values[::2, ::2]
    diff = math.sqrt(coarse.cell_volume * np.sum((a - b) ** 2))
    assert diff < 1e-6
