import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinsmooth.errors import ConfigurationError, ContractError
from kinsmooth.exact import PhaseParams
from kinsmooth.grid import Field, Grid, integrate_x, moments
from kinsmooth.inhomogeneous import (
    PhaseSpaceField,
    check_ellipticity,
    fp_admissible_c0,
    fp_evolve,
    fp_exact_states,
    fp_solve_spectral,
    fp_verify_bound,
    landau_model_evolve,
    landau_model_solve,
    largest_resolvable_c,
    stable_split_dt,
)
from kinsmooth.exact import MultiplierSpec
from kinsmooth.presets import parse_preset

G1 = Grid(1, 64, 10.0, dim_x=1)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_phase_space_field_contract():
    with pytest.raises(ContractError):
        PhaseSpaceField(Grid(1, 16), np.ones(16))
    with pytest.raises(ContractError):
        PhaseSpaceField(Grid(1, 16, dim_x=1), np.zeros((16, 16)))


def test_maxwellian_is_stationary_for_fokker_planck():
    f0 = parse_preset("maxwellian", 1, 1).field(G1)
    f1 = fp_solve_spectral(f0, 1.0, dt=1 / 64)
    assert np.max(np.abs(f1.values - f0.values)) < 1e-8


def test_x_uniform_data_stays_x_uniform():
    f0 = parse_preset("aniso-gaussian(0.6)", 1, 1).field(G1)
    f1 = fp_solve_spectral(f0, 0.5, dt=1 / 64)
    assert np.max(np.abs(f1.values - f1.values[:1])) < 1e-12


def test_fokker_planck_matches_exact_solution_and_is_second_order():
    data = parse_preset("cosine-modulated", 1, 1)
    f0 = data.field(G1)
    exact = fp_exact_states(data, G1, [0.5])[0][1].coeffs
    errs = []
    for steps in (64, 128):
        tr = fp_evolve(f0, 0.5, 0.5 / steps, n_records=1)
        errs.append(_rel(tr.states[-1].coeffs, exact))
    order = math.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2
    fine = fp_evolve(f0, 0.5, 0.5 / 512, n_records=1)
    assert _rel(fine.states[-1].coeffs, exact) <= 1e-6


def test_fokker_planck_conserves_mass():
    f0 = parse_preset("poisson-modulated(0.4)", 1, 1).field(G1)
    tr = fp_evolve(f0, 0.5, 1 / 128, n_records=4, keep_states=False)
    masses = [m.mass for m in tr.moment_history]
    assert np.max(np.abs(np.array(masses) - masses[0])) < 1e-12


@given(st.floats(0.0, 3.0))
def test_transport_only_preserves_velocity_moments(tau):
    # free transport shifts x only: the x-integrated profile is untouched
    g = Grid(1, 32, 8.0, dim_x=1)
    data = parse_preset("cosine-modulated(0.7)", 1, 1)
    x, v = g.x_mesh[0], g.v_mesh[0]

    def state(shift):
        mod = data.modulation.values((x - shift * v,), g.x_period)
        return Field(g, np.broadcast_to(mod, g.shape) * data.profile.values((v,)))

    f, shifted = state(0.0), state(tau)
    m0, m1 = moments(integrate_x(f)), moments(integrate_x(shifted))
    assert math.isclose(m0.mass, m1.mass, rel_tol=1e-12)
    assert math.isclose(m0.energy_T0, m1.energy_T0, rel_tol=1e-12)


def test_landau_model_reduces_to_fokker_planck_in_one_dimension():
    f0 = parse_preset("cosine-modulated", 1, 1).field(G1)
    dt = stable_split_dt(G1, "landau-model")
    a = landau_model_solve(f0, 0.05, dt=dt)
    b = fp_solve_spectral(f0, 0.05, dt=dt)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_landau_model_operator_annihilates_maxwellian():
    from kinsmooth.inhomogeneous import landau_model_coefficients
    from kinsmooth.landau import _Operator

    g = Grid(2, 64, 8.0)
    mu = parse_preset("maxwellian", 2).field(g).values
    op = _Operator(g)
    a, b = landau_model_coefficients(g)
    out = op.ifft(op.divergence_form(op.fft(mu), a, b)).real
    assert math.sqrt(g.cell_volume * np.sum(out**2)) < 1e-8


def test_landau_model_short_run_keeps_maxwellian():
    g = Grid(2, 16, 6.0, dim_x=2)
    tr = landau_model_evolve(parse_preset("maxwellian", 2, 2).field(g), 0.02, n_records=1)
    ref = tr.states[0].coeffs
    # 16 points per axis resolve the Gaussian to ~1e-7 relative
    assert np.max(np.abs(tr.states[-1].coeffs - ref)) < 1e-6 * np.max(np.abs(ref))


def test_model_ellipticity_holds_on_samples():
    assert check_ellipticity(dim=2) >= 1.0 - 1e-12


def test_cfl_violation_rejected():
    f0 = parse_preset("cosine-modulated", 1, 1).field(G1)
    with pytest.raises(ConfigurationError):
        fp_evolve(f0, 0.5, dt=0.5)
    g = Grid(2, 16, 6.0, dim_x=2)
    with pytest.raises(ConfigurationError):
        landau_model_evolve(parse_preset("maxwellian", 2, 2).field(g), 0.1, dt=100 * stable_split_dt(g, "landau-model"))


def test_dimension_contracts():
    with pytest.raises(ConfigurationError):
        fp_evolve(Field(Grid(2, 8, dim_x=1), np.ones((8, 8, 8))), 0.1)


def test_weighted_bound_on_exact_states():
    data = parse_preset("cosine-modulated", 1, 1)
    states = fp_exact_states(data, G1, np.linspace(0, 1, 11))
    c0 = fp_admissible_c0(1.0)
    assert math.isclose(c0, 2 / 23, rel_tol=1e-14)
    res = fp_verify_bound(states, PhaseParams.fokker_planck(1, c0), 1.0)
    assert res["pass"]
    assert res["rows"][0]["ratio"] <= 1 + 1e-12
    assert all(r["pass"] for r in res["regularized"].values())
    with pytest.raises(ConfigurationError):
        fp_verify_bound(states, PhaseParams.fokker_planck(1, 2 * c0), 1.0)


def test_resolvable_bisection_on_known_spectrum():
    # coefficients exp(-a(|xi|^2+|eta|^2)): the Gevrey-1/2 weight at strength c is resolvable iff c t < a, roughly
    g = Grid(1, 64, 8.0, dim_x=1)
    from kinsmooth.grid import SpectralField

    a = 0.2
    F = SpectralField(g, np.broadcast_to(np.exp(-a * (g.xi[..., 0] ** 2 + g.eta[..., 0] ** 2)), g.shape))
    t = 0.5
    c, capped = largest_resolvable_c(F, MultiplierSpec.gevrey_half, t, 10.0)
    assert not capped
    assert 0.5 * a / t < c < 1.05 * a / t
