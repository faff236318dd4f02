"""Spatially homogeneous Landau equation with Maxwellian molecules.

For Maxwellian molecules the convolved coefficients are quadratic polynomials
in ``v`` fixed by the mass ``rho``, mean ``u`` and mass-weighted central
covariance ``Sigma`` of ``f``::

    a_bar(v) = rho (|w|^2 I - w w^T) + tr(Sigma) I - Sigma,   w = v - u
    b_bar(v) = (1 - d) rho w

and the equation reads ``f_t = div(a_bar grad f - b_bar f)``.  For a normalized
state (unit mass, zero mean, diagonal covariance) ``a_bar`` reduces to
``delta_jk (|v|^2 + T0 - T_j) - v_j v_k``.

The solver is pseudo-spectral: gradients and divergence are taken in Fourier
space, coefficient products in physical space from the exact polynomials, and
each flux is dealiased with the 2/3 rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ContractError, DegenerateStateError, NumericalError
from .exact import MultiplierSpec, PhaseParams
from .grid import (
    Field,
    Grid,
    MomentSet,
    SpectralField,
    fft_workers,
    forward_transform,
    integrate_x,
    l2_norm,
    log_weighted_norm,
    moments,
)

__all__ = [
    "LandauCoefficients",
    "EvolutionTrace",
    "coefficients_from_state",
    "collision_rhs",
    "stable_dt",
    "evolve",
    "smoothing_certificate",
    "moment_ode_solution",
    "relaxation_rate",
    "growth_constant",
    "admissible_c0",
]


@dataclass(frozen=True)
class LandauCoefficients:
    """Polynomial coefficients ``a_bar``, ``b_bar`` built from the moments of a state."""

    rho: float
    mean: np.ndarray
    covariance: np.ndarray
    C1: float

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def _A(self) -> np.ndarray:
        cov = self.covariance
        return np.trace(cov) * np.eye(self.dim) - cov

    def abar(self, v) -> np.ndarray:
        """``a_bar`` at velocities ``v`` (components last); shape ``(..., d, d)``."""
        w = np.asarray(v, dtype=float) - self.mean
        ww = w[..., :, None] * w[..., None, :]
        r2 = np.sum(w * w, axis=-1)[..., None, None]
        return self.rho * (r2 * np.eye(self.dim) - ww) + self._A

    def bbar(self, v) -> np.ndarray:
        return (1 - self.dim) * self.rho * (np.asarray(v, dtype=float) - self.mean)

    def quadratic_form(self, v, xi) -> np.ndarray:
        """``sum_jk a_bar_jk(v) xi_j xi_k``."""
        xi = np.asarray(xi, dtype=float)
        return np.einsum("...j,...jk,...k->...", xi, self.abar(v), xi)

    def max_eigenvalue(self, radius: float) -> float:
        """Upper bound of ``lambda_max(a_bar(v))`` over ``|v - u| <= radius``."""
        evals = np.linalg.eigvalsh(self._A)
        return float(self.rho * radius**2 + evals[-1])

    def fields(self, grid: Grid) -> tuple[list[list[np.ndarray]], list[np.ndarray]]:
        """``a_bar`` and ``b_bar`` sampled on the grid as broadcastable component arrays."""
        d = self.dim
        w = [vj - uj for vj, uj in zip(grid.v_mesh, self.mean)]
        r2 = sum(wj * wj for wj in w)
        A = self._A
        a = [[None] * d for _ in range(d)]
        for j in range(d):
            for k in range(j, d):
                val = -self.rho * w[j] * w[k] + A[j, k]
                if j == k:
                    val = val + self.rho * r2
                a[j][k] = a[k][j] = val
        b = [(1 - d) * self.rho * wj for wj in w]
        return a, b


@dataclass
class EvolutionTrace:
    """Recorded time series of an evolution.

    ``log_weighted`` maps a probe label to the natural log of its weighted norm
    at each recorded time.  ``states`` keeps the transform of each recorded
    state for later diagnostics.
    """

    grid: Grid
    times: list[float] = field(default_factory=list)
    moment_history: list[MomentSet] = field(default_factory=list)
    l2_history: list[float] = field(default_factory=list)
    min_f_history: list[float] = field(default_factory=list)
    log_weighted: dict[str, list[float]] = field(default_factory=dict)
    states: list[SpectralField] = field(default_factory=list)
    dt: float = 0.0
    steps: int = 0

    def weighted_norm_history(self, label: str) -> np.ndarray:
        return np.exp(np.asarray(self.log_weighted[label]))

    def record(self, t: float, f: Field, probes, keep_state: bool = True):
        if self.times and not t > self.times[-1]:
            raise ContractError("trace times must be strictly increasing")
        F = forward_transform(f)
        self.times.append(float(t))
        self.moment_history.append(moments(integrate_x(f)))
        self.l2_history.append(l2_norm(f))
        self.min_f_history.append(float(f.values.min()))
        for probe in probes:
            self.log_weighted.setdefault(_label(probe), []).append(log_weighted_norm(F, probe, t))
        if keep_state:
            self.states.append(F)


def _label(probe) -> str:
    return getattr(probe, "label", "") or repr(probe)


def coefficients_from_state(f: Field) -> LandauCoefficients:
    """Coefficients of the collision operator frozen at the moments of ``f``.

    Raises
    ------
    DegenerateStateError
        If the ellipticity constant ``tr(Sigma) - lambda_max(Sigma)`` is not positive.
    """
    m = moments(f)
    cov = m.covariance
    C1 = float(np.trace(cov) - np.linalg.eigvalsh(cov)[-1])
    if not C1 > 1e-12 * max(1.0, float(np.trace(cov))):
        raise DegenerateStateError(
            f"ellipticity constant C1 = {C1:.3e} <= 0: one directional temperature carries all the energy"
        )
    return LandauCoefficients(m.mass, m.mean_velocity, cov, C1)


class _Operator:
    """Spectral derivative machinery shared by the collision and model operators."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.ik = [1j * k for k in grid.xi_mesh]
        self.mask = grid.dealias_mask
        self.axes = grid.v_axes
        self.workers = fft_workers()

    def fft(self, a):
        return sfft.fftn(a, axes=self.axes, workers=self.workers)

    def ifft(self, a):
        return sfft.ifftn(a, axes=self.axes, workers=self.workers)

    def divergence_form(self, Fhat, a, b, real=True):
        """Transform of ``div(a grad f - b f)`` from the raw DFT ``Fhat`` of ``f``.

        ``a`` is a nested list of coefficient arrays, ``b`` a list; the output
        is the raw DFT of the result, with each flux dealiased.
        """
        d = len(b)
        f = self.ifft(Fhat)
        grads = [self.ifft(self.ik[j] * Fhat) for j in range(d)]
        if real:
            f = f.real
            grads = [g.real for g in grads]
        out = 0.0
        for j in range(d):
            flux = sum(a[j][k] * grads[k] for k in range(d)) - b[j] * f
            out = out + self.ik[j] * (self.fft(flux) * self.mask)
        return out


def collision_rhs(f: Field, c: LandauCoefficients) -> Field:
    """``div(a_bar grad f - b_bar f)`` with coefficients ``c``."""
    g = f.grid
    if g.dim_x != 0:
        raise ContractError("collision_rhs expects a velocity-only grid")
    if c.dim != g.dim_v:
        raise ContractError(f"coefficients are {c.dim}-d but the grid has dim_v = {g.dim_v}")
    op = _Operator(g)
    a, b = c.fields(g)
    out = op.divergence_form(op.fft(f.values), a, b)
    return Field(g, op.ifft(out).real)


def stable_dt(grid: Grid, c: LandauCoefficients, safety: float = 0.2) -> float:
    """``safety * h^2 / max_v lambda_max(a_bar)`` with the maximum taken over the box corners."""
    radius = math.sqrt(grid.dim_v) * grid.half_width + float(np.linalg.norm(c.mean))
    return safety * grid.h_v**2 / c.max_eigenvalue(radius)


def _health(f: np.ndarray, t: float, last_t: float, last: np.ndarray, grid: Grid):
    if not np.all(np.isfinite(f)):
        raise NumericalError(f"non-finite values at t = {t:.6g}", last_time=last_t, last_state=Field(grid, last))
    fmax = float(f.max())
    fmin = float(f.min())
    if fmin < -1e-3 * fmax:
        raise NumericalError(
            f"min f = {fmin:.3e} below -1e-3 max f at t = {t:.6g}", last_time=last_t, last_state=Field(grid, last)
        )


def evolve(
    f0: Field,
    t_end: float,
    dt: float | str | None = "auto",
    probes=(),
    record_every: int | None = None,
    n_records: int = 20,
    keep_states: bool = True,
) -> EvolutionTrace:
    """Integrate the homogeneous Landau equation with classical RK4.

    Coefficients are rebuilt from the moments of every stage.  ``dt="auto"``
    uses :func:`stable_dt`; an explicit ``dt`` above that bound raises
    :class:`ConfigurationError`.  The step is shrunk so that ``t_end`` is hit
    exactly; about ``n_records`` states (plus ``t = 0``) are recorded unless
    ``record_every`` fixes the stride.
    """
    g = f0.grid
    if g.dim_x != 0:
        raise ContractError("evolve expects a velocity-only field")
    if t_end < 0:
        raise ConfigurationError(f"t_end must be nonnegative, got {t_end}")
    c0 = coefficients_from_state(f0)
    limit = stable_dt(g, c0)
    if dt in (None, "auto"):
        dt = limit
    elif dt > limit * (1 + 1e-12):
        raise ConfigurationError(f"dt = {dt:.3e} exceeds the stability bound {limit:.3e}")
    steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / steps if steps else 0.0
    stride = record_every or max(1, steps // max(1, n_records))

    op = _Operator(g)
    weight = g.cell_volume
    vs = g.v_mesh

    def rhs(Fhat):
        f = op.ifft(Fhat).real
        mass = weight * float(f.sum())
        if not mass > 0:
            raise DegenerateStateError("mass vanished during the evolution")
        mom = np.array([weight * float(np.sum(v * f)) for v in vs])
        u = mom / mass
        second = np.array([[weight * float(np.sum(vs[j] * vs[k] * f)) for k in range(g.dim_v)] for j in range(g.dim_v)])
        cov = second - mass * np.outer(u, u)
        coeff = LandauCoefficients(mass, u, cov, 0.0)
        a, b = coeff.fields(g)
        return op.divergence_form(Fhat, a, b)

    trace = EvolutionTrace(g, dt=h, steps=steps)
    trace.record(0.0, f0, probes, keep_states)
    Fhat = op.fft(f0.values)
    last = f0.values
    t = 0.0
    for step in range(1, steps + 1):
        k1 = rhs(Fhat)
        k2 = rhs(Fhat + 0.5 * h * k1)
        k3 = rhs(Fhat + 0.5 * h * k2)
        k4 = rhs(Fhat + h * k3)
        Fhat = Fhat + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t_new = step * h
        vals = op.ifft(Fhat).real
        _health(vals, t_new, t, last, g)
        t, last = t_new, vals
        if step % stride == 0 or step == steps:
            trace.record(t, Field(g, vals), probes, keep_states)
    return trace


def moment_ode_solution(M0: np.ndarray, mass: float, t) -> np.ndarray:
    """Second-moment matrix at time ``t`` for a zero-mean state.

    Solves ``dM/dt = 4 rho (tr(M) I - d M)``, obtained by integrating the
    equation against ``v v^T`` and using the polynomial coefficients.
    """
    M0 = np.asarray(M0, dtype=float)
    d = M0.shape[0]
    eq = np.trace(M0) / d * np.eye(d)
    decay = np.exp(-4.0 * d * mass * np.asarray(t, dtype=float))[..., None, None]
    return eq + (M0 - eq) * decay


def relaxation_rate(trace: EvolutionTrace, axis: int = 0, t_max: float | None = None) -> float:
    """Least-squares decay exponent of ``T_axis(t) - T0/d`` over the trace."""
    times = np.asarray(trace.times)
    gap = np.array([m.second_moment[axis, axis] - m.energy_T0 / len(m.momentum) for m in trace.moment_history])
    keep = np.abs(gap) > 1e-10 * np.abs(gap[0])
    if t_max is not None:
        keep &= times <= t_max + 1e-12
    if keep.sum() < 2:
        raise DegenerateStateError("temperature gap too small to fit a relaxation rate")
    slope = np.polyfit(times[keep], np.log(np.abs(gap[keep])), 1)[0]
    return float(-slope)


def growth_constant(d: int) -> float:
    """Exponent ``kappa`` of the L2 growth factor ``e^{kappa t}``.

    The energy identity gives ``kappa = -div(b_bar)/2 = d(d-1)/2`` for the
    convolution ``b_bar``; at ``d = 2`` this is the classical ``d/2``.
    """
    return d * (d - 1) / 2.0


def admissible_c0(C1: float, horizon: float) -> float:
    """Largest ``c0`` with ``C1 - c0/2 - 2 c0 T >= 0``."""
    return C1 / (0.5 + 2.0 * horizon)


def smoothing_certificate(trace: EvolutionTrace, p: PhaseParams, T0_time: float, tol: float = 1e-4) -> dict:
    """Ratio of the ``G_delta``-weighted norm to ``e^{kappa t} ||f0||`` along a trace.

    Checks the times ``0 <= t <= T0_time``.  ``kappa = d/2`` at ``d = 2``;
    for other ``d`` the value ``d(d-1)/2`` is used and the measured exponent is
    returned alongside.
    """
    if not trace.states:
        raise ConfigurationError("trace holds no states; evolve with keep_states=True")
    d = trace.grid.dim_v
    C1 = trace.moment_history[0].C1
    if C1 <= 0:
        raise DegenerateStateError(f"C1 = {C1:.3e} is not positive")
    c_max = admissible_c0(C1, T0_time)
    if p.c0 > c_max * (1 + 1e-12):
        raise ConfigurationError(
            f"c0 = {p.c0:g} violates C1 - c0/2 - 2 c0 T >= 0; admissible range is 0 < c0 <= {c_max:.6g}"
        )
    p.check_homogeneous(d)
    kappa = growth_constant(d)
    weight = MultiplierSpec.gdelta_h(p)
    log0 = log_weighted_norm(trace.states[0], 1.0)
    rows = []
    for t, F in zip(trace.times, trace.states):
        if t > T0_time + 1e-12:
            break
        lw = log_weighted_norm(F, weight, t)
        log_ratio = lw - kappa * t - log0
        rows.append({
            "time": t,
            "weighted_norm": math.exp(lw),
            "bound": math.exp(kappa * t + log0),
            "ratio": math.exp(log_ratio),
            "pass": bool(log_ratio <= math.log1p(tol)),
        })
    times = np.array([r["time"] for r in rows])
    logs = np.log([r["weighted_norm"] / math.exp(log0) for r in rows])
    pos = times > 0
    measured = float(np.max(logs[pos] / times[pos])) if np.any(pos) else 0.0
    return {
        "c0": p.c0,
        "c0_max": c_max,
        "delta": p.delta,
        "N": p.N_exp,
        "kappa": kappa,
        "kappa_measured": measured,
        "tolerance": tol,
        "rows": rows,
        "max_ratio": max(r["ratio"] for r in rows),
        "pass": all(r["pass"] for r in rows),
    }
