"""Split-step solvers for linear kinetic equations on ``T^d x R^d``.

Both equations have the form ``f_t + v.grad_x f = div_v(a grad_v f - b f)``:

* Fokker-Planck: ``a = I``, ``b = -v``;
* linear Landau model: ``a = (|v|^2 + 1) I - v v^T``, ``b = -v``
  (the coefficients of the collision operator frozen at the unit Maxwellian).

The state is held as its x-Fourier transform (``rfft`` along the spatial
axes) sampled at the velocity nodes.  Strang splitting alternates the exact
transport phase ``exp(-i eta.v tau)`` with one classical RK4 step of the
velocity operator, evaluated pseudo-spectrally with 2/3-rule dealiasing of
each flux.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .diagnostics import gevrey_fit, lattice_extent, ratio_curve
from .errors import ConfigurationError, ContractError, NumericalError
from .exact import MultiplierSpec, PhaseParams, fp_exact_hat, lemma_constant
from .grid import Field, Grid, SpectralField, fft_workers, inverse_transform, log_weighted_norm, tail_fraction
from .landau import EvolutionTrace, _Operator

__all__ = [
    "PhaseSpaceField",
    "TransformedState",
    "fp_coefficients",
    "landau_model_coefficients",
    "stable_split_dt",
    "split_evolve",
    "fp_solve_spectral",
    "fp_evolve",
    "fp_exact_states",
    "fp_admissible_c0",
    "fp_verify_bound",
    "landau_model_solve",
    "landau_model_evolve",
    "landau_model_verify",
    "check_ellipticity",
]


class PhaseSpaceField(Field):
    """A field on a grid with at least one spatial axis and positive mass."""

    def __post_init__(self):
        super().__post_init__()
        if self.grid.dim_x < 1:
            raise ContractError("a phase-space field needs dim_x >= 1")
        if not self.grid.cell_volume * float(self.values.sum()) > 0:
            raise ContractError("phase-space field has non-positive mass")


@dataclass(frozen=True)
class TransformedState:
    """Lab-frame coefficients at time ``t`` read in the transport-free variables.

    The shear ``w(t, eta, xi) = f_hat(t, eta, xi - t eta)`` is a measure
    preserving change of frequency variables, so a weight ``W(t, eta, xi)`` on
    ``w`` is evaluated on the lab lattice as ``W(t, eta, xi + t eta)``.  This is
    exact; no interpolation of coefficients is involved.
    """

    coeffs: SpectralField
    t: float

    def log_norm(self, weight: MultiplierSpec) -> float:
        if not weight.shear:
            raise ConfigurationError("TransformedState expects a sheared weight")
        return log_weighted_norm(self.coeffs, weight, self.t)


def fp_coefficients(grid: Grid):
    d = grid.dim_v
    one = np.ones([1] * grid.ndim)
    a = [[one if j == k else 0.0 * one for k in range(d)] for j in range(d)]
    b = [-v for v in grid.v_mesh]
    return a, b


def landau_model_coefficients(grid: Grid):
    d = grid.dim_v
    vs = grid.v_mesh
    r2 = sum(v * v for v in vs)
    a = [[(r2 + 1.0 if j == k else 0.0) - vs[j] * vs[k] for k in range(d)] for j in range(d)]
    b = [-v for v in vs]
    return a, b


def _coefficient_bounds(grid: Grid, kind: str) -> tuple[float, float]:
    """Upper bounds of ``lambda_max(a)`` and ``|b|`` over the velocity box."""
    vmax = math.sqrt(grid.dim_v) * grid.half_width
    lam = 1.0 if kind == "fp" else vmax**2 + 1.0
    return lam, vmax


def stable_split_dt(grid: Grid, kind: str, safety: float = 0.2) -> float:
    """``safety * h^2 / max lambda_max(a)``."""
    lam, _ = _coefficient_bounds(grid, kind)
    return safety * grid.h_v**2 / lam


def _check_cfl(grid: Grid, kind: str, dt: float):
    lam, bmax = _coefficient_bounds(grid, kind)
    # the operator's range lies in the dealiased band |k| < n/3
    kmax = (2.0 / 3.0) * math.pi / grid.h_v
    rho = lam * grid.dim_v * kmax**2 + bmax * kmax * math.sqrt(grid.dim_v)
    if dt * rho > 2.5:
        raise ConfigurationError(
            f"dt = {dt:.3e} violates the RK4 stability limit dt <= {2.5 / rho:.3e} of the velocity step"
        )


def check_ellipticity(samples: int = 10_000, dim: int = 2, seed: int = 0, radius: float = 10.0) -> float:
    """Minimum of ``a(v) xi.xi / |xi|^2`` for the model coefficients on random samples."""
    rng = np.random.default_rng(seed)
    v = rng.uniform(-radius, radius, (samples, dim))
    xi = rng.standard_normal((samples, dim))
    r2 = np.sum(v * v, axis=-1)
    form = (r2 + 1.0) * np.sum(xi * xi, axis=-1) - np.sum(v * xi, axis=-1) ** 2
    return float(np.min(form / np.sum(xi * xi, axis=-1)))


class _SplitStepper:
    def __init__(self, grid: Grid, a, b):
        self.grid = grid
        self.a, self.b = a, b
        self.op = _Operator(grid)
        self.xaxes = grid.x_axes
        self.workers = fft_workers()
        n, dx = grid.n, grid.dim_x
        # spatial frequencies of the rfft layout: full on leading axes, half on the last
        shape_eta = []
        for ax in range(dx):
            k = np.fft.rfftfreq(n, 1.0 / n) if ax == dx - 1 else np.fft.fftfreq(n, 1.0 / n)
            s = [1] * grid.ndim
            s[ax] = k.size
            shape_eta.append((2 * math.pi / grid.x_period) * k.reshape(s))
        self.eta_half = shape_eta
        self.eta_dot_v = sum(e * v for e, v in zip(shape_eta, grid.v_mesh))

    def to_state(self, f: np.ndarray) -> np.ndarray:
        return sfft.rfftn(f, axes=self.xaxes, workers=self.workers)

    def to_field(self, P: np.ndarray) -> np.ndarray:
        n = self.grid.n
        return sfft.irfftn(P, s=(n,) * self.grid.dim_x, axes=self.xaxes, workers=self.workers)

    def transport(self, tau: float) -> np.ndarray:
        return np.exp(-1j * tau * self.eta_dot_v)

    def velocity_step(self, P: np.ndarray, h: float) -> np.ndarray:
        op = self.op
        Q = op.fft(P)

        def L(X):
            return op.divergence_form(X, self.a, self.b, real=False)

        k1 = L(Q)
        k2 = L(Q + 0.5 * h * k1)
        k3 = L(Q + 0.5 * h * k2)
        k4 = L(Q + h * k3)
        return op.ifft(Q + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def split_evolve(
    f0: Field,
    t_end: float,
    dt: float | str | None,
    kind: str,
    probes=(),
    n_records: int = 10,
    record_every: int | None = None,
    keep_states: bool = True,
) -> EvolutionTrace:
    """Strang-split evolution for ``kind`` in ``{"fp", "landau-model"}``."""
    g = f0.grid
    if g.dim_x < 1:
        raise ContractError("split_evolve needs a phase-space grid")
    if kind == "fp":
        a, b = fp_coefficients(g)
    elif kind == "landau-model":
        a, b = landau_model_coefficients(g)
    else:
        raise ConfigurationError(f"unknown equation kind {kind!r}")
    if dt in (None, "auto"):
        dt = stable_split_dt(g, kind)
    steps = max(1, math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / steps if steps else 0.0
    if steps:
        _check_cfl(g, kind, h)
    stride = record_every or max(1, steps // max(1, n_records))

    stepper = _SplitStepper(g, a, b)
    trace = EvolutionTrace(g, dt=h, steps=steps)
    trace.record(0.0, f0, probes, keep_states)
    if not steps:
        return trace
    half = stepper.transport(0.5 * h)
    P = stepper.to_state(f0.values) * half
    for step in range(1, steps + 1):
        P = stepper.velocity_step(P, h)
        done = step == steps
        if done or step % stride == 0:
            vals = stepper.to_field(P * half)
            if not np.all(np.isfinite(vals)):
                raise NumericalError(f"non-finite state at t = {step * h:.6g}", last_time=trace.times[-1])
            trace.record(step * h, Field(g, vals), probes, keep_states)
        if not done:
            P = P * half * half
    return trace


def _final_field(trace: EvolutionTrace) -> Field:
    return inverse_transform(trace.states[-1])


def fp_evolve(f0: Field, t_end: float, dt="auto", probes=(), n_records: int = 10, keep_states: bool = True):
    if f0.grid.dim_x != f0.grid.dim_v or f0.grid.dim_v not in (1, 2):
        raise ConfigurationError("Fokker-Planck runs need dim_x = dim_v in {1, 2}")
    return split_evolve(f0, t_end, dt, "fp", probes, n_records, keep_states=keep_states)


def fp_solve_spectral(f0: Field, t_end: float, dt="auto") -> Field:
    """Solve ``f_t + v.grad_x f = div_v(grad_v f + v f)`` to ``t_end``."""
    return _final_field(fp_evolve(f0, t_end, dt, n_records=1))


def landau_model_evolve(g0: Field, t_end: float, dt="auto", probes=(), n_records: int = 10, keep_states: bool = True):
    g = g0.grid
    if g.dim_x != g.dim_v or g.dim_v not in (1, 2):
        raise ConfigurationError("linear Landau model runs need dim_x = dim_v in {1, 2}")
    if check_ellipticity(dim=g.dim_v, radius=g.half_width) < 1.0 - 1e-12:
        raise NumericalError("model coefficients fail the ellipticity bound a xi.xi >= |xi|^2")
    return split_evolve(g0, t_end, dt, "landau-model", probes, n_records, keep_states=keep_states)


def landau_model_solve(g0: Field, t_end: float, dt="auto") -> Field:
    """Solve ``g_t + v.grad_x g = div_v(a(mu) grad_v g - b(mu) g)`` to ``t_end``."""
    return _final_field(landau_model_evolve(g0, t_end, dt, n_records=1))


# -- Fokker-Planck smoothing estimate ----------------------------------------------


def fp_admissible_c0(horizon: float, c2: float = lemma_constant(2.0)) -> float:
    """Largest ``c0`` with ``2 - 3 c0 - 4 c0 T - 2 c0 T^2/(3 c2) >= 0``."""
    return 2.0 / (3.0 + 4.0 * horizon + 2.0 * horizon**2 / (3.0 * c2))


def fp_exact_states(data, grid: Grid, times) -> list[tuple[float, SpectralField]]:
    """Exact transforms on the lattice at the given times for preset ``data``."""
    f0hat = data.hat_function(grid)
    return [(float(t), SpectralField(grid, fp_exact_hat(t, grid.eta, grid.xi, f0hat))) for t in times]


def fp_verify_bound(
    states,
    p: PhaseParams,
    horizon: float | None = None,
    tol: float = 1e-6,
    deltas=(1e-2, 1e-4, 0.0),
) -> dict:
    """Check ``||exp(c~(t|xi|^2 + t^3|eta|^2)) f_hat(t)|| <= e^{(d/2) t} ||f0||``.

    ``states`` is a list of ``(t, SpectralField)`` starting at ``t = 0`` (exact
    or numeric).  ``c~ = c0 c2 / 2``.  The sheared ``phi``-multiplier is also
    reported for each ``delta`` in ``deltas``.
    """
    states = list(states)
    times = [t for t, _ in states]
    T = max(times) if horizon is None else horizon
    c_max = fp_admissible_c0(T, p.c2)
    if p.c0 > c_max * (1 + 1e-12):
        raise ConfigurationError(
            f"c0 = {p.c0:g} violates 2 - 3c0 - 4c0 T - 2c0 T^2/(3 c2) >= 0 at T = {T:g}; "
            f"admissible range is 0 < c0 <= {c_max:.6g}"
        )
    d = states[0][1].grid.dim_v
    c_tilde = p.c0 * p.c2 / 2.0
    ref = math.exp(log_weighted_norm(states[0][1], 1.0))
    rows = ratio_curve(states, MultiplierSpec.fp_bound(c_tilde), growth=d / 2.0, tol=tol, reference=ref)
    regularized = {}
    for delta in deltas:
        q = PhaseParams.fokker_planck(d, p.c0, delta=delta, c2=p.c2)
        q.check_fokker_planck(d)
        r = ratio_curve(states, MultiplierSpec.gdelta_fp(q), growth=d / 2.0, tol=tol, reference=ref)
        regularized[str(delta)] = {"max_ratio": max(x["ratio"] for x in r), "pass": all(x["pass"] for x in r)}
    return {
        "c0": p.c0,
        "c0_max": c_max,
        "c_tilde": c_tilde,
        "horizon": T,
        "growth": d / 2.0,
        "tolerance": tol,
        "rows": rows,
        "max_ratio": max(r["ratio"] for r in rows),
        "pass": all(r["pass"] for r in rows),
        "regularized": regularized,
    }


# -- linear Landau model: analytic versus ultra-analytic weights --------------------


def _resolvable(F: SpectralField, weight: MultiplierSpec, t: float, tail_tol: float, base_tail: float) -> bool:
    """Same rule as the ``radius_exceeded`` flag of :func:`ratio_curve`, negated."""
    lw = log_weighted_norm(F, weight, t)
    if lw > 700.0:
        return False
    tail = tail_fraction(F, weight, t)
    return not (tail > tail_tol and tail > base_tail * (1 + 1e-9))


def largest_resolvable_c(F: SpectralField, make_weight, t: float, c_hi: float, tail_tol: float = 1e-2, iters: int = 40):
    """Bisection for the largest strength whose weighted state stays resolved.

    Returns ``(c, capped)``; ``capped`` means ``c_hi`` itself is resolvable.
    """
    base = tail_fraction(F, 1.0)
    if _resolvable(F, make_weight(c_hi), t, tail_tol, base):
        return c_hi, True
    lo, hi = 0.0, c_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _resolvable(F, make_weight(mid), t, tail_tol, base):
            lo = mid
        else:
            hi = mid
    return lo, False


def landau_model_verify(
    trace: EvolutionTrace,
    p: PhaseParams,
    t_probe: float | None = None,
    tail_tol: float = 1e-2,
    deltas=(1e-2, 1e-4, 0.0),
    n_sweep: int = 24,
) -> dict:
    """Analytic-radius measurement for a linear Landau model trace.

    * bisection for the largest ``c`` such that ``exp(c(t|xi| + t^2|eta|))``
      keeps the state resolved at ``t_probe``;
    * the same sweep for ``exp(c(t|xi|^2 + t^2|eta|^2))`` over ``c`` from the
      lattice-resolvable threshold ``1 / max_core(t|xi|^2 + t^2|eta|^2)`` up;
    * a Gevrey fit of the velocity spectrum at ``t_probe``;
    * the growth exponent ``C^ = max_t log(ratio)/t`` of the declared weight
      ``exp(c0 c1 (t|xi| + t^2|eta|))`` and of the sheared ``F_delta``.
    """
    if not trace.states:
        raise ConfigurationError("trace holds no states")
    times = np.asarray(trace.times)
    t_probe = float(times[-1]) if t_probe is None else t_probe
    i = int(np.argmin(np.abs(times - t_probe)))
    t = float(times[i])
    if t <= 0:
        raise ConfigurationError("probe time must be positive")
    F = trace.states[i]
    g = F.grid
    d = g.dim_v

    ext_a = lattice_extent(g, "analytic", t)
    c_hi_a = 60.0 / ext_a
    c_star, capped = largest_resolvable_c(F, MultiplierSpec.analytic, t, c_hi_a, tail_tol)

    ext_g = lattice_extent(g, "gevrey_half", t)
    c_res = 1.0 / ext_g
    sweep = np.geomspace(c_res, 60.0 / ext_g, n_sweep)
    base = tail_fraction(F, 1.0)
    gh = [{"c": float(c), "resolvable": _resolvable(F, MultiplierSpec.gevrey_half(c), t, tail_tol, base)} for c in sweep]
    gh_fails_all = not any(r["resolvable"] for r in gh)
    gh_c_star, _ = largest_resolvable_c(F, MultiplierSpec.gevrey_half, t, 60.0 / ext_g, tail_tol)

    fit = gevrey_fit(F, axes="v")

    c1 = lemma_constant(1.0)
    declared = MultiplierSpec.analytic(p.c0 * c1)
    rows = ratio_curve(trace, declared, growth=0.0, tol=math.inf, tail_tol=tail_tol)
    radius_ok = not any(r["radius_exceeded"] for r in rows)
    pos = [r for r in rows if r["time"] > 0]
    C_hat = max((math.log(r["ratio"]) / r["time"] for r in pos), default=0.0)

    regularized = {}
    for delta in deltas:
        q = PhaseParams.landau_model(d, p.c0, delta=delta)
        q.check_landau_model(d)
        r = ratio_curve(trace, MultiplierSpec.fdelta(q), growth=0.0, tol=math.inf, tail_tol=tail_tol)
        rp = [x for x in r if x["time"] > 0]
        regularized[str(delta)] = {
            "C_hat": max((math.log(x["ratio"]) / x["time"] for x in rp), default=0.0),
            "radius_exceeded": any(x["radius_exceeded"] for x in r),
        }

    return {
        "t_probe": t,
        "tail_tol": tail_tol,
        "analytic": {"c_star": c_star, "capped": capped, "c_upper": c_hi_a, "lattice_extent": ext_a},
        "gevrey_half": {
            "c_resolvable": c_res,
            "c_star": gh_c_star,
            "sweep": gh,
            "fails_all": gh_fails_all,
        },
        "gevrey_fit": {
            "s": fit.s,
            "c": fit.c,
            "r_squared": fit.r_squared,
            "classified": fit.classified,
            "n_shells": fit.n_shells,
            "candidates": {str(k): v for k, v in fit.candidates.items()},
        },
        "declared": {
            "c0": p.c0,
            "c": p.c0 * c1,
            "C_hat": C_hat,
            "radius_ok": radius_ok,
            "status": "ok" if radius_ok else "radius smaller than probe",
            "rows": rows,
        },
        "regularized": regularized,
        "analytic_pass": bool(c_star > 0),
        "distinction_pass": bool(c_star > 0 and gh_fails_all and fit.classified and abs(fit.s - 1.0) < 1e-9),
    }
