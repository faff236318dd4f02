"""Spectral decay classification and inequality oracles.

A spectrum is classified by fitting ``log max_shell |coeff| ~ const - c r^(1/s)``
over radial shells; the best-fitting ``s`` is the Gevrey index (``1/2``
Gaussian decay, ``1`` exponential decay).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .exact import kolmogorov_phase, lemma_constant
from .grid import SpectralField, log_weighted_norm, tail_fraction
from .quadrature import phase_integral

__all__ = [
    "GevreyFit",
    "LemmaReport",
    "shell_spectrum",
    "gevrey_fit",
    "lemma_ratio",
    "lemma_verify",
    "lemma_closed_form_min",
    "kolmogorov_bound_verify",
    "ratio_curve",
    "lattice_extent",
]

NOISE_FLOOR = 1e-13
R2_MIN = 0.98
MIN_SHELLS = 8


@dataclass(frozen=True)
class GevreyFit:
    """Result of :func:`gevrey_fit`.

    ``classified`` is false when no candidate reaches ``r_squared >= 0.98``
    with ``c > 0`` or too few shells are usable; ``s`` and ``c`` then hold the
    best attempt (or NaN).
    """

    s: float
    c: float
    r_squared: float
    window: tuple[float, float]
    classified: bool
    n_shells: int
    candidates: dict = field(default_factory=dict, compare=False)


def shell_spectrum(F: SpectralField, axes: str = "v") -> tuple[np.ndarray, np.ndarray]:
    """Per-shell maximum of ``|coeff|`` and the radius at which it is attained.

    Shells have the lattice spacing as width.  With ``axes="v"`` the radius is
    ``|xi|`` and the maximum runs over all spatial frequencies too; with
    ``axes="all"`` the radius is ``|(eta, xi)|``.  Only shells inside the
    dealiasing band (``r < (2/3) r_nyquist``) are returned.
    """
    g = F.grid
    if axes == "v":
        r = np.sqrt(np.sum(g.xi**2, axis=-1))
        spacing = math.pi / g.half_width
        nyq = spacing * g.n / 2
    elif axes == "all":
        r = np.sqrt(np.sum(g.xi**2, axis=-1) + np.sum(g.eta**2, axis=-1))
        spacing = min([math.pi / g.half_width] + ([2 * math.pi / g.x_period] if g.dim_x else []))
        nyq = spacing * g.n / 2
    else:
        raise ConfigurationError(f"axes must be 'v' or 'all', got {axes!r}")
    r = np.broadcast_to(r, g.shape).ravel()
    mag = np.abs(F.coeffs).ravel()
    keep = r < (2.0 / 3.0) * nyq
    r, mag = r[keep], mag[keep]
    shell = np.floor(r / spacing + 1e-9).astype(int)
    order = np.lexsort((-mag, shell))
    shell_sorted = shell[order]
    first = np.r_[True, shell_sorted[1:] != shell_sorted[:-1]]
    idx = order[first]
    return r[idx], mag[idx]


def gevrey_fit(
    F: SpectralField,
    s_candidates=(0.5, 1.0, 2.0),
    axes: str = "v",
    noise_floor: float = NOISE_FLOOR,
    r2_min: float = R2_MIN,
) -> GevreyFit:
    """Least-squares Gevrey classification of a spectrum.

    Shells whose maximum lies below ``noise_floor`` times the global maximum
    are dropped.  Scaling the coefficients by a positive constant leaves the
    result unchanged.
    """
    radius, mag = shell_spectrum(F, axes)
    top = mag.max() if mag.size else 0.0
    use = mag > noise_floor * top if top > 0 else np.zeros_like(mag, dtype=bool)
    radius, mag = radius[use], mag[use]
    if radius.size < MIN_SHELLS:
        return GevreyFit(math.nan, math.nan, 0.0, (math.nan, math.nan), False, int(radius.size))
    y = np.log(mag)
    window = (float(radius.min()), float(radius.max()))
    fits = {}
    for s in s_candidates:
        x = radius ** (1.0 / s)
        A = np.vstack([np.ones_like(x), x]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
        fits[float(s)] = (float(-coef[1]), r2)
    valid = {s: v for s, v in fits.items() if v[0] > 0}
    pool = valid or fits
    best = max(pool, key=lambda s: pool[s][1])
    c, r2 = pool[best]
    ok = bool(valid) and r2 >= r2_min
    return GevreyFit(best, c, r2, window, ok, int(radius.size), fits)


@dataclass(frozen=True)
class LemmaReport:
    alpha: float
    bound_constant: float
    empirical_min: float
    argmin: tuple[float, float]  # (angle, |eta~| / |xi|)

    @property
    def holds(self) -> bool:
        return self.bound_constant <= self.empirical_min <= 1.0


def lemma_ratio(alpha: float, theta, lam) -> np.ndarray:
    """``int_0^1 |xi - tau eta|^alpha dtau / (|xi|^alpha + |eta|^alpha)`` with ``|xi| = 1``.

    ``eta = lam (cos theta, sin theta)``; the ratio is scale invariant so this
    covers every nonzero ``xi``.
    """
    theta, lam = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(lam, dtype=float))
    xi = np.stack([np.ones_like(theta), np.zeros_like(theta)], axis=-1)
    eta = np.stack([lam * np.cos(theta), lam * np.sin(theta)], axis=-1)
    if alpha == 2.0:
        num = 1.0 - lam * np.cos(theta) + lam**2 / 3.0
    else:
        num = phase_integral(1.0, xi, eta, alpha, sign=-1.0)
    return num / (1.0 + lam**alpha)


def lemma_closed_form_min() -> tuple[float, float]:
    """Minimum of ``(1 - l + l^2/3)/(1 + l^2)`` over ``l > 0`` and its minimizer."""
    # stationarity: l^2 - (4/3) l - 1 = 0
    lam = (4.0 / 3.0 + math.sqrt(16.0 / 9.0 + 4.0)) / 2.0
    return (4.0 - math.sqrt(13.0)) / 6.0, lam


def lemma_verify(alpha: float, n_angle: int = 256, n_ratio: int = 256, refinements: int = 2) -> LemmaReport:
    """Brute-force minimum of :func:`lemma_ratio` over angle and magnitude ratio.

    Scans ``theta in [0, pi]`` and ``log lam in [-6, 6]`` on an
    ``n_angle x n_ratio`` grid, then refines around the minimizer by a factor
    8 per round.
    """
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    th_lo, th_hi, ll_lo, ll_hi = 0.0, math.pi, -6.0, 6.0
    nth, nll = n_angle, n_ratio
    best = (math.inf, 0.0, 0.0)
    for _ in range(refinements + 1):
        th = np.linspace(th_lo, th_hi, nth)
        ll = np.linspace(ll_lo, ll_hi, nll)
        T, LL = np.meshgrid(th, ll, indexing="ij")
        vals = lemma_ratio(alpha, T, np.exp(LL))
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        if vals[i, j] < best[0]:
            best = (float(vals[i, j]), float(th[i]), float(ll[j]))
        dth = (th_hi - th_lo) / (nth - 1)
        dll = (ll_hi - ll_lo) / (nll - 1)
        th_lo, th_hi = max(0.0, best[1] - dth), min(math.pi, best[1] + dth)
        ll_lo, ll_hi = best[2] - dll, best[2] + dll
        nth = nll = 17  # spacing shrinks by 8 per round
    return LemmaReport(alpha, lemma_constant(alpha), best[0], (best[1], math.exp(best[2])))


def kolmogorov_bound_verify(alpha: float, samples: int = 10_000, seed: int = 0, dim: int = 2) -> dict:
    """Check ``int_0^t |xi + s eta|^(2a) ds >= c (t|xi|^(2a) + t^(2a+1)|eta|^(2a))`` on random samples.

    ``c`` is the empirical lemma constant for exponent ``2 alpha``.  Also checks
    the exact homogeneity ``phase(2t, xi, eta) = 2 phase(t, xi, 2 eta)``.
    """
    rep = lemma_verify(2.0 * alpha)
    c = rep.empirical_min
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.01, 3.0, samples)
    xi = rng.uniform(-8, 8, (samples, dim))
    eta = rng.uniform(-8, 8, (samples, dim))
    p = 2.0 * alpha
    lhs = kolmogorov_phase(t, eta, xi, alpha)
    rhs = c * (t * np.linalg.norm(xi, axis=-1) ** p + t ** (p + 1) * np.linalg.norm(eta, axis=-1) ** p)
    ratio = lhs / rhs
    scaled = kolmogorov_phase(2 * t, eta, xi, alpha)
    homog = float(np.max(np.abs(scaled - 2 * kolmogorov_phase(t, 2 * eta, xi, alpha)) / scaled))
    return {
        "alpha": alpha,
        "exponent": p,
        "bound_constant": rep.bound_constant,
        "empirical_constant": c,
        "min_ratio": float(ratio.min()),
        "homogeneity_error": homog,
        "pass": bool(ratio.min() >= 1.0 - 1e-6 and c >= rep.bound_constant and homog < 1e-10),
    }


def lattice_extent(grid, weight_kind: str, t: float) -> float:
    """``max`` over the core band of the weight exponent per unit strength."""
    core = grid.core_mask()
    r_xi = np.sqrt(np.sum(grid.xi**2, axis=-1))
    r_eta = np.sqrt(np.sum(grid.eta**2, axis=-1))
    if weight_kind == "analytic":
        w = t * r_xi + t**2 * r_eta
    elif weight_kind == "gevrey_half":
        w = t * r_xi**2 + t**2 * r_eta**2
    else:
        raise ConfigurationError(f"unknown weight kind {weight_kind!r}")
    return float(np.max(np.broadcast_to(w, grid.shape)[core]))


def ratio_curve(states, weight, growth: float = 0.0, tol: float = 1e-6, tail_tol: float = 1e-2, reference=None) -> list[dict]:
    """Weighted norm against ``e^{growth t} ||f0||`` along a sequence of states.

    ``states`` is an iterable of ``(t, SpectralField)`` pairs or an object with
    ``times`` and ``states``.  The reference norm is the unweighted norm of
    the first state unless ``reference`` is given.  A row is flagged
    ``radius_exceeded`` when more than ``tail_tol`` of the weighted energy sits
    outside the core band and the weight has moved energy there (the weighted
    tail share exceeds the unweighted one): the weighted function is then not
    resolved by the lattice.
    """
    if hasattr(states, "states"):
        states = list(zip(states.times, states.states))
    states = list(states)
    if not states:
        return []
    log0 = math.log(reference) if reference is not None else log_weighted_norm(states[0][1], 1.0)
    rows = []
    for t, F in states:
        lw = log_weighted_norm(F, weight, t)
        log_bound = growth * t + log0
        tail = tail_fraction(F, weight, t)
        exceeded = (tail > tail_tol and tail > tail_fraction(F, 1.0) * (1 + 1e-9)) or lw > 700.0
        log_ratio = lw - log_bound
        rows.append({
            "time": float(t),
            "weighted_norm": math.exp(min(lw, 700.0)),
            "log_weighted_norm": lw,
            "bound": math.exp(min(log_bound, 700.0)),
            "ratio": math.exp(min(log_ratio, 700.0)),
            "tail_fraction": tail,
            "radius_exceeded": bool(exceeded),
            "pass": bool(log_ratio <= math.log1p(tol) and not exceeded),
        })
    return rows
