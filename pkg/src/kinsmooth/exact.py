"""Exact Fourier-space solutions, phase integrals and regularized smoothing weights.

Vector arguments carry their components on the last axis and broadcast over
the leading axes, so every function works pointwise or on a whole lattice
(``grid.eta``, ``grid.xi``).  Initial data enter as callables
``f0hat(eta, xi) -> complex array``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .quadrature import gauss_legendre, phase_integral

__all__ = [
    "lemma_constant",
    "PhaseParams",
    "MultiplierSpec",
    "kolmogorov_phase",
    "kolmogorov_hat",
    "fp_phase",
    "fp_phase_quadrature",
    "fp_characteristic_origin",
    "fp_exact_hat",
    "gdelta_homogeneous",
    "log_gdelta_homogeneous",
    "psi_weight",
    "phi_weight",
    "fdelta_multiplier",
    "log_fdelta",
    "log_gdelta_fp",
]

# below exp(-700) an exponential factor is flushed to zero
_EXP_CLAMP = 700.0


def lemma_constant(alpha: float) -> float:
    """``1 / (2^(alpha+1) (alpha+1))``, the Ukai lower-bound constant."""
    return 1.0 / (2.0 ** (alpha + 1.0) * (alpha + 1.0))


C2 = lemma_constant(2.0)
C1_ANALYTIC = lemma_constant(1.0)


def _dot(a, b):
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def _norm2(a):
    return _dot(a, a)


@dataclass(frozen=True)
class PhaseParams:
    """Weight parameters: time, exponent, ``c0``, ``c2``, ``delta`` and ``N``.

    ``delta = 0`` denotes the unregularized limit, evaluated in log space.
    """

    t: float = 0.0
    alpha: float = 1.0
    c0: float = 0.1
    c2: float = C2
    delta: float = 0.0
    N_exp: float = 2.0

    def __post_init__(self):
        if self.t < 0 or self.alpha <= 0 or self.c0 <= 0 or self.c2 <= 0:
            raise ConfigurationError(f"invalid phase parameters {self}")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1], got {self.delta}")
        if self.N_exp <= 0:
            raise ConfigurationError(f"N must be positive, got {self.N_exp}")

    @classmethod
    def homogeneous(cls, d: int, c0: float, delta: float = 0.0, t: float = 0.0) -> PhaseParams:
        """Smallest integer ``N > d/4 + 1``."""
        return cls(t=t, c0=c0, delta=delta, N_exp=float(math.floor(d / 4 + 1) + 1))

    @classmethod
    def fokker_planck(cls, d: int, c0: float, delta: float = 0.0, t: float = 0.0, c2: float = C2) -> PhaseParams:
        return cls(t=t, alpha=2.0, c0=c0, c2=c2, delta=delta, N_exp=(2 * d + 1) / 4)

    @classmethod
    def landau_model(cls, d: int, c0: float, delta: float = 0.0, t: float = 0.0) -> PhaseParams:
        return cls(t=t, alpha=1.0, c0=c0, delta=delta, N_exp=float(d + 1))

    def check_homogeneous(self, d: int) -> None:
        if not self.N_exp > d / 4 + 1:
            raise ConfigurationError(f"need N > d/4 + 1 = {d / 4 + 1}, got {self.N_exp}")
        if self.delta and not self.delta < 1 / self.N_exp:
            raise ConfigurationError(f"need delta < 1/N = {1 / self.N_exp}, got {self.delta}")

    def check_fokker_planck(self, d: int) -> None:
        if not math.isclose(self.N_exp, (2 * d + 1) / 4):
            raise ConfigurationError(f"need N = (2d+1)/4 = {(2 * d + 1) / 4}, got {self.N_exp}")
        if self.delta and not self.delta < 1 / (4 * self.N_exp**2):
            raise ConfigurationError(f"need delta < 1/(4N^2) = {1 / (4 * self.N_exp**2)}, got {self.delta}")

    def check_landau_model(self, d: int) -> None:
        if not math.isclose(self.N_exp, d + 1):
            raise ConfigurationError(f"need N = d + 1 = {d + 1}, got {self.N_exp}")
        if self.delta and not self.delta <= 1 / self.N_exp:
            raise ConfigurationError(f"need delta <= 1/N = {1 / self.N_exp}, got {self.delta}")


# -- phase integrals and exact solutions -------------------------------------


def _abs_path_integral(t, xi, eta) -> np.ndarray:
    """``int_0^t |xi - s eta| ds`` in closed form, with a quadrature branch for small ``|eta|``.

    Writing ``|xi - s eta|^2 = a (s - s*)^2 + m^2`` the antiderivative is
    ``(sqrt(a)/2) [u sqrt(u^2+k^2) + k^2 asinh(u/k)]`` with ``u = s - s*``,
    ``k = m / sqrt(a)``.  When ``t|eta| <= |xi|/2`` the two antiderivative
    values nearly cancel; the integrand is then analytic and bounded away from
    zero, so a 24-point Gauss rule is exact to rounding.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    t = np.asarray(t, dtype=float)
    a = _norm2(eta)
    b = _dot(xi, eta)
    c = _norm2(xi)
    a, b, c, t = np.broadcast_arrays(a, b, c, t)
    rxi = np.sqrt(c)
    reta = np.sqrt(a)
    smooth = t * reta <= 0.5 * rxi

    out = np.empty(a.shape)
    # quadrature branch (also covers eta = 0)
    x, w = gauss_legendre(24)
    s = t[..., None] * x
    q = c[..., None] - 2.0 * b[..., None] * s + a[..., None] * s * s
    quad = t * (np.sqrt(np.maximum(q, 0.0)) @ w)
    out[...] = quad

    closed = ~smooth
    if np.any(closed):
        ac, bc, tc = a[closed], b[closed], t[closed]
        s_star = bc / ac
        perp = xi - (_dot(xi, eta) / np.where(_norm2(eta) > 0, _norm2(eta), 1.0))[..., None] * eta
        m2 = np.broadcast_to(_norm2(perp), a.shape)[closed]
        k2 = m2 / ac
        k = np.sqrt(k2)

        def anti(u):
            r = np.sqrt(u * u + k2)
            with np.errstate(divide="ignore", invalid="ignore"):
                logpart = np.where(k > 0, k2 * np.arcsinh(u / np.where(k > 0, k, 1.0)), 0.0)
            return 0.5 * (u * r + logpart)

        out[closed] = np.sqrt(ac) * (anti(tc - s_star) - anti(-s_star))
    return out


def kolmogorov_phase(t, eta, xi, alpha: float) -> np.ndarray:
    """``int_0^t |xi + s eta|^(2 alpha) ds``; closed form when ``2 alpha`` is 1 or 2."""
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    p = 2.0 * alpha
    if p == 2.0:
        t = np.asarray(t, dtype=float)
        return t * _norm2(xi) + t**2 * _dot(xi, eta) + t**3 * _norm2(eta) / 3.0
    if p == 1.0:
        return _abs_path_integral(t, xi, -np.asarray(eta, dtype=float))
    return phase_integral(t, xi, eta, p, sign=1.0)


def kolmogorov_hat(t, eta, xi, alpha: float, f0hat) -> np.ndarray:
    """Exact transform of ``u_t + v.grad_x u + (-Lap_v)^alpha u = 0``.

    ``u_hat(t, eta, xi) = exp(-int_0^t |xi + s eta|^(2 alpha) ds) u0_hat(eta, xi + t eta)``.
    """
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    phase = kolmogorov_phase(t, eta, xi, alpha)
    shifted = xi + np.asarray(t, dtype=float)[..., None] * eta if np.ndim(t) else xi + t * eta
    damp = np.where(phase > _EXP_CLAMP, 0.0, np.exp(-np.minimum(phase, _EXP_CLAMP)))
    return damp * f0hat(eta, shifted)


def _tail_cubic(t: np.ndarray) -> np.ndarray:
    """``t - X - X^2/2 = int_0^t (1 - e^{-s})^2 ds`` with ``X = 1 - e^{-t}``, cancellation free."""
    t = np.asarray(t, dtype=float)
    X = -np.expm1(-t)
    direct = t - X - 0.5 * X * X
    small = t < 1.0
    if np.any(small):
        ts = np.where(small, t, 0.0)
        # sum_{k>=2} (-1)^k (2^k - 2) t^(k+1) / (k+1)!
        series = np.zeros_like(ts)
        term_pow = ts**3 / 6.0  # t^(k+1)/(k+1)! at k = 2
        for k in range(2, 32):
            series = series + (-1) ** k * (2.0**k - 2.0) * term_pow
            term_pow = term_pow * ts / (k + 2)
        direct = np.where(small, series, direct)
    return direct


def fp_phase(t, xi, eta) -> np.ndarray:
    """``int_0^t |xi e^{-tau} + eta (1 - e^{-tau})|^2 dtau`` in closed form.

    With ``X = 1 - e^{-t}`` this is
    ``(X - X^2/2)|xi|^2 + X^2 xi.eta + (t - X - X^2/2)|eta|^2``.
    """
    t = np.asarray(t, dtype=float)
    X = -np.expm1(-t)
    return (X - 0.5 * X * X) * _norm2(xi) + X * X * _dot(xi, eta) + _tail_cubic(t) * _norm2(eta)


def fp_phase_quadrature(t, xi, eta, panels: int = 16, order: int = 16) -> np.ndarray:
    """Composite Gauss-Legendre evaluation of the same integral (cross-check)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    t = np.asarray(t, dtype=float)
    x, w = gauss_legendre(order)
    u = ((np.arange(panels)[:, None] + x[None, :]) / panels).ravel()
    wts = np.tile(w, panels) / panels
    tau = t[..., None] * u
    e = np.exp(-tau)
    a, b, c = _norm2(xi), _dot(xi, eta), _norm2(eta)
    integrand = (
        a[..., None] * e * e
        + 2.0 * b[..., None] * e * (1.0 - e)
        + c[..., None] * (1.0 - e) ** 2
    )
    return t * (integrand @ wts)


def fp_characteristic_origin(t, eta, xi) -> np.ndarray:
    """Velocity frequency at time 0 on the characteristic ending at ``(eta, xi)``."""
    t = np.asarray(t, dtype=float)[..., None]
    return np.asarray(xi, dtype=float) * np.exp(-t) - np.asarray(eta, dtype=float) * np.expm1(-t)


def fp_exact_hat(t, eta, xi, f0hat) -> np.ndarray:
    """Exact transform of ``f_t + v.grad_x f = div_v(grad_v f + v f)``.

    ``f_hat(t, eta, xi) = f0_hat(eta, xi e^{-t} + eta (1 - e^{-t})) exp(-fp_phase(t, xi, eta))``,
    i.e. the initial datum is read at the foot of the characteristic
    ``d xi/ds = xi - eta``.
    """
    phase = fp_phase(t, xi, eta)
    damp = np.where(phase > _EXP_CLAMP, 0.0, np.exp(-np.minimum(phase, _EXP_CLAMP)))
    return damp * f0hat(np.asarray(eta, dtype=float), fp_characteristic_origin(t, eta, xi))


# -- weights -------------------------------------------------------------------


def _log_regularized(E, delta: float, N: float, inner) -> np.ndarray:
    """``log[e^E / ((1 + delta e^E)(1 + delta * inner)^N)]`` without overflow."""
    E = np.asarray(E, dtype=float)
    if delta == 0.0:
        return E
    return E - np.logaddexp(0.0, math.log(delta) + E) - N * np.log1p(delta * np.asarray(inner, dtype=float))


def log_gdelta_homogeneous(t, xi, p: PhaseParams) -> np.ndarray:
    E = p.c0 * np.asarray(t, dtype=float) * _norm2(xi)
    return _log_regularized(E, p.delta, p.N_exp, E)


def gdelta_homogeneous(t, xi, p: PhaseParams) -> np.ndarray:
    """``G_delta(t, |xi|) = e^E / ((1 + delta e^E)(1 + delta E)^N)`` with ``E = c0 t |xi|^2``."""
    return np.exp(log_gdelta_homogeneous(t, xi, p))


def psi_weight(t, eta, xi, c0: float) -> np.ndarray:
    """``Psi = c0 int_0^t |xi - s eta| ds``."""
    return c0 * _abs_path_integral(t, xi, eta)


def phi_weight(t, eta, xi, p: PhaseParams) -> np.ndarray:
    """``phi = c0 (int_0^t |xi - s eta|^2 ds - (c2/2) t^3 |eta|^2)``."""
    t = np.asarray(t, dtype=float)
    integral = t * _norm2(xi) - t**2 * _dot(xi, eta) + t**3 * _norm2(eta) / 3.0
    return p.c0 * (integral - 0.5 * p.c2 * t**3 * _norm2(eta))


def log_fdelta(t, eta, xi, p: PhaseParams) -> np.ndarray:
    psi = psi_weight(t, eta, xi, p.c0)
    return _log_regularized(psi, p.delta, p.N_exp, psi)


def fdelta_multiplier(t, eta, xi, p: PhaseParams) -> np.ndarray:
    """``F_delta = e^Psi / ((1 + delta e^Psi)(1 + delta Psi)^N)``."""
    return np.exp(log_fdelta(t, eta, xi, p))


def log_gdelta_fp(t, eta, xi, p: PhaseParams) -> np.ndarray:
    """Log of the Fokker-Planck multiplier built on ``phi``.

    ``e^phi / ((1 + delta e^phi)(1 + delta (|eta|^2 + |xi|^2))^N)``, in the
    sheared variables of ``w(t, eta, xi) = f_hat(t, eta, xi - t eta)``.
    """
    phi = phi_weight(t, eta, xi, p)
    return _log_regularized(phi, p.delta, p.N_exp, _norm2(eta) + _norm2(xi))


@dataclass(frozen=True)
class MultiplierSpec:
    """A time-dependent Fourier weight, evaluated in log space.

    Kinds
    -----
    ``"one"``
        The identity.
    ``"power"``
        ``exp(c0 (t^a |xi|^p + t^b |eta|^q))`` with ``(p, a, q, b)`` given by
        ``v_power, v_time_power, x_power, x_time_power``.
    ``"gdelta_h"``
        Homogeneous ``G_delta`` with ``E = c0 t |xi|^2``.
    ``"gdelta_fp"``
        ``phi``-based multiplier of the Fokker-Planck estimate.
    ``"fdelta"``
        ``Psi``-based ``F_delta`` of the linear Landau model.

    ``shear=True`` evaluates the weight at ``(eta, xi + t eta)``: the weight is
    defined on the transport-free unknown and applied to lab-frame coefficients.
    """

    kind: str = "one"
    c0: float = 0.0
    delta: float = 0.0
    N_exp: float = 1.0
    v_power: float = 2.0
    v_time_power: float = 1.0
    x_power: float = 2.0
    x_time_power: float = 3.0
    c2: float = C2
    shear: bool = False
    label: str = field(default="", compare=False)

    # constructors -----------------------------------------------------------
    @classmethod
    def one(cls) -> MultiplierSpec:
        return cls(label="identity")

    @classmethod
    def power(cls, c, v_power=2.0, v_time_power=1.0, x_power=2.0, x_time_power=3.0, label="") -> MultiplierSpec:
        return cls("power", c0=c, v_power=v_power, v_time_power=v_time_power, x_power=x_power,
                   x_time_power=x_time_power, label=label or f"power(c={c:g})")

    @classmethod
    def heat(cls, c) -> MultiplierSpec:
        """``exp(c t |xi|^2)``."""
        return cls.power(c, 2.0, 1.0, label=f"exp({c:g} t|xi|^2)")

    @classmethod
    def fp_bound(cls, c_tilde) -> MultiplierSpec:
        """``exp(c (t |xi|^2 + t^3 |eta|^2))``."""
        return cls.power(c_tilde, 2.0, 1.0, 2.0, 3.0, label=f"exp({c_tilde:g}(t|xi|^2+t^3|eta|^2))")

    @classmethod
    def analytic(cls, c) -> MultiplierSpec:
        """``exp(c (t |xi| + t^2 |eta|))``, Gevrey-1 probe."""
        return cls.power(c, 1.0, 1.0, 1.0, 2.0, label=f"exp({c:g}(t|xi|+t^2|eta|))")

    @classmethod
    def gevrey_half(cls, c) -> MultiplierSpec:
        """``exp(c (t |xi|^2 + t^2 |eta|^2))``, Gevrey-1/2 probe."""
        return cls.power(c, 2.0, 1.0, 2.0, 2.0, label=f"exp({c:g}(t|xi|^2+t^2|eta|^2))")

    @classmethod
    def gdelta_h(cls, p: PhaseParams) -> MultiplierSpec:
        return cls("gdelta_h", c0=p.c0, delta=p.delta, N_exp=p.N_exp, label=f"G_delta(c0={p.c0:g}, delta={p.delta:g})")

    @classmethod
    def gdelta_fp(cls, p: PhaseParams) -> MultiplierSpec:
        return cls("gdelta_fp", c0=p.c0, delta=p.delta, N_exp=p.N_exp, c2=p.c2, shear=True,
                   label=f"G_delta^phi(c0={p.c0:g}, delta={p.delta:g})")

    @classmethod
    def fdelta(cls, p: PhaseParams) -> MultiplierSpec:
        return cls("fdelta", c0=p.c0, delta=p.delta, N_exp=p.N_exp, shear=True,
                   label=f"F_delta(c0={p.c0:g}, delta={p.delta:g})")

    def with_c(self, c: float) -> MultiplierSpec:
        """Copy with a new strength ``c0``."""
        return MultiplierSpec(self.kind, c, self.delta, self.N_exp, self.v_power, self.v_time_power,
                              self.x_power, self.x_time_power, self.c2, self.shear, self.label)

    # evaluation -------------------------------------------------------------
    def log_at(self, t: float, eta, xi) -> np.ndarray:
        t = float(t)
        eta = np.asarray(eta, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if self.shear and eta.shape[-1]:
            xi = xi + t * eta
        if self.kind == "one":
            return np.zeros(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))
        if self.kind == "power":
            out = self.c0 * t**self.v_time_power * _norm2(xi) ** (self.v_power / 2.0)
            if eta.shape[-1]:
                out = out + self.c0 * t**self.x_time_power * _norm2(eta) ** (self.x_power / 2.0)
            return out
        p = PhaseParams(t=t, c0=self.c0, c2=self.c2, delta=self.delta, N_exp=self.N_exp) if self.c0 > 0 else None
        if p is None:
            return np.zeros(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]))
        if self.kind == "gdelta_h":
            return log_gdelta_homogeneous(t, xi, p)
        if self.kind == "gdelta_fp":
            return log_gdelta_fp(t, eta, xi, p)
        if self.kind == "fdelta":
            return log_fdelta(t, eta, xi, p)
        raise ConfigurationError(f"unknown multiplier kind {self.kind!r}")

    def log_values(self, grid, t: float | None) -> np.ndarray:
        return self.log_at(0.0 if t is None else t, grid.eta, grid.xi)

    def __call__(self, t: float, eta, xi) -> np.ndarray:
        return np.exp(self.log_at(t, eta, xi))
