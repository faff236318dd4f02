"""Initial data with known transforms.

A preset is a product ``g(x) V(v)`` of a spatial modulation (mean one over
the torus) and a velocity profile, divided by the torus volume so the total
mass equals the velocity mass.  Every preset carries its transform in the
package convention, so exact solutions can be evaluated without sampling.

Preset strings
--------------
``maxwellian``                  unit-variance Gaussian
``maxwellian(T)``               isotropic Gaussian with per-axis variance ``T``
``aniso-gaussian(T1,...,Td)``   centered Gaussian with variances ``T_j``
``gaussian-mix``                ``(N(e1, I/2) + N(-e1, I/2)) / 2``
``cosine-modulated(A)``         unit Maxwellian times ``1 + A cos x_1`` (A = 1 default)
``poisson-modulated(r)``        unit Maxwellian times a Poisson kernel in each x axis
``expr:<expression>``           numpy expression in ``v1..vd``, ``x1..xd`` (no transform)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .grid import Field, Grid, SpectralField, forward_transform

__all__ = [
    "InitialData",
    "gaussian",
    "gaussian_mixture",
    "modulated",
    "parse_preset",
    "random_phase_spectrum",
]


@dataclass(frozen=True)
class VelocityProfile:
    """Weighted sum of axis-aligned Gaussians ``sum_i w_i N(m_i, diag(var_i))``."""

    weights: tuple[float, ...]
    means: tuple[tuple[float, ...], ...]
    variances: tuple[tuple[float, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.means[0])

    def values(self, vs: tuple[np.ndarray, ...]) -> np.ndarray:
        out = 0.0
        for w, m, var in zip(self.weights, self.means, self.variances):
            q = sum((v - mj) ** 2 / vj for v, mj, vj in zip(vs, m, var))
            out = out + w * np.exp(-0.5 * q) / math.sqrt((2 * math.pi) ** self.dim * math.prod(var))
        return out

    def hat(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = 0.0
        for w, m, var in zip(self.weights, self.means, self.variances):
            arg = -1j * (xi @ np.asarray(m)) - 0.5 * ((xi * xi) @ np.asarray(var))
            out = out + w * np.exp(arg)
        return (2 * math.pi) ** (-self.dim / 2) * out


@dataclass(frozen=True)
class XModulation:
    """Spatial factor ``g(x)`` with unit mean over the torus, by kind."""

    kind: str = "uniform"  # uniform | cosine | poisson
    amplitude: float = 1.0
    radius: float = 0.5

    def values(self, xs: tuple[np.ndarray, ...], period: float) -> np.ndarray:
        if self.kind == "uniform" or not xs:
            return 1.0
        k = 2 * math.pi / period
        if self.kind == "cosine":
            return 1.0 + self.amplitude * np.cos(k * xs[0])
        r = self.radius
        out = 1.0
        for x in xs:
            out = out * (1 - r * r) / (1 - 2 * r * np.cos(k * x) + r * r)
        return out

    def integral(self, eta: np.ndarray, period: float) -> np.ndarray:
        """``int_torus g(x) exp(-i x.eta) dx`` on the dual lattice."""
        eta = np.asarray(eta, dtype=float)
        dx = eta.shape[-1]
        vol = period**dx
        k = np.rint(eta * period / (2 * math.pi))
        if self.kind == "uniform":
            return vol * np.all(k == 0, axis=-1)
        if self.kind == "cosine":
            zero = np.all(k == 0, axis=-1)
            rest = np.all(k[..., 1:] == 0, axis=-1) if dx > 1 else True
            first = rest & (np.abs(k[..., 0]) == 1)
            return vol * (zero + 0.5 * self.amplitude * first)
        return vol * self.radius ** np.sum(np.abs(k), axis=-1)


@dataclass(frozen=True)
class InitialData:
    """``f0(x, v) = g(x) V(v) / P^dx`` with transform ``f0_hat(eta, xi)``."""

    name: str
    profile: VelocityProfile | None
    modulation: XModulation = XModulation()
    expression: str | None = None

    def field(self, grid: Grid) -> Field:
        if self.expression is not None:
            return Field(grid, _eval_expression(self.expression, grid))
        if self.profile.dim != grid.dim_v:
            raise ConfigurationError(f"preset {self.name!r} is {self.profile.dim}-d, grid has dim_v={grid.dim_v}")
        vals = self.profile.values(grid.v_mesh) * self.modulation.values(grid.x_mesh, grid.x_period)
        vals = vals / grid.x_period**grid.dim_x
        return Field(grid, np.broadcast_to(vals, grid.shape))

    def hat_function(self, grid: Grid) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        """Transform ``f0_hat(eta, xi)`` on the grid's torus (component-last arguments)."""
        if self.expression is not None:
            raise ConfigurationError("expression data has no closed-form transform")
        dx, period = grid.dim_x, grid.x_period

        def f0hat(eta, xi):
            vh = self.profile.hat(xi)
            if dx == 0:
                return vh
            xpart = (2 * math.pi) ** (-dx / 2) * self.modulation.integral(eta, period) / period**dx
            return xpart * vh

        return f0hat

    def spectral(self, grid: Grid) -> SpectralField:
        """Exact transform sampled on the lattice (sampled transform for expressions)."""
        if self.expression is not None:
            return forward_transform(self.field(grid))
        return SpectralField(grid, self.hat_function(grid)(grid.eta, grid.xi))


def gaussian(dim: int, variances=None, mean=None) -> VelocityProfile:
    var = tuple(float(v) for v in (variances if variances is not None else [1.0] * dim))
    m = tuple(float(v) for v in (mean if mean is not None else [0.0] * dim))
    if len(var) != dim or len(m) != dim or min(var) <= 0:
        raise ConfigurationError(f"need {dim} positive variances, got {var}")
    return VelocityProfile((1.0,), (m,), (var,))


def gaussian_mixture(dim: int, shift: float = 1.0, variance: float = 0.5) -> VelocityProfile:
    e1 = tuple(shift if j == 0 else 0.0 for j in range(dim))
    neg = tuple(-c for c in e1)
    var = (variance,) * dim
    return VelocityProfile((0.5, 0.5), (e1, neg), (var, var))


def modulated(profile: VelocityProfile, modulation: XModulation, name: str = "") -> InitialData:
    return InitialData(name or modulation.kind, profile, modulation)


_PRESET = re.compile(r"^\s*([a-z\-]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_preset(spec: str, dim_v: int, dim_x: int = 0) -> InitialData:
    """Build :class:`InitialData` from a preset string (see module docstring)."""
    if spec.startswith("expr:"):
        return InitialData("expression", None, expression=spec[5:])
    m = _PRESET.match(spec)
    if not m:
        raise ConfigurationError(f"cannot parse initial data {spec!r}")
    name, argstr = m.group(1), m.group(2)
    try:
        args = [float(a) for a in argstr.split(",")] if argstr and argstr.strip() else []
    except ValueError as exc:
        raise ConfigurationError(f"bad preset arguments in {spec!r}") from exc
    if name == "maxwellian":
        T = args[0] if args else 1.0
        return InitialData(spec, gaussian(dim_v, [T] * dim_v))
    if name == "aniso-gaussian":
        if len(args) != dim_v:
            raise ConfigurationError(f"aniso-gaussian needs {dim_v} temperatures, got {len(args)}")
        return InitialData(spec, gaussian(dim_v, args))
    if name == "gaussian-mix":
        return InitialData(spec, gaussian_mixture(dim_v, *args))
    if name == "cosine-modulated":
        if dim_x == 0:
            raise ConfigurationError("cosine-modulated needs a spatial grid")
        A = args[0] if args else 1.0
        if not 0 <= A <= 1:
            raise ConfigurationError(f"amplitude must lie in [0, 1] for positivity, got {A}")
        return InitialData(spec, gaussian(dim_v), XModulation("cosine", amplitude=A))
    if name == "poisson-modulated":
        if dim_x == 0:
            raise ConfigurationError("poisson-modulated needs a spatial grid")
        r = args[0] if args else 0.5
        if not 0 <= r < 1:
            raise ConfigurationError(f"radius must lie in [0, 1), got {r}")
        return InitialData(spec, gaussian(dim_v), XModulation("poisson", radius=r))
    raise ConfigurationError(f"unknown preset {name!r}")


_EXPR_NAMES = {name: getattr(np, name) for name in ("exp", "cos", "sin", "cosh", "sinh", "tanh", "sqrt", "abs", "pi")}


def _eval_expression(expr: str, grid: Grid) -> np.ndarray:
    env = dict(_EXPR_NAMES)
    env.update({f"v{j + 1}": v for j, v in enumerate(grid.v_mesh)})
    env.update({f"x{j + 1}": x for j, x in enumerate(grid.x_mesh)})
    try:
        vals = eval(compile(expr, "<initial-data>", "eval"), {"__builtins__": {}}, env)  # noqa: S307
    except Exception as exc:  # any failure is a config problem
        raise ConfigurationError(f"cannot evaluate initial data expression {expr!r}: {exc}") from exc
    return np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy()


def random_phase_spectrum(grid: Grid, seed: int = 0) -> SpectralField:
    """Unit-modulus coefficients with random phases (a rough, real L2 datum)."""
    rng = np.random.default_rng(seed)
    c = np.fft.fftn(rng.standard_normal(grid.shape))
    mag = np.abs(c)
    c = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0)
    return SpectralField(grid, c)
