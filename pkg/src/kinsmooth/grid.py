"""Grid geometry, the discrete Fourier transform contract, multipliers and moments.

Velocity axes live on the periodized box ``[-L, L)^d`` with spacing ``h = 2L/n``
and dual lattice ``xi_k = pi k / L``.  Spatial axes live on a torus of period
``P`` (default ``2 pi``) with dual lattice ``eta_k = 2 pi k / P``.  Arrays are
indexed ``(x_1, ..., x_dx, v_1, ..., v_dv)``; spectral arrays use FFT ordering
``k = 0, 1, ..., n/2 - 1, -n/2, ..., -1`` on every axis.

Transform normalization
-----------------------
Coefficients approximate the unitary continuous transform

    f_hat(eta, xi) = (2 pi)^(-D/2) int f(x, v) exp(-i (x.eta + v.xi)) dx dv,

with ``D = dx + dv``, by the rectangle rule::

    coeffs[k] = (2 pi)^(-D/2) * h_x^dx * h_v^dv * (-1)^(sum of v-axis k) * DFT[f][k]

The sign factor accounts for the velocity origin sitting at ``-L``.  With this
constant Parseval is an exact identity of the discrete sums::

    h_x^dx h_v^dv sum |f|^2 = (2 pi / P)^dx (pi / L)^dv sum |coeffs|^2
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.special import logsumexp

from .errors import ContractError, DegenerateStateError, DomainTooSmallError, MultiplierOverflowError

__all__ = [
    "Grid",
    "Field",
    "SpectralField",
    "MomentSet",
    "fft_workers",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "multiplier_values",
    "log_multiplier_values",
    "moments",
    "normalize",
    "integrate_x",
    "l2_norm",
    "weighted_norm",
    "log_weighted_norm",
    "tail_fraction",
    "is_conjugate_symmetric",
]


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``KINSMOOTH_THREADS``."""
    cap = os.environ.get("KINSMOOTH_THREADS")
    ncpu = os.cpu_count() or 1
    if cap:
        return max(1, min(int(cap), ncpu))
    return ncpu


@dataclass(frozen=True)
class Grid:
    """Uniform periodic phase-space grid and its dual frequency lattice.

    Parameters
    ----------
    dim_v : int
        Velocity dimension (>= 1).
    n : int
        Points per axis, a power of two.
    half_width : float
        Velocity box half width ``L``.
    dim_x : int
        Spatial dimension, 0 for homogeneous problems.
    x_period : float
        Period of the spatial torus.
    max_points : int
        Memory budget on the total point count.
    """

    dim_v: int
    n: int
    half_width: float = 12.0
    dim_x: int = 0
    x_period: float = 2.0 * math.pi
    max_points: int = 1 << 24

    def __post_init__(self):
        if self.dim_v < 1 or self.dim_x < 0:
            raise ContractError(f"need dim_v >= 1 and dim_x >= 0, got {self.dim_v}, {self.dim_x}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ContractError(f"n_per_axis must be a power of two >= 2, got {self.n}")
        if not (self.half_width > 0 and self.x_period > 0):
            raise ContractError("half_width and x_period must be positive")
        if self.n**self.ndim > self.max_points:
            raise ContractError(
                f"{self.n}^{self.ndim} points exceed the memory budget of {self.max_points}"
            )

    # -- geometry -----------------------------------------------------------
    @property
    def ndim(self) -> int:
        return self.dim_x + self.dim_v

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.ndim

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.dim_x))

    @property
    def v_axes(self) -> tuple[int, ...]:
        return tuple(range(self.dim_x, self.ndim))

    @property
    def h_v(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def h_x(self) -> float:
        return self.x_period / self.n

    @property
    def cell_volume(self) -> float:
        return self.h_v**self.dim_v * self.h_x**self.dim_x

    @property
    def dual_cell_volume(self) -> float:
        return (math.pi / self.half_width) ** self.dim_v * (2.0 * math.pi / self.x_period) ** self.dim_x

    @cached_property
    def v_nodes(self) -> np.ndarray:
        return -self.half_width + self.h_v * np.arange(self.n)

    @cached_property
    def x_nodes(self) -> np.ndarray:
        return self.h_x * np.arange(self.n)

    @cached_property
    def k_int(self) -> np.ndarray:
        """Integer wavenumbers in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)

    @cached_property
    def xi_nodes(self) -> np.ndarray:
        return math.pi * self.k_int / self.half_width

    @cached_property
    def eta_nodes(self) -> np.ndarray:
        return 2.0 * math.pi * self.k_int / self.x_period

    def _along(self, arr: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = self.n
        return arr.reshape(shape)

    @cached_property
    def v_mesh(self) -> tuple[np.ndarray, ...]:
        """Broadcastable velocity coordinates, one array per velocity axis."""
        return tuple(self._along(self.v_nodes, ax) for ax in self.v_axes)

    @cached_property
    def x_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(self._along(self.x_nodes, ax) for ax in self.x_axes)

    @cached_property
    def xi_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(self._along(self.xi_nodes, ax) for ax in self.v_axes)

    @cached_property
    def eta_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(self._along(self.eta_nodes, ax) for ax in self.x_axes)

    @cached_property
    def xi(self) -> np.ndarray:
        """Velocity frequencies, shape ``grid.shape + (dim_v,)``."""
        return np.stack(np.broadcast_arrays(*self.xi_mesh, np.empty(self.shape))[:-1], axis=-1)

    @cached_property
    def eta(self) -> np.ndarray:
        """Spatial frequencies, shape ``grid.shape + (dim_x,)``."""
        if self.dim_x == 0:
            return np.zeros(self.shape + (0,))
        return np.stack(np.broadcast_arrays(*self.eta_mesh, np.empty(self.shape))[:-1], axis=-1)

    @cached_property
    def transform_factor(self) -> np.ndarray:
        """Broadcastable factor mapping the raw DFT to transform coefficients."""
        sign = np.ones([1] * self.ndim)
        for ax in self.v_axes:
            sign = sign * self._along(np.where(self.k_int % 2 == 0, 1.0, -1.0), ax)
        return (2.0 * math.pi) ** (-self.ndim / 2.0) * self.cell_volume * sign

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on the velocity axes (True = keep)."""
        keep = np.ones([1] * self.ndim, dtype=bool)
        cut = self.n / 3.0
        for ax in self.v_axes:
            keep = keep & self._along(np.abs(self.k_int) < cut, ax)
        return keep

    def core_mask(self, band: float = 2.0 / 3.0, axes: str = "all") -> np.ndarray:
        """Modes with ``|k| < band * n/2`` on every selected axis."""
        sel = {"all": range(self.ndim), "v": self.v_axes, "x": self.x_axes}[axes]
        keep = np.ones([1] * self.ndim, dtype=bool)
        for ax in sel:
            keep = keep & self._along(np.abs(self.k_int) < band * self.n / 2, ax)
        return np.broadcast_to(keep, self.shape)

    def velocity_grid(self) -> Grid:
        """The homogeneous grid carrying only this grid's velocity axes."""
        return Grid(self.dim_v, self.n, self.half_width, 0, self.x_period, self.max_points)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid's physical points."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ContractError(f"values shape {vals.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ContractError("field values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex transform coefficients on a grid's frequency lattice (FFT order)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ContractError(f"coeffs shape {c.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class MomentSet:
    mass: float
    momentum: np.ndarray
    energy_T0: float
    directional_T: np.ndarray
    C1: float
    second_moment: np.ndarray = field(repr=False)

    @property
    def mean_velocity(self) -> np.ndarray:
        return self.momentum / self.mass

    @property
    def covariance(self) -> np.ndarray:
        """Mass-weighted central second moment ``int f (v-u)(v-u)^T``."""
        u = self.mean_velocity
        return self.second_moment - self.mass * np.outer(u, u)


def forward_transform(f: Field) -> SpectralField:
    g = f.grid
    coeffs = sfft.fftn(f.values, workers=fft_workers()) * g.transform_factor
    return SpectralField(g, coeffs)


def inverse_transform(F: SpectralField, real: bool = True):
    """Inverse of :func:`forward_transform`.

    Returns a :class:`Field` (real part) when ``real`` is true, else the raw
    complex array.
    """
    g = F.grid
    vals = sfft.ifftn(F.coeffs / g.transform_factor, workers=fft_workers())
    if real:
        return Field(g, vals.real)
    return vals


def is_conjugate_symmetric(F: SpectralField, rtol: float = 1e-12) -> bool:
    c = F.coeffs
    axes = tuple(range(c.ndim))
    mirrored = np.roll(np.flip(c, axis=axes), 1, axis=axes)
    scale = np.max(np.abs(c)) or 1.0
    return bool(np.max(np.abs(mirrored - np.conj(c))) <= rtol * scale)


def _is_log_weight(m) -> bool:
    return hasattr(m, "log_values")


def log_multiplier_values(grid: Grid, m, t: float | None = None) -> np.ndarray:
    """``log|m|`` on the lattice, for plain multipliers or log-space weights."""
    if _is_log_weight(m):
        return np.broadcast_to(np.asarray(m.log_values(grid, t), dtype=float), grid.shape)
    vals = multiplier_values(grid, m, t)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(vals))


def multiplier_values(grid: Grid, m, t: float | None = None) -> np.ndarray:
    """Evaluate a multiplier on the lattice.

    ``m`` may be a scalar, an array broadcastable to the grid, a callable
    ``m(eta, xi)`` taking component-last frequency arrays, or an object with a
    ``log_values(grid, t)`` method.
    """
    if _is_log_weight(m):
        with np.errstate(over="ignore"):
            vals = np.exp(m.log_values(grid, t))
    elif callable(m):
        vals = m(grid.eta, grid.xi)
    else:
        vals = m
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.shape)
    if not np.all(np.isfinite(vals)):
        raise MultiplierOverflowError("multiplier is not finite on the lattice; use a delta-regularized weight")
    return vals


def apply_multiplier(F: SpectralField, m, t: float | None = None) -> SpectralField:
    return SpectralField(F.grid, F.coeffs * multiplier_values(F.grid, m, t))


def _log_abs_coeffs(F: SpectralField, noise_floor: float | None) -> np.ndarray:
    mag = np.abs(F.coeffs)
    if noise_floor is not None:
        mag = np.where(mag >= noise_floor * mag.max(), mag, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(mag)


def log_weighted_norm(F: SpectralField, m=1.0, t: float | None = None, noise_floor: float | None = None) -> float:
    """Natural log of the weighted L2 norm, accumulated in log space.

    ``noise_floor`` (relative to the largest coefficient) drops roundoff-level
    coefficients that would otherwise be amplified by large weights.
    """
    s = log_multiplier_values(F.grid, m, t) + _log_abs_coeffs(F, noise_floor)
    if not np.any(np.isfinite(s)):
        return -math.inf
    return 0.5 * (math.log(F.grid.dual_cell_volume) + float(logsumexp(2.0 * s)))


def weighted_norm(F: SpectralField, m=1.0, t: float | None = None, noise_floor: float | None = None) -> float:
    """L2 norm of the function with transform ``m * F``."""
    lg = log_weighted_norm(F, m, t, noise_floor)
    if lg > 709.0:
        raise MultiplierOverflowError(f"weighted norm exp({lg:.1f}) overflows double precision")
    return math.exp(lg)


def tail_fraction(
    F: SpectralField,
    m=1.0,
    t: float | None = None,
    band: float = 2.0 / 3.0,
    axes: str = "all",
    noise_floor: float | None = None,
) -> float:
    """Share of the weighted squared norm carried by modes outside the core band."""
    s = 2.0 * (log_multiplier_values(F.grid, m, t) + _log_abs_coeffs(F, noise_floor))
    core = F.grid.core_mask(band, axes)
    total = logsumexp(s)
    if not np.isfinite(total):
        return 0.0
    tail = s[~core]
    if tail.size == 0 or not np.any(np.isfinite(tail)):
        return 0.0
    return float(math.exp(logsumexp(tail) - total))


def l2_norm(f: Field) -> float:
    return math.sqrt(f.grid.cell_volume * float(np.sum(f.values**2)))


def integrate_x(f: Field) -> Field:
    """Integrate out the spatial axes, leaving a velocity-only field."""
    g = f.grid
    if g.dim_x == 0:
        return f
    vals = f.values.sum(axis=g.x_axes) * g.h_x**g.dim_x
    return Field(g.velocity_grid(), vals)


def moments(f: Field) -> MomentSet:
    g = f.grid
    if g.dim_x != 0:
        raise ContractError("moments expects a velocity-only field; integrate out x first")
    w = g.cell_volume
    vals = f.values
    mass = w * float(vals.sum())
    if not mass > np.finfo(float).eps:
        raise DegenerateStateError(f"mass {mass:.3e} is not positive")
    vs = g.v_mesh
    d = g.dim_v
    # reduce along axes once per component to keep memory flat
    momentum = np.array([w * float(np.sum(vs[j] * vals)) for j in range(d)])
    second = np.empty((d, d))
    for j in range(d):
        vjf = vs[j] * vals
        for k in range(j, d):
            second[j, k] = second[k, j] = w * float(np.sum(vs[k] * vjf))
    directional = np.diag(second).copy()
    T0 = float(directional.sum())
    return MomentSet(
        mass=mass,
        momentum=momentum,
        energy_T0=T0,
        directional_T=directional,
        C1=float(np.min(T0 - directional)),
        second_moment=second,
    )


def normalize(f: Field) -> Field:
    """Rescale to unit mass and translate to zero mean velocity.

    The translation is a spectral (band-limited) interpolation shift; energy is
    left as is.
    """
    g = f.grid
    m = moments(f)
    u = m.mean_velocity
    if np.any(np.abs(u) > g.half_width / 2):
        raise DomainTooSmallError(f"mean velocity {u} needs a shift beyond L/2 = {g.half_width / 2}")
    F = forward_transform(Field(g, f.values / m.mass))
    phase = np.exp(1j * np.tensordot(g.xi, u, axes=([-1], [0])))
    return inverse_transform(SpectralField(g, F.coeffs * phase))
