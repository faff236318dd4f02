"""Vectorized Gauss-Legendre rules for the phase integrals ``int_0^t |xi + s eta|^p ds``.

The integrand is smooth except where ``xi + s eta`` vanishes, which can only
happen at the minimizer ``s* = -(xi.eta)/|eta|^2``.  Each integral is split at
``s*`` and both halves are covered by panels graded geometrically toward
``s*``, which resolves the algebraic endpoint behaviour ``|s - s*|^p`` as well
as near-singular (almost parallel) configurations.  Two rule orders are
compared per point; disagreement beyond tolerance raises
:class:`~kinsmooth.errors.QuadratureError`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_CHUNK = 4096


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _graded_panels(levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Panel endpoints on ``[0, 1]`` graded toward 0 (as offsets from the singular end)."""
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    return edges[:-1], edges[1:]


def _graded_rule(order: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule on ``[0, 1]``: offsets from the singular endpoint and weights."""
    lo, hi = _graded_panels(levels)
    x, w = gauss_legendre(order)
    width = (hi - lo)[:, None]
    nodes = (lo[:, None] + width * x[None, :]).ravel()
    weights = (width * w[None, :]).ravel()
    return nodes, weights


def phase_integral(
    t,
    xi,
    eta,
    power: float,
    sign: float = 1.0,
    rtol: float = 1e-12,
    order: int = 16,
    levels: int = 40,
) -> np.ndarray:
    """``int_0^t |xi + sign * s * eta|^power ds`` for component-last arrays.

    Parameters
    ----------
    t : float or ndarray
        Upper limits (>= 0), broadcast against the leading axes of ``xi``/``eta``.
    xi, eta : ndarray
        Vectors with components on the last axis.
    power : float
        Exponent (> 0).
    sign : float
        +1 or -1.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a = np.sum(eta * eta, axis=-1)
    b = sign * np.sum(xi * eta, axis=-1)
    c = np.sum(xi * xi, axis=-1)
    t = np.asarray(t, dtype=float)
    a, b, c, t = np.broadcast_arrays(a, b, c, t)
    if power == 2.0:
        return c * t + b * t**2 + a * t**3 / 3.0

    # squared distance from the origin to the line {xi + s eta}, taken from the
    # vectors so that nearly parallel pairs do not cancel
    eta2 = np.sum(eta * eta, axis=-1)
    safe = np.where(eta2 > 0, eta2, 1.0)
    perp = xi - (np.sum(xi * eta, axis=-1) / safe)[..., None] * eta
    m2 = np.where(eta2 > 0, np.sum(perp * perp, axis=-1), np.sum(xi * xi, axis=-1))
    shape = a.shape
    a, b, t, m2 = (np.ravel(z) for z in (a, b, t, np.broadcast_to(m2, shape)))
    out = np.empty(a.shape)
    hi_rule = _graded_rule(order, levels)
    lo_rule = _graded_rule(order // 2, levels)
    worst = 0.0
    failed = 0
    for start in range(0, a.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        args = (a[sl], b[sl], m2[sl], t[sl], power)
        res_hi, res_lo = (_split_integral(*args, rule) for rule in (hi_rule, lo_rule))
        err = np.abs(res_hi - res_lo)
        scale = np.maximum(np.abs(res_hi), np.finfo(float).tiny)
        bad = err > rtol * scale + 1e-300
        # the low-order rule is only an error estimate; accept if hi is self-consistent
        if np.any(bad):
            refined = _split_integral(*args, _graded_rule(2 * order, levels + 10))
            err2 = np.abs(refined - res_hi)
            still = bad & (err2 > 10 * rtol * scale)
            failed += int(np.count_nonzero(still))
            if np.any(still):
                worst = max(worst, float(np.max(err2[still] / scale[still])))
            res_hi = np.where(bad, refined, res_hi)
        out[sl] = res_hi
    if failed:
        raise QuadratureError(
            f"phase integral did not converge at {failed} points (worst relative error {worst:.2e})",
            max_error=worst,
            n_failed=failed,
        )
    return out.reshape(shape)


def _split_integral(a, b, m2, t, power, rule) -> np.ndarray:
    """Both halves around the clipped minimizer; ``m2`` is the squared distance to the line."""
    nodes, weights = rule
    with np.errstate(invalid="ignore", divide="ignore"):
        s0 = np.where(a > 0, -b / np.where(a > 0, a, 1.0), 0.0)
    s_star = np.clip(s0, 0.0, t)

    def piece(length, direction):
        # s = s_star + direction * length * node
        s = s_star[:, None] + direction * length[:, None] * nodes[None, :]
        q = a[:, None] * (s - s0[:, None]) ** 2 + m2[:, None]
        vals = q ** (power / 2.0)
        return length * (vals @ weights)

    return piece(t - s_star, 1.0) + piece(s_star, -1.0)
