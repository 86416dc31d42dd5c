"""Weight functions of the product eigenvalue density and the limit laws.

The radial weight of the m-fold product density satisfies a multiplicative
convolution recursion

    w_{k+1}(y) = 2*pi * Integral_0^inf w_k(y/r) * (1 + r^2)^-(n+1) * dr/r

with the closed base case w_1(y) = (1 + y^2)^-(n+1).  With r = exp(u) this is
an additive convolution on the line whose integrand decays exponentially both
ways, so everything here is evaluated in log space: adaptive composite Simpson
on a truncated window, and memoized log-grid tables (monotone cubic in log y)
for recursion depth >= 2.  The module also carries every closed-form limiting
density/CDF used by the verification suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "FeasibilityError",
    "QuadratureError",
    "WeightTable",
    "RadiusDensity",
    "eval_weight",
    "weight_table",
    "radius_density",
    "limit_radial_cdf",
    "limit_polar_density",
    "esd_limit_density",
    "limit_complex_density",
    "polar_to_complex",
    "M_MAX",
    "N_MAX",
    "QUAD_TOL",
]

QUAD_TOL = 1e-8
M_MAX = 4
N_MAX = 50

_LOG_2PI = math.log(2.0 * math.pi)
# spacing of the memoized log-grid tables (nat log units)
_TABLE_STEP = math.log(10.0) / 80.0
_ROW_BLOCK = 512


class FeasibilityError(ValueError):
    """Requested (m, n) outside the supported envelope m <= 4, n <= 50."""


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to reach the relative tolerance."""


def _check_feasible(m: int, n: int) -> None:
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= M_MAX):
        raise FeasibilityError(f"m={m} outside 1..{M_MAX}")
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= N_MAX):
        raise FeasibilityError(f"n={n} outside 1..{N_MAX}")


def _support_slack(n: int) -> float:
    # exponential decay rate of both integrand tails is 2(n+1); 41 nats of
    # falloff puts the truncated mass below 1e-16 of the peak, plus margin
    # for the slowly varying (logarithmic) weight factor
    return 41.0 / (2.0 * (n + 1)) + 3.0


def _log_w1(log_t: np.ndarray, n: int) -> np.ndarray:
    # log of (1 + t^2)^-(n+1) without forming t^2
    return -(n + 1) * np.logaddexp(0.0, 2.0 * np.asarray(log_t, dtype=float))


def _log_kernel(u: np.ndarray, n: int) -> np.ndarray:
    return -(n + 1) * np.logaddexp(0.0, 2.0 * u)


def _log_simpson_rows(log_f, lo: float, hi: float, n0: int, rel_tol: float) -> np.ndarray:
    """log of Integral exp(log_f(u)) du per row, refined until stable.

    ``log_f`` maps a u-grid of length K to an array (rows, K).  Each
    refinement doubles the resolution; convergence is judged on the relative
    change of every row integral.
    """
    npts = max(5, n0 | 1)
    prev = None
    for _ in range(10):
        u, h = np.linspace(lo, hi, npts, retstep=True)
        lf = log_f(u)
        w = np.ones(npts)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        rowmax = lf.max(axis=-1, keepdims=True)
        safe = np.where(np.isfinite(rowmax), rowmax, 0.0)
        sums = (np.exp(lf - safe) * w).sum(axis=-1) * (h / 3.0)
        with np.errstate(divide="ignore"):
            log_i = safe[..., 0] + np.log(sums)
        log_i = np.where(np.isfinite(rowmax[..., 0]), log_i, -np.inf)
        if prev is not None:
            both = np.isfinite(log_i) & np.isfinite(prev)
            drift = np.abs(np.expm1(log_i[both] - prev[both])).max() if both.any() else 0.0
            if drift <= rel_tol:
                return log_i
        prev = log_i
        npts = 2 * npts - 1
    raise QuadratureError(f"no convergence to {rel_tol} within refinement budget")


def _convolve_log(log_prev, log_y: np.ndarray, n: int, rel_tol: float) -> np.ndarray:
    """One recursion level: log w_next(exp(log_y)) from log w_prev evaluator."""
    log_y = np.atleast_1d(np.asarray(log_y, dtype=float))
    slack = _support_slack(n)
    out = np.empty(log_y.size)
    for start in range(0, log_y.size, _ROW_BLOCK):
        block = log_y[start : start + _ROW_BLOCK]
        lo = min(0.0, float(block.min())) - slack
        hi = max(0.0, float(block.max())) + slack
        du0 = min(0.25, 1.0 / (2.0 * math.sqrt(n + 1)))
        n0 = int(math.ceil((hi - lo) / du0)) + 1

        def log_f(u, _block=block):
            log_t = _block[:, None] - u[None, :]
            return log_prev(log_t) + _log_kernel(u, n)

        out[start : start + _ROW_BLOCK] = _LOG_2PI + _log_simpson_rows(
            log_f, lo, hi, n0, rel_tol
        )
    return out


class _TailedLogTable:
    """Monotone-cubic interpolant of log w over a log-y grid, with tails.

    Right of the grid the weight decays like a power law, so log w is
    extended linearly in log y.  Left of the grid the weight grows at most
    logarithmically, so w itself is extended linearly in log y.
    """

    def __init__(self, log_grid: np.ndarray, log_vals: np.ndarray):
        self.lo = float(log_grid[0])
        self.hi = float(log_grid[-1])
        self._pchip = PchipInterpolator(log_grid, log_vals, extrapolate=False)
        self._right_slope = (log_vals[-1] - log_vals[-2]) / (log_grid[-1] - log_grid[-2])
        self._right_val = float(log_vals[-1])
        w0, w1 = math.exp(log_vals[0]), math.exp(log_vals[1])
        self._left_slope = (w1 - w0) / (log_grid[1] - log_grid[0])
        self._left_val = w0

    def __call__(self, log_t: np.ndarray) -> np.ndarray:
        log_t = np.asarray(log_t, dtype=float)
        out = self._pchip(np.clip(log_t, self.lo, self.hi))
        right = log_t > self.hi
        if right.any():
            out = np.where(
                right, self._right_val + self._right_slope * (log_t - self.hi), out
            )
        left = log_t < self.lo
        if left.any():
            ext = self._left_val + self._left_slope * (log_t - self.lo)
            out = np.where(left, np.log(np.maximum(ext, self._left_val)), out)
        return out


# cache of level interpolants: (level, n) -> (_TailedLogTable)
_LEVEL_CACHE: dict[tuple[int, int], _TailedLogTable] = {}


def _level_evaluator(level: int, n: int, lo: float, hi: float, rel_tol: float):
    """Evaluator of log w_level valid on [lo, hi] (log-y units)."""
    if level == 1:
        return lambda log_t: _log_w1(log_t, n)
    key = (level, n)
    cached = _LEVEL_CACHE.get(key)
    if cached is not None and cached.lo <= lo and cached.hi >= hi:
        return cached
    pad = 2.0 * _TABLE_STEP
    g_lo = min(lo, cached.lo if cached else lo) - pad
    g_hi = max(hi, cached.hi if cached else hi) + pad
    count = int(math.ceil((g_hi - g_lo) / _TABLE_STEP)) + 1
    log_grid = np.linspace(g_lo, g_hi, count)
    slack = _support_slack(n)
    inner = _level_evaluator(
        level - 1, n, min(0.0, g_lo) - slack, max(0.0, g_hi) + slack, rel_tol
    )
    log_vals = _convolve_log(inner, log_grid, n, rel_tol)
    table = _TailedLogTable(log_grid, log_vals)
    _LEVEL_CACHE[key] = table
    return table


def _log_weight(m: int, n: int, log_y: np.ndarray, rel_tol: float = QUAD_TOL) -> np.ndarray:
    log_y = np.asarray(log_y, dtype=float)
    if m == 1:
        return _log_w1(log_y, n)
    slack = _support_slack(n)
    lo = min(0.0, float(log_y.min())) - slack
    hi = max(0.0, float(log_y.max())) + slack
    prev = _level_evaluator(m - 1, n, lo, hi, rel_tol)
    return _convolve_log(prev, log_y, n, rel_tol)


def eval_weight(m: int, n: int, y):
    """Weight value w_m(y) for y > 0; closed form at m = 1, recursion above.

    Enforced envelope: m <= 4, n <= 50 (recursion cost grows geometrically
    with depth; the Monte Carlo paths cover larger cases).
    """
    _check_feasible(m, n)
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("y must be positive and finite")
    out = np.exp(_log_weight(m, n, np.log(arr).ravel())).reshape(arr.shape)
    return float(out) if np.isscalar(y) or arr.ndim == 0 else out


@dataclass
class WeightTable:
    """Grid evaluation of a weight function, exportable as CSV."""

    m: int
    n: int
    grid: np.ndarray
    values: np.ndarray
    quad_tol: float = QUAD_TOL

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float).ravel()
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.grid.size != self.values.size:
            raise ValueError("grid/values length mismatch")
        if np.any(np.diff(self.grid) <= 0) or np.any(self.grid <= 0):
            raise ValueError("grid must be strictly increasing and positive")
        if np.any(self.values <= 0):
            raise ValueError("weight values must be positive")


def weight_table(m: int, n: int, grid=None, quad_tol: float = QUAD_TOL) -> WeightTable:
    """Evaluate the weight on a grid (default: log-spaced over [1e-3, 1e3])."""
    if grid is None:
        grid = np.logspace(-3, 3, 241)
    grid = np.asarray(grid, dtype=float)
    values = np.exp(_log_weight(m, n, np.log(grid), quad_tol))
    return WeightTable(m=m, n=n, grid=grid, values=values, quad_tol=quad_tol)


@dataclass
class RadiusDensity:
    """Normalized density table of the j-th radial coordinate."""

    j: int
    n: int
    m: int
    grid: np.ndarray
    values: np.ndarray
    norm_const: float
    _log_dense: np.ndarray = None
    _cdf_dense: np.ndarray = None

    def cdf(self, y):
        arr = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            lv = np.log(np.maximum(arr, 1e-300))
        out = np.interp(lv, self._log_dense, self._cdf_dense, left=0.0, right=1.0)
        return float(out) if np.isscalar(y) or arr.ndim == 0 else out


def radius_density(j: int, n: int, m: int, grid) -> RadiusDensity:
    """Table of c_j * y^(2j-1) * w_m(y) with the constant fixed by quadrature.

    The normalization integrates the unnormalized density over (0, inf) in
    log space (relative accuracy ~QUAD_TOL); the returned object also exposes
    an accurate CDF built from a dense internal grid.
    """
    _check_feasible(m, n)
    if not 1 <= j <= n:
        raise ValueError(f"index j={j} outside 1..{n}")
    grid = np.asarray(grid, dtype=float).ravel()
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")

    # dense log-grid covering all the mass: the unnormalized density rises
    # like y^(2j) on the left and falls like y^(2j-2(n+1)) on the right
    lo = min(math.log(grid[0]), -(45.0 / (2.0 * j) + 8.0))
    hi = max(math.log(grid[-1]), 45.0 / (2.0 * (n + 1 - j)) + 8.0)
    dense = np.linspace(lo, hi, 8001)
    log_w_dense = _log_weight(m, n, dense)
    log_integrand = 2.0 * j * dense + log_w_dense  # includes the dy = y dv Jacobian
    peak = log_integrand.max()
    f = np.exp(log_integrand - peak)
    dv = dense[1] - dense[0]
    cum = np.concatenate([[0.0], np.cumsum((f[1:] + f[:-1]) * 0.5 * dv)])
    total = cum[-1]
    if not total > 0:
        raise QuadratureError("density mass evaluated to zero")
    norm_const = math.exp(-peak - math.log(total))
    cdf_dense = cum / total

    log_w_grid = _log_weight(m, n, np.log(grid))
    values = np.exp(
        math.log(norm_const) + (2.0 * j - 1.0) * np.log(grid) + log_w_grid
    )
    return RadiusDensity(
        j=j,
        n=n,
        m=m,
        grid=grid,
        values=values,
        norm_const=norm_const,
        _log_dense=dense,
        _cdf_dense=cdf_dense,
    )


# ---------------------------------------------------------------------------
# Closed-form limiting densities and transforms.


def limit_radial_cdf(r):
    """CDF r^2 / (1 + r^2) of the limiting scaled-radius law."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("r must be nonnegative")
    sq = arr * arr
    out = np.where(np.isinf(arr), 1.0, sq / (1.0 + sq))
    return float(out) if np.isscalar(r) or arr.ndim == 0 else out


def limit_polar_density(theta, r):
    """Joint limit density (1/pi) * r / (1+r^2)^2 on [0,2*pi) x (0,inf)."""
    t = np.asarray(theta, dtype=float)
    arr = np.asarray(r, dtype=float)
    if np.any(t < 0) or np.any(t >= 2.0 * math.pi):
        raise ValueError("theta must lie in [0, 2*pi)")
    if np.any(arr <= 0):
        raise ValueError("r must be positive")
    out = (arr / (1.0 + arr * arr) ** 2) / math.pi
    out = np.broadcast_arrays(out, t)[0]
    scalar = (np.isscalar(theta) or t.ndim == 0) and (np.isscalar(r) or arr.ndim == 0)
    return float(out) if scalar else out


def esd_limit_density(m: int, z):
    """Limit density of the unscaled spectral measure for fixed m.

    (1/(m*pi)) * |z|^(2/m-2) / (1 + |z|^(2/m))^2.  For m >= 2 the density has
    an integrable singularity at the origin; evaluation there returns inf.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    az = np.abs(np.asarray(z, dtype=complex))
    if m == 1:
        out = (1.0 / math.pi) / (1.0 + az * az) ** 2
    else:
        out = np.empty_like(az, dtype=float)
        zero = az == 0.0
        out[zero] = np.inf
        p = az[~zero] ** (2.0 / m)
        out[~zero] = (p / (az[~zero] ** 2)) / (m * math.pi * (1.0 + p) ** 2)
    return float(out) if np.isscalar(z) or az.ndim == 0 else out


def limit_complex_density(z):
    """Limit density (1/pi) / (1 + |z|^2)^2 of the scaled complex atoms."""
    az = np.abs(np.asarray(z, dtype=complex))
    out = (1.0 / math.pi) / (1.0 + az * az) ** 2
    return float(out) if np.isscalar(z) or az.ndim == 0 else out


def polar_to_complex(theta, r, power: int = 1):
    """Map (theta, r) to r^power * exp(i*theta), stable for extreme moduli."""
    if not (isinstance(power, (int, np.integer)) and power >= 1):
        raise ValueError("power must be a positive integer")
    t = np.asarray(theta, dtype=float)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("r must be nonnegative")
    with np.errstate(divide="ignore"):
        modulus = np.exp(power * np.log(np.where(arr > 0, arr, 1.0)))
    modulus = np.where(arr > 0, modulus, 0.0)
    out = modulus * np.exp(1j * t)
    scalar = (np.isscalar(theta) or t.ndim == 0) and (np.isscalar(r) or arr.ndim == 0)
    return complex(out) if scalar else out
