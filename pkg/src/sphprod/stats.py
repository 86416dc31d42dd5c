"""Empirical measures, Kolmogorov-Smirnov machinery, and ordering diagnostics.

Turns the limiting-law statements into pass/fail checks: scaled spectra as
(angle, |eigenvalue|^(1/m)) pairs, right-continuous empirical CDFs, one- and
two-sample KS tests with asymptotic thresholds, angle-uniformity checks, and
the stochastic-ordering report for the squared radial coordinates.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import RandomStream, radius_factor_cdf
from .linalg import Spectrum

__all__ = [
    "ScaledSpectrum",
    "EmpiricalCDF",
    "KSResult",
    "ZeroEigenvalueError",
    "SurrogateAnglesWarning",
    "OrderingReport",
    "scaled_spectrum",
    "ks_critical",
    "ks_one_sample",
    "ks_two_sample",
    "angle_uniformity",
    "ordering_report",
]

TWO_PI = 2.0 * math.pi


class ZeroEigenvalueError(RuntimeError):
    """An exactly-zero eigenvalue (probability-zero event); reject the trial."""


class SurrogateAnglesWarning(UserWarning):
    """Angles under test are uniform surrogates, not matrix-path angles."""


@dataclass
class ScaledSpectrum:
    """Atoms (angle_j, |z_j|^(1/m)) of the scaled empirical spectral measure.

    ``surrogate_angles`` flags radial-path spectra whose angles were drawn
    uniformly rather than taken from eigenvalues.
    """

    angles: np.ndarray
    scaled_radii: np.ndarray
    n: int
    m: int
    surrogate_angles: bool = False

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float).ravel()
        self.scaled_radii = np.asarray(self.scaled_radii, dtype=float).ravel()
        if self.angles.size != self.scaled_radii.size:
            raise ValueError("angles and radii length mismatch")
        if self.angles.size != self.n:
            raise ValueError("length does not match n")
        if np.any(self.angles < 0) or np.any(self.angles >= TWO_PI):
            raise ValueError("angles must lie in [0, 2*pi)")
        if not np.all(np.isfinite(self.scaled_radii)) or np.any(self.scaled_radii <= 0):
            raise ValueError("scaled radii must be positive and finite")


@dataclass
class EmpiricalCDF:
    """Right-continuous step CDF F(x) = #{samples <= x} / count."""

    sorted_samples: np.ndarray
    count: int

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCDF":
        arr = np.sort(np.asarray(samples, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("empty sample")
        return cls(sorted_samples=arr, count=arr.size)

    def __call__(self, x):
        idx = np.searchsorted(self.sorted_samples, x, side="right")
        out = idx / self.count
        return float(out) if np.isscalar(x) else out


@dataclass
class KSResult:
    """Outcome of a KS comparison at fixed significance level."""

    statistic: float
    sample_size: float
    threshold: float
    passed: bool
    alpha: float
    name: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "alpha": self.alpha,
            "passed": bool(self.passed),
            "sample_size": self.sample_size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def ks_critical(alpha: float) -> float:
    """Asymptotic Kolmogorov quantile c(alpha) = sqrt(-ln(alpha/2)/2)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def _eval_cdf(cdf, x: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(cdf(x), dtype=float)
        if vals.shape != x.shape:
            raise TypeError
    except TypeError:
        vals = np.array([float(cdf(v)) for v in x])
    return vals


def ks_one_sample(samples, cdf, alpha: float = 0.05, name: str = "") -> KSResult:
    """Exact sup gap between the empirical CDF and a reference CDF.

    Both one-sided gaps are evaluated at every order statistic, which handles
    ties and step discontinuities exactly.  Threshold: c(alpha)/sqrt(N).
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < 8:
        raise ValueError("need at least 8 samples")
    f = _eval_cdf(cdf, x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    stat = float(max(upper.max(), lower.max(), 0.0))
    threshold = ks_critical(alpha) / math.sqrt(n)
    return KSResult(stat, n, threshold, stat <= threshold, alpha, name)


def ks_two_sample(a, b, alpha: float = 0.05, name: str = "") -> KSResult:
    """Sup gap between two empirical CDFs; threshold c(alpha)*sqrt((Na+Nb)/(Na*Nb))."""
    xa = np.sort(np.asarray(a, dtype=float).ravel())
    xb = np.sort(np.asarray(b, dtype=float).ravel())
    na, nb = xa.size, xb.size
    if na < 8 or nb < 8:
        raise ValueError("need at least 8 samples in each set")
    pooled = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, pooled, side="right") / na
    fb = np.searchsorted(xb, pooled, side="right") / nb
    stat = float(np.abs(fa - fb).max())
    threshold = ks_critical(alpha) * math.sqrt((na + nb) / (na * nb))
    effective = na * nb / (na + nb)
    return KSResult(stat, effective, threshold, stat <= threshold, alpha, name)


def scaled_spectrum(spec: Spectrum, m: int) -> ScaledSpectrum:
    """Map a Spectrum to (angle, corrected modulus^(1/m)) atoms.

    Scaled radius = exp((log|eig| + log_scale) / m); angles are principal
    arguments shifted into [0, 2*pi).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    moduli = np.abs(spec.eigenvalues)
    if np.any(moduli == 0.0):
        raise ZeroEigenvalueError("zero eigenvalue in spectrum")
    radii = np.exp((np.log(moduli) + spec.log_scale) / m)
    angles = np.angle(spec.eigenvalues)
    angles = np.where(angles < 0.0, angles + TWO_PI, angles)
    angles = np.where(angles >= TWO_PI, 0.0, angles)
    return ScaledSpectrum(
        angles=angles, scaled_radii=radii, n=spec.n, m=int(m), surrogate_angles=False
    )


def angle_uniformity(spectrum: ScaledSpectrum, alpha: float = 0.05, name: str = "") -> KSResult:
    """KS of the angles against Uniform[0, 2*pi).

    Warns (SurrogateAnglesWarning) when the angles are surrogate draws, since
    the test then only exercises the generator, not the eigenvalue law.
    """
    if spectrum.surrogate_angles:
        warnings.warn(
            "angle uniformity tested on surrogate angles", SurrogateAnglesWarning
        )
    return ks_one_sample(
        spectrum.angles, lambda t: np.clip(t / TWO_PI, 0.0, 1.0), alpha, name
    )


@dataclass
class OrderingReport:
    """Per-grid-point verdicts for the CDF chain P(R_1^2<=x) >= ... >= P(R_n^2<=x)."""

    grid: np.ndarray
    mode: str  # "exact" for m=1, "empirical" otherwise
    violations: np.ndarray = field(default=None)
    worst_gap: float = 0.0
    noise_band: float = 0.0
    passed: bool = True


def ordering_report(
    n: int,
    m: int,
    grid,
    trials: int = 0,
    stream: RandomStream | None = None,
    alpha: float = 0.001,
) -> OrderingReport:
    """Check stochastic ordering of the squared radial coordinates.

    m = 1: the exact incomplete-beta CDFs must be nonincreasing in the index
    at every grid point, zero tolerance.  m >= 2: empirical CDFs built from
    ``trials`` draws per index; a violation is declared only when the
    successor CDF exceeds the predecessor by more than the two-sample noise
    band at level ``alpha``.
    """
    if n < 2:
        raise ValueError("need n >= 2 to compare indices")
    grid = np.asarray(grid, dtype=float).ravel()
    if np.any(grid <= 0):
        raise ValueError("grid points must be positive")
    if m == 1:
        cdfs = np.array(
            [[radius_factor_cdf(j, n, x) for x in grid] for j in range(1, n + 1)]
        )
        band = 0.0
        mode = "exact"
    else:
        if stream is None or trials < 8:
            raise ValueError("empirical ordering needs a stream and trials >= 8")
        shapes_a = np.arange(1, n + 1, dtype=float)[:, None]
        shapes_b = (n + 1 - np.arange(1, n + 1, dtype=float))[:, None]
        log_sq = np.zeros((n, trials))
        for _ in range(m):
            g1 = stream.gen.gamma(shapes_a, size=(n, trials))
            g2 = stream.gen.gamma(shapes_b, size=(n, trials))
            log_sq += np.log(g1) - np.log(g2)
        sq = np.sort(log_sq, axis=1)
        log_grid = np.log(grid)
        cdfs = np.stack(
            [np.searchsorted(sq[j], log_grid, side="right") / trials for j in range(n)]
        )
        band = ks_critical(alpha) * math.sqrt(2.0 / trials)
        mode = "empirical"
    gaps = cdfs[1:] - cdfs[:-1]  # positive value = violation candidate
    violations = (gaps > band).sum(axis=0)
    worst = float(gaps.max()) if gaps.size else 0.0
    return OrderingReport(
        grid=grid,
        mode=mode,
        violations=violations,
        worst_gap=worst,
        noise_band=band,
        passed=bool(violations.sum() == 0),
    )
