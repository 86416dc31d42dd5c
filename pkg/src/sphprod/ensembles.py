"""Matrix-path samplers: Ginibre pairs, spherical draws, and m-fold products.

The spherical ensemble is X = A^{-1} B with A, B independent complex Ginibre
matrices; the product pipeline multiplies ``m`` independent spherical draws
with Frobenius-norm-triggered rescaling so that arbitrarily long products stay
representable.  Rescaling is by a positive scalar only, so eigenvalue
arguments are untouched and moduli are recovered exactly from the accumulated
``log_scale`` exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import RandomStream
from .linalg import Spectrum, condition_estimate, eigenvalues, lu_solve, matmul

__all__ = [
    "MRule",
    "EnsembleConfig",
    "ProductSample",
    "sample_ginibre",
    "sample_spherical",
    "sample_product",
    "spectral_sample",
    "spectral_samples",
]

_MAX_RESAMPLES = 100
_DEFAULT_RESCALE_BOUNDS = (1e-100, 1e100)


@dataclass(frozen=True)
class MRule:
    """Named rule resolving the matrix count m as a function of n.

    Kinds: ``fixed`` (constant m), ``equal_n`` (m = n), ``ceil_pow``
    (m = ceil(n**alpha)).
    """

    kind: str
    param: float | None = None

    @classmethod
    def fixed(cls, m: int) -> "MRule":
        if int(m) < 1:
            raise ValueError("fixed m must be >= 1")
        return cls("fixed", int(m))

    @classmethod
    def equal_n(cls) -> "MRule":
        return cls("equal_n", None)

    @classmethod
    def ceil_pow(cls, alpha: float) -> "MRule":
        if not alpha > 0:
            raise ValueError("ceil_pow exponent must be positive")
        return cls("ceil_pow", float(alpha))

    def resolve(self, n: int) -> int:
        if self.kind == "fixed":
            return int(self.param)
        if self.kind == "equal_n":
            return int(n)
        if self.kind == "ceil_pow":
            return max(1, int(math.ceil(n ** self.param)))
        raise ValueError(f"unknown m-rule kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "fixed":
            return f"fixed({int(self.param)})"
        if self.kind == "equal_n":
            return "equal_n"
        return f"ceil_pow({self.param})"


@dataclass(frozen=True)
class EnsembleConfig:
    """Configuration of a matrix-path run."""

    n: int
    m_rule: MRule
    seed: int = 0
    condition_cap: float = 1e12

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m_rule.resolve(self.n) < 1:
            raise ValueError("resolved m must be >= 1")
        if not self.condition_cap > 1:
            raise ValueError("condition_cap must exceed 1")

    @property
    def m(self) -> int:
        return self.m_rule.resolve(self.n)


@dataclass
class ProductSample:
    """A rescaled m-fold product with its bookkeeping.

    The true product equals ``matrix * exp(log_scale)``: eigenvalue moduli of
    the true product are ``exp(log|eig(matrix)| + log_scale)``, arguments
    identical.
    """

    matrix: np.ndarray
    log_scale: float
    resample_count: int


def sample_ginibre(n: int, stream: RandomStream) -> np.ndarray:
    """n x n matrix of i.i.d. standard complex Gaussians (E|entry|^2 = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = stream.gen.standard_normal((2, n, n))
    return math.sqrt(0.5) * (z[0] + 1j * z[1])


def _sample_spherical_counted(
    n: int, stream: RandomStream, condition_cap: float
) -> tuple[np.ndarray, int]:
    a = sample_ginibre(n, stream)
    b = sample_ginibre(n, stream)
    resamples = 0
    while condition_estimate(a) > condition_cap:
        resamples += 1
        if resamples > _MAX_RESAMPLES:
            raise RuntimeError(
                f"{_MAX_RESAMPLES} consecutive ill-conditioned draws at n={n}; "
                "broken generator or pathological condition_cap"
            )
        a = sample_ginibre(n, stream)
    return lu_solve(a, b), resamples


def sample_spherical(n: int, stream: RandomStream, condition_cap: float = 1e12) -> np.ndarray:
    """One spherical-ensemble draw X = A^{-1}B via LU solve (A never inverted).

    An A whose 1-norm condition estimate exceeds ``condition_cap`` is
    discarded and redrawn; the singular event has probability zero, so this
    guard fires essentially never in practice.
    """
    x, _ = _sample_spherical_counted(n, stream, condition_cap)
    return x


def sample_product(
    config: EnsembleConfig,
    stream: RandomStream,
    rescale_bounds: tuple[float, float] = _DEFAULT_RESCALE_BOUNDS,
) -> ProductSample:
    """Multiply m independent spherical draws left-to-right with rescaling.

    After each multiplication, if the Frobenius norm leaves
    ``rescale_bounds`` the running product is divided by its norm and the log
    of that norm is added to ``log_scale``.
    """
    lo, hi = rescale_bounds
    n = config.n
    m = config.m
    prod, resamples = _sample_spherical_counted(n, stream, config.condition_cap)
    log_scale = 0.0
    for _ in range(m - 1):
        factor, extra = _sample_spherical_counted(n, stream, config.condition_cap)
        resamples += extra
        prod = matmul(prod, factor)
        norm = np.linalg.norm(prod)
        if not norm > 0:
            raise FloatingPointError("product norm underflowed to zero")
        if norm < lo or norm > hi:
            prod = prod / norm
            log_scale += math.log(norm)
    return ProductSample(matrix=prod, log_scale=log_scale, resample_count=resamples)


def spectral_sample(
    config: EnsembleConfig,
    stream: RandomStream,
    rescale_bounds: tuple[float, float] = _DEFAULT_RESCALE_BOUNDS,
) -> Spectrum:
    """Eigenvalues of one product draw, carrying the log-scale exponent."""
    sample = sample_product(config, stream, rescale_bounds)
    spec = eigenvalues(sample.matrix)
    spec.log_scale = sample.log_scale
    return spec


def spectral_samples(config: EnsembleConfig, trials: int) -> Iterator[Spectrum]:
    """Serial trial iterator; trial i uses the substream (seed, i)."""
    root = RandomStream(config.seed)
    for i in range(trials):
        yield spectral_sample(config, root.substream(i))
