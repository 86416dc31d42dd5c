"""Dense complex matrix arithmetic for the matrix sampling path.

Thin, contract-pinning wrappers around LAPACK (via numpy/scipy): explicit
dimension checks, pivot-underflow detection on solves, an O(n^2) 1-norm
condition estimate reusing the LU factors, and a non-Hermitian eigenvalue
routine (balancing + Hessenberg + shifted QR underneath) whose output carries
the log-scale correction exponent used by the product pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack as _lapack

__all__ = [
    "SingularMatrixError",
    "NoConvergenceError",
    "Spectrum",
    "matmul",
    "lu_solve",
    "condition_estimate",
    "eigenvalues",
]


class SingularMatrixError(RuntimeError):
    """A pivot underflowed the n*eps*||A|| threshold during factorization."""


class NoConvergenceError(RuntimeError):
    """The QR eigenvalue iteration exceeded its sweep budget."""


@dataclass
class Spectrum:
    """All eigenvalues of a matrix, plus a modulus correction exponent.

    ``log_scale`` is the accumulated rescaling exponent from the product
    pipeline: the true moduli are ``exp(log|eig| + log_scale)`` while the
    arguments are unchanged.
    """

    eigenvalues: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=complex).ravel()

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def _as_square(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be square with n >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    """Product of two equal-dimension square complex matrices."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def _lu_factor_checked(a: np.ndarray):
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    n = a.shape[0]
    threshold = n * np.finfo(float).eps * np.linalg.norm(a, 1)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= threshold:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} under threshold {threshold:.3e} (n={n})"
        )
    return lu, piv


def lu_solve(a, b) -> np.ndarray:
    """Solve A X = B by partially pivoted LU; raises SingularMatrixError."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    lu, piv = _lu_factor_checked(a)
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def condition_estimate(a) -> float:
    """O(n^2) 1-norm condition estimate from the LU factors (LAPACK gecon)."""
    a = _as_square(a)
    anorm = np.linalg.norm(a, 1)
    lu, _ = _lu_factor_checked(a)
    rcond, info = _lapack.zgecon(lu, anorm, norm="1")
    if info != 0:
        raise RuntimeError(f"zgecon failed with info={info}")
    if rcond == 0.0:
        return float("inf")
    return float(1.0 / rcond)


def eigenvalues(a) -> Spectrum:
    """All n eigenvalues (balanced Hessenberg + shifted QR), log_scale = 0.

    Contract: the eigenvalue sum matches the trace and the product matches
    the LU determinant within the tolerances exercised by the test suite.
    """
    a = _as_square(a)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return Spectrum(eigenvalues=vals, log_scale=0.0)
