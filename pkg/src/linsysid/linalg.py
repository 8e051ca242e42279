"""Dense-matrix kernel shared by the estimation and bound modules.

Everything operates on 2-D float arrays.  The matrices that reach the
factorization routines here are small (Gram matrices of size state dim plus
input dim), so the kernel favors exact failure contracts over speed: the
positive-definite solve is an explicit Cholesky factorization that reports
which pivot failed, and the spectral norm is a full SVD.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NotSymmetricError",
    "NotPositiveDefiniteError",
    "as_matrix",
    "mat_mul",
    "solve_spd",
    "spectral_norm",
    "sym_eig_extremes",
    "norms",
]

# Relative entrywise tolerance for accepting a matrix as symmetric.
SYMMETRY_RTOL = 1e-10

# A Cholesky pivot below this fraction of the spectral norm means the matrix
# is not positive definite for our purposes.
PIVOT_RTOL = 1e-14


class NotSymmetricError(ValueError):
    """A matrix that must be symmetric is not."""


class NotPositiveDefiniteError(ValueError):
    """Cholesky factorization hit a pivot at or below the acceptance floor."""

    def __init__(self, pivot_index: int, pivot: float, threshold: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        self.threshold = threshold
        super().__init__(
            f"matrix is not positive definite: pivot {pivot:.6e} at index "
            f"{pivot_index} is below threshold {threshold:.6e}"
        )


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a 2-D float matrix with finite entries.

    Parameters
    ----------
    a : array_like
        Input to validate.  Conversion to float is attempted; an existing
        float ndarray is passed through without copying.
    name : str
        Label used in error messages.

    Returns
    -------
    ndarray
        The validated 2-D array.

    Raises
    ------
    ValueError
        If the input is not 2-D with positive dimensions, cannot be cast to
        float, or contains NaN or infinite entries.
    """
    try:
        m = np.asarray(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} is not convertible to a float matrix: {exc}") from None
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise ValueError(f"{name} must have positive dimensions, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def mat_mul(a, b) -> np.ndarray:
    """Matrix product ``a @ b`` with validated inputs.

    Raises
    ------
    ValueError
        On inner-dimension mismatch or invalid inputs.
    """
    am = as_matrix(a, "a")
    bm = as_matrix(b, "b")
    if am.shape[1] != bm.shape[0]:
        raise ValueError(
            f"dimension mismatch in mat_mul: {am.shape} @ {bm.shape}"
        )
    return am @ bm


def _require_square_symmetric(s: np.ndarray, name: str) -> None:
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"{name} must be square, got shape {s.shape}")
    scale = max(1.0, float(np.abs(s).max()))
    dev = float(np.abs(s - s.T).max())
    if dev > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(
            f"{name} is not symmetric: max |s - s'| = {dev:.3e} exceeds "
            f"{SYMMETRY_RTOL:.0e} * {scale:.3e}"
        )


def _cholesky(s: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric matrix.

    The pivot acceptance floor is ``PIVOT_RTOL`` times the spectral norm of
    ``s``; a pivot at or below the floor raises ``NotPositiveDefiniteError``
    naming its index.
    """
    d = s.shape[0]
    threshold = PIVOT_RTOL * spectral_norm(s)
    lower = np.zeros_like(s)
    for j in range(d):
        pivot = s[j, j] - float(lower[j, :j] @ lower[j, :j])
        if pivot <= threshold:
            raise NotPositiveDefiniteError(j, pivot, threshold)
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            lower[j + 1 :, j] = (s[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def solve_spd(s, b) -> np.ndarray:
    """Solve ``s @ x = b`` for symmetric positive-definite ``s``.

    ``b`` may have multiple columns.  Solving goes through an explicit
    Cholesky factorization with forward and back substitution, so failures
    carry the index of the offending pivot.

    Raises
    ------
    NotSymmetricError
        If ``s`` deviates from symmetry by more than ``SYMMETRY_RTOL``
        relative to its largest entry.
    NotPositiveDefiniteError
        If a Cholesky pivot falls at or below ``PIVOT_RTOL`` times the
        spectral norm of ``s``.
    ValueError
        On shape mismatch or invalid inputs.
    """
    sm = as_matrix(s, "s")
    bm = as_matrix(b, "b")
    _require_square_symmetric(sm, "s")
    if bm.shape[0] != sm.shape[0]:
        raise ValueError(
            f"right-hand side rows {bm.shape[0]} do not match system size {sm.shape[0]}"
        )
    lower = _cholesky(sm)
    d = sm.shape[0]
    y = np.empty_like(bm)
    for j in range(d):
        y[j] = (bm[j] - lower[j, :j] @ y[:j]) / lower[j, j]
    x = np.empty_like(bm)
    for j in range(d - 1, -1, -1):
        x[j] = (y[j] - lower[j + 1 :, j] @ x[j + 1 :]) / lower[j, j]
    return x


def spectral_norm(m) -> float:
    """Largest singular value of ``m``."""
    mm = as_matrix(m, "m")
    return float(np.linalg.svd(mm, compute_uv=False)[0])


def sym_eig_extremes(s) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix.

    Returns
    -------
    (lambda_min, lambda_max) : tuple of float
    """
    sm = as_matrix(s, "s")
    _require_square_symmetric(sm, "s")
    w = np.linalg.eigvalsh(sm)
    return float(w[0]), float(w[-1])


def norms(m) -> tuple[float, float]:
    """Induced 1-norm (max absolute column sum) and Frobenius norm of ``m``.

    Returns
    -------
    (one_norm, fro_norm) : tuple of float
    """
    mm = as_matrix(m, "m")
    one = float(np.abs(mm).sum(axis=0).max())
    fro = float(np.sqrt((mm * mm).sum()))
    return one, fro
