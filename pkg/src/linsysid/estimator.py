"""Regularized least-squares fit of the linear one-step model.

Given batch matrices ``X`` (next states) and ``Z`` (stacked state-input
columns), the estimate is the closed form

    theta_hat = X Z' (Z Z' + lambda I)^{-1},

the unique minimizer of ``||X - T Z||_F^2 + lambda ||T||_F^2``.  The solve
goes through the SPD kernel, never an explicit inverse, and the (regularized)
Gram matrix is kept on the estimate because every diagnostic in this package
ends up applying its inverse again.

The fit error splits exactly into three parts,

    theta_hat - theta = -lambda theta G^{-1} + W Z' G^{-1} + R Z' G^{-1},

with ``G = Z Z' + lambda I``; ``error_decomposition`` evaluates the spectral
norm of each summand when the dataset recorded its noise and remainder.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import Dataset
from .linalg import NotPositiveDefiniteError, as_matrix, solve_spd, spectral_norm

__all__ = [
    "Estimate",
    "RankDeficientError",
    "assemble_batches",
    "fit",
    "estimation_error",
    "predict",
    "error_decomposition",
]

# The normal equations must hold to this tolerance, relative to ||X Z'||_F.
RESIDUAL_RTOL = 1e-8


class RankDeficientError(ValueError):
    """Unregularized fit attempted on a singular design."""


@dataclass(frozen=True, eq=False)
class Estimate:
    """A fitted linear model with its solve context.

    ``gram`` is ``Z Z' + lambda I`` as used in the solve; it is None only on
    estimates deserialized from CSV, which carry no design information.
    """

    theta_hat: np.ndarray
    lam: float
    gram: np.ndarray | None
    n_samples: int

    def __post_init__(self):
        theta = as_matrix(self.theta_hat, "theta_hat")
        object.__setattr__(self, "theta_hat", theta)
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise ValueError(f"lambda must be nonnegative and finite, got {lam}")
        object.__setattr__(self, "lam", lam)
        if self.gram is not None:
            gram = as_matrix(self.gram, "gram")
            if gram.shape != (theta.shape[1], theta.shape[1]):
                raise ValueError(
                    f"gram shape {gram.shape} does not match theta width {theta.shape[1]}"
                )
            object.__setattr__(self, "gram", gram)
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError(f"n_samples must be a positive integer, got {self.n_samples}")
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @property
    def n(self) -> int:
        return self.theta_hat.shape[0]

    @property
    def dim(self) -> int:
        return self.theta_hat.shape[1]

    def save_csv(self, path) -> None:
        """Write ``row,col,value`` triples with lambda and sample-count metadata."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "col", "value"])
            writer.writerow(["lambda", "", repr(float(self.lam))])
            writer.writerow(["n_samples", "", str(self.n_samples)])
            for i in range(self.n):
                for j in range(self.dim):
                    writer.writerow([i, j, repr(float(self.theta_hat[i, j]))])

    @classmethod
    def load_csv(cls, path) -> "Estimate":
        """Read an estimate written by :meth:`save_csv` (gram comes back None)."""
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["row", "col", "value"]:
                raise ValueError(f"{path}: unexpected header {header!r}")
            lam = None
            n_samples = None
            entries = {}
            for row in reader:
                if not row:
                    continue
                key = row[0]
                if key == "lambda":
                    lam = float(row[2])
                elif key == "n_samples":
                    n_samples = int(row[2])
                else:
                    entries[(int(key), int(row[1]))] = float(row[2])
        if lam is None or n_samples is None or not entries:
            raise ValueError(f"{path}: missing metadata or matrix entries")
        rows = 1 + max(i for i, _ in entries)
        cols = 1 + max(j for _, j in entries)
        if len(entries) != rows * cols:
            raise ValueError(f"{path}: expected {rows * cols} entries, found {len(entries)}")
        theta = np.empty((rows, cols))
        for (i, j), v in entries.items():
            theta[i, j] = v
        return cls(theta_hat=theta, lam=lam, gram=None, n_samples=n_samples)


def assemble_batches(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Batch matrices ``X`` (n x N) and ``Z`` ((n+p) x N) from a dataset."""
    if len(data) < 1:
        raise ValueError("dataset is empty")
    return data.x1, np.vstack([data.x0, data.u0])


def fit(X, Z, lam: float) -> Estimate:
    """Closed-form regularized least squares.

    Raises
    ------
    RankDeficientError
        If ``lam`` is 0 and ``Z Z'`` is singular (message suggests the two
        remedies: regularize or collect more experiments).
    ValueError
        On negative ``lam`` or mismatched shapes.
    """
    X = as_matrix(X, "X")
    Z = as_matrix(Z, "Z")
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"X has {X.shape[1]} columns but Z has {Z.shape[1]}")
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be nonnegative and finite, got {lam}")
    dim = Z.shape[0]
    gram = Z @ Z.T + lam * np.eye(dim)
    xz_t = X @ Z.T
    try:
        theta = solve_spd(gram, xz_t.T).T
    except NotPositiveDefiniteError as exc:
        if lam == 0.0:
            raise RankDeficientError(
                "rank-deficient design; supply λ > 0 or more experiments"
            ) from exc
        raise
    # Enforce the normal-equation contract, with one refinement pass before
    # giving up (helps ill-conditioned but numerically nonsingular designs).
    scale = max(1.0, float(np.sqrt((xz_t * xz_t).sum())))
    resid = theta @ gram - xz_t
    if float(np.sqrt((resid * resid).sum())) > RESIDUAL_RTOL * scale:
        theta = theta - solve_spd(gram, resid.T).T
        resid = theta @ gram - xz_t
        if float(np.sqrt((resid * resid).sum())) > RESIDUAL_RTOL * scale:
            raise ArithmeticError(
                f"normal-equation residual {float(np.sqrt((resid * resid).sum())):.3e} "
                f"exceeds {RESIDUAL_RTOL:.0e} * {scale:.3e} after refinement"
            )
    return Estimate(theta_hat=theta, lam=lam, gram=gram, n_samples=Z.shape[1])


def estimation_error(est: Estimate, theta_true) -> float:
    """Spectral norm of ``theta_hat - theta_true``."""
    theta_true = as_matrix(theta_true, "theta_true")
    if theta_true.shape != est.theta_hat.shape:
        raise ValueError(
            f"theta_true shape {theta_true.shape} does not match estimate shape "
            f"{est.theta_hat.shape}"
        )
    return spectral_norm(est.theta_hat - theta_true)


def predict(est: Estimate, z) -> np.ndarray:
    """Next-state prediction ``theta_hat @ z`` for one stacked vector."""
    z = np.asarray(z, dtype=float)
    if z.shape != (est.dim,):
        raise ValueError(f"z has shape {z.shape}, expected ({est.dim},)")
    return est.theta_hat @ z


def error_decomposition(
    est: Estimate, data: Dataset, theta_true
) -> tuple[float, float, float]:
    """Spectral norms of the three exact error summands.

    Returns
    -------
    (reg_term, noise_term, nonlin_term) : tuple of float
        Norms of ``-lambda theta G^{-1}``, ``W Z' G^{-1}`` and
        ``R Z' G^{-1}``.  Their sum dominates the estimation error by the
        triangle inequality when the estimate was fit on this dataset.

    Raises
    ------
    ValueError
        If the dataset has no recorded ground truth or the estimate carries
        no Gram matrix.
    """
    if data.ground_truth is None:
        raise ValueError("dataset has no recorded ground truth (W, R)")
    if est.gram is None:
        raise ValueError("estimate carries no Gram matrix (deserialized?)")
    theta_true = as_matrix(theta_true, "theta_true")
    _, Z = assemble_batches(data)
    if est.gram.shape[0] != Z.shape[0]:
        raise ValueError(
            f"estimate Gram dimension {est.gram.shape[0]} does not match data dimension {Z.shape[0]}"
        )
    w, r = data.ground_truth
    # For a matrix M, ||M G^{-1}|| = ||G^{-1} M'|| since G is symmetric.
    reg = est.lam * spectral_norm(solve_spd(est.gram, theta_true.T))
    noise = spectral_norm(solve_spd(est.gram, Z @ w.T))
    nonlin = spectral_norm(solve_spd(est.gram, Z @ r.T))
    return reg, noise, nonlin
