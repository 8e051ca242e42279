"""Cross-validation for the ridge parameter.

The dataset is split into k contiguous index blocks; each block is held out
once, the model is fit on the remaining samples at every candidate lambda,
and the block is scored by the mean Euclidean norm of its one-step
prediction errors.  Contiguous blocks are used deliberately: the designed
experiment sequence is balanced over any window, so shuffling adds nothing
but irreproducibility.  For free-running trajectory data, where consecutive
samples are correlated, a seeded shuffle can be requested explicitly.

An unregularized fold whose complement is rank deficient scores +inf instead
of raising: a lambda that cannot even be fit on k-1 folds has disqualified
itself from selection, which is exactly what +inf encodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import Dataset
from .estimator import assemble_batches
from .linalg import NotPositiveDefiniteError, solve_spd

__all__ = ["CvResult", "default_grid", "fold_slices", "kfold_cv"]


def default_grid() -> np.ndarray:
    """Candidate lambdas 0, 0.1, ..., 20.0 (201 values)."""
    return np.round(np.arange(0, 201) * 0.1, 10)


def fold_slices(n_samples: int, k: int) -> list[slice]:
    """Contiguous fold boundaries: floor(N/k) per fold, remainder to the first folds."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if n_samples < k:
        raise ValueError(f"need at least k = {k} samples, got {n_samples}")
    base, extra = divmod(n_samples, k)
    slices = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        slices.append(slice(start, start + size))
        start += size
    return slices


@dataclass(frozen=True, eq=False)
class CvResult:
    """Cross-validation scores over a lambda grid.

    ``best_lambda`` is the smallest grid value attaining the minimal score,
    so duplicated grid entries and exact ties resolve deterministically.
    """

    grid: np.ndarray
    scores: np.ndarray
    best_lambda: float
    best_score: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        scores = np.asarray(self.scores, dtype=float)
        if grid.ndim != 1 or grid.shape != scores.shape or grid.size == 0:
            raise ValueError("grid and scores must be matching nonempty vectors")
        if np.any(np.isnan(scores)):
            raise ValueError("scores must not contain NaN")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "scores", scores)
        best = float(scores.min())
        if not (self.best_score == best or (math.isinf(self.best_score) and math.isinf(best))):
            raise ValueError(f"best_score {self.best_score} is not the minimum score {best}")
        winners = grid[scores == best]
        if winners.size == 0 or float(winners.min()) != self.best_lambda:
            raise ValueError(
                f"best_lambda {self.best_lambda} is not the smallest minimizer {winners.min()}"
            )

    def save_csv(self, path) -> None:
        """Write ``lambda,score`` rows in grid order."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lambda", "score"])
            for lam, score in zip(self.grid, self.scores):
                writer.writerow([repr(float(lam)), repr(float(score))])


def kfold_cv(data: Dataset, grid=None, k: int = 10, shuffle_seed: int | None = None) -> CvResult:
    """Score every candidate lambda by k-fold cross-validation.

    Parameters
    ----------
    data : Dataset
        Samples to split.
    grid : sequence of float, optional
        Candidate lambdas, all nonnegative; defaults to 0:0.1:20.
    k : int
        Number of folds (at least 2; at most the sample count).
    shuffle_seed : int, optional
        When given, indices are permuted with this seed before the
        contiguous split.  Leave unset for designed-experiment data.

    Returns
    -------
    CvResult
        Mean held-out prediction-error norm per lambda (mean over folds of
        the per-fold mean Euclidean error), with the tie-broken minimizer.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty vector of lambdas")
    if not np.all(np.isfinite(grid)) or np.any(grid < 0):
        raise ValueError("grid lambdas must be finite and nonnegative")
    X, Z = assemble_batches(data)
    n_samples = Z.shape[1]
    slices = fold_slices(n_samples, k)
    if shuffle_seed is None:
        order = np.arange(n_samples)
    else:
        order = np.random.default_rng(shuffle_seed).permutation(n_samples)
    Xo, Zo = X[:, order], Z[:, order]
    dim = Z.shape[0]
    eye = np.eye(dim)
    gram_full = Zo @ Zo.T
    xzt_full = Xo @ Zo.T
    folds = []
    for sl in slices:
        z_fold = Zo[:, sl]
        x_fold = Xo[:, sl]
        folds.append(
            (x_fold, z_fold, gram_full - z_fold @ z_fold.T, xzt_full - x_fold @ z_fold.T)
        )
    scores = np.empty(grid.size)
    for gi, lam in enumerate(grid):
        fold_scores = np.empty(k)
        for fi, (x_fold, z_fold, gram_c, xzt_c) in enumerate(folds):
            try:
                theta = solve_spd(gram_c + lam * eye, xzt_c.T).T
            except NotPositiveDefiniteError:
                if lam == 0.0:
                    fold_scores[fi] = math.inf
                    continue
                raise
            resid = x_fold - theta @ z_fold
            fold_scores[fi] = float(np.sqrt((resid * resid).sum(axis=0)).mean())
        scores[gi] = fold_scores.mean()
    best_score = float(scores.min())
    best_lambda = float(grid[scores == best_score].min())
    return CvResult(grid=grid, scores=scores, best_lambda=best_lambda, best_score=best_score)
