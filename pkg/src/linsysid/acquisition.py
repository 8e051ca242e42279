"""Experiment design and data collection.

The core design is deterministic: starting from a center point ``m``, the
``i``-th experiment is initialized at ``m + s_i * q * e_j``, cycling the
coordinate axis ``j`` and flipping the sign ``s_i`` after every full cycle.
Every initialization sits on the l1 sphere of radius ``q`` around ``m``, and
over any whole number of double cycles the offsets cancel exactly, which is
what makes the design matrix provably well conditioned.

Each experiment is a single noisy transition from its initialization
(trajectories of length one keep the noise from dragging the state out of
the region where the linearization is informative).  A free-running
baseline, ``collect_single_trajectory``, is included for comparison: it
chains states without resets under i.i.d. Gaussian inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import as_matrix
from .systems import SystemSpec, eval_dynamics_batch, sample_noise_matrix

__all__ = [
    "FeasibleRegion",
    "AcquisitionConfig",
    "Dataset",
    "DivergenceError",
    "RegionViolationError",
    "plan_initializations",
    "collect",
    "collect_single_trajectory",
]

# Squared 2-norm guard for free-running rollouts; states beyond this are
# treated as divergence rather than data.
DIVERGENCE_NORM = 1e6

DATASET_SOURCES = ("algorithm1", "single_trajectory")


class DivergenceError(RuntimeError):
    """A free-running rollout left the trusted state region."""

    def __init__(self, step: int, norm: float):
        self.step = step
        self.norm = norm
        super().__init__(
            f"trajectory diverged at step {step}: state norm {norm:.3e} exceeds {DIVERGENCE_NORM:.0e}"
        )


class RegionViolationError(ValueError):
    """A planned initialization falls outside the feasible region."""

    def __init__(self, index: int, point: np.ndarray, detail: str):
        self.index = index
        self.point = np.asarray(point, dtype=float)
        super().__init__(
            f"planned initialization {index} at {self.point.tolist()} is outside "
            f"the feasible region ({detail})"
        )


@dataclass(frozen=True, eq=False)
class FeasibleRegion:
    """Region the initializations must stay inside.

    ``kind='all'`` places no constraint; ``kind='box'`` is the closed box
    ``lower <= z <= upper`` coordinatewise.
    """

    kind: str = "all"
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("all", "box"):
            raise ValueError(f"unknown region kind {self.kind!r}; expected 'all' or 'box'")
        if self.kind == "box":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.ndim != 1 or hi.shape != lo.shape or lo.size == 0:
                raise ValueError("box bounds must be 1-D vectors of equal positive length")
            if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
                raise ValueError("box bounds must not contain NaN")
            if np.any(lo > hi):
                bad = int(np.argmax(lo > hi))
                raise ValueError(
                    f"box bounds violate lower <= upper at coordinate {bad}: "
                    f"{lo[bad]} > {hi[bad]}"
                )
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        elif self.lower is not None or self.upper is not None:
            raise ValueError("bounds are only meaningful for kind='box'")

    @classmethod
    def box(cls, lower, upper) -> "FeasibleRegion":
        return cls(kind="box", lower=lower, upper=upper)

    def violation(self, z: np.ndarray) -> str | None:
        """None if ``z`` is inside, else a human-readable reason."""
        if self.kind == "all":
            return None
        z = np.asarray(z, dtype=float)
        if z.shape != self.lower.shape:
            return f"point has dimension {z.size}, region has {self.lower.size}"
        below = z < self.lower
        if np.any(below):
            k = int(np.argmax(below))
            return f"coordinate {k}: {z[k]} < lower bound {self.lower[k]}"
        above = z > self.upper
        if np.any(above):
            k = int(np.argmax(above))
            return f"coordinate {k}: {z[k]} > upper bound {self.upper[k]}"
        return None

    def contains(self, z: np.ndarray) -> bool:
        return self.violation(z) is None


@dataclass(frozen=True, eq=False)
class AcquisitionConfig:
    """Parameters of the deterministic one-step experiment design.

    Parameters
    ----------
    num_experiments : int
        Number of one-step experiments N.
    q : float
        l1 offset magnitude of each initialization from the center.
    m : vector of length n + p
        Center point of the design.
    region : FeasibleRegion
        Feasible set for initializations.  All ``2 (n+p)`` extreme points
        ``m +- q e_j`` of the design must lie inside; this is checked here,
        at construction.
    init_perturbation_std : float
        Per-coordinate standard deviation of an i.i.d. Gaussian perturbation
        applied to every planned initialization during collection (0 means
        exact initialization).
    """

    num_experiments: int
    q: float
    m: np.ndarray
    region: FeasibleRegion = field(default_factory=FeasibleRegion)
    init_perturbation_std: float = 0.0

    def __post_init__(self):
        if int(self.num_experiments) != self.num_experiments or self.num_experiments < 1:
            raise ValueError(f"num_experiments must be a positive integer, got {self.num_experiments}")
        object.__setattr__(self, "num_experiments", int(self.num_experiments))
        q = float(self.q)
        if not math.isfinite(q) or q <= 0:
            raise ValueError(f"q must be positive and finite, got {q}")
        object.__setattr__(self, "q", q)
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 1 or m.size < 2:
            raise ValueError(f"m must be a 1-D vector of length n + p >= 2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("m must be finite")
        object.__setattr__(self, "m", m)
        std = float(self.init_perturbation_std)
        if not math.isfinite(std) or std < 0:
            raise ValueError(f"init_perturbation_std must be nonnegative, got {std}")
        object.__setattr__(self, "init_perturbation_std", std)
        # The whole design lives on 2 (n+p) points; all must be feasible.
        for idx, point in enumerate(_ball_extremes(m, q)):
            detail = self.region.violation(point)
            if detail is not None:
                raise RegionViolationError(idx, point, detail)

    @property
    def dim(self) -> int:
        return self.m.size


def _ball_extremes(m: np.ndarray, q: float) -> np.ndarray:
    """The 2 dim points ``m +- q e_j``, one per row."""
    dim = m.size
    pts = np.vstack([np.tile(m, (dim, 1)) + q * np.eye(dim), np.tile(m, (dim, 1)) - q * np.eye(dim)])
    return pts


def plan_initializations(cfg: AcquisitionConfig, dim: int) -> np.ndarray:
    """Deterministic initialization sequence as a ``(dim, N)`` column matrix.

    Column ``i`` (0-based) is ``m + s * q * e_j`` where ``j`` cycles through
    the coordinates and the sign ``s`` starts at +1 and flips after every
    completed cycle, so consecutive cycles cancel each other exactly.

    Raises
    ------
    ValueError
        If ``dim`` is below 2 or does not match ``cfg.m``.
    RegionViolationError
        If a planned point leaves the feasible region.
    """
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    if dim != cfg.dim:
        raise ValueError(f"dim {dim} does not match the config center of length {cfg.dim}")
    n_exp = cfg.num_experiments
    plan = np.tile(cfg.m[:, None], (1, n_exp))
    sign = 1.0
    for i in range(1, n_exp + 1):
        j = i % dim
        if j == 0:
            j = dim
        plan[j - 1, i - 1] += sign * cfg.q
        if i % dim == 0:
            sign = -sign
    for i in range(n_exp):
        detail = cfg.region.violation(plan[:, i])
        if detail is not None:
            raise RegionViolationError(i, plan[:, i], detail)
    return plan


@dataclass(frozen=True, eq=False)
class Dataset:
    """One-step transition samples in column-matrix form.

    ``x1[:, i]``, ``x0[:, i]``, ``u0[:, i]`` form the ``i``-th observed
    triple.  When the data came from simulation, ``ground_truth`` carries the
    noise and remainder columns ``(W, R)`` that produced it, enabling exact
    error decompositions in tests and diagnostics.
    """

    x1: np.ndarray
    x0: np.ndarray
    u0: np.ndarray
    ground_truth: tuple[np.ndarray, np.ndarray] | None = None
    source: str = "algorithm1"

    def __post_init__(self):
        x1 = as_matrix(self.x1, "x1")
        x0 = as_matrix(self.x0, "x0")
        u0 = as_matrix(self.u0, "u0")
        if x0.shape != x1.shape:
            raise ValueError(f"x0 shape {x0.shape} does not match x1 shape {x1.shape}")
        if u0.shape[1] != x1.shape[1]:
            raise ValueError(
                f"u0 has {u0.shape[1]} samples but x1 has {x1.shape[1]}"
            )
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "u0", u0)
        if self.source not in DATASET_SOURCES:
            raise ValueError(f"unknown source {self.source!r}; expected one of {DATASET_SOURCES}")
        if self.ground_truth is not None:
            w, r = self.ground_truth
            w = as_matrix(w, "W")
            r = as_matrix(r, "R")
            if w.shape != x1.shape or r.shape != x1.shape:
                raise ValueError(
                    f"ground-truth shapes {w.shape}, {r.shape} do not match x1 shape {x1.shape}"
                )
            object.__setattr__(self, "ground_truth", (w, r))

    @property
    def n(self) -> int:
        return self.x1.shape[0]

    @property
    def p(self) -> int:
        return self.u0.shape[0]

    def __len__(self) -> int:
        return self.x1.shape[1]

    def triples(self):
        """Iterate over ``(x1, x0, u0)`` sample triples."""
        for i in range(len(self)):
            yield self.x1[:, i].copy(), self.x0[:, i].copy(), self.u0[:, i].copy()

    def save_csv(self, path, trial: int = 0) -> None:
        """Write samples with header ``trial,i,x1_1..x1_n,x0_1..x0_n,u0_1..u0_p``."""
        path = Path(path)
        header = (
            ["trial", "i"]
            + [f"x1_{k + 1}" for k in range(self.n)]
            + [f"x0_{k + 1}" for k in range(self.n)]
            + [f"u0_{k + 1}" for k in range(self.p)]
        )
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i in range(len(self)):
                row = [trial, i + 1]
                row += [repr(float(v)) for v in self.x1[:, i]]
                row += [repr(float(v)) for v in self.x0[:, i]]
                row += [repr(float(v)) for v in self.u0[:, i]]
                writer.writerow(row)

    @classmethod
    def load_csv(cls, path, source: str = "algorithm1") -> "Dataset":
        """Read a dataset written by :meth:`save_csv`.

        The state and input dimensions are recovered from the header.
        Ground truth is not part of the schema and comes back as None.
        """
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = [row for row in reader if row]
        n = sum(1 for name in header if name.startswith("x1_"))
        p = sum(1 for name in header if name.startswith("u0_"))
        expected = (
            ["trial", "i"]
            + [f"x1_{k + 1}" for k in range(n)]
            + [f"x0_{k + 1}" for k in range(n)]
            + [f"u0_{k + 1}" for k in range(p)]
        )
        if header != expected or n == 0 or p == 0:
            raise ValueError(
                f"{path}: unexpected header {header!r}; expected trial,i,x1_*,x0_*,u0_*"
            )
        if not rows:
            raise ValueError(f"{path}: no data rows")
        x1 = np.empty((n, len(rows)))
        x0 = np.empty((n, len(rows)))
        u0 = np.empty((p, len(rows)))
        for i, row in enumerate(rows):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}")
            vals = [float(v) for v in row[2:]]
            x1[:, i] = vals[:n]
            x0[:, i] = vals[n : 2 * n]
            u0[:, i] = vals[2 * n :]
        return cls(x1=x1, x0=x0, u0=u0, ground_truth=None, source=source)


def collect(sys: SystemSpec, cfg: AcquisitionConfig, rng: np.random.Generator) -> Dataset:
    """Run one noisy transition from every planned initialization.

    When ``cfg.init_perturbation_std`` is positive, each planned point is
    perturbed by an i.i.d. Gaussian draw before the experiment; the dataset
    records the perturbed (realized) initialization, as a real experiment
    would measure it.

    Returns
    -------
    Dataset
        With ground-truth noise and remainder columns attached.
    """
    if cfg.dim != sys.dim:
        raise ValueError(
            f"config dimension {cfg.dim} does not match system dimension {sys.dim}"
        )
    z = plan_initializations(cfg, sys.dim)
    if cfg.init_perturbation_std > 0.0:
        z = z + cfg.init_perturbation_std * rng.standard_normal(z.shape)
    fx = eval_dynamics_batch(sys, z)
    w = sample_noise_matrix(sys.noise, sys.n, cfg.num_experiments, rng)
    x1 = fx + w
    r = fx - sys.theta_true @ z
    return Dataset(
        x1=x1,
        x0=z[: sys.n],
        u0=z[sys.n :],
        ground_truth=(w, r),
        source="algorithm1",
    )


def collect_single_trajectory(
    sys: SystemSpec, sigma_u: float, num_steps: int, rng: np.random.Generator
) -> Dataset:
    """Free-running baseline: one chained trajectory under Gaussian inputs.

    Starts at the origin and never resets; inputs are i.i.d.
    ``N(0, sigma_u^2 I_p)``.  Each step contributes the triple
    ``(x_{k+1}, x_k, u_k)``.

    Raises
    ------
    DivergenceError
        If a state's 2-norm exceeds 1e6 or turns non-finite; the error
        carries the offending step index.
    ValueError
        If ``sigma_u`` is negative or ``num_steps`` is below 1.
    """
    sigma_u = float(sigma_u)
    if not math.isfinite(sigma_u) or sigma_u < 0:
        raise ValueError(f"sigma_u must be nonnegative, got {sigma_u}")
    if num_steps < 1:
        raise ValueError(f"num_steps must be at least 1, got {num_steps}")
    n, p, dim = sys.n, sys.p, sys.dim
    inputs = sigma_u * rng.standard_normal((p, num_steps))
    noise = sample_noise_matrix(sys.noise, n, num_steps, rng)
    states = np.empty((n, num_steps + 1))
    drift = np.empty((n, num_steps))
    states[:, 0] = 0.0
    z = np.empty(dim)
    guard = DIVERGENCE_NORM * DIVERGENCE_NORM
    dynamics = sys.dynamics
    for k in range(num_steps):
        z[:n] = states[:, k]
        z[n:] = inputs[:, k]
        fx = dynamics(z)
        x_next = fx + noise[:, k]
        norm_sq = float(x_next @ x_next)
        # "not <=" also catches NaN states, which fail every comparison.
        if not norm_sq <= guard:
            raise DivergenceError(k, math.sqrt(norm_sq) if math.isfinite(norm_sq) else math.inf)
        drift[:, k] = fx
        states[:, k + 1] = x_next
    z_cols = np.vstack([states[:, :num_steps], inputs])
    remainder_cols = drift - sys.theta_true @ z_cols
    return Dataset(
        x1=states[:, 1:],
        x0=states[:, :num_steps],
        u0=inputs,
        ground_truth=(noise, remainder_cols),
        source="single_trajectory",
    )
