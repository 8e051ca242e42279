"""Benchmark systems, their linearizations, and process-noise sampling.

A system here is a discrete-time map ``x_next = f(x, u) + w`` whose noiseless
part fixes the origin, together with the true linearization ``theta = [A B]``
of ``f`` at the origin.  The gap ``r(z) = f(z) - theta z`` is the remainder
the identification pipeline has to live with; when it admits a componentwise
quadratic envelope ``|r_i(z)| <= beta * ||z||_1**2`` on the l1 ball of radius
``c``, the pair ``(c, beta)`` is carried on the spec and feeds the error
bounds.

Dynamics callables take the stacked vector ``z = (x, u)`` of length ``n + p``
and return the next state of length ``n``.  A spec marked ``vectorized`` also
accepts a ``(n + p, k)`` batch of columns and returns ``(n, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .linalg import as_matrix

__all__ = [
    "NoiseConfig",
    "SystemSpec",
    "builtin",
    "BUILTIN_NAMES",
    "sample_noise",
    "step",
    "remainder",
    "verify_remainder_envelope",
    "with_noise",
    "with_envelope",
]

NOISE_KINDS = ("none", "gaussian_isotropic", "gaussian_diagonal", "bounded_uniform")

# The noiseless map must fix the origin to this absolute tolerance.
ORIGIN_ATOL = 1e-12

# Central-difference step and tolerance for checking theta against the
# numerical Jacobian of the dynamics at the origin.
JACOBIAN_STEP = 1e-6
JACOBIAN_ATOL = 1e-4


@dataclass(frozen=True)
class NoiseConfig:
    """Process-noise model for one transition.

    Parameters
    ----------
    kind : str
        One of ``none`` (no noise), ``gaussian_isotropic`` (scale is the
        common standard deviation), ``gaussian_diagonal`` (scale is a vector
        of per-coordinate standard deviations), ``bounded_uniform`` (scale is
        the half-width of a symmetric uniform distribution).
    scale : float or sequence of float
        Interpretation depends on ``kind``; see above.

    Notes
    -----
    ``sigma_w`` exposes the sub-Gaussian proxy used by the bounds: the
    largest per-coordinate standard deviation for Gaussian kinds, the
    half-width for the bounded kind, and zero for no noise.
    """

    kind: str = "none"
    scale: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.kind == "gaussian_diagonal":
            vec = np.asarray(self.scale, dtype=float)
            if vec.ndim != 1 or vec.size == 0:
                raise ValueError("gaussian_diagonal requires a 1-D vector of standard deviations")
            if not np.all(np.isfinite(vec)) or np.any(vec < 0):
                raise ValueError("noise scale entries must be finite and nonnegative")
            object.__setattr__(self, "scale", tuple(float(v) for v in vec))
        else:
            val = float(self.scale)
            if not math.isfinite(val) or val < 0:
                raise ValueError("noise scale must be finite and nonnegative")
            object.__setattr__(self, "scale", val)

    @property
    def sigma_w(self) -> float:
        """Sub-Gaussian scale proxy consumed by the error bounds."""
        if self.kind == "none":
            return 0.0
        if self.kind == "gaussian_diagonal":
            return max(self.scale)
        return float(self.scale)


def sample_noise(cfg: NoiseConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one process-noise vector of length ``n``."""
    return sample_noise_matrix(cfg, n, 1, rng)[:, 0]


def sample_noise_matrix(cfg: NoiseConfig, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` independent noise vectors as an ``(n, count)`` matrix."""
    if n < 1 or count < 1:
        raise ValueError(f"noise sample dimensions must be positive, got n={n}, count={count}")
    if cfg.kind == "none":
        return np.zeros((n, count))
    if cfg.kind == "gaussian_isotropic":
        return cfg.scale * rng.standard_normal((n, count))
    if cfg.kind == "gaussian_diagonal":
        stds = np.asarray(cfg.scale, dtype=float)
        if stds.size != n:
            raise ValueError(
                f"gaussian_diagonal scale has {stds.size} entries but the state dimension is {n}"
            )
        return stds[:, None] * rng.standard_normal((n, count))
    return rng.uniform(-cfg.scale, cfg.scale, size=(n, count))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """A benchmark system with its true linearization at the origin.

    Parameters
    ----------
    name : str
        Label used in datasets and harness output.
    n, p : int
        State and input dimensions.
    dynamics : callable
        Noiseless map from stacked ``z = (x, u)`` of length ``n + p`` to the
        next state of length ``n``.  Must fix the origin.
    theta_true : (n, n + p) array
        Linearization ``[A B]`` of the dynamics at the origin.
    noise : NoiseConfig
        Process-noise model added to every transition.
    envelope : (c, beta) or None
        Quadratic remainder envelope valid on the open l1 ball of radius
        ``c``; None when no envelope is known, which disables the bounds.
    vectorized : bool
        Whether ``dynamics`` also maps ``(n + p, k)`` batches to ``(n, k)``.
    skip_jacobian_check : bool
        Escape hatch disabling the construction-time comparison of
        ``theta_true`` against the numerical Jacobian.  Only set this for
        maps whose derivative at the origin genuinely differs from the model
        you intend to estimate.

    Raises
    ------
    ValueError
        If the origin is not a fixed point of the dynamics, if ``theta_true``
        disagrees with the numerical Jacobian at the origin (unless skipped),
        or on malformed dimensions.
    """

    name: str
    n: int
    p: int
    dynamics: Callable[[np.ndarray], np.ndarray]
    theta_true: np.ndarray
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    envelope: tuple[float, float] | None = None
    vectorized: bool = False
    skip_jacobian_check: bool = False

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, p={self.p}")
        theta = as_matrix(self.theta_true, "theta_true")
        if theta.shape != (self.n, self.n + self.p):
            raise ValueError(
                f"theta_true has shape {theta.shape}, expected ({self.n}, {self.n + self.p})"
            )
        object.__setattr__(self, "theta_true", theta)
        if self.envelope is not None:
            c, beta = self.envelope
            c = float(c)
            beta = float(beta)
            if math.isnan(c) or c <= 0:
                raise ValueError(f"envelope radius c must be positive, got {c}")
            if not math.isfinite(beta) or beta < 0:
                raise ValueError(f"envelope coefficient beta must be finite and nonnegative, got {beta}")
            object.__setattr__(self, "envelope", (c, beta))
        origin = self.dynamics(np.zeros(self.dim))
        origin = np.asarray(origin, dtype=float)
        if origin.shape != (self.n,):
            raise ValueError(
                f"dynamics returned shape {origin.shape} at the origin, expected ({self.n},)"
            )
        if np.max(np.abs(origin)) > ORIGIN_ATOL:
            raise ValueError(
                f"system {self.name!r}: the origin is not a fixed point of the noiseless "
                f"dynamics (|f(0)| up to {np.max(np.abs(origin)):.3e})"
            )
        if not self.skip_jacobian_check:
            jac = _numerical_jacobian(self.dynamics, self.dim, self.n)
            dev = float(np.max(np.abs(jac - self.theta_true)))
            if dev > JACOBIAN_ATOL:
                raise ValueError(
                    f"system {self.name!r}: theta_true deviates from the numerical Jacobian "
                    f"at the origin by {dev:.3e} (tolerance {JACOBIAN_ATOL}); pass "
                    f"skip_jacobian_check=True only if this is intended"
                )

    @property
    def dim(self) -> int:
        """Stacked dimension ``n + p``."""
        return self.n + self.p


def _numerical_jacobian(f, dim: int, n: int) -> np.ndarray:
    jac = np.empty((n, dim))
    for j in range(dim):
        hi = np.zeros(dim)
        hi[j] = JACOBIAN_STEP
        jac[:, j] = (np.asarray(f(hi)) - np.asarray(f(-hi))) / (2.0 * JACOBIAN_STEP)
    return jac


def eval_dynamics(sys: SystemSpec, z: np.ndarray) -> np.ndarray:
    """Evaluate the noiseless map on one stacked vector, validating the output."""
    z = np.asarray(z, dtype=float)
    if z.shape != (sys.dim,):
        raise ValueError(f"z has shape {z.shape}, expected ({sys.dim},)")
    fx = np.asarray(sys.dynamics(z), dtype=float)
    if fx.shape != (sys.n,):
        raise ValueError(
            f"system {sys.name!r}: dynamics returned shape {fx.shape}, expected ({sys.n},)"
        )
    if not np.all(np.isfinite(fx)):
        raise ValueError(
            f"system {sys.name!r}: dynamics produced a non-finite value at z={z.tolist()}"
        )
    return fx


def eval_dynamics_batch(sys: SystemSpec, z_cols: np.ndarray) -> np.ndarray:
    """Evaluate the noiseless map on a ``(dim, k)`` batch of stacked columns."""
    z_cols = np.asarray(z_cols, dtype=float)
    if z_cols.ndim != 2 or z_cols.shape[0] != sys.dim:
        raise ValueError(f"batch has shape {z_cols.shape}, expected ({sys.dim}, k)")
    if sys.vectorized:
        out = np.asarray(sys.dynamics(z_cols), dtype=float)
        if out.shape != (sys.n, z_cols.shape[1]):
            raise ValueError(
                f"system {sys.name!r}: vectorized dynamics returned shape {out.shape}, "
                f"expected ({sys.n}, {z_cols.shape[1]})"
            )
    else:
        out = np.empty((sys.n, z_cols.shape[1]))
        for k in range(z_cols.shape[1]):
            out[:, k] = np.asarray(sys.dynamics(z_cols[:, k]), dtype=float)
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.all(np.isfinite(out), axis=0)))
        raise ValueError(
            f"system {sys.name!r}: dynamics produced a non-finite value at "
            f"z={z_cols[:, bad].tolist()}"
        )
    return out


def step(
    sys: SystemSpec, z: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One noisy transition from the stacked vector ``z``.

    Returns
    -------
    (x_next, w) : tuple of ndarray
        The next state and the noise realization that produced it.
    """
    fx = eval_dynamics(sys, z)
    w = sample_noise(sys.noise, sys.n, rng)
    return fx + w, w


def remainder(sys: SystemSpec, z: np.ndarray) -> np.ndarray:
    """Gap ``f(z) - theta z`` between the dynamics and its linearization."""
    z = np.asarray(z, dtype=float)
    return eval_dynamics(sys, z) - sys.theta_true @ z


def verify_remainder_envelope(
    sys: SystemSpec, c: float, beta: float, samples_per_axis: int = 25
) -> tuple[bool, float, np.ndarray]:
    """Check ``|r_i(z)| <= beta ||z||_1^2`` on a lattice inside the l1 ball.

    The lattice is the product of ``samples_per_axis`` equispaced points in
    ``[-c, c]`` per coordinate, restricted to ``0 < ||z||_1 < c``.  This is a
    falsification aid, not a proof: a coarse lattice can miss violations
    between grid points.

    Returns
    -------
    (holds, worst_ratio, worst_z)
        ``worst_ratio`` is the largest observed ``max_i |r_i(z)| / ||z||_1^2``
        and ``worst_z`` attains it; ``holds`` is ``worst_ratio <= beta``.
        With no lattice point strictly inside the ball the check is vacuous
        and returns ``(True, 0.0, zeros)``.

    Raises
    ------
    ValueError
        If ``c`` is not positive, ``beta`` is negative, or
        ``samples_per_axis < 2``.
    """
    c = float(c)
    beta = float(beta)
    if math.isnan(c) or c <= 0:
        raise ValueError(f"envelope radius c must be positive, got {c}")
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"envelope coefficient beta must be finite and nonnegative, got {beta}")
    if samples_per_axis < 2:
        raise ValueError(f"samples_per_axis must be at least 2, got {samples_per_axis}")
    if not math.isfinite(c):
        raise ValueError("envelope radius c must be finite for lattice verification")
    axis = np.linspace(-c, c, samples_per_axis)
    grids = np.meshgrid(*([axis] * sys.dim), indexing="ij")
    z_cols = np.stack([g.ravel() for g in grids])
    l1 = np.abs(z_cols).sum(axis=0)
    keep = (l1 > 0.0) & (l1 < c)
    if not np.any(keep):
        return True, 0.0, np.zeros(sys.dim)
    z_cols = z_cols[:, keep]
    l1 = l1[keep]
    resid = eval_dynamics_batch(sys, z_cols) - sys.theta_true @ z_cols
    ratios = np.max(np.abs(resid), axis=0) / (l1 * l1)
    worst = int(np.argmax(ratios))
    worst_ratio = float(ratios[worst])
    return worst_ratio <= beta, worst_ratio, z_cols[:, worst].copy()


def with_noise(sys: SystemSpec, noise: NoiseConfig) -> SystemSpec:
    """Copy of ``sys`` with a different process-noise model."""
    return replace(sys, noise=noise)


def with_envelope(sys: SystemSpec, envelope: tuple[float, float] | None) -> SystemSpec:
    """Copy of ``sys`` with a different remainder envelope."""
    return replace(sys, envelope=envelope)


def _pendulum_map(z):
    # z = (angle, angular velocity, torque); Euler discretization at 0.1s of a
    # damped-free pendulum with gravity gain 9.8.
    return np.stack((z[0] + 0.1 * z[1], -0.98 * np.sin(z[0]) + z[1] + 0.1 * z[2]))


_PENDULUM_THETA = np.array([[1.0, 0.1, 0.0], [-0.98, 1.0, 0.1]])

_STRONG_A = np.array([[0.9, 0.6], [0.0, 0.8]])
_STRONG_B = np.array([[1.0], [1.0]])
_STRONG_THETA = np.hstack([_STRONG_A, _STRONG_B])


def _strong_map(z):
    # Linear core plus polynomial remainder that grows fast away from the
    # origin: (x1^3 + x2^5, x1 * x2^2).
    lin = _STRONG_THETA @ np.asarray(z, dtype=float)
    return lin + np.stack((z[0] ** 3 + z[1] ** 5, z[0] * z[1] ** 2))


def _linear_map(z):
    return _STRONG_THETA @ np.asarray(z, dtype=float)


def builtin(name: str) -> SystemSpec:
    """Construct one of the named benchmark systems.

    ``pendulum``
        Discretized pendulum, n=2, p=1, Gaussian isotropic noise with
        standard deviation 0.5, remainder envelope (c, beta) = (2, 1).
    ``strong``
        Stable linear core with a strong polynomial remainder, n=2, p=1,
        Gaussian isotropic noise with standard deviation 0.1, no envelope.
    ``linear2x1``
        The linear core of ``strong`` with zero remainder, same noise, and
        the degenerate envelope (inf, 0).
    """
    if name == "pendulum":
        return SystemSpec(
            name="pendulum",
            n=2,
            p=1,
            dynamics=_pendulum_map,
            theta_true=_PENDULUM_THETA.copy(),
            noise=NoiseConfig("gaussian_isotropic", 0.5),
            envelope=(2.0, 1.0),
            vectorized=True,
        )
    if name == "strong":
        return SystemSpec(
            name="strong",
            n=2,
            p=1,
            dynamics=_strong_map,
            theta_true=_STRONG_THETA.copy(),
            noise=NoiseConfig("gaussian_isotropic", 0.1),
            envelope=None,
            vectorized=True,
        )
    if name == "linear2x1":
        return SystemSpec(
            name="linear2x1",
            n=2,
            p=1,
            dynamics=_linear_map,
            theta_true=_STRONG_THETA.copy(),
            noise=NoiseConfig("gaussian_isotropic", 0.1),
            envelope=(math.inf, 0.0),
            vectorized=True,
        )
    raise ValueError(f"unknown builtin system {name!r}; expected one of {BUILTIN_NAMES}")


BUILTIN_NAMES = ("pendulum", "strong", "linear2x1")
