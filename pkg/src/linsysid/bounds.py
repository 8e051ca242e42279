"""Finite-sample error bounds for the one-step experiment design.

All bounds are closed-form functions of the design parameters, never of the
data.  For the deterministic design with N experiments on the l1 sphere of
radius ``q`` around ``m``:

* ``pe_bounds`` brackets the eigenvalues of the design Gram matrix ``Z Z'``
  (persistent excitation),
* ``noise_interaction_bound`` bounds ``||W Z' (Z Z' + lam I)^{-1/2}||`` with
  probability ``1 - delta`` for sub-Gaussian noise,
* ``remainder_interaction_bound`` deterministically bounds
  ``||R Z' (Z Z' + lam I)^{-1}||`` under the quadratic remainder envelope,
* ``error_bound`` combines them into a three-term bound on the spectral-norm
  estimation error ``||theta_hat - theta||``, split into noise,
  nonlinearity, and regularization contributions,
* ``prediction_bound`` converts an estimation error into a one-step
  prediction error at a given point.

The standalone noise bound and the noise term inside ``error_bound`` differ
(constants 3 versus 5, and the latter drops the ridge correction inside the
logarithm); both forms are kept verbatim, as each is the sharper statement
for its own use, and no attempt is made to reconcile their slack.

Two constraints recur.  The scale factor ``b >= 1`` must satisfy
``||m||_1 <= (sqrt(b) - 1) q`` so that every design point's l1 norm is
covered by ``sqrt(b) q``; ``minimal_b`` returns the smallest such ``b``.
And the whole design must fit inside the envelope's validity ball:
``||m||_1 + q < c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import spectral_norm
from .systems import SystemSpec

__all__ = [
    "BoundParams",
    "BoundReport",
    "pe_bounds",
    "noise_interaction_bound",
    "remainder_interaction_bound",
    "error_bound",
    "prediction_bound",
    "minimal_b",
]

LOG9 = math.log(9.0)


def minimal_b(m_one_norm: float, q: float) -> float:
    """Smallest ``b`` with ``m_one_norm <= (sqrt(b) - 1) q``.

    Examples
    --------
    >>> minimal_b(0.0, 0.5)
    1.0
    >>> minimal_b(0.6, 0.3)
    9.0
    """
    q = float(q)
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    m_one_norm = float(m_one_norm)
    if not math.isfinite(m_one_norm) or m_one_norm < 0:
        raise ValueError(f"m_one_norm must be nonnegative and finite, got {m_one_norm}")
    root = m_one_norm / q + 1.0
    return root * root


@dataclass(frozen=True)
class BoundParams:
    """Design and model parameters feeding the bounds.

    Both norms of the center point are carried separately: the eigenvalue
    bracket uses ``||m||_2`` while the feasibility constraints use
    ``||m||_1``, and conflating them would silently change the bounds.

    Raises
    ------
    ValueError
        At construction, naming the violated requirement: the burn-in
        ``N >= 4 (n + p)``, the scale constraint
        ``||m||_1 <= (sqrt(b) - 1) q``, the envelope-radius constraint
        ``||m||_1 + q < c``, or a scalar out of range.
    """

    n: int
    p: int
    num_experiments: int
    q: float
    sigma_w: float
    m_one_norm: float = 0.0
    m_two_norm: float = 0.0
    beta: float = 0.0
    c: float = math.inf
    b: float = 1.0
    delta: float = 0.1
    lam: float = 0.0
    theta_norm: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, p={self.p}")
        burn_in = 4 * (self.n + self.p)
        if int(self.num_experiments) != self.num_experiments or self.num_experiments < burn_in:
            raise ValueError(
                f"burn-in requirement violated: need N >= 4(n+p) = {burn_in}, "
                f"got N = {self.num_experiments}"
            )
        object.__setattr__(self, "num_experiments", int(self.num_experiments))
        for name in ("q", "sigma_w", "m_one_norm", "m_two_norm", "beta", "b", "delta", "lam", "theta_norm"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.q) or self.q <= 0:
            raise ValueError(f"q must be positive and finite, got {self.q}")
        for name in ("sigma_w", "m_one_norm", "m_two_norm", "beta", "lam", "theta_norm"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be nonnegative and finite, got {val}")
        c = float(self.c)
        if math.isnan(c) or c <= 0:
            raise ValueError(f"envelope radius c must be positive, got {c}")
        object.__setattr__(self, "c", c)
        if self.m_two_norm > self.m_one_norm * (1.0 + 1e-12) + 1e-300:
            raise ValueError(
                f"inconsistent center norms: ||m||_2 = {self.m_two_norm} exceeds "
                f"||m||_1 = {self.m_one_norm}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.b < 1.0:
            raise ValueError(f"b must be at least 1, got {self.b}")
        slack = (math.sqrt(self.b) - 1.0) * self.q
        if self.m_one_norm > slack * (1.0 + 1e-12) + 1e-300:
            raise ValueError(
                f"scale constraint violated: ||m||_1 = {self.m_one_norm} > "
                f"(sqrt(b) - 1) q = {slack}; increase b (see minimal_b)"
            )
        if not self.m_one_norm + self.q < self.c:
            raise ValueError(
                f"envelope-radius constraint violated: ||m||_1 + q = "
                f"{self.m_one_norm + self.q} is not below c = {self.c}"
            )

    @property
    def dim(self) -> int:
        return self.n + self.p

    @property
    def gamma(self) -> float:
        """Ridge-to-excitation ratio ``lam (n+p) / (N q^2)``."""
        return self.lam * self.dim / (self.num_experiments * self.q * self.q)

    @property
    def zeta(self) -> float:
        """Ridge correction ``4 lam (n+p) / N`` inside the noise bound."""
        return 4.0 * self.lam * self.dim / self.num_experiments

    @classmethod
    def for_system(
        cls,
        sys: SystemSpec,
        num_experiments: int,
        q: float,
        m=None,
        delta: float = 0.1,
        lam: float = 0.0,
        b: float | None = None,
    ) -> "BoundParams":
        """Assemble parameters from a system spec and a design.

        ``b`` defaults to the smallest feasible value for the given center.

        Raises
        ------
        ValueError
            If the system carries no remainder envelope, or any parameter
            constraint fails.
        """
        if sys.envelope is None:
            raise ValueError(
                f"system {sys.name!r} has no remainder envelope (c, beta); bounds unavailable"
            )
        c, beta = sys.envelope
        center = np.zeros(sys.dim) if m is None else np.asarray(m, dtype=float)
        if center.shape != (sys.dim,):
            raise ValueError(f"m has shape {center.shape}, expected ({sys.dim},)")
        m_one = float(np.abs(center).sum())
        m_two = float(math.sqrt(center @ center))
        return cls(
            n=sys.n,
            p=sys.p,
            num_experiments=num_experiments,
            q=q,
            sigma_w=sys.noise.sigma_w,
            m_one_norm=m_one,
            m_two_norm=m_two,
            beta=beta,
            c=c,
            b=minimal_b(m_one, q) if b is None else b,
            delta=delta,
            lam=lam,
            theta_norm=spectral_norm(sys.theta_true),
        )


@dataclass(frozen=True)
class BoundReport:
    """Three-term error bound with its intermediate ratios."""

    noise_term: float
    nonlinearity_term: float
    regularization_term: float
    total: float
    gamma: float
    zeta: float

    def __post_init__(self):
        for name in ("noise_term", "nonlinearity_term", "regularization_term", "gamma", "zeta"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be nonnegative and finite, got {val}")
            object.__setattr__(self, name, val)
        want = self.noise_term + self.nonlinearity_term + self.regularization_term
        if abs(float(self.total) - want) > 1e-12 * max(1.0, want):
            raise ValueError(f"total {self.total} does not equal the sum of terms {want}")
        object.__setattr__(self, "total", float(self.total))


def pe_bounds(params: BoundParams) -> tuple[float, float]:
    """Eigenvalue bracket for the design Gram matrix ``Z Z'``.

    Returns
    -------
    (lower, upper) : tuple of float
        ``lower = N q^2 / (2 (n+p))`` bounds the smallest eigenvalue from
        below; ``upper = N (2 ||m||_2^2 + 2 q^2 / (n+p))`` bounds the
        largest from above.
    """
    n_exp, q, dim = params.num_experiments, params.q, params.dim
    lower = n_exp * q * q / (2.0 * dim)
    upper = n_exp * (2.0 * params.m_two_norm**2 + 2.0 * q * q / dim)
    return lower, upper


def _log_term(params: BoundParams, ridge_corrected: bool) -> float:
    """Inner logarithm shared by the noise bounds.

    ``n log 9 - log delta`` is used instead of ``log(9^n / delta)`` so large
    state dimensions cannot overflow.
    """
    q_sq = params.q * params.q
    denom = q_sq + params.zeta if ridge_corrected else q_sq
    ratio = (4.0 * params.m_two_norm**2 * params.dim + 4.0 * q_sq) / denom
    return (
        params.n * LOG9
        - math.log(params.delta)
        + params.dim * math.log1p(ratio)
    )


def noise_interaction_bound(params: BoundParams) -> float:
    """High-probability bound on ``||W Z' (Z Z' + lam I)^{-1/2}||``.

    Holds with probability at least ``1 - delta`` over the noise draws; the
    ridge parameter enters through ``zeta`` and only ever tightens the
    bound.
    """
    return 3.0 * params.sigma_w * math.sqrt(_log_term(params, ridge_corrected=True))


def remainder_interaction_bound(params: BoundParams) -> float:
    """Deterministic bound on ``||R Z' (Z Z' + lam I)^{-1}||``.

    Valid whenever the remainder satisfies the quadratic envelope on the
    l1 ball of radius ``c`` and the design fits inside it (both enforced by
    ``BoundParams``).
    """
    n, dim = params.n, params.dim
    q, beta, b, lam = params.q, params.beta, params.b, params.lam
    n_exp = params.num_experiments
    first = math.sqrt(2.0 * beta * beta * (n * n + n * params.p) / (1.0 + params.gamma)) * b * q
    second_num = 2.0 * dim * math.sqrt(lam * n_exp * n * beta * beta * b * b * q**4)
    second = second_num / (n_exp * q * q + 2.0 * lam * dim)
    return first + second


def error_bound(params: BoundParams) -> BoundReport:
    """Three-term bound on the spectral-norm estimation error.

    Returns
    -------
    BoundReport
        ``noise_term`` holds with probability at least ``1 - delta``;
        ``nonlinearity_term`` and ``regularization_term`` are deterministic.
        ``total`` is their sum and bounds ``||theta_hat - theta||``.

    Notes
    -----
    As ``lam`` grows, the noise and nonlinearity terms vanish while the
    regularization term converges to ``||theta||``: heavy shrinkage trades
    variance for a bias of exactly the signal's size.
    """
    n, dim = params.n, params.dim
    q, lam, n_exp = params.q, params.lam, params.num_experiments
    noise = (
        5.0
        * params.sigma_w
        * math.sqrt(_log_term(params, ridge_corrected=False))
        / math.sqrt(n_exp * q * q / dim + lam)
    )
    nonlin = (
        math.sqrt(2.0 * (n * n + n * params.p) / (1.0 + params.gamma))
        * params.beta
        * params.b
        * q
    )
    reg_num = 2.0 * dim * (
        lam * params.theta_norm
        + math.sqrt(lam * n_exp * n * params.beta**2 * params.b**2 * q**4)
    )
    reg = reg_num / (2.0 * lam * dim + n_exp * q * q)
    return BoundReport(
        noise_term=noise,
        nonlinearity_term=nonlin,
        regularization_term=reg,
        total=noise + nonlin + reg,
        gamma=params.gamma,
        zeta=params.zeta,
    )


def prediction_bound(theta_err: float, z, beta: float, n: int) -> float:
    """One-step prediction error bound ``theta_err ||z||_2 + sqrt(n) beta ||z||_1^2``.

    The quadratic part is only meaningful where the envelope applies
    (``||z||_1 < c``); that is the caller's responsibility.
    """
    theta_err = float(theta_err)
    beta = float(beta)
    if theta_err < 0 or beta < 0:
        raise ValueError("theta_err and beta must be nonnegative")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError(f"z must be a vector, got shape {z.shape}")
    two = float(math.sqrt(z @ z))
    one = float(np.abs(z).sum())
    return theta_err * two + math.sqrt(n) * beta * one * one
