"""Learning linearized models of noisy nonlinear systems from one-step experiments.

The package implements a pipeline with four stages:

1. design a set of constrained initial conditions that guarantee persistent
   excitation (``acquisition``),
2. collect one-step transitions from a noisy system started at those points
   (``acquisition``, ``systems``),
3. fit the linear model ``x1 = A x0 + B u0`` by regularized least squares
   (``estimator``, ``tuning``),
4. certify the fit with finite-sample spectral-norm error bounds that split
   into noise, nonlinearity, and regularization contributions (``bounds``).

``harness`` wires the stages into reproducible sweep experiments driven by
JSON configs, writing one CSV per experiment.  ``linalg`` is the small dense
kernel the other modules share.
"""

from . import acquisition, bounds, estimator, harness, linalg, systems, tuning

__all__ = [
    "acquisition",
    "bounds",
    "estimator",
    "harness",
    "linalg",
    "systems",
    "tuning",
]

__version__ = "0.1.0"
