"""Fitting the linearization and decomposing the estimation error.

The estimator solves the ridge problem min ||X - Theta Z||_F^2 + lam ||Theta||_F^2
in closed form via the normal equations.  On simulated data the library can
also split the realized error Theta_hat - Theta into its three exact parts:
regularization bias, noise interaction, and nonlinearity interaction.
"""

import numpy as np

from linsysid.acquisition import AcquisitionConfig, collect
from linsysid.bounds import prediction_bound
from linsysid.estimator import (
    assemble_batches,
    error_decomposition,
    estimation_error,
    fit,
    predict,
)
from linsysid.systems import builtin, eval_dynamics


def main():
    pend = builtin("pendulum")
    rng = np.random.default_rng(2)
    data = collect(pend, AcquisitionConfig(num_experiments=2000, q=0.9, m=np.zeros(3)), rng)
    est = fit(*assemble_batches(data), 0.0)

    print("true  Theta = [A B]:")
    print(pend.theta_true)
    print("fitted Theta_hat (N=2000, q=0.9, lam=0):")
    print(np.round(est.theta_hat, 4))
    err = estimation_error(est, pend.theta_true)
    print(f"spectral-norm estimation error: {err:.4f}")
    print()

    reg, noise, nonlin = error_decomposition(est, data, pend.theta_true)
    print("exact error decomposition (spectral norms of the three summands):")
    print(f"  regularization bias : {reg:.5f}   (lam=0, so exactly zero)")
    print(f"  noise interaction   : {noise:.5f}")
    print(f"  nonlinearity        : {nonlin:.5f}")
    print(f"  triangle bound       : {reg + noise + nonlin:.5f} >= {err:.5f}")
    print()

    z = np.array([0.1, 0.0, 0.0])
    pred = predict(est, z)
    truth = eval_dynamics(pend, z)
    c, beta = pend.envelope
    cap = prediction_bound(err, z, beta, pend.n)
    print("one-step prediction at z = (0.1, 0, 0):")
    print(f"  predicted x_next = {pred}")
    print(f"  noiseless truth  = {truth}")
    print(f"  |difference|     = {np.linalg.norm(pred - truth):.6f}")
    print(f"  guaranteed cap   = {cap:.6f} (error*||z|| + sqrt(n)*beta*||z||_1^2)")
    print()

    ridge = fit(*assemble_batches(data), 50.0)
    print(f"a heavy ridge weight shrinks the estimate: "
          f"||Theta_hat||_F drops from {np.linalg.norm(est.theta_hat):.3f} "
          f"to {np.linalg.norm(ridge.theta_hat):.3f} at lam=50")


if __name__ == "__main__":
    main()
