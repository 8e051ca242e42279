"""Builtin benchmark systems: stepping them and checking the remainder envelope.

Every system is a discrete-time map x_{k+1} = f(x_k, u_k) + w_k with f(0) = 0.
The library stores the exact linearization Theta = [A B] at the origin, so we
can look at the higher-order remainder r(z) = f(z) - Theta z directly, and
check the quadratic envelope |r_i(z)| <= beta * ||z||_1^2 that the error
bounds build on.
"""

import numpy as np

from linsysid.systems import (
    BUILTIN_NAMES,
    builtin,
    remainder,
    step,
    verify_remainder_envelope,
)


def main():
    print("builtin systems:", ", ".join(BUILTIN_NAMES))
    print()

    pend = builtin("pendulum")
    print(f"{pend.name}: n={pend.n} states, p={pend.p} inputs, noise={pend.noise.kind}")
    print("linearization Theta = [A B]:")
    print(pend.theta_true)
    print()

    rng = np.random.default_rng(0)
    z = np.array([0.3, 0.0, 0.1])
    print("one noisy step from the stacked point z = (x, u) = (0.3, 0, 0.1):")
    x_next, w = step(pend, z, rng)
    print("  x_next =", x_next)
    print("  noise  =", w)
    print()

    r = remainder(pend, z)
    print("remainder f(z) - Theta z at that point:", r)
    print("quadratic envelope value beta*||z||_1^2 =", 1.0 * np.abs(z).sum() ** 2)
    print()

    c, beta = pend.envelope
    holds, worst_ratio, worst_z = verify_remainder_envelope(pend, c, beta)
    print(f"envelope (c={c}, beta={beta}) over a lattice of the l1 ball:")
    print(f"  holds={holds}, worst |r_i|/||z||_1^2 = {worst_ratio:.4f} (<= beta)")
    print(f"  tightest point z = {worst_z}")
    print()

    tighter = verify_remainder_envelope(pend, c, 0.03)
    print(f"a beta of 0.03 would be too small: holds={tighter[0]}, "
          f"worst ratio {tighter[1]:.2f} > 0.03")


if __name__ == "__main__":
    main()
