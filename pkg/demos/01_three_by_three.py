"""A 3x3 self-scattering solution of i rho' = [H, rho^2], built step by step.

Run: python demos/01_three_by_three.py
"""

import math

import numpy as np

from vndarboux.dynamics import casimirs, equation_residual, integrate_rk4
from vndarboux.laxdarboux import DarbouxConfig, verify_theorem1_chain
from vndarboux.seeds import (
    Strategy1Seed,
    dressed_strategy1_full,
    normalize_solution,
    solve_quadratic_diag,
)

np.set_printoptions(precision=4, suppress=True)
s2 = math.sqrt(2)

# seed: xi0 diagonal with xi0^2 - xi0 = Delta, Delta commuting with H
h = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1 / s2]], dtype=complex)
xp, xm = solve_quadratic_diag(1.0, 0.25)
xi0 = np.diag([xp, xm, 0.5]).astype(complex)
seed = Strategy1Seed(h, xi0, a=1.0)
print("Delta_a =\n", seed.delta.real)

# Lax vector: equal mix of one vector from each Delta eigenspace, both with
# the same eigenvalue of xi0 - i H
mu = 1j
phi1 = np.array([0, 0, 1], dtype=complex)
phi2 = np.array([np.exp(1j * math.pi / 4), 1, 0]) / s2
phi0 = (phi1 + phi2) / s2
lax = xi0 - mu * h
print("Lax eigenvalue z =", np.vdot(phi0, lax @ phi0))

chain = verify_theorem1_chain(xi0, h, phi0, phi0, DarbouxConfig(mu))
for step in chain.steps:
    print(f"  {step.name:12s} {step.residual:.1e}")

xi1 = dressed_strategy1_full(seed, mu, phi0)
print("spectrum of xi[1](0):", np.linalg.eigvalsh(xi1(0.0)))

# shift to a nonnegative spectrum, then rescale to unit trace
rho, shift, y = normalize_solution(xi1, seed.family)
print(f"shift = {shift:.6f} (= (sqrt2-1)/2), Y = {y:.6f} (= sqrt2/3)")
print("rho(0) =\n", rho(0.0))
print("spectrum of rho(5):", np.linalg.eigvalsh(rho(5.0)))
print("Tr rho^k, k=1..3:", casimirs(rho(5.0), 3))

ts = np.linspace(-10, 10, 41)
print(f"equation residual on [-10, 10]: {equation_residual(rho, seed.family, ts):.1e}")

traj = integrate_rk4(seed.family, rho(0.0), 0.0, 5.0, dt=1e-3)
err = max(np.max(np.abs(s - rho(t))) for t, s in zip(traj.times[::500], traj.states[::500]))
print(f"RK4 vs closed form on [0, 5]: {err:.1e}")
