"""Reduction of the 3x3 flow to W'' = a W^2 + b W + c with W = |rho_12|^2.

In the eigenbasis of H the diagonal of rho is conserved. The dressed
solution gives the k = 1 member W = tanh^2(alpha (t - t0)) / beta + gamma.
"""

import numpy as np

from vndarboux.dynamics import Trajectory
from vndarboux.elliptic import h_eigenbasis, jacobi_sn, w_report
from vndarboux.seeds import example3x3

ex = example3x3()
info = h_eigenbasis(ex.h)
print("H eigenbasis order:", info.eigenvalues, " mu_hat =", info.mu_hat, " lambda_hat =", info.lambda_hat)

traj = Trajectory.from_generator(ex.rho_xy, np.linspace(-8, 8, 1601))
rep = w_report(ex.h, traj)
q, k1 = rep.quad, rep.k1
print(f"W'' = {q.a:.6f} W^2 + {q.b:.6f} W + {q.c:.6f}   (3, -4/9, 1/81), residual {q.residual:.1e}")
print(f"k=1 fit: alpha {k1.alpha:.6f} (1/(3 sqrt2) = {1 / (3 * np.sqrt(2)):.6f}), beta {k1.beta:.4f}, "
      f"gamma {k1.gamma:.1e}, misfit {k1.misfit:.1e}")
print("diagonal drift:", rep.diagonal_drift)

u = np.linspace(0, 3, 4)
for k in (0.0, 0.5, 0.99, 1.0):
    print(f"sn(u, {k}) =", np.round(jacobi_sn(u, k), 6))
