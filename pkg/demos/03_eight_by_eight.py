"""8x8 example from a seed that anticommutes with H.

H = alpha1 (x) 1 + 1 (x) sigma1 and xi = alpha2 (x) sigma2 + alpha3 (x) sigma3,
with the Dirac alpha matrices. The Lax vector flows non-unitarily and the
dressed solution interpolates between two stationary states.
"""

import numpy as np

from vndarboux.seeds import example8x8

np.set_printoptions(precision=3, suppress=True, linewidth=120)

ex = example8x8()  # checks itself against the displayed closed form
print("{xi, H} =", np.max(np.abs(ex.xi @ ex.h + ex.h @ ex.xi)))
print("(xi - iH) phi0 =", np.linalg.norm((ex.xi - 1j * ex.h) @ ex.phi0))
for t in (-2.0, 0.0, 2.0):
    print(f"t = {t:+.1f}: spectrum {np.linalg.eigvalsh(ex.xi1(t))}")
print("xi[1](0) real part:\n", ex.xi1(0.0).real)
print("largest deviation from the displayed matrix:", ex.validate())
print("normalised rho(0) spectrum:", np.linalg.eigvalsh(ex.rho(0.0)))
