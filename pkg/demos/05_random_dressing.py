"""Dressing random Hermitian seeds, and the shift/rescale covariance for n = 2."""

import numpy as np

from vndarboux.dynamics import equation_residual
from vndarboux.laxdarboux import darboux_rho, projector, rescale_solution, shift_solution, verify_theorem1_chain
from vndarboux.verify import random_commuting_shift_case, random_darboux_instance

rng = np.random.default_rng(3)
for hermitian in (True, False):
    rho, a, phi, chi, cfg = random_darboux_instance(rng, 5, hermitian)
    chain = verify_theorem1_chain(rho, a, phi, chi, cfg)
    rho1 = darboux_rho(rho, a, projector(phi, chi), cfg)
    same = np.allclose(np.sort_complex(np.linalg.eigvals(rho1)), np.sort_complex(np.linalg.eigvals(rho)))
    print(f"hermitian_mode={hermitian}: chain passed {chain.passed}, spectra agree {same}")

fam, gen, x = random_commuting_shift_case(rng, 2)
ts = np.linspace(-1, 1, 21)
print(f"n=2 dressed solution residual: {equation_residual(gen, fam, ts):.1e}")
shifted = shift_solution(gen, x, fam)
for y in (1 / 3, 2.0, -1.0):
    print(f"  shift + rescale Y={y:+.3f}: residual {equation_residual(rescale_solution(shifted, y), fam, ts):.1e}")
