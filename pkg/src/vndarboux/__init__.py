"""Exact solutions of nonlinear von Neumann equations by binary Darboux dressing.

The equation family is ``i rho' = sum_k [A^(n-k) rho A^k, rho]`` (``n = 1``,
``A = H`` gives ``i rho' = [H, rho^2]``). Modules:

``linalg``       validated complex matrix helpers and matrix JSON
``dynamics``     right-hand sides, Casimirs, RK4 oracle, trajectories
``laxdarboux``   Lax pairs, the binary Darboux map, shift/rescale covariance
``seeds``        seed strategies and the 3x3 and 8x8 worked examples
``elliptic``     3x3 reduction to ``W'' = aW^2 + bW + c`` and Jacobi ``sn``
``figures``      data behind the 3x3 self-scattering figures
``verify``       invariant suites used by the CLI
"""

__version__ = "0.1.0"

from .dynamics import (
    EquationFamily,
    PolynomialF,
    Trajectory,
    casimirs,
    effective_hamiltonian,
    equation_residual,
    integrate_rk4,
    rhs_family,
    rhs_fvn,
    spin1_matrices,
)
from .elliptic import jacobi_sn, w_report
from .errors import (
    BlowUpError,
    ConsistencyError,
    ConvergenceError,
    DimensionError,
    MatrixFormatError,
    NotDensityMatrixError,
    NotHermitianError,
    PreconditionError,
    VNError,
)
from .laxdarboux import (
    DarbouxConfig,
    LaxEigenpair,
    TrivialTransformationWarning,
    darboux_rho,
    lax_residuals,
    projector,
    rescale_solution,
    shift_solution,
    similarity_T,
    verify_theorem1_chain,
)
from .seeds import (
    Strategy1Seed,
    Strategy2Seed,
    dressed_strategy1,
    dressed_strategy1_full,
    dressed_strategy2,
    dressed_strategy2_full,
    example3x3,
    example8x8,
)
