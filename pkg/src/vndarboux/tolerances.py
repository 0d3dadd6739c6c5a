"""Default tolerances.

All checks go through :func:`tol`, so the whole package can be loosened or
tightened at once with the ``VN_TOLERANCE_SCALE`` environment variable.
"""

import math
import os

HERMITICITY = 1e-12
PSD = 1e-10
TRACE = 1e-12
EIG_RESIDUAL = 1e-10
NULLSPACE_RANK = 1e-8
LAX_EIGENPAIR = 1e-8
IDEMPOTENT = 1e-10
THEOREM1 = 1e-10
COMMUTE = 1e-10
EQUATION_RESIDUAL = 1e-6
FD_STEP = 1e-5


def scale():
    raw = os.environ.get("VN_TOLERANCE_SCALE", "1")
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"VN_TOLERANCE_SCALE must be a float, got {raw!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"VN_TOLERANCE_SCALE must be positive and finite, got {raw!r}")
    return value


def tol(value):
    """Return ``value`` multiplied by the global tolerance scale."""
    return value * scale()
