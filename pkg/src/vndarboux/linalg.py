"""Dense complex matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and shape
``(d, d)``. The helpers here add the shape/finiteness gates and the
tolerance-checked spectral routines that the rest of the package relies on.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np
import scipy.linalg

from . import tolerances as tols
from .errors import (
    ConvergenceError,
    DimensionError,
    MatrixFormatError,
    NotDensityMatrixError,
    NotHermitianError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(m, name="matrix"):
    """Validate ``m`` as a finite square matrix and return it as complex128."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, dim=None, name="vector"):
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def max_norm(m):
    """Largest absolute entry."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def mat_mul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b


def commutator(a, b):
    """Return ``ab - ba``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b + b @ a


def hermiticity_error(m):
    m = np.asarray(m)
    return max_norm(m - dagger(m))


def is_hermitian(m, atol=None):
    atol = tols.tol(tols.HERMITICITY) if atol is None else atol
    return hermiticity_error(m) <= atol


def check_hermitian(m, name="matrix", atol=None):
    """Return ``m`` as a complex array, raising if it is not Hermitian."""
    m = as_matrix(m, name)
    atol = tols.tol(tols.HERMITICITY) if atol is None else atol
    err = hermiticity_error(m)
    if err > atol:
        raise NotHermitianError(f"{name} is not Hermitian: max|M - M^dag| = {err:.3e} > {atol:.1e}")
    return m


def check_density(m, name="rho"):
    """Gate for density matrices: Hermitian, PSD and unit trace."""
    m = check_hermitian(m, name)
    evals = np.linalg.eigvalsh(m)
    if evals[0] < -tols.tol(tols.PSD):
        raise NotDensityMatrixError(f"{name} has negative eigenvalue {evals[0]:.3e}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tols.tol(tols.TRACE):
        raise NotDensityMatrixError(f"{name} has trace {tr!r}, expected 1")
    return m


def herm_eig(m):
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    evals : ndarray, shape (d,)
        Real eigenvalues in ascending order.
    evecs : ndarray, shape (d, d)
        Orthonormal eigenvectors as columns. Bases of degenerate eigenspaces
        are arbitrary.
    """
    m = check_hermitian(m)
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigh failed: {exc}") from exc
    scale = max(1.0, max_norm(m))
    resid = max_norm(m @ evecs - evecs * evals)
    unit = max_norm(dagger(evecs) @ evecs - np.eye(m.shape[0]))
    limit = tols.tol(tols.EIG_RESIDUAL) * scale
    if resid > limit or unit > tols.tol(tols.EIG_RESIDUAL):
        raise ConvergenceError(f"eigen-decomposition inaccurate: residual {resid:.2e}, unitarity {unit:.2e}")
    return evals, evecs


def general_eigvec(m, z, rank_tol=None):
    """Orthonormal basis of the numerical null space of ``m - z I``.

    Singular values below ``rank_tol * max(1, sigma_max)`` count as zero.
    Returns a (possibly empty) list of unit vectors.
    """
    m = as_matrix(m)
    rank_tol = tols.tol(tols.NULLSPACE_RANK) if rank_tol is None else rank_tol
    shifted = m - complex(z) * np.eye(m.shape[0])
    _, s, vh = np.linalg.svd(shifted)
    cutoff = rank_tol * max(1.0, s[0])
    return [vh[i].conj().copy() for i in range(len(s)) if s[i] <= cutoff]


def matrix_exp(m):
    """Matrix exponential (Pade scaling-and-squaring)."""
    return scipy.linalg.expm(as_matrix(m))


def unitary_propagator(h, t):
    """``exp(-i h t)`` for Hermitian ``h``."""
    return matrix_exp(-1j * t * as_matrix(h))


def tensor_product(a, b):
    """Kronecker product; ``(a x b)[i*db + k, j*db + l] = a[i, j] b[k, l]``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def matrix_power(m, k):
    return np.linalg.matrix_power(as_matrix(m), int(k))


# -- matrix JSON ------------------------------------------------------------

def matrix_to_json(m):
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(x.real), float(x.imag)] for x in row] for row in m],
    }


def matrix_from_json(obj):
    """Parse ``{"dim": d, "entries": [[[re, im], ...], ...]}``."""
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise MatrixFormatError('matrix JSON needs keys "dim" and "entries"')
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise MatrixFormatError(f"dim must be a positive integer, got {dim!r}")
    rows = obj["entries"]
    if not isinstance(rows, list) or len(rows) != dim:
        raise MatrixFormatError(f"expected {dim} rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise MatrixFormatError(f"row {i} is ragged: expected {dim} entries")
        for j, pair in enumerate(row):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise MatrixFormatError(f"entry ({i},{j}) must be a [re, im] pair")
            try:
                re, im = float(pair[0]), float(pair[1])
            except (TypeError, ValueError):
                raise MatrixFormatError(f"entry ({i},{j}) is not numeric") from None
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixFormatError(f"entry ({i},{j}) is not finite")
            out[i, j] = complex(re, im)
    return out


def load_matrix(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON: {exc}") from exc
    return matrix_from_json(obj)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix(path, m):
    atomic_write_text(path, json.dumps(matrix_to_json(m)) + "\n")
