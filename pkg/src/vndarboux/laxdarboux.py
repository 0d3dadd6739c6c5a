"""Lax pairs, the binary Darboux transformation and its covariance maps.

Conventions: kets are 1-D complex arrays; a bra is the conjugate of the
stored ket. The rank-one projector built from a ket ``phi`` and a ket
``chi`` (whose bra enters) is ``|phi><chi| / <chi|phi>``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from . import tolerances as tols
from .dynamics import EquationFamily, Generator, Trajectory, effective_family_hamiltonian
from .errors import PreconditionError, VNError
from .linalg import (
    as_matrix,
    as_vector,
    check_hermitian,
    commutator,
    hermiticity_error,
    matrix_exp,
    max_norm,
)


class TrivialTransformationWarning(UserWarning):
    """The Darboux parameters make the transformation the identity."""


@dataclass
class LaxEigenpair:
    """Spectral parameter ``mu``, Lax eigenvalue ``z`` and seed ket ``phi0``.

    ``phi0`` is stored with unit norm; projectors do not depend on the
    normalisation. ``propagator`` optionally maps ``t`` to the (unnormalised)
    Lax solution ``phi(t)`` and is needed for the temporal residual.
    """

    mu: complex
    z: complex
    phi0: np.ndarray
    propagator: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        self.mu = complex(self.mu)
        self.z = complex(self.z)
        phi = as_vector(self.phi0, name="phi0")
        nrm = np.linalg.norm(phi)
        if nrm == 0:
            raise PreconditionError("phi0 is the zero vector", check="phi0_nonzero")
        self.phi0 = phi / nrm

    @classmethod
    def from_seed(cls, rho0, a, mu, phi0, z=None, propagator=None):
        """Build and validate an eigenpair of ``rho0 - mu A``.

        ``z`` defaults to the Rayleigh quotient. Raises if the residual
        ``||(rho0 - mu A - z) phi0||`` exceeds the eigenpair tolerance.
        """
        rho0 = as_matrix(rho0, "rho0")
        a = as_matrix(a, "A")
        phi = as_vector(phi0, rho0.shape[0], "phi0")
        phi = phi / np.linalg.norm(phi)
        lax = rho0 - complex(mu) * a
        if z is None:
            z = np.vdot(phi, lax @ phi)
        resid = np.linalg.norm(lax @ phi - z * phi)
        if resid > tols.tol(tols.LAX_EIGENPAIR):
            raise PreconditionError(
                f"phi0 is not an eigenvector of rho - mu A (residual {resid:.3e})",
                check="lax_eigenpair",
            )
        return cls(mu, z, phi, propagator)


@dataclass(frozen=True)
class DarbouxConfig:
    """Parameters ``mu``, ``nu`` of the binary transformation.

    In ``hermitian_mode`` ``nu`` is forced to ``conj(mu)`` and the
    chi-solution is identified with the phi-solution; this keeps Hermitian
    seeds Hermitian.
    """

    mu: complex
    nu: Optional[complex] = None
    hermitian_mode: bool = True

    def __post_init__(self):
        mu = complex(self.mu)
        if not (math.isfinite(mu.real) and math.isfinite(mu.imag)):
            raise ValueError("mu must be finite")
        object.__setattr__(self, "mu", mu)
        if self.nu is None:
            if not self.hermitian_mode:
                raise ValueError("nu is required outside hermitian mode")
            object.__setattr__(self, "nu", mu.conjugate())
        else:
            nu = complex(self.nu)
            if self.hermitian_mode and abs(nu - mu.conjugate()) > 1e-15 * max(1.0, abs(mu)):
                raise ValueError("hermitian mode requires nu = conj(mu)")
            object.__setattr__(self, "nu", nu)

    @property
    def is_trivial(self):
        """``mu == nu``: then rho[1] = rho (for real mu in hermitian mode)."""
        return self.mu == self.nu


def lax_residuals(a, rho, pair: LaxEigenpair, n, t=0.0, temporal=True, h=None):
    """Residuals of the spatial and temporal Lax equations at time ``t``.

    ``rho`` is a matrix (evaluated at ``t``) or a generator ``t -> rho(t)``.
    The Lax solution is ``pair.propagator(t)`` when registered, else
    ``pair.phi0`` (only allowed when ``temporal`` is False). Both residuals
    are relative to ``||phi(t)||``. The time derivative of ``phi`` uses a
    central difference with step ``h``.

    Returns ``(spatial, temporal)``; ``temporal`` is None when not requested.
    """
    a = as_matrix(a, "A")
    rho_t = as_matrix(rho(t) if callable(rho) else rho, "rho")
    if pair.propagator is None:
        if temporal:
            raise PreconditionError("no propagator registered for this Lax eigenpair", check="propagator")
        phi = pair.phi0
    else:
        phi = as_vector(pair.propagator(t), a.shape[0], "phi(t)")
    nrm = np.linalg.norm(phi)
    spatial = np.linalg.norm((rho_t - pair.mu * a) @ phi - pair.z * phi) / nrm
    if not temporal:
        return float(spatial), None
    h = tols.FD_STEP if h is None else h
    dphi = (pair.propagator(t + h) - pair.propagator(t - h)) / (2 * h)
    fam = EquationFamily(n, a)
    gen_op = effective_family_hamiltonian(fam, rho_t) - pair.mu * np.linalg.matrix_power(a, n + 1)
    temporal_res = np.linalg.norm(1j * dphi - gen_op @ phi) / nrm
    return float(spatial), float(temporal_res)


def projector(phi, chi):
    """Rank-one idempotent ``|phi><chi| / <chi|phi>``."""
    phi = as_vector(phi, name="phi")
    chi = as_vector(chi, phi.shape[0], "chi")
    overlap = np.vdot(chi, phi)
    if abs(overlap) <= 1e-10 * np.linalg.norm(phi) * np.linalg.norm(chi):
        raise PreconditionError("<chi|phi> vanishes; the transformation is singular", check="projector_overlap")
    return np.outer(phi, chi.conj()) / overlap


def idempotency_error(p):
    return max_norm(p @ p - p)


def darboux_rho(rho, a, p, cfg: DarbouxConfig):
    """``rho[1] = rho + (mu - nu) [P, A]``."""
    rho = as_matrix(rho, "rho")
    a = as_matrix(a, "A")
    p = as_matrix(p, "P")
    err = idempotency_error(p)
    if err > tols.tol(tols.IDEMPOTENT) * max(1.0, max_norm(p) ** 2):
        raise PreconditionError(f"P is not idempotent (error {err:.3e})", check="idempotent")
    if cfg.is_trivial:
        warnings.warn("mu == nu: trivial transformation, rho[1] = rho", TrivialTransformationWarning, stacklevel=2)
    out = rho + (cfg.mu - cfg.nu) * commutator(p, a)
    if cfg.hermitian_mode and hermiticity_error(rho) <= tols.tol(tols.HERMITICITY) * max(1.0, max_norm(rho)):
        herr = hermiticity_error(out)
        if herr > tols.tol(1e-10) * max(1.0, max_norm(out)):
            raise VNError(f"Darboux output lost hermiticity ({herr:.3e}); P is inconsistent with hermitian mode")
    return out


def similarity_T(p, cfg: DarbouxConfig, inverse=False):
    """Similarity matrix of the transformation, ``rho[1] = T rho T^-1``.

    ``T = 1 + (mu - nu)/nu P`` is checked against ``exp(P log(mu/nu))``
    (principal branch). With ``inverse=True`` returns
    ``T^-1 = 1 + (nu - mu)/mu P`` instead.
    """
    p = as_matrix(p, "P")
    mu, nu = cfg.mu, cfg.nu
    if nu == 0:
        raise ValueError("nu = 0: T is undefined")
    if mu == 0:
        raise ValueError("mu = 0: log(mu/nu) is undefined")
    err = idempotency_error(p)
    if err > tols.tol(tols.IDEMPOTENT) * max(1.0, max_norm(p) ** 2):
        raise PreconditionError(f"P is not idempotent (error {err:.3e})", check="idempotent")
    eye = np.eye(p.shape[0], dtype=complex)
    t_rational = eye + (mu - nu) / nu * p
    t_exp = matrix_exp(cmath.log(mu / nu) * p)
    diff = max_norm(t_rational - t_exp)
    if diff > tols.tol(1e-10) * max(1.0, max_norm(t_rational)):
        raise VNError(f"rational and exponential forms of T disagree by {diff:.3e}")
    if inverse:
        return eye + (nu - mu) / mu * p
    return t_rational


@dataclass
class StepResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)


@dataclass
class ChainReport:
    """Per-step residuals of the similarity-form derivation."""

    steps: List[StepResult]

    @property
    def passed(self):
        return all(s.passed for s in self.steps)

    @property
    def first_failure(self):
        for s in self.steps:
            if not s.passed:
                return s.name
        return None

    def to_dict(self):
        return {
            "passed": self.passed,
            "first_failure": self.first_failure,
            "steps": [
                {"name": s.name, "residual": s.residual, "tolerance": s.tolerance, "passed": s.passed}
                for s in self.steps
            ],
        }


def verify_theorem1_chain(rho, a, phi, chi, cfg: DarbouxConfig, p=None, atol=None):
    """Check every step from the Lax eigen-equations to ``rho[1] = T rho T^-1``.

    ``phi`` must be an eigenvector of ``rho - mu A`` and the bra of ``chi`` a
    left eigenvector of ``rho - nu A``. The eigenvalues are taken as Rayleigh
    quotients, so a bad ``phi`` shows up in the first step (``LP1a``).
    A precomputed ``p`` may be supplied (used for fault injection).
    Residuals are max-norms scaled by ``max(1, |rho|, |A|)``.
    """
    rho = as_matrix(rho, "rho")
    a = as_matrix(a, "A")
    phi = as_vector(phi, rho.shape[0], "phi")
    chi = as_vector(chi, rho.shape[0], "chi")
    mu, nu = cfg.mu, cfg.nu
    atol = tols.tol(tols.THEOREM1) if atol is None else atol
    scale = max(1.0, max_norm(rho), max_norm(a))
    if p is None:
        p = projector(phi, chi)
    l_mu = rho - mu * a
    l_nu = rho - nu * a
    z_mu = np.vdot(phi, l_mu @ phi) / np.vdot(phi, phi)
    z_nu = np.vdot(chi, l_nu @ chi) / np.vdot(chi, chi)

    pa = commutator(p, a)
    rho1 = rho + (mu - nu) * pa
    left = np.eye(len(phi)) + (mu - nu) / nu * p
    right = np.eye(len(phi)) + (nu - mu) / mu * p
    items = [
        ("LP1a", z_mu * p - l_mu @ p),
        ("LP3a", z_nu * p - p @ l_nu),
        ("PLP1a", p @ l_mu @ p - l_mu @ p),
        ("PLP3a", p @ l_nu @ p - p @ l_nu),
        ("PA_identity", pa - ((nu - mu) / (mu * nu) * p @ rho @ p - rho @ p / mu + p @ rho / nu)),
        ("central", rho1 - left @ rho @ right),
    ]
    steps = [StepResult(name, max_norm(r) / scale, atol) for name, r in items]
    try:
        t_mat = similarity_T(p, cfg)
        t_inv = similarity_T(p, cfg, inverse=True)
        steps.append(StepResult("T_inverse", max_norm(t_mat @ t_inv - np.eye(len(phi))), atol))
        steps.append(StepResult("similarity", max_norm(rho1 - t_mat @ rho @ t_inv) / scale, atol))
    except VNError:
        steps.append(StepResult("similarity", math.inf, atol))
    return ChainReport(steps)


# -- Covariance under shifts and rescaling ------------------------------------

def _check_commutes(x, m, what, atol):
    err = max_norm(commutator(x, m))
    if err > atol:
        raise PreconditionError(f"X does not commute with {what} (|[X, .]| = {err:.3e})", check="commutation")


def _shift_unitary(x, fam, t):
    xa = x @ np.linalg.matrix_power(fam.a, fam.n)
    return matrix_exp(-1j * (fam.n + 1) * t * xa)


def shift_solution(sol: Union[Trajectory, Generator], x, fam: EquationFamily):
    """Spectrum shift ``rho_X(t) = U (rho(t) + X) U^dag``, ``U = exp(-i(n+1) X A^n t)``.

    ``X`` must be Hermitian and commute with ``A`` and with every ``rho(t)``.
    Works on a sampled :class:`Trajectory` (all samples are checked) or on a
    generator (checked at each evaluation); returns the same kind.
    """
    x = check_hermitian(x, "X")
    if x.shape != fam.a.shape:
        raise PreconditionError("X has the wrong dimension", check="dimension")
    atol = tols.tol(tols.COMMUTE)
    _check_commutes(x, fam.a, "A", atol)

    if isinstance(sol, Trajectory):
        states = []
        for t, s in zip(sol.times, sol.states):
            _check_commutes(x, s, f"rho(t={t:.6g})", atol * max(1.0, max_norm(s)))
            u = _shift_unitary(x, fam, t)
            states.append(u @ (s + x) @ u.conj().T)
        return Trajectory(sol.times.copy(), np.array(states), meta={"shift": x})

    if not callable(sol):
        raise TypeError("shift_solution needs a Trajectory or a callable")

    def shifted(t):
        s = as_matrix(sol(t), "rho(t)")
        _check_commutes(x, s, f"rho(t={t:.6g})", atol * max(1.0, max_norm(s)))
        u = _shift_unitary(x, fam, t)
        return u @ (s + x) @ u.conj().T

    return shifted


def rescale_solution(gen: Generator, y):
    """Rescaled solution ``t -> Y rho(Y t)`` for real nonzero ``Y``.

    Needs a re-evaluable generator, not a fixed list of samples.
    """
    if isinstance(gen, Trajectory) or not callable(gen):
        raise TypeError("rescale_solution needs a generator t -> rho(t), not sampled data")
    y = float(y)
    if y == 0.0 or not math.isfinite(y):
        raise ValueError("Y must be real, finite and nonzero")

    def rescaled(t):
        return y * gen(y * t)

    return rescaled


def similarity_rate(phi_of_t: Callable, cfg: DarbouxConfig, times, chi_of_t: Optional[Callable] = None, h=None):
    """Largest ``||dT/dt||`` (max-norm, central difference) over ``times``.

    ``T(t)`` is built from ``P(t) = |phi(t)><chi(t)| / <chi|phi>``; ``chi``
    defaults to ``phi`` (hermitian mode). A value near zero means ``T`` is
    time independent on the sampled window. No triviality ruling is made.
    """
    chi_of_t = phi_of_t if chi_of_t is None else chi_of_t
    h = tols.FD_STEP if h is None else h

    def t_mat(t):
        return similarity_T(projector(phi_of_t(t), chi_of_t(t)), cfg)

    return max(max_norm(t_mat(t + h) - t_mat(t - h)) / (2 * h) for t in times)
