"""Reduction of the 3x3 Euler-Arnold-von Neumann flow to a scalar ODE.

In the eigenbasis of ``H`` the diagonal of ``rho`` is conserved and
``W = |rho_12|^2`` obeys ``W'' = a W^2 + b W + c``. Its solutions are
``W = sn^2(alpha (t - t0), k) / beta + gamma``; the Darboux solution of the
3x3 example is the ``k = 1`` (``sn = tanh``) member. The coefficients are
not known in closed form here and are recovered by least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import tolerances as tols
from .dynamics import Trajectory
from .errors import ConvergenceError, DimensionError
from .linalg import herm_eig


# -- Jacobi sn ------------------------------------------------------------------

def agm(a, b, tol=4e-16, maxiter=64):
    """Arithmetic-geometric mean of two nonnegative numbers."""
    for _ in range(maxiter):
        if abs(a - b) <= tol * a:
            return 0.5 * (a + b)
        an, bn = 0.5 * (a + b), math.sqrt(a * b)
        if an == a and bn == b:
            # stuck in the last bit
            return an
        a, b = an, bn
    raise ConvergenceError("AGM did not converge")


def ellipk(k):
    """Complete elliptic integral of the first kind, modulus ``k`` in [0, 1)."""
    if not 0 <= k <= 1:
        raise ValueError(f"modulus must lie in [0, 1], got {k}")
    if k == 1:
        return math.inf
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def _sn_agm(u, k):
    # descending Landen / AGM scheme for the amplitude
    a = [1.0]
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = [k]
    while abs(c[-1]) > 1e-17 * a[-1] and len(a) < 64:
        an = 0.5 * (a[-1] + b)
        cn = 0.5 * (a[-1] - b)
        b = math.sqrt(a[-1] * b)
        a.append(an)
        c.append(cn)
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * u
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[i] / a[i] * np.sin(phi)))
    return np.sin(phi)


def jacobi_sn(u, k):
    """Jacobi elliptic function ``sn(u, k)`` for real ``u`` and modulus ``0 <= k <= 1``.

    Note ``k`` is the modulus, not the parameter ``m = k^2``. Arrays of ``u``
    are accepted.
    """
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"modulus must lie in [0, 1], got {k}")
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        out = np.sin(u)
    elif k == 1.0:
        out = np.tanh(u)
    else:
        period = 4.0 * ellipk(k)
        # reduce to [-2K, 2K) so the amplitude recursion starts from a small angle
        red = u - period * np.floor(u / period + 0.5)
        out = _sn_agm(red, k)
    return float(out) if out.ndim == 0 else out


# -- H eigenbasis -------------------------------------------------------------------

@dataclass
class EigenbasisInfo:
    """Ordered eigenbasis of ``H``.

    ``eigenvalues`` follow the column order of ``vectors``. When a ``+/-``
    pair exists it comes first, positive member first, so ``H`` reads
    ``diag(mu_hat, -mu_hat, lambda_hat)`` in the 3x3 case.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    mu_hat: float = None
    lambda_hat: float = None

    def to_dict(self):
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "mu_hat": self.mu_hat,
            "lambda_hat": self.lambda_hat,
        }


def h_eigenbasis(h):
    evals, evecs = herm_eig(h)
    d = len(evals)
    scale = max(1.0, float(np.max(np.abs(evals))))
    pair = None
    for i in range(d):
        for j in range(d):
            if evals[i] > 0 and abs(evals[i] + evals[j]) <= 1e-8 * scale:
                if pair is None or evals[i] > evals[pair[0]]:
                    pair = (i, j)
    order = [] if pair is None else [pair[0], pair[1]]
    rest = sorted((i for i in range(d) if i not in order), key=lambda i: -abs(evals[i]))
    order += rest
    info = EigenbasisInfo(evals[order], evecs[:, order])
    if pair is not None:
        info.mu_hat = float(evals[pair[0]])
        if d == 3:
            info.lambda_hat = float(evals[order[2]])
    return info


def to_h_eigenbasis(h, traj: Trajectory):
    """Conjugate every state into the ordered eigenbasis of ``h``.

    The ordering is recorded in ``meta["h_eigenbasis"]``.
    """
    info = h_eigenbasis(h)
    v = info.vectors
    states = np.einsum("ji,njk,kl->nil", v.conj(), traj.states, v)
    out = Trajectory(traj.times.copy(), states, dict(traj.observables), dict(traj.meta))
    out.meta["h_eigenbasis"] = info.to_dict()
    return out


def snled_rhs(rho, mu_hat, lambda_hat):
    """Time derivatives of ``(rho_12, rho_13, rho_23)`` for ``H = diag(mu, -mu, lambda)``."""
    r = rho
    d12 = -1j * 2 * mu_hat * ((r[0, 0] + r[1, 1]) * r[0, 1] + r[0, 2] * np.conj(r[1, 2]))
    d13 = -1j * (mu_hat - lambda_hat) * ((r[0, 0] + r[2, 2]) * r[0, 2] + r[0, 1] * r[1, 2])
    d23 = 1j * (mu_hat + lambda_hat) * ((r[1, 1] + r[2, 2]) * r[1, 2] + np.conj(r[0, 1]) * r[0, 2])
    return np.array([d12, d13, d23])


# -- W = |rho_12|^2 ---------------------------------------------------------------------

@dataclass
class WSeries:
    times: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if self.times.shape != self.w.shape:
            raise DimensionError("times and w must have equal length")
        if np.any(self.w < 0):
            raise ValueError("W must be nonnegative")


def extract_w(traj: Trajectory):
    """``W(t) = |rho_12(t)|^2`` from a 3x3 trajectory already in the H eigenbasis."""
    if traj.dim != 3:
        raise DimensionError(f"W is defined for 3x3 trajectories, got dimension {traj.dim}")
    return WSeries(traj.times.copy(), np.abs(traj.states[:, 0, 1]) ** 2)


@dataclass
class QuadFit:
    """Least-squares fit of ``W'' = a W^2 + b W + c``; ``residual`` is the max misfit."""

    a: float
    b: float
    c: float
    residual: float
    degenerate: bool = False

    def to_dict(self):
        return {"a": self.a, "b": self.b, "c": self.c, "residual": self.residual, "degenerate": self.degenerate}


def second_derivative_5pt(w, h):
    """Five-point central stencil; returns values at ``w[2:-2]``."""
    return (-w[4:] + 16 * w[3:-1] - 30 * w[2:-2] + 16 * w[1:-3] - w[:-4]) / (12.0 * h * h)


def _uniform_step(times):
    steps = np.diff(times)
    h = float(np.mean(steps))
    if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("W must be sampled on a uniform grid")
    return h


def fit_w_equation(ws: WSeries):
    if len(ws.w) < 7:
        raise ValueError("need at least 7 samples")
    h = _uniform_step(ws.times)
    wdd = second_derivative_5pt(ws.w, h)
    w = ws.w[2:-2]
    design = np.column_stack([w * w, w, np.ones_like(w)])
    spread = float(np.max(w) - np.min(w))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(w)))):
        return QuadFit(math.nan, math.nan, math.nan, math.nan, degenerate=True)
    coef, *_ = np.linalg.lstsq(design, wdd, rcond=None)
    if np.linalg.cond(design) > 1e12:
        return QuadFit(*map(float, coef), math.nan, degenerate=True)
    resid = float(np.max(np.abs(design @ coef - wdd)))
    return QuadFit(float(coef[0]), float(coef[1]), float(coef[2]), resid)


@dataclass
class K1Fit:
    """Fit of ``W = tanh^2(alpha (t - t0)) / beta + gamma``."""

    alpha: float
    beta: float
    gamma: float
    t0: float
    misfit: float
    passed: bool
    degenerate: bool = False
    converged: bool = True
    message: str = ""

    def to_dict(self):
        return {
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "t0": self.t0,
            "misfit": self.misfit, "pass": self.passed, "degenerate": self.degenerate,
            "converged": self.converged, "message": self.message,
        }


def verify_k1_identification(ws: WSeries, atol=1e-6):
    """Fit the ``k = 1`` member to ``W``; pass iff the max misfit is <= ``atol``."""
    t, w = ws.times, ws.w
    atol = tols.tol(atol)
    lo, hi = float(np.min(w)), float(np.max(w))
    if hi - lo <= 1e-14 * max(1.0, hi):
        return K1Fit(math.nan, math.nan, lo, math.nan, math.nan, False, degenerate=True,
                     message="W is constant")
    i0 = int(np.argmin(w))
    t0 = float(t[i0])
    half = lo + 0.5 * (hi - lo)
    above = np.abs(t - t0)[w >= half]
    width = float(np.min(above)) if above.size else float(np.ptp(t)) / 4
    alpha0 = math.atanh(math.sqrt(0.5)) / max(width, 1e-12)
    x0 = np.array([alpha0, hi - lo, lo, t0])

    def resid(p):
        alpha, q, gamma, shift = p
        return q * np.tanh(alpha * (t - shift)) ** 2 + gamma - w

    sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    alpha, q, gamma, shift = sol.x
    misfit = float(np.max(np.abs(sol.fun)))
    converged = bool(sol.success)
    beta = 1.0 / q if q != 0 else math.inf
    return K1Fit(
        float(abs(alpha)), float(beta), float(gamma), float(shift), misfit,
        passed=converged and misfit <= atol, converged=converged, message=str(sol.message),
    )


@dataclass
class WReport:
    quad: QuadFit
    k1: K1Fit
    eigenbasis: dict = field(default_factory=dict)
    diagonal_drift: float = math.nan

    def to_dict(self):
        out = {"a": self.quad.a, "b": self.quad.b, "c": self.quad.c, "residual": self.quad.residual}
        out["k1_fit"] = self.k1.to_dict()
        out["h_eigenbasis"] = self.eigenbasis
        out["diagonal_drift"] = self.diagonal_drift
        return out

    @property
    def passed(self):
        return (not self.quad.degenerate) and self.k1.passed


def w_report(h, traj: Trajectory):
    """Run the whole reduction on a sampled 3x3 trajectory."""
    eig = to_h_eigenbasis(h, traj)
    diag = np.real(np.einsum("nii->ni", eig.states))
    drift = float(np.max(np.abs(diag - diag[0])))
    ws = extract_w(eig)
    quad = fit_w_equation(ws)
    k1 = verify_k1_identification(ws)
    return WReport(quad, k1, eig.meta["h_eigenbasis"], drift)
