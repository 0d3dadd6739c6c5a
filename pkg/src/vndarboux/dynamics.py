"""Nonlinear von Neumann right-hand sides, invariants and a reference integrator.

The equation family handled here is

    i d(rho)/dt = sum_{k=0}^{n} [A^{n-k} rho A^k, rho]

for a fixed Hermitian ``A``. ``n = 1`` with ``A = H`` is the
Euler-Arnold-von Neumann equation ``i rho' = [H, rho^2]``. Time is
dimensionless and hbar = 1.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import tolerances as tols
from .errors import BlowUpError, ConsistencyError, DimensionError, VNError
from .linalg import (
    as_matrix,
    atomic_write_text,
    check_hermitian,
    dagger,
    max_norm,
)

#: A closed-form solution: maps a time to a matrix.
Generator = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class EquationFamily:
    """Member ``n`` of the Darboux-covariant family with fixed operator ``a``."""

    n: int
    a: np.ndarray

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"family index must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", check_hermitian(self.a, "A"))

    @property
    def dim(self):
        return self.a.shape[0]

    def powers(self):
        """``[A^0, A^1, ..., A^(n+1)]``."""
        out = [np.eye(self.dim, dtype=complex)]
        for _ in range(self.n + 1):
            out.append(out[-1] @ self.a)
        return out


@dataclass(frozen=True)
class PolynomialF:
    """Truncated Taylor series ``f(x) = sum_k coeffs[k] (x - center)^k``."""

    coeffs: tuple
    center: float = 0.0

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if not c:
            raise ValueError("need at least one coefficient")
        if not all(math.isfinite(x) for x in c) or not math.isfinite(self.center):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", float(self.center))

    @classmethod
    def identity(cls):
        return cls((0.0, 1.0))

    @classmethod
    def square(cls):
        return cls((0.0, 0.0, 1.0))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * (x - self.center) + c
        return acc

    def pure_state_compatible(self, atol=1e-12):
        """True when ``f(0) = 0`` and ``f(1) = 1``, so ``f(rho) = rho`` for pure states."""
        return abs(self(0.0)) <= atol and abs(self(1.0) - 1.0) <= atol

    def of_matrix(self, rho):
        """Evaluate ``f(rho)`` by Horner's scheme in ``rho - center*I``."""
        rho = as_matrix(rho, "rho")
        eye = np.eye(rho.shape[0], dtype=complex)
        q = rho - self.center * eye
        acc = np.zeros_like(rho)
        for c in reversed(self.coeffs):
            acc = acc @ q + c * eye
        return acc


@dataclass
class Trajectory:
    """Sampled solution: times, states and named scalar observables."""

    times: np.ndarray
    states: np.ndarray
    observables: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.ndim != 3 or self.states.shape[1] != self.states.shape[2]:
            raise DimensionError("states must have shape (N, d, d)")
        if self.times.shape != (self.states.shape[0],):
            raise DimensionError("one state per time sample required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.observables = {k: np.asarray(v, dtype=float) for k, v in self.observables.items()}

    @classmethod
    def from_generator(cls, gen: Generator, times, observables=None):
        """Sample a closed form at ``times`` and evaluate observables on it.

        ``observables`` maps a column name to a Hermitian matrix.
        """
        times = np.asarray(times, dtype=float)
        states = np.array([gen(t) for t in times])
        traj = cls(times, states)
        for name, obs in (observables or {}).items():
            traj.add_observable(name, obs)
        return traj

    @property
    def dim(self):
        return self.states.shape[1]

    def __len__(self):
        return len(self.times)

    def add_observable(self, name, obs):
        obs = as_matrix(obs, name)
        self.observables[name] = np.array([expectation(obs, s) for s in self.states])

    def to_csv(self, path=None, mode="observables"):
        """Serialise as CSV (17 significant digits).

        ``mode="observables"`` writes ``t,<obs1>,<obs2>,...`` in insertion
        order. ``mode="full"`` writes ``t,re_00,im_00,re_01,im_01,...`` with
        matrix entries in row-major order. Returns the text; also writes it
        atomically to ``path`` if given.
        """
        buf = io.StringIO()
        d = self.dim
        if mode == "observables":
            names = list(self.observables)
            buf.write(",".join(["t"] + names) + "\n")
            for i, t in enumerate(self.times):
                row = [t] + [self.observables[n][i] for n in names]
                buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        elif mode == "full":
            cols = ["t"]
            for i in range(d):
                for j in range(d):
                    cols += [f"re_{i}{j}" if d <= 10 else f"re_{i}_{j}", f"im_{i}{j}" if d <= 10 else f"im_{i}_{j}"]
            buf.write(",".join(cols) + "\n")
            for t, s in zip(self.times, self.states):
                flat = np.column_stack([s.real.ravel(), s.imag.ravel()]).ravel()
                buf.write(",".join(f"{x:.17g}" for x in np.concatenate([[t], flat])) + "\n")
        else:
            raise ValueError(f"unknown CSV mode {mode!r}")
        text = buf.getvalue()
        if path is not None:
            atomic_write_text(path, text)
        return text


def _check_dims(fam, rho):
    if rho.shape != fam.a.shape:
        raise DimensionError(f"rho has shape {rho.shape}, A has shape {fam.a.shape}")


def effective_family_hamiltonian(fam: EquationFamily, rho, powers=None):
    """``sum_k A^{n-k} rho A^k`` -- the rho-linear Hamiltonian of the family."""
    p = fam.powers() if powers is None else powers
    n = fam.n
    return sum(p[n - k] @ rho @ p[k] for k in range(n + 1))


def rhs_family(fam: EquationFamily, rho, check=True):
    """Time derivative ``-i sum_k [A^{n-k} rho A^k, rho]``.

    With ``check`` the equivalent form ``sum_k [A^{n-k}, rho A^k rho]`` is
    evaluated as well and the two must agree.
    """
    rho = as_matrix(rho, "rho")
    _check_dims(fam, rho)
    p = fam.powers()
    h_eff = effective_family_hamiltonian(fam, rho, p)
    comm = h_eff @ rho - rho @ h_eff
    if check:
        n = fam.n
        alt = np.zeros_like(rho)
        for k in range(n + 1):
            inner = rho @ p[k] @ rho
            alt += p[n - k] @ inner - inner @ p[n - k]
        scale = max(1.0, max_norm(h_eff) * max_norm(rho))
        err = max_norm(comm - alt)
        if err > tols.tol(tols.HERMITICITY) * scale:
            raise ConsistencyError(f"family commutator identity violated by {err:.3e}")
    return -1j * comm


def rhs_fvn(h, rho, f: PolynomialF):
    """``-i [H, f(rho)]``."""
    h = as_matrix(h, "H")
    rho = as_matrix(rho, "rho")
    if h.shape != rho.shape:
        raise DimensionError(f"H {h.shape} vs rho {rho.shape}")
    fr = f.of_matrix(rho)
    return -1j * (h @ fr - fr @ h)


def effective_hamiltonian(h, rho, f: PolynomialF):
    """Functional derivative of ``Tr f(rho) H``.

    ``sum_{k>=1} f_k sum_{m=0}^{k-1} Q^{k-1-m} H Q^m`` with ``Q = rho - center*I``.
    Satisfies ``[H_eff, rho] = [H, f(rho)]``.
    """
    h = as_matrix(h, "H")
    rho = as_matrix(rho, "rho")
    if h.shape != rho.shape:
        raise DimensionError(f"H {h.shape} vs rho {rho.shape}")
    d = h.shape[0]
    q = rho - f.center * np.eye(d)
    qpow = [np.eye(d, dtype=complex)]
    for _ in range(max(0, f.degree - 1)):
        qpow.append(qpow[-1] @ q)
    out = np.zeros((d, d), dtype=complex)
    for k in range(1, f.degree + 1):
        fk = f.coeffs[k]
        if fk == 0.0:
            continue
        out += fk * sum(qpow[k - 1 - m] @ h @ qpow[m] for m in range(k))
    return out


def casimirs(rho, max_power):
    """``[Tr rho, Tr rho^2, ..., Tr rho^max_power]`` as real numbers."""
    if max_power < 1:
        raise ValueError("max_power must be >= 1")
    rho = as_matrix(rho, "rho")
    out = []
    acc = np.eye(rho.shape[0], dtype=complex)
    limit = tols.tol(tols.HERMITICITY)
    for k in range(1, max_power + 1):
        acc = acc @ rho
        tr = np.trace(acc)
        if abs(tr.imag) > limit * max(1.0, abs(tr.real)):
            raise ConsistencyError(f"Tr rho^{k} has imaginary part {tr.imag:.3e}")
        out.append(float(tr.real))
    return out


def expectation(obs, rho):
    """``Re Tr(obs rho)``; the imaginary part must vanish."""
    obs = as_matrix(obs, "obs")
    rho = as_matrix(rho, "rho")
    if obs.shape != rho.shape:
        raise DimensionError(f"obs {obs.shape} vs rho {rho.shape}")
    # Tr(AB) without forming the product.
    val = np.sum(obs * rho.T)
    if abs(val.imag) > tols.tol(1e-10):
        raise ConsistencyError(f"Tr(obs rho) has imaginary part {val.imag:.3e}")
    return float(val.real)


def spin1_matrices():
    """The three spin-1 matrices used for the 3x3 example's observables.

    Each is Hermitian and traceless with eigenvalues {-1, 0, 1}. With this
    choice ``[J_x, J_y] = -i J_z``; the sign is opposite to the usual su(2)
    convention.
    """
    jx = np.array([[0, 0, 0], [0, 0, 1j], [0, -1j, 0]], dtype=complex)
    jy = np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex)
    jz = np.array([[0, 1j, 0], [-1j, 0, 0], [0, 0, 0]], dtype=complex)
    return jx, jy, jz


def integrate_rk4(fam: EquationFamily, rho0, t0, t1, dt=1e-3, store_every=1, blowup=1e6):
    """Fixed-step classic RK4 integration of the family equation.

    The step is adjusted down so that an integer number of steps spans
    ``[t0, t1]``. Increments are accumulated with compensated (Kahan)
    summation; otherwise rounding error dominates the RK4 truncation error
    once ``dt`` is near 1e-3. After every full step the state is projected
    back onto the Hermitian matrices with ``(M + M^dag)/2``. The drift of the first three
    Casimirs between the first and last state is stored in
    ``traj.meta["casimir_drift"]``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    rho = check_hermitian(rho0, "rho0")
    _check_dims(fam, rho)
    nsteps = max(1, int(math.ceil((t1 - t0) / dt - 1e-9)))
    h = (t1 - t0) / nsteps
    p = fam.powers()

    def rhs(r):
        heff = effective_family_hamiltonian(fam, r, p)
        return -1j * (heff @ r - r @ heff)

    times = [t0]
    states = [rho.copy()]
    carry = np.zeros_like(rho)
    for i in range(1, nsteps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        incr = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4) - carry
        new = rho + incr
        carry = (new - rho) - incr
        rho = 0.5 * (new + dagger(new))
        carry = 0.5 * (carry + dagger(carry))
        big = max_norm(rho)
        if not np.isfinite(big) or big > blowup:
            raise BlowUpError(f"entry magnitude {big:.3e} exceeded {blowup:.1e} at t={t0 + i * h:.6g}")
        if i % store_every == 0 or i == nsteps:
            times.append(t0 + i * h)
            states.append(rho)
    traj = Trajectory(np.array(times), np.array(states))
    c_start = casimirs(states[0], 3)
    c_end = casimirs(states[-1], 3)
    traj.meta["casimir_drift"] = [abs(a - b) for a, b in zip(c_start, c_end)]
    traj.meta["dt"] = h
    return traj


def central_difference(gen: Generator, t, h=None):
    h = tols.FD_STEP if h is None else h
    return (gen(t + h) - gen(t - h)) / (2.0 * h)


def equation_residual(gen: Generator, fam: EquationFamily, times: Sequence[float], h=None):
    """Max over ``times`` of ``|| d/dt gen - rhs_family ||_max`` by central differences."""
    worst = 0.0
    for t in times:
        deriv = central_difference(gen, t, h)
        worst = max(worst, max_norm(deriv - rhs_family(fam, gen(t), check=False)))
    return worst


def sorted_spectrum(m):
    return np.linalg.eigvalsh(check_hermitian(m, atol=tols.tol(1e-10)))


def max_spectrum_drift(gen: Generator, times, reference: Optional[Sequence[float]] = None):
    """Largest deviation of the sorted spectrum of ``gen(t)`` from ``reference``.

    Without a reference the spectrum at the first time is used.
    """
    ref = None if reference is None else np.sort(np.asarray(reference, dtype=float))
    worst = 0.0
    for t in times:
        ev = sorted_spectrum(gen(t))
        if ref is None:
            ref = ev
        if len(ev) != len(ref):
            raise VNError("reference spectrum has wrong length")
        worst = max(worst, float(np.max(np.abs(ev - ref))))
    return worst
