"""Seed solutions, closed-form dressed solutions and the two worked examples.

Strategy 1 (``i rho' = [H, rho^2]``): start from ``xi0`` whose
``Delta_a = xi0^2 - a xi0`` commutes with ``H``; the seed then rotates
linearly, ``xi(t) = exp(-i a H t) xi0 exp(i a H t)``, and its dressing has
a closed form.

Strategy 2: a stationary seed anticommuting with ``A``. The Lax solution is
then an explicit (non-unitary) exponential flow of the initial eigenvector.

All evaluators stay finite for |t| of a few hundred: real exponentials are
handled in log space and only ratios are ever formed.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit, logsumexp

from . import tolerances as tols
from .dynamics import EquationFamily, Generator, sorted_spectrum
from .errors import PreconditionError, VNError
from .laxdarboux import (
    DarbouxConfig,
    LaxEigenpair,
    TrivialTransformationWarning,
    rescale_solution,
    shift_solution,
)
from .linalg import (
    PAULI,
    SIGMA_X,
    as_matrix,
    as_vector,
    check_hermitian,
    commutator,
    general_eigvec,
    hermiticity_error,
    herm_eig,
    matrix_exp,
    max_norm,
    tensor_product,
    unitary_propagator,
)

SQRT2 = math.sqrt(2.0)


def sech(x):
    """``1/cosh(x)`` without overflow."""
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def solve_quadratic_diag(a, x0):
    """Real roots ``(x+, x-)`` of ``x^2 - a x - x0 = 0``.

    A zero discriminant gives a double root and a ``RuntimeWarning``.
    """
    disc = a * a + 4.0 * x0
    if disc < 0:
        raise PreconditionError(
            f"x^2 - {a}x = {x0} has no real roots (discriminant {disc:.3g}); choose another a or x0",
            check="discriminant",
        )
    if disc == 0:
        warnings.warn("degenerate quadratic: double root", RuntimeWarning, stacklevel=2)
    r = math.sqrt(disc)
    return (a + r) / 2.0, (a - r) / 2.0


def _is_eigenvector(m, v, atol):
    v = v / np.linalg.norm(v)
    lam = np.vdot(v, m @ v)
    return np.linalg.norm(m @ v - lam * v) <= atol


# -- strategy 1 ---------------------------------------------------------------

@dataclass(frozen=True)
class Strategy1Seed:
    """Seed ``xi0`` with ``[H, xi0^2 - a xi0] = 0``.

    ``delta`` is recomputed from ``xi0`` when omitted and checked otherwise.
    """

    h: np.ndarray
    xi0: np.ndarray
    a: float
    delta: np.ndarray = None

    def __post_init__(self):
        h = check_hermitian(self.h, "H")
        xi0 = check_hermitian(self.xi0, "xi0")
        if h.shape != xi0.shape:
            raise PreconditionError("H and xi0 differ in dimension", check="dimension")
        a = float(self.a)
        delta = xi0 @ xi0 - a * xi0
        if self.delta is not None:
            given = as_matrix(self.delta, "delta")
            if max_norm(given - delta) > tols.tol(tols.HERMITICITY) * max(1.0, max_norm(delta)):
                raise PreconditionError("delta differs from xi0^2 - a xi0", check="delta_value")
        scale = max(1.0, max_norm(h) * max_norm(delta))
        if max_norm(commutator(h, delta)) > tols.tol(tols.HERMITICITY) * scale:
            raise PreconditionError("[H, Delta_a] != 0: the linear-rotation trick does not apply", check="delta_commutes")
        d = h.shape[0]
        if max_norm(delta - np.trace(delta) / d * np.eye(d)) <= tols.tol(tols.HERMITICITY) * max(1.0, max_norm(delta)):
            raise PreconditionError("Delta_a is a multiple of the identity", check="delta_scalar")
        if max_norm(commutator(h, xi0)) <= tols.tol(tols.HERMITICITY) * max(1.0, max_norm(h) * max_norm(xi0)):
            raise PreconditionError("[H, xi0] = 0: the seed is stationary and the dressing trivial", check="stationary")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "xi0", xi0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "delta", delta)

    @property
    def family(self):
        return EquationFamily(1, self.h)

    def solution(self, t):
        """Undressed seed ``xi(t) = exp(-iaHt) xi0 exp(iaHt)``."""
        u = unitary_propagator(self.h, self.a * t)
        return u @ self.xi0 @ u.conj().T

    def lax_propagator(self, mu, phi0, z):
        """Lax solution ``phi(t) = exp(-iaHt) exp(-(i/mu)(Delta + z(a - z)) t) phi0``."""
        mu = complex(mu)
        phi0 = as_vector(phi0, self.h.shape[0], "phi0")
        gen = self.delta + z * (self.a - z) * np.eye(self.h.shape[0])

        def phi(t):
            return unitary_propagator(self.h, self.a * t) @ (matrix_exp(-1j / mu * t * gen) @ phi0)

        return phi


def _check_strategy1_inputs(seed, mu, phi0):
    phi0 = as_vector(phi0, seed.h.shape[0], "phi0")
    phi0 = phi0 / np.linalg.norm(phi0)
    pair = LaxEigenpair.from_seed(seed.xi0, seed.h, mu, phi0)
    if _is_eigenvector(seed.delta, phi0, tols.tol(tols.LAX_EIGENPAIR)):
        raise PreconditionError(
            "phi0 is an eigenvector of Delta_a; the internal part of the dressed solution "
            "would be time-independent",
            check="delta_eigenvector",
        )
    return pair


def dressed_strategy1_full(seed: Strategy1Seed, mu, phi0) -> Generator:
    """Closed-form dressed solution ``t -> xi[1](t)`` for strategy 1.

        xi[1](t) = U(t) [ xi0 + (mu - mu*) F(t)^-1 exp(-(i/mu) D t) [|phi0><phi0|, H] exp((i/mu*) D t) ] U(t)^dag

    with ``U(t) = exp(-iaHt)``, ``D = Delta_a`` and
    ``F(t) = <phi0| exp(i (mu - mu*)/|mu|^2 D t) |phi0>``.

    For real ``mu`` a :class:`TrivialTransformationWarning` is issued and the
    undressed seed is returned.
    """
    mu = complex(mu)
    if mu.imag == 0:
        warnings.warn("real mu: trivial transformation, rho[1] = rho", TrivialTransformationWarning, stacklevel=2)
        return seed.solution
    _check_strategy1_inputs(seed, mu, phi0)
    inner = _strategy1_internal(seed, mu, phi0)

    def xi1(t):
        u = unitary_propagator(seed.h, seed.a * t)
        return u @ inner(t) @ u.conj().T

    return xi1


def dressed_strategy1_internal(seed: Strategy1Seed, mu, phi0) -> Generator:
    """The bracketed internal part of :func:`dressed_strategy1_full`."""
    mu = complex(mu)
    if mu.imag == 0:
        raise PreconditionError("Im mu = 0: the transformation is trivial", check="real_mu")
    _check_strategy1_inputs(seed, mu, phi0)
    return _strategy1_internal(seed, mu, phi0)


def _strategy1_internal(seed, mu, phi0):
    phi0 = as_vector(phi0) / np.linalg.norm(phi0)
    lam, v = herm_eig(seed.delta)
    w = v.conj().T @ phi0
    p0 = np.outer(phi0, phi0.conj())
    m = v.conj().T @ commutator(p0, seed.h) @ v
    c1 = -1j / mu
    c2 = 1j / mu.conjugate()
    g = (c1 + c2).real  # = -2 Im(mu)/|mu|^2, and c1 + c2 is real
    with np.errstate(divide="ignore"):
        log_w = np.log(np.abs(w) ** 2)
    nonzero = m != 0
    prefactor = mu - mu.conjugate()
    xi0 = seed.xi0

    def inner(t):
        log_f = logsumexp(g * lam * t + log_w)
        expo = (c1 * lam * t)[:, None] + (c2 * lam * t)[None, :] - log_f
        core = np.zeros_like(m)
        core[nonzero] = m[nonzero] * np.exp(expo[nonzero])
        if not np.all(np.isfinite(core)):
            raise VNError(f"dressed solution overflowed at t={t}")
        return xi0 + prefactor * (v @ core @ v.conj().T)

    return inner


def dressed_strategy1(seed: Strategy1Seed, mu, phi0, t):
    """Dressed strategy-1 solution at a single time; Hermitian to 1e-10."""
    out = dressed_strategy1_full(seed, mu, phi0)(t)
    herr = hermiticity_error(out)
    if herr > tols.tol(1e-10) * max(1.0, max_norm(out)):
        raise VNError(f"dressed solution is not Hermitian ({herr:.3e})")
    return out


def choose_lax_vector(lax, avoid=None):
    """Pick an eigenvector of the (non-Hermitian) Lax matrix ``lax``.

    Eigenvalues with the largest eigenspace are tried first. Within an
    eigenspace the equal-weight combination of the returned orthonormal basis
    is used; that is a convention, any combination is admissible. Candidates
    that are eigenvectors of ``avoid`` are skipped. Returns ``(z, phi)``.
    """
    lax = as_matrix(lax, "lax")
    zs = np.linalg.eigvals(lax)
    groups = []
    for z in zs:
        if not any(abs(z - g) < 1e-6 * max(1.0, abs(z)) for g in groups):
            groups.append(z)
    cands = []
    for z in groups:
        basis = general_eigvec(lax, z, rank_tol=1e-7)
        if basis:
            cands.append((z, basis))
    cands.sort(key=lambda zb: -len(zb[1]))
    for z, basis in cands:
        phi = sum(basis) / math.sqrt(len(basis))
        if np.linalg.norm(phi) < 1e-12:
            phi = basis[0]
        phi = phi / np.linalg.norm(phi)
        if avoid is not None and _is_eigenvector(avoid, phi, tols.tol(tols.LAX_EIGENPAIR)):
            continue
        return complex(np.vdot(phi, lax @ phi)), phi
    raise PreconditionError("no suitable Lax eigenvector found", check="lax_eigenpair")


# -- strategy 2 ---------------------------------------------------------------

@dataclass(frozen=True)
class Strategy2Seed:
    """Stationary seed ``xi`` anticommuting with ``A`` for family index ``n``."""

    a: np.ndarray
    xi: np.ndarray
    n: int = 1

    def __post_init__(self):
        a = check_hermitian(self.a, "A")
        xi = check_hermitian(self.xi, "xi")
        if a.shape != xi.shape:
            raise PreconditionError("A and xi differ in dimension", check="dimension")
        err = max_norm(a @ xi + xi @ a)
        if err > tols.tol(tols.HERMITICITY) * max(1.0, max_norm(a) * max_norm(xi)):
            raise PreconditionError(f"A xi + xi A = {err:.3e} != 0", check="anticommute")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "n", int(self.n))

    @property
    def family(self):
        return EquationFamily(self.n, self.a)

    def flow_generator(self, mu, z):
        """``(B, c)`` with ``phi(t) = exp(c B t) phi0``.

        Even ``n``: ``B = A^n``, ``c = -i z``; odd ``n``: ``B = A^(n+1)``, ``c = i mu``.
        """
        if self.n % 2 == 0:
            return np.linalg.matrix_power(self.a, self.n), -1j * complex(z)
        return np.linalg.matrix_power(self.a, self.n + 1), 1j * complex(mu)


def propagate_phi_even(phi0, a, n, z, t):
    """``exp(-i z A^n t) phi0`` for even ``n >= 2``."""
    if n < 2 or n % 2:
        raise ValueError("n must be even and >= 2")
    a = as_matrix(a, "A")
    return matrix_exp(-1j * complex(z) * t * np.linalg.matrix_power(a, n)) @ as_vector(phi0, a.shape[0])


def propagate_phi_odd(phi0, a, n, mu, t):
    """``exp(i mu A^(n+1) t) phi0`` for odd ``n``."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be odd")
    a = as_matrix(a, "A")
    return matrix_exp(1j * complex(mu) * t * np.linalg.matrix_power(a, n + 1)) @ as_vector(phi0, a.shape[0])


def _normalized_flow(phi0, b, c):
    """Unit-norm direction of ``exp(c B t) phi0`` for Hermitian ``B``, overflow-safe."""
    beta, v = herm_eig(b)
    w = v.conj().T @ phi0
    present = np.abs(w) > 0

    def phi(t):
        expo = c * beta * t
        shift = np.max(expo.real[present])
        comp = np.zeros_like(w)
        comp[present] = w[present] * np.exp(expo[present] - shift)
        out = v @ comp
        return out / np.linalg.norm(out)

    return phi


def dressed_strategy2_full(seed: Strategy2Seed, mu, phi0) -> Generator:
    """Closed-form dressed solution ``t -> xi + (mu - mu*) [P(t), A]``.

    ``P(t)`` is the Hermitian projector on the propagated Lax vector.
    """
    mu = complex(mu)
    if mu.imag == 0:
        raise PreconditionError("Im mu = 0: the transformation is trivial", check="real_mu")
    pair = LaxEigenpair.from_seed(seed.xi, seed.a, mu, phi0)
    b, c = seed.flow_generator(mu, pair.z)
    if _is_eigenvector(b, pair.phi0, tols.tol(tols.LAX_EIGENPAIR)):
        warnings.warn(
            "phi0 is an eigenvector of the flow generator; the dressed solution is stationary",
            TrivialTransformationWarning,
            stacklevel=2,
        )
    flow = _normalized_flow(pair.phi0, b, c)
    cfg = DarbouxConfig(mu)
    a = seed.a
    xi = seed.xi

    def xi1(t):
        phi = flow(t)
        p = np.outer(phi, phi.conj())
        return xi + (cfg.mu - cfg.nu) * (p @ a - a @ p)

    return xi1


def dressed_strategy2(seed: Strategy2Seed, mu, phi0, t):
    out = dressed_strategy2_full(seed, mu, phi0)(t)
    herr = hermiticity_error(out)
    if herr > tols.tol(1e-10) * max(1.0, max_norm(out)):
        raise VNError(f"dressed solution is not Hermitian ({herr:.3e})")
    return out


def strategy2_lax_propagator(seed: Strategy2Seed, mu, phi0, z):
    b, c = seed.flow_generator(mu, z)
    phi0 = as_vector(phi0, seed.a.shape[0])

    def phi(t):
        return matrix_exp(c * t * b) @ phi0

    return phi


# -- normalisation to a density matrix ---------------------------------------------

def normalize_solution(gen: Generator, fam: EquationFamily, shift=None, t_ref=0.0):
    """Turn an isospectral solution into a density-matrix solution.

    Shifts the spectrum by ``shift * I`` (default: the smallest value making
    it nonnegative), then rescales time and amplitude by ``Y = 1/trace``.
    Returns ``(generator, shift, Y)``.
    """
    spec = sorted_spectrum(gen(t_ref))
    lam = max(0.0, -float(spec[0])) if shift is None else float(shift)
    trace = float(np.sum(spec)) + fam.dim * lam
    if abs(trace) < 1e-12:
        raise PreconditionError("shifted trace vanishes; cannot normalise", check="trace")
    y = 1.0 / trace
    x = lam * np.eye(fam.dim)
    return rescale_solution(shift_solution(gen, x, fam), y), lam, y


# -- the 3x3 example ---------------------------------------------------------

@dataclass(frozen=True)
class Example3x3:
    """Strategy-1 example with ``H = [[0,1,0],[1,0,0],[0,0,1/sqrt2]]`` and ``mu = i``."""

    h: np.ndarray
    xi0: np.ndarray
    a: float
    delta: np.ndarray
    mu: complex
    z_minus: complex
    phi1: np.ndarray
    phi2: np.ndarray
    phi0: np.ndarray
    x_shift: np.ndarray
    y_scale: float

    @property
    def seed(self):
        return Strategy1Seed(self.h, self.xi0, self.a, self.delta)

    @property
    def family(self):
        return EquationFamily(1, self.h)

    @cached_property
    def xi1(self) -> Generator:
        """Dressed (not yet normalised) solution."""
        return dressed_strategy1_full(self.seed, self.mu, self.phi0)

    @cached_property
    def xi_int(self) -> Generator:
        return dressed_strategy1_internal(self.seed, self.mu, self.phi0)

    @cached_property
    def rho_xy(self) -> Generator:
        """Density-matrix solution: shift by ``x_shift``, then rescale by ``y_scale``."""
        return rescale_solution(shift_solution(self.xi1, self.x_shift, self.family), self.y_scale)

    def lax_pair(self):
        return LaxEigenpair.from_seed(
            self.xi0, self.h, self.mu, self.phi0, z=self.z_minus,
            propagator=self.seed.lax_propagator(self.mu, self.phi0, self.z_minus),
        )

    # The displayed matrices, written in saturation-safe form.
    @staticmethod
    def displayed_xi_int(t):
        ell = SQRT2 * expit(-t)
        c = 0.5 * sech(t / 2.0)
        return np.array([
            [(1 + SQRT2) / 2 - ell, 0, (-1 - 1j) / SQRT2 * c],
            [0, (1 - SQRT2) / 2 + ell, c],
            [(-1 + 1j) / SQRT2 * c, c, 0.5],
        ], dtype=complex)

    @staticmethod
    def displayed_rho_int(t):
        ell = SQRT2 * expit(-SQRT2 * t / 3.0)
        c = 0.5 * sech(t / (3.0 * SQRT2))
        return SQRT2 / 3.0 * np.array([
            [SQRT2 - ell, 0, (-1 - 1j) / SQRT2 * c],
            [0, ell, c],
            [(-1 + 1j) / SQRT2 * c, c, SQRT2 / 2],
        ], dtype=complex)

    def displayed_rho_xy(self, t):
        u = unitary_propagator(self.h, 2.0 * t / 3.0)
        return u @ self.displayed_rho_int(t) @ u.conj().T


def example3x3():
    h = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1 / SQRT2]], dtype=complex)
    xp, xm = solve_quadratic_diag(1.0, 0.25)
    xi0 = np.diag([xp, xm, 0.5]).astype(complex)
    delta = np.diag([1.0, 1.0, -1.0]).astype(complex) / 4
    phi1 = np.array([0, 0, 1], dtype=complex)
    phi2 = np.array([np.exp(1j * math.pi / 4), 1, 0], dtype=complex) / SQRT2
    phi0 = (phi1 + phi2) / SQRT2
    return Example3x3(
        h=h, xi0=xi0, a=1.0, delta=delta, mu=1j,
        z_minus=(1 - 1j * SQRT2) / 2,
        phi1=phi1, phi2=phi2, phi0=phi0,
        x_shift=(SQRT2 - 1) / 2 * np.eye(3, dtype=complex),
        y_scale=SQRT2 / 3,
    )


# -- the 8x8 example ---------------------------------------------------------

def dirac_alpha():
    """Dirac alpha matrices in the Dirac representation, ``alpha_k = [[0, s_k], [s_k, 0]]``."""
    return tuple(tensor_product(SIGMA_X, s) for s in PAULI)


# Entries of the displayed xi[1](t) as signed combinations of
#   m = 1/(1+e^{8t}),  p = e^{8t}/(1+e^{8t}),  s = e^{4t}/(1+e^{8t}).
_DISPLAYED_8X8 = """
m+s  is   0    -m   p-s  -is  0    -p
-is  s-m  m    0    is   -p-s p    0
0    m    -m-s is   0    p    s-p  -is
-m   0    -is  m-s  -p   0    is   p+s
p-s  -is  0    -p   m+s  is   0    -m
is   -p-s p    0    -is  s-m  m    0
0    p    s-p  -is  0    m    -m-s is
-p   0    is   p+s  -m   0    -is  m-s
"""


def _parse_displayed():
    coef = {k: np.zeros((8, 8), dtype=complex) for k in "mps"}
    rows = [r.split() for r in _DISPLAYED_8X8.strip().splitlines()]
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            if cell == "0":
                continue
            for sign, imag, sym in re.findall(r"([+-]?)(i?)([mps])", cell):
                val = (-1 if sign == "-" else 1) * (1j if imag else 1)
                coef[sym][i, j] += val
    return coef


_DISPLAYED_COEF = _parse_displayed()


@dataclass(frozen=True)
class Example8x8:
    """Strategy-2 example: ``H = alpha1 x 1 + 1 x sigma1``, ``xi = alpha2 x sigma2 + alpha3 x sigma3``."""

    h: np.ndarray
    xi: np.ndarray
    mu: complex
    phi0: np.ndarray
    shift: float = 2.0

    @property
    def seed(self):
        return Strategy2Seed(self.h, self.xi, 1)

    @property
    def family(self):
        return EquationFamily(1, self.h)

    @property
    def y_scale(self):
        return 1.0 / (8 * self.shift)

    @cached_property
    def xi1(self) -> Generator:
        return dressed_strategy2_full(self.seed, self.mu, self.phi0)

    @cached_property
    def rho(self) -> Generator:
        """Density-matrix solution: shift by ``shift * I``, rescale to unit trace."""
        x = self.shift * np.eye(8, dtype=complex)
        return rescale_solution(shift_solution(self.xi1, x, self.family), self.y_scale)

    def lax_pair(self):
        return LaxEigenpair.from_seed(
            self.xi, self.h, self.mu, self.phi0, z=0.0,
            propagator=strategy2_lax_propagator(self.seed, self.mu, self.phi0, 0.0),
        )

    @staticmethod
    def displayed(t):
        m = expit(-8.0 * t)
        p = expit(8.0 * t)
        s = 0.5 * sech(4.0 * t)
        c = _DISPLAYED_COEF
        return c["m"] * m + c["p"] * p + c["s"] * s

    def validate(self, times=(-1.0, 0.0, 0.5, 2.0), atol=1e-12):
        """Compare the constructed solution with the displayed one; raise on mismatch."""
        lax_res = np.linalg.norm((self.xi - self.mu * self.h) @ self.phi0)
        if lax_res > 1e-12:
            raise VNError(f"(xi - iH) phi0 = {lax_res:.3e} != 0: wrong alpha representation")
        worst = max(max_norm(self.xi1(t) - self.displayed(t)) for t in times)
        if worst > atol:
            raise VNError(f"constructed xi[1] differs from the displayed matrix by {worst:.3e}")
        return worst


def example8x8(validate=True):
    i2 = np.eye(2, dtype=complex)
    i4 = np.eye(4, dtype=complex)
    a1, a2, a3 = dirac_alpha()
    s1, s2, s3 = PAULI
    h = tensor_product(a1, i2) + tensor_product(i4, s1)
    xi = tensor_product(a2, s2) + tensor_product(a3, s3)
    bra = np.array([1j, 0, -1, 0, -1j, 0, 1, 0], dtype=complex)
    phi0 = bra.conj() / np.linalg.norm(bra)
    ex = Example8x8(h=h, xi=xi, mu=1j, phi0=phi0)
    if validate:
        ex.validate()
    return ex
