"""Invariant suites behind ``vndarboux verify``.

Every suite returns a :class:`SuiteReport` of named checks (value,
tolerance, pass flag). Random instances use a fixed seed so reports are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ellipj

from . import tolerances as tols
from .dynamics import (
    EquationFamily,
    PolynomialF,
    Trajectory,
    casimirs,
    effective_hamiltonian,
    equation_residual,
    integrate_rk4,
    max_spectrum_drift,
)
from .elliptic import jacobi_sn, w_report
from .errors import VNError
from .laxdarboux import (
    DarbouxConfig,
    darboux_rho,
    projector,
    rescale_solution,
    shift_solution,
    similarity_T,
    verify_theorem1_chain,
)
from .linalg import commutator, max_norm
from .seeds import Strategy2Seed, dressed_strategy2_full, example3x3, example8x8

SUITES = ("theorem1", "theorem2", "examples", "elliptic", "casimir")


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool = None
    detail: str = ""

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


@dataclass
class SuiteReport:
    suite: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {"suite": self.suite, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


# -- random instances -------------------------------------------------------------

def random_hermitian(rng, d, scale=1.0):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (m + m.conj().T) / 2


def random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_darboux_instance(rng, d, hermitian=True):
    """Random ``(rho, A, phi, chi, cfg)`` satisfying the Lax eigen-equations."""
    rho = random_hermitian(rng, d)
    a = random_hermitian(rng, d)
    mu = complex(rng.normal(), rng.uniform(0.3, 2.0) * rng.choice([-1, 1]))
    if hermitian:
        cfg = DarbouxConfig(mu)
    else:
        cfg = DarbouxConfig(mu, complex(rng.normal(), rng.normal()), hermitian_mode=False)
    _, vecs = np.linalg.eig(rho - cfg.mu * a)
    phi = vecs[:, rng.integers(d)]
    if hermitian:
        chi = phi
    else:
        # the bra of chi is a left eigenvector of rho - nu A
        _, left = np.linalg.eig((rho - cfg.nu * a).conj().T)
        chi = left[:, rng.integers(d)]
    return rho, a, phi, chi, cfg


def random_strategy2(rng, n):
    """Random 4x4 anticommuting seed with a Lax vector that is not a flow eigenvector.

    In the eigenbasis ``A = diag(a1, -a1, a2, -a2)`` and ``xi`` couples each
    ``+/-`` pair. With ``mu = i y`` the Lax eigenvalues of both pairs are
    made equal, so a mixture of the two blocks is still a Lax eigenvector but
    not an eigenvector of ``A^2``. Everything is then rotated by a random
    unitary. Returns ``(seed, mu, phi0)``.
    """
    a1, a2 = sorted(rng.uniform(0.4, 1.2, size=2))
    if a2 - a1 < 0.1:
        a2 = a1 + 0.3
    y = rng.uniform(0.4, 1.2)
    w1 = rng.uniform(0.5, 1.5)
    z2 = w1**2 - (y * a1) ** 2
    w2 = math.sqrt(z2 + (y * a2) ** 2)
    th1, th2 = rng.uniform(0, 2 * np.pi, size=2)
    a = np.diag([a1, -a1, a2, -a2]).astype(complex)
    xi = np.zeros((4, 4), dtype=complex)
    xi[0, 1] = w1 * np.exp(1j * th1)
    xi[2, 3] = w2 * np.exp(1j * th2)
    xi = xi + xi.conj().T
    mu = 1j * y
    lax = xi - mu * a
    z = np.sqrt(complex(z2))
    vecs = []
    for blk in (slice(0, 2), slice(2, 4)):
        ev, ve = np.linalg.eig(lax[blk, blk])
        v = np.zeros(4, dtype=complex)
        v[blk] = ve[:, int(np.argmin(np.abs(ev - z)))]
        vecs.append(v / np.linalg.norm(v))
    c = rng.uniform(0.3, 1.0)
    phi = vecs[0] + c * np.exp(1j * rng.uniform(0, 2 * np.pi)) * vecs[1]
    u = random_unitary(rng, 4)
    seed = Strategy2Seed(u @ a @ u.conj().T, u @ xi @ u.conj().T, n)
    return seed, mu, u @ phi


def direct_sum(*mats):
    d = sum(m.shape[0] for m in mats)
    out = np.zeros((d, d), dtype=complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def random_commuting_shift_case(rng, n):
    """Direct sum of two dressed strategy-2 solutions and a block-scalar shift ``X``.

    Returns ``(family, generator, X)``; ``X`` commutes with ``A`` and with the
    solution at all times.
    """
    parts = [random_strategy2(rng, n) for _ in range(2)]
    gens = [dressed_strategy2_full(s, mu, phi) for s, mu, phi in parts]
    a = direct_sum(*(s.a for s, _, _ in parts))
    x1, x2 = rng.uniform(-2, 2, size=2)
    x = direct_sum(x1 * np.eye(4), x2 * np.eye(4))

    def gen(t):
        return direct_sum(*(g(t) for g in gens))

    return EquationFamily(n, a), gen, x


# -- suites ---------------------------------------------------------------------------

def suite_theorem1(n_random=50, fault=None, rng_seed=1234):
    rep = SuiteReport("theorem1")
    tol_sim = tols.tol(1e-10)
    tol_spec = tols.tol(1e-9)

    cases = []
    ex3 = example3x3()
    cases.append(("3x3", ex3.xi0, ex3.h, ex3.phi0, ex3.phi0, DarbouxConfig(ex3.mu)))
    ex8 = example8x8()
    cases.append(("8x8", ex8.xi, ex8.h, ex8.phi0, ex8.phi0, DarbouxConfig(ex8.mu)))
    rng = np.random.default_rng(rng_seed)
    for i in range(n_random):
        d = int(rng.integers(2, 7))
        rho, a, phi, chi, cfg = random_darboux_instance(rng, d, hermitian=(i % 2 == 0))
        cases.append((f"random{i}", rho, a, phi, chi, cfg))

    for name, rho, a, phi, chi, cfg in cases:
        p = None
        if fault == "corrupt-P":
            p = projector(phi, chi)
            p = p + 1e-3 * np.ones_like(p)
        chain = verify_theorem1_chain(rho, a, phi, chi, cfg, p=p)
        worst = next((s for s in chain.steps if not s.passed), max(chain.steps, key=lambda s: s.residual))
        detail = "" if chain.passed else f"first failing step: {chain.first_failure}"
        rep.checks.append(Check(f"{name}:chain", worst.residual, worst.tolerance, passed=chain.passed, detail=detail))
        if fault is not None:
            continue
        p = projector(phi, chi)
        rho1 = darboux_rho(rho, a, p, cfg)
        t_mat = similarity_T(p, cfg)
        t_inv = similarity_T(p, cfg, inverse=True)
        scale = max(1.0, max_norm(rho))
        rep.checks.append(Check(f"{name}:similarity", max_norm(rho1 - t_mat @ rho @ t_inv) / scale, tol_sim))
        ev0 = np.sort_complex(np.linalg.eigvals(rho))
        ev1 = np.sort_complex(np.linalg.eigvals(rho1))
        if cfg.hermitian_mode:
            ev0 = np.linalg.eigvalsh(rho)
            ev1 = np.linalg.eigvalsh((rho1 + rho1.conj().T) / 2)
        rep.checks.append(Check(f"{name}:spectrum", float(np.max(np.abs(ev0 - ev1))), tol_spec))
    return rep


def suite_theorem2(rng_seed=99):
    rep = SuiteReport("theorem2")
    tol_eq = tols.tol(tols.EQUATION_RESIDUAL)
    grid = np.linspace(-2.0, 2.0, 101)
    rng = np.random.default_rng(rng_seed)
    for n in (1, 2):
        fam, gen, x = random_commuting_shift_case(rng, n)
        rep.checks.append(Check(f"n={n}:seed", equation_residual(gen, fam, grid), tol_eq))
        shifted = shift_solution(gen, x, fam)
        rep.checks.append(Check(f"n={n}:shift", equation_residual(shifted, fam, grid), tol_eq))
        for y in (1.0 / 3.0, 2.0, -1.0):
            res = equation_residual(rescale_solution(shifted, y), fam, grid)
            rep.checks.append(Check(f"n={n}:shift+rescale(Y={y:.4g})", res, tol_eq))
    ex = example3x3()
    rep.checks.append(Check("3x3:rho_XY", equation_residual(ex.rho_xy, ex.family, np.linspace(-10, 10, 101)), tol_eq))
    ex8 = example8x8()
    rep.checks.append(Check("8x8:normalized", equation_residual(ex8.rho, ex8.family, np.linspace(-10, 10, 101)), tol_eq))
    return rep


def suite_examples():
    rep = SuiteReport("examples")
    ex = example3x3()
    ts = np.linspace(-10, 10, 41)
    rep.checks.append(Check("3x3:xi_int_vs_displayed",
                            max(max_norm(ex.xi_int(t) - ex.displayed_xi_int(t)) for t in ts), 1e-12))
    rep.checks.append(Check("3x3:rho_XY_vs_displayed",
                            max(max_norm(ex.rho_xy(t) - ex.displayed_rho_xy(t)) for t in ts), 1e-12))
    rep.checks.append(Check("3x3:spectrum{0,1/3,2/3}",
                            max_spectrum_drift(ex.rho_xy, np.linspace(-10, 10, 50), [0, 1 / 3, 2 / 3]), tols.tol(1e-9)))
    rep.checks.append(Check("3x3:casimirs[1,5/9,1/3]",
                            max(float(np.max(np.abs(np.array(casimirs(ex.rho_xy(t), 3)) - [1, 5 / 9, 1 / 3])))
                                for t in ts), tols.tol(1e-9)))
    ex8 = example8x8()
    for t in (-1.0, 0.0, 0.5, 2.0):
        diff = np.abs(ex8.xi1(t) - ex8.displayed(t))
        rep.checks.append(Check(f"8x8:64_entries(t={t:g})", float(diff.max()), 1e-12,
                                detail=f"{int(np.sum(diff <= 1e-12))}/64 entries within tolerance"))
    rep.checks.append(Check("8x8:spectrum{0,+-2}",
                            max_spectrum_drift(ex8.xi1, np.linspace(-5, 5, 21), [-2, -2, 0, 0, 0, 0, 2, 2]),
                            tols.tol(1e-9)))
    rep.checks.append(Check("8x8:anticommutation", max_norm(ex8.xi @ ex8.h + ex8.h @ ex8.xi), 1e-14))
    rep.checks.append(Check("8x8:lax_kernel", float(np.linalg.norm((ex8.xi - 1j * ex8.h) @ ex8.phi0)), 1e-12))
    return rep


def sn_quadrature(u, k):
    """Independent ``sn(u, k)``: invert ``F(phi, k) = u`` with adaptive quadrature."""
    def incomplete(phi):
        return quad(lambda th: 1.0 / math.sqrt(1.0 - (k * math.sin(th)) ** 2), 0.0, phi,
                    epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    sign = -1.0 if u < 0 else 1.0
    u = abs(u)
    hi = 1.0
    while incomplete(hi) < u:
        hi *= 2.0
    phi = brentq(lambda x: incomplete(x) - u, 0.0, hi, xtol=1e-15)
    return sign * math.sin(phi)


def suite_elliptic():
    rep = SuiteReport("elliptic")
    ex = example3x3()
    ts = np.linspace(-8.0, 8.0, 1601)
    traj = Trajectory.from_generator(ex.rho_xy, ts)
    wr = w_report(ex.h, traj)
    rep.checks.append(Check("diagonal_constant", wr.diagonal_drift, tols.tol(1e-8)))
    rep.checks.append(Check("W_equation_residual", wr.quad.residual, tols.tol(1e-5)))
    rep.checks.append(Check("k1_tanh2_misfit", wr.k1.misfit, tols.tol(1e-6), passed=wr.k1.passed))
    u = np.linspace(-10, 10, 401)
    rep.checks.append(Check("sn(u,0)=sin", float(np.max(np.abs(jacobi_sn(u, 0.0) - np.sin(u)))), 1e-12))
    rep.checks.append(Check("sn(u,1)=tanh", float(np.max(np.abs(jacobi_sn(u, 1.0) - np.tanh(u)))), 1e-12))
    # scipy takes the parameter m = k^2
    ref = ellipj(u, 0.5**2)[0]
    rep.checks.append(Check("sn(u,0.5)_vs_scipy", float(np.max(np.abs(jacobi_sn(u, 0.5) - ref))), 1e-12))
    worst = 0.0
    for k in (0.3, 0.7, 0.95):
        for x in (-3.1, -0.4, 0.7, 2.5, 6.0):
            worst = max(worst, abs(jacobi_sn(x, k) - sn_quadrature(x, k)))
    rep.checks.append(Check("sn_vs_quadrature", worst, 1e-10))
    return rep


def suite_casimir(rng_seed=7, span=10.0, dt=1e-3):
    rep = SuiteReport("casimir")
    rng = np.random.default_rng(rng_seed)
    for n in (1, 2, 3):
        d = 4
        a = random_hermitian(rng, d)
        a = a / np.linalg.norm(a, 2)
        rho0 = random_density(rng, d)
        traj = integrate_rk4(EquationFamily(n, a), rho0, 0.0, span, dt)
        c = np.array([casimirs(s, 3) for s in traj.states])
        drift = np.max(np.abs(c - c[0]), axis=0)
        for k in range(3):
            rep.checks.append(Check(f"n={n}:Tr rho^{k + 1}", float(drift[k]), tols.tol(1e-6)))
    # the effective-Hamiltonian identity is what makes Tr f(rho) conserved
    rep.checks.extend(suite_effective_hamiltonian().checks)
    return rep


def suite_effective_hamiltonian(n_random=100, rng_seed=5):
    rep = SuiteReport("effective_hamiltonian")
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for _ in range(n_random):
        d = int(rng.integers(2, 7))
        h = random_hermitian(rng, d)
        rho = random_density(rng, d)
        f = PolynomialF(tuple(rng.normal(size=int(rng.integers(1, 6)))), center=float(rng.uniform(0, 1)))
        heff = effective_hamiltonian(h, rho, f)
        fr = f.of_matrix(rho)
        worst = max(worst, max_norm(commutator(heff, rho) - commutator(h, fr)))
    rep.checks.append(Check("[H_eff,rho]=[H,f(rho)]", worst, tols.tol(1e-10)))
    return rep


_RUNNERS = {
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "examples": suite_examples,
    "elliptic": suite_elliptic,
    "casimir": suite_casimir,
}


def run_suite(name, fault=None):
    """Run one suite (or ``"all"``) and return a list of reports."""
    if name == "all":
        names = list(SUITES)
    elif name in _RUNNERS:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    reports = []
    for n in names:
        try:
            if n == "theorem1":
                reports.append(suite_theorem1(fault=fault))
            else:
                reports.append(_RUNNERS[n]())
        except VNError as exc:
            reports.append(SuiteReport(n, [Check("exception", math.inf, 0.0, passed=False, detail=str(exc))]))
    return reports
