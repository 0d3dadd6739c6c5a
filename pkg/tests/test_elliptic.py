import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vndarboux.dynamics import EquationFamily, Trajectory, rhs_family
from vndarboux.elliptic import (
    WSeries,
    agm,
    ellipk,
    extract_w,
    fit_w_equation,
    h_eigenbasis,
    jacobi_sn,
    snled_rhs,
    to_h_eigenbasis,
    verify_k1_identification,
    w_report,
)
from vndarboux.errors import DimensionError
from vndarboux.verify import sn_quadrature

S2 = math.sqrt(2)


# -- oracles ---------------------------------------------------------------------

def test_agm_and_k_reference_values():
    assert agm(1.0, S2) == pytest.approx(1.1981402347355922, rel=1e-15)
    assert ellipk(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert ellipk(1 / S2) == pytest.approx(1.8540746773013719, rel=1e-15)
    assert ellipk(1.0) == math.inf
    with pytest.raises(ValueError):
        ellipk(1.5)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.999, 0.999999])
def test_sn_against_mpmath(k):
    us = np.linspace(-30, 30, 61)
    # 15-digit mpmath loses ~5 digits near k = 1; work at 40
    with mpmath.workdps(40):
        m = mpmath.mpf(k) ** 2
        ref = np.array([float(mpmath.ellipfun("sn", u, m=m)) for u in us])
    assert np.max(np.abs(jacobi_sn(us, k) - ref)) < 1e-13


def test_sn_limits_and_special_values():
    u = np.linspace(-20, 20, 81)
    assert np.max(np.abs(jacobi_sn(u, 0.0) - np.sin(u))) < 1e-12
    assert np.max(np.abs(jacobi_sn(u, 1.0) - np.tanh(u))) < 1e-12
    assert jacobi_sn(ellipk(0.6), 0.6) == pytest.approx(1.0, abs=1e-14)
    assert isinstance(jacobi_sn(0.3, 0.5), float)
    with pytest.raises(ValueError):
        jacobi_sn(0.1, -0.1)


@pytest.mark.parametrize("u,k", [(0.7, 0.5), (-2.2, 0.3), (5.0, 0.95)])
def test_sn_against_quadrature(u, k):
    assert abs(jacobi_sn(u, k) - sn_quadrature(u, k)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(0.0, 0.99))
def test_sn_properties(u, k):
    s = jacobi_sn(u, k)
    assert abs(s) <= 1 + 1e-15
    assert jacobi_sn(-u, k) == pytest.approx(-s, abs=1e-13)
    assert jacobi_sn(u + 4 * ellipk(k), k) == pytest.approx(s, abs=1e-11)
    h = 1e-5
    deriv = (jacobi_sn(u + h, k) - jacobi_sn(u - h, k)) / (2 * h)
    assert deriv**2 == pytest.approx((1 - s * s) * (1 - k * k * s * s), abs=1e-8)


# -- H eigenbasis and the coupled equations ------------------------------------------

def test_h_eigenbasis_ordering(ex3):
    info = h_eigenbasis(ex3.h)
    assert np.allclose(info.eigenvalues, [1, -1, 1 / S2])
    assert info.mu_hat == pytest.approx(1.0)
    assert info.lambda_hat == pytest.approx(1 / S2)
    v = info.vectors
    assert np.allclose(v.conj().T @ ex3.h @ v, np.diag([1, -1, 1 / S2]), atol=1e-15)


def test_h_eigenbasis_without_pair():
    info = h_eigenbasis(np.diag([0.5, -2.0, 1.0]))
    assert info.mu_hat is None
    assert np.allclose(info.eigenvalues, [-2.0, 1.0, 0.5])


def test_coupled_equations_match_flow(ex3):
    info = h_eigenbasis(ex3.h)
    v = info.vectors
    h_diag = np.diag(info.eigenvalues).astype(complex)
    fam = EquationFamily(1, h_diag)
    for t in (-2.0, 0.0, 1.7):
        rho = v.conj().T @ ex3.rho_xy(t) @ v
        full = rhs_family(fam, rho)
        got = snled_rhs(rho, info.mu_hat, info.lambda_hat)
        assert np.allclose(got, [full[0, 1], full[0, 2], full[1, 2]], atol=1e-14)
        # with every sign flipped (H = -diag(mu, -mu, lambda)) they do not hold
        flipped = snled_rhs(rho, -info.mu_hat, -info.lambda_hat)
        assert not np.allclose(flipped, got)


def test_diagonal_is_conserved(ex3):
    traj = to_h_eigenbasis(ex3.h, Trajectory.from_generator(ex3.rho_xy, np.linspace(-8, 8, 33)))
    diag = np.real(np.einsum("nii->ni", traj.states))
    assert np.max(np.abs(diag - diag[0])) < 1e-12
    assert traj.meta["h_eigenbasis"]["mu_hat"] == pytest.approx(1.0)


# -- W fits ------------------------------------------------------------------------

def _tanh_series(t0=-8, t1=8, n=1601):
    t = np.linspace(t0, t1, n)
    return WSeries(t, np.tanh(t / (3 * S2)) ** 2 / 9)


def test_fit_recovers_closed_form_coefficients():
    fit = fit_w_equation(_tanh_series())
    assert fit.a == pytest.approx(3.0, rel=1e-6)
    assert fit.b == pytest.approx(-4 / 9, rel=1e-6)
    assert fit.c == pytest.approx(1 / 81, rel=1e-6)
    assert fit.residual < 1e-8 and not fit.degenerate


def test_fit_degenerate_and_input_checks():
    t = np.linspace(0, 1, 20)
    assert fit_w_equation(WSeries(t, np.full(20, 0.2))).degenerate
    with pytest.raises(ValueError):
        fit_w_equation(WSeries(t[:5], np.ones(5)))
    with pytest.raises(ValueError):
        fit_w_equation(WSeries(t**2, np.sin(t) ** 2))
    with pytest.raises(ValueError):
        WSeries(t, -np.ones(20))
    with pytest.raises(DimensionError):
        WSeries(t, np.ones(3))


def test_k1_identification():
    fit = verify_k1_identification(_tanh_series())
    assert fit.passed
    assert fit.alpha == pytest.approx(1 / (3 * S2), rel=1e-8)
    assert fit.beta == pytest.approx(9.0, rel=1e-8)
    assert abs(fit.gamma) < 1e-10


def test_k1_rejects_elliptic_series():
    t = np.linspace(-8, 8, 801)
    fit = verify_k1_identification(WSeries(t, jacobi_sn(0.7 * t, 0.9) ** 2))
    assert not fit.passed
    assert fit.misfit > 1e-3


def test_k1_constant_is_degenerate():
    fit = verify_k1_identification(WSeries(np.linspace(0, 1, 10), np.full(10, 0.3)))
    assert fit.degenerate and not fit.passed


def test_extract_w_requires_3x3():
    with pytest.raises(DimensionError):
        extract_w(Trajectory([0.0], np.zeros((1, 2, 2))))


def test_w_report_on_example(ex3):
    traj = Trajectory.from_generator(ex3.rho_xy, np.linspace(-8, 8, 1601))
    rep = w_report(ex3.h, traj)
    assert rep.passed
    d = rep.to_dict()
    assert d["a"] == pytest.approx(3.0, rel=1e-6)
    assert d["b"] == pytest.approx(-4 / 9, rel=1e-6)
    assert d["c"] == pytest.approx(1 / 81, rel=1e-6)
    assert d["residual"] <= 1e-5
    assert d["k1_fit"]["misfit"] <= 1e-6
    assert d["diagonal_drift"] <= 1e-8
