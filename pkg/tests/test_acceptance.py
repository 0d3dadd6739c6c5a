"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (shown even without ``-s``)
before asserting.
"""

import math

import numpy as np
import pytest

from vndarboux import figures
from vndarboux.dynamics import (
    casimirs,
    central_difference,
    integrate_rk4,
    max_spectrum_drift,
)
from vndarboux.linalg import max_norm
from vndarboux.verify import (
    suite_casimir,
    suite_effective_hamiltonian,
    suite_elliptic,
    suite_theorem1,
    suite_theorem2,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        return ok

    return emit


def test_01_closed_form_validity(ex3, report):
    h = ex3.h
    worst = 0.0
    for t in np.linspace(-10, 10, 201):
        rho = ex3.rho_xy(t)
        rhs = -1j * (h @ rho @ rho - rho @ rho @ h)
        worst = max(worst, max_norm(central_difference(ex3.rho_xy, t) - rhs))
    assert report(1, "3x3 closed form solves i rho' = [H, rho^2]", worst <= 1e-6, f"residual {worst:.2e} <= 1e-6")


def test_02_spectrum_constancy(ex3, report):
    drift = max_spectrum_drift(ex3.rho_xy, np.linspace(-10, 10, 50), [0, 1 / 3, 2 / 3])
    assert report(2, "spectrum of rho_XY[1](t) is {0, 1/3, 2/3}", drift <= 1e-9, f"max deviation {drift:.2e} <= 1e-9")


def test_03_oracle_agreement(ex3, report):
    errs = {}
    for dt in (1e-3, 5e-4):
        traj = integrate_rk4(ex3.family, ex3.rho_xy(0.0), 0.0, 10.0, dt=dt)
        errs[dt] = max(max_norm(s - ex3.rho_xy(t)) for t, s in zip(traj.times[::10], traj.states[::10]))
    ratio = errs[1e-3] / errs[5e-4]
    ok = errs[1e-3] <= 1e-6 and ratio >= 8
    detail = f"error {errs[1e-3]:.2e} <= 1e-6, halving ratio {ratio:.1f} >= 8"
    assert report(3, "RK4 (dt=1e-3) matches the closed form on [0, 10]", ok, detail)


def test_04_amplitude_ratio(report):
    ratio = figures.amplitude(figures.fig1()) / figures.amplitude(figures.fig2())
    off = abs(math.log10(ratio) - 22)
    assert report(4, "x-y amplitude ratio [0,10] vs [-230,-220] is 1e22", off <= 1, f"ratio {ratio:.3e}")


def test_05_envelope_monotonicity(report):
    t1, t2 = figures.envelope_trend(figures.fig1()), figures.envelope_trend(figures.fig2())
    ok = t1 == -1 and t2 == 1
    assert report(5, "envelope decreasing on [0,10], increasing on [-230,-220]", ok, f"trends {t1:+d}, {t2:+d}")


def test_06_self_scattering(report):
    _, fits = figures.fig3()
    sep = figures.separation(fits["plus"], fits["minus"])
    misfits = (fits["plus"].misfit, fits["minus"].misfit)
    ok = max(misfits) <= 1e-3 and sep > 10
    detail = f"RMS misfits {misfits[0]:.1e}, {misfits[1]:.1e} <= 1e-3; separation {sep:.0f} > 10 sigma"
    assert report(6, "<J_z> has distinct sinusoidal asymptotes", ok, detail)


def test_07_eight_by_eight(ex8, report):
    matched = 0
    for t in (-1.0, 0.0, 0.5, 2.0):
        matched += int(np.sum(np.abs(ex8.xi1(t) - ex8.displayed(t)) <= 1e-12))
    drift = max_spectrum_drift(ex8.xi1, np.linspace(-5, 5, 41), [-2, -2, 0, 0, 0, 0, 2, 2])
    anti = max_norm(ex8.xi @ ex8.h + ex8.h @ ex8.xi)
    ok = matched == 256 and drift <= 1e-9 and anti <= 1e-14
    detail = f"{matched}/256 entries, spectrum drift {drift:.1e}, anticommutator {anti:.1e}"
    assert report(7, "8x8 solution matches the displayed matrix", ok, detail)


def _summary(rep):
    worst = max(rep.checks, key=lambda c: c.value / c.tolerance if c.tolerance else math.inf)
    return f"{len(rep.checks)} checks, worst {worst.name} {worst.value:.1e} <= {worst.tolerance:.0e}"


def test_08_theorem1(report):
    rep = suite_theorem1(n_random=50)
    assert len([c for c in rep.checks if c.name.endswith(":chain")]) == 52
    assert report(8, "rho[1] = T rho T^-1, isospectral, proof chain", rep.passed, _summary(rep))


def test_09_theorem2(report):
    rep = suite_theorem2()
    names = {c.name for c in rep.checks}
    assert {f"n={n}:shift+rescale(Y={y})" for n in (1, 2) for y in ("0.3333", "2", "-1")} <= names
    assert report(9, "shifted and rescaled solutions solve the equation", rep.passed, _summary(rep))


def test_10_effective_hamiltonian(report):
    rep = suite_effective_hamiltonian(n_random=100)
    assert report(10, "[H_eff, rho] = [H, f(rho)]", rep.passed, _summary(rep))


def test_11_elliptic_reduction(report):
    rep = suite_elliptic()
    assert report(11, "diagonal constant, W equation, tanh^2 fit, sn checks", rep.passed, _summary(rep))


def test_12_casimirs(report):
    rep = suite_casimir()
    rep.checks = [c for c in rep.checks if c.name.startswith("n=")]
    assert len(rep.checks) == 9
    assert report(12, "Casimirs conserved under RK4 for n = 1, 2, 3", rep.passed, _summary(rep))
