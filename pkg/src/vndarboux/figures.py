"""Data behind the self-scattering figures of the 3x3 example.

Figures 1-2 show the x-y projection of the mean spin, ``(<J_x>, <J_y>)``,
on ``[0, 10]`` and ``[-230, -220]``; figure 3 shows ``<J_z>`` together with
its two asymptotic sinusoids. Only the data are produced here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .dynamics import Trajectory, spin1_matrices
from .seeds import example3x3

FIG1_WINDOW = (0.0, 10.0)
FIG2_WINDOW = (-230.0, -220.0)
FIG3_WINDOW = (-20.0, 20.0)
FIG3_FIT_WINDOWS = {"plus": (12.0, 20.0), "minus": (-20.0, -12.0)}


def grid(t0, t1, dt):
    n = int(round((t1 - t0) / dt))
    return np.linspace(t0, t1, n + 1)


def spin_trajectory(t0, t1, dt=0.01, gen=None):
    """Sample ``rho_XY[1](t)`` and attach ``J_x``, ``J_y``, ``J_z`` expectations."""
    gen = example3x3().rho_xy if gen is None else gen
    jx, jy, jz = spin1_matrices()
    return Trajectory.from_generator(gen, grid(t0, t1, dt), {"Jx": jx, "Jy": jy, "Jz": jz})


def xy_radius(traj):
    return np.hypot(traj.observables["Jx"], traj.observables["Jy"])


def amplitude(traj):
    """Largest distance of the x-y projection from the origin."""
    return float(np.max(xy_radius(traj)))


def envelope_peaks(t, r):
    """Local maxima ``(times, values)`` of a sampled oscillation."""
    r = np.asarray(r)
    idx = np.where((r[1:-1] > r[:-2]) & (r[1:-1] >= r[2:]))[0] + 1
    return np.asarray(t)[idx], r[idx]


def envelope_trend(traj):
    """``+1`` if the peak sequence strictly increases, ``-1`` if it strictly decreases, else 0."""
    _, peaks = envelope_peaks(traj.times, xy_radius(traj))
    if len(peaks) < 2:
        return 0
    d = np.diff(peaks)
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    return 0


@dataclass
class SinusoidFit:
    """``y = A sin(omega t) + B cos(omega t) + C``; ``misfit`` is the RMS residual."""

    params: np.ndarray
    stderr: np.ndarray
    misfit: float
    max_residual: float

    names = ("A", "B", "omega", "C")

    def __call__(self, t):
        return _sinusoid(np.asarray(t, dtype=float), *self.params)

    def to_dict(self):
        out = {n: float(v) for n, v in zip(self.names, self.params)}
        out.update({f"{n}_stderr": float(v) for n, v in zip(self.names, self.stderr)})
        out["misfit"] = self.misfit
        out["max_residual"] = self.max_residual
        return out


def _sinusoid(t, a, b, omega, c):
    return a * np.sin(omega * t) + b * np.cos(omega * t) + c


def fit_sinusoid(t, y):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    # frequency guess from a zero-padded FFT
    n = 16 * len(t)
    spec = np.abs(np.fft.rfft(y - y.mean(), n))
    freqs = np.fft.rfftfreq(n, d=t[1] - t[0])
    omega0 = 2 * np.pi * freqs[1 + np.argmax(spec[1:])]
    basis = np.column_stack([np.sin(omega0 * t), np.cos(omega0 * t), np.ones_like(t)])
    (a0, b0, c0), *_ = np.linalg.lstsq(basis, y, rcond=None)
    popt, pcov = curve_fit(_sinusoid, t, y, p0=[a0, b0, omega0, c0], maxfev=20000)
    resid = y - _sinusoid(t, *popt)
    return SinusoidFit(popt, np.sqrt(np.diag(pcov)), float(np.sqrt(np.mean(resid**2))), float(np.max(np.abs(resid))))


def separation(fit_a: SinusoidFit, fit_b: SinusoidFit):
    """Largest parameter difference in units of the combined standard error."""
    err = np.sqrt(fit_a.stderr**2 + fit_b.stderr**2)
    err = np.where(err > 0, err, np.finfo(float).tiny)
    return float(np.max(np.abs(fit_a.params - fit_b.params) / err))


def fig1(dt=0.01):
    return spin_trajectory(*FIG1_WINDOW, dt)


def fig2(dt=0.01):
    return spin_trajectory(*FIG2_WINDOW, dt)


def fig3(dt=0.01):
    """``<J_z>`` on [-20, 20] plus the two fitted asymptotes.

    Returns ``(traj, fits)``; the trajectory gets columns ``Jz_plus_fit`` and
    ``Jz_minus_fit`` evaluated over the whole window.
    """
    traj = spin_trajectory(*FIG3_WINDOW, dt)
    fits = {}
    for key, (lo, hi) in FIG3_FIT_WINDOWS.items():
        mask = (traj.times >= lo - 1e-12) & (traj.times <= hi + 1e-12)
        fits[key] = fit_sinusoid(traj.times[mask], traj.observables["Jz"][mask])
    for key, fit in fits.items():
        traj.observables[f"Jz_{key}_fit"] = fit(traj.times)
    for name in ("Jx", "Jy"):
        traj.observables.pop(name)
    return traj, fits
