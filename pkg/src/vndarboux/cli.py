"""Command-line interface: ``vndarboux <command> [options]``.

Commands
--------
simulate   integrate ``i rho' = sum_k [A^(n-k) rho A^k, rho]`` with RK4
darboux    dress a seed (fixture or JSON bundle) and report invariants
reproduce  emit the data behind the worked-example figures and matrices
verify     run invariant suites and write a JSON report
w-report   fit the scalar ``W`` equation of the 3x3 reduction

Complex numbers (``--mu``) follow the grammar::

    complex := real | imag | real sign imag
    imag    := [sign] [number] ("i" | "j")
    real    := [sign] number

so ``i``, ``-2.5i``, ``0.5+i``, ``1e-3-2i`` and ``3`` are all valid.

Diagnostics go to standard error, data only to files. Exit status is 0 when
every gate passes, 1 when a gate or suite fails, and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
import warnings

import numpy as np

from . import __version__
from .dynamics import EquationFamily, Trajectory, casimirs, equation_residual, integrate_rk4, spin1_matrices
from .errors import MatrixFormatError, PreconditionError, VNError
from .laxdarboux import DarbouxConfig, TrivialTransformationWarning, similarity_rate
from .linalg import (
    as_vector,
    atomic_write_text,
    check_density,
    check_hermitian,
    load_matrix,
    matrix_from_json,
    max_norm,
    save_matrix,
)

log = logging.getLogger("vndarboux")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^\s*(?:(?P<re>[+-]?{_NUM})(?=\s*$|\s*[+-]))?\s*"
    rf"(?:(?P<sign>[+-])?\s*(?P<im>{_NUM})?\s*(?P<unit>[ij]))?\s*$"
)


class UsageError(Exception):
    pass


def parse_complex(text):
    """Parse ``"a+bi"`` style input; raises ``ValueError`` on bad or non-finite values."""
    m = _COMPLEX_RE.match(text or "")
    if not text or not text.strip() or m is None or (m.group("re") is None and m.group("unit") is None):
        raise ValueError(f"cannot parse complex number {text!r} (expected e.g. 1.5-2i)")
    re_part = float(m.group("re")) if m.group("re") is not None else 0.0
    im_part = 0.0
    if m.group("unit"):
        im_part = float(m.group("im")) if m.group("im") is not None else 1.0
        if m.group("sign") == "-":
            im_part = -im_part
        elif m.group("sign") is None and m.group("re") is not None:
            raise ValueError(f"missing sign between real and imaginary parts in {text!r}")
    z = complex(re_part, im_part)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"complex number {text!r} is not finite")
    return z


def _complex_arg(text):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _times_arg(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"bad time list {text!r}")
    return vals


def _check_grid(args):
    if not (math.isfinite(args.t0) and math.isfinite(args.t1) and math.isfinite(args.dt)):
        raise UsageError("t0, t1 and dt must be finite")
    if args.dt <= 0:
        raise UsageError("dt must be positive")
    if args.t1 <= args.t0:
        raise UsageError("t1 must exceed t0")


def _grid(t0, t1, dt):
    n = max(1, int(round((t1 - t0) / dt)))
    return np.linspace(t0, t1, n + 1)


def _write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x)}")


def _default_observables(d):
    obs = {}
    if d == 3:
        jx, jy, jz = spin1_matrices()
        obs = {"Jx": jx, "Jy": jy, "Jz": jz}
    return obs


# -- simulate ----------------------------------------------------------------------

def cmd_simulate(args):
    _check_grid(args)
    if args.example:
        from .seeds import example3x3, example8x8

        if args.example == "3x3":
            ex = example3x3()
            a, rho0 = ex.h, ex.rho_xy(args.t0)
        else:
            ex = example8x8()
            a, rho0 = ex.h, ex.rho(args.t0)
        n = 1 if args.n is None else args.n
    else:
        if args.a is None or args.rho0 is None:
            raise UsageError("simulate needs --a and --rho0 (or --example)")
        a = load_matrix(args.a)
        rho0 = load_matrix(args.rho0)
        n = 1 if args.n is None else args.n
    if n < 0:
        raise UsageError("--n must be nonnegative")
    if args.gate == "density":
        check_density(rho0, "rho0")
    else:
        check_hermitian(rho0, "rho0")
    fam = EquationFamily(n, a)
    traj = integrate_rk4(fam, rho0, args.t0, args.t1, args.dt, store_every=args.store_every)
    for name, obs in _default_observables(fam.dim).items():
        traj.add_observable(name, obs)
    c = np.array([casimirs(s, 3) for s in traj.states])
    for k in range(3):
        traj.observables[f"tr_rho{k + 1}"] = c[:, k]
    traj.to_csv(args.out, mode=args.mode)
    drift = traj.meta["casimir_drift"]
    log.info("simulate: %d samples written to %s; Casimir drift Tr rho=%.3e Tr rho^2=%.3e Tr rho^3=%.3e",
             len(traj), args.out, *drift)
    return EXIT_OK


# -- darboux -----------------------------------------------------------------------

def _load_bundle(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    for key in ("h", "xi0", "a", "phi0"):
        if key not in obj:
            raise UsageError(f"{path}: bundle is missing key {key!r}")
    h = matrix_from_json(obj["h"])
    xi0 = matrix_from_json(obj["xi0"])
    try:
        phi0 = np.array([complex(float(r), float(i)) for r, i in obj["phi0"]])
        a = float(obj["a"])
    except (TypeError, ValueError):
        raise UsageError(f"{path}: phi0 must be a list of [re, im] pairs and a a number") from None
    delta = matrix_from_json(obj["delta"]) if "delta" in obj else None
    return h, xi0, a, as_vector(phi0, h.shape[0], "phi0"), delta


def _dress(args):
    """Return ``(family, dressed, phi_of_t, meta)``; ``phi_of_t`` is None when trivial."""
    from . import seeds

    meta = {}
    if args.bundle:
        h, xi0, a, phi0, delta = _load_bundle(args.bundle)
        seed = seeds.Strategy1Seed(h, xi0, a, delta)
        mu = args.mu if args.mu is not None else 1j
        meta["seed"] = "bundle"
        kind = 1
    elif args.example == "8x8":
        ex = seeds.example8x8()
        seed, mu, phi0 = ex.seed, (args.mu if args.mu is not None else ex.mu), ex.phi0
        meta["seed"] = "example 8x8"
        kind = 2
    else:
        ex = seeds.example3x3()
        seed, mu, phi0 = ex.seed, (args.mu if args.mu is not None else ex.mu), ex.phi0
        meta["seed"] = "example 3x3"
        kind = 1

    fam = seed.family
    if complex(mu).imag == 0:
        warnings.warn("real mu: trivial transformation, rho[1] = rho", TrivialTransformationWarning)
        dressed = seed.solution if kind == 1 else (lambda t, x=seed.xi: x.copy())  # strategy-2 seeds are stationary
        meta.update({"mu": complex(mu), "trivial": True})
        return fam, dressed, None, meta

    lax = (seed.xi0 if kind == 1 else seed.xi) - mu * (seed.h if kind == 1 else seed.a)
    if np.linalg.norm(lax @ phi0 - np.vdot(phi0, lax @ phi0) * phi0) > 1e-8 and not args.bundle:
        # fixture vector belongs to another mu; pick a Lax eigenvector for this one
        phi0 = seeds.choose_lax_vector(lax, avoid=seed.delta if kind == 1 else None)[1]
        meta["phi0"] = "default eigenvector (equal-weight convention)"
    z = complex(np.vdot(phi0, lax @ phi0))
    if kind == 1:
        dressed = seeds.dressed_strategy1_full(seed, mu, phi0)
        phi_of_t = seed.lax_propagator(mu, phi0, z)
    else:
        dressed = seeds.dressed_strategy2_full(seed, mu, phi0)
        phi_of_t = seeds.strategy2_lax_propagator(seed, mu, phi0, z)
    meta.update({"mu": mu, "z": z, "trivial": False})
    return fam, dressed, phi_of_t, meta


def cmd_darboux(args):
    from .seeds import normalize_solution

    _check_grid(args)
    if args.out is None:
        raise UsageError("darboux needs --out (output prefix)")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TrivialTransformationWarning)
        try:
            fam, dressed, phi_of_t, meta = _dress(args)
        except PreconditionError as exc:
            if exc.check == "delta_eigenvector":
                log.error("refused (check %s): %s, which is exactly what the dressing must avoid",
                          exc.check, exc)
            elif exc.check == "lax_eigenpair":
                log.error("refused (check %s): %s. Every Lax eigenvector for this mu is also an eigenvector "
                          "of Delta_a, so the dressing would be stationary; choose mu with a degenerate "
                          "Lax eigenvalue.", exc.check, exc)
            else:
                log.error("refused (check %s): %s", exc.check, exc)
            return EXIT_USAGE
    for w in caught:
        if issubclass(w.category, TrivialTransformationWarning):
            log.warning("trivial transformation: %s", w.message)
        else:
            log.warning("%s", w.message)

    times = _grid(args.t0, args.t1, args.dt)
    report = {"meta": meta, "gates": {}}
    if meta["trivial"]:
        gen = dressed
        report["normalisation"] = None
    else:
        gen, shift, y = normalize_solution(dressed, fam)
        report["normalisation"] = {"shift": shift, "Y": y}
    traj = Trajectory.from_generator(gen, times, _default_observables(fam.dim))
    spectra = np.array([np.linalg.eigvalsh((s + s.conj().T) / 2) for s in traj.states])
    drift = float(np.max(np.abs(spectra - spectra[0])))
    report["spectrum"] = {"initial": spectra[0].tolist(), "max_drift": drift}
    herm = float(max(max_norm(s - s.conj().T) for s in traj.states))
    res_grid = np.linspace(args.t0, args.t1, min(len(times), 101))
    eq_res = equation_residual(gen, fam, res_grid)
    report["equation_residual"] = eq_res
    report["hermiticity_error"] = herm
    if phi_of_t is not None:
        try:
            rate = similarity_rate(phi_of_t, DarbouxConfig(meta["mu"]), res_grid[:: max(1, len(res_grid) // 11)])
        except (VNError, FloatingPointError, ValueError) as exc:
            rate = None
            log.warning("||dT/dt|| not available: %s", exc)
        report["similarity_rate_max"] = rate
    gates = {
        "spectrum_constant": drift <= 1e-9,
        "equation_residual": eq_res <= 1e-6,
        "hermitian": herm <= 1e-10,
    }
    report["gates"] = gates
    traj.to_csv(args.out + ".csv", mode=args.mode)
    _write_json(args.out + ".json", report)
    log.info("darboux: spectrum %s (drift %.2e), equation residual %.2e",
             np.array2string(spectra[0], precision=6), drift, eq_res)
    if not all(gates.values()):
        log.error("darboux: gate failure: %s", [k for k, v in gates.items() if not v])
        return EXIT_FAIL
    return EXIT_OK


# -- reproduce ---------------------------------------------------------------------

def cmd_reproduce(args):
    from . import figures
    from .seeds import example3x3, example8x8

    if args.out is None:
        raise UsageError("reproduce needs --out")
    target = args.target
    if args.example == "8x8":
        ex = example8x8()
        if target == "matrix":
            times = args.times or [-1.0, 0.0, 0.5, 2.0]
            traj = Trajectory.from_generator(ex.xi1, sorted(times))
            traj.to_csv(args.out, mode="full")
            diffs = [float(np.max(np.abs(ex.xi1(t) - ex.displayed(t)))) for t in traj.times]
            within = [int(np.sum(np.abs(ex.xi1(t) - ex.displayed(t)) <= 1e-12)) for t in traj.times]
            rep = {"times": traj.times.tolist(), "max_abs_diff": diffs, "entries_within_1e-12": within,
                   "passed": all(w == 64 for w in within)}
            _write_json(args.out + ".json", rep)
            log.info("8x8: %s of 64 entries match the displayed matrix", within)
            return EXIT_OK if rep["passed"] else EXIT_FAIL
        if target == "fixture":
            save_matrix(args.out + ".A.json", ex.h)
            save_matrix(args.out + ".rho0.json", ex.rho(0.0))
            return EXIT_OK
        raise UsageError(f"target {target!r} is not available for the 8x8 example (use matrix or fixture)")

    ex = example3x3()
    if target in ("fig1", "fig2"):
        traj = figures.fig1(args.dt) if target == "fig1" else figures.fig2(args.dt)
        traj.observables.pop("Jz")
        traj.to_csv(args.out)
        summary = {"amplitude": figures.amplitude(traj), "envelope_trend": figures.envelope_trend(traj)}
        _write_json(args.out + ".json", summary)
        log.info("%s: amplitude %.4e, envelope trend %+d", target, summary["amplitude"], summary["envelope_trend"])
    elif target == "fig3":
        traj, fits = figures.fig3(args.dt)
        traj.to_csv(args.out)
        summary = {k: f.to_dict() for k, f in fits.items()}
        summary["separation"] = figures.separation(fits["plus"], fits["minus"])
        _write_json(args.out + ".json", summary)
        log.info("fig3: separation %.1f standard errors", summary["separation"])
    elif target == "matrix":
        times = args.times or [-1.0, 0.0, 0.5, 2.0]
        Trajectory.from_generator(ex.rho_xy, sorted(times)).to_csv(args.out, mode="full")
    elif target == "fixture":
        save_matrix(args.out + ".A.json", ex.h)
        save_matrix(args.out + ".rho0.json", ex.rho_xy(0.0))
    else:  # argparse restricts choices; kept for programmatic callers
        raise UsageError(f"unknown target {target!r}")
    return EXIT_OK


# -- verify ------------------------------------------------------------------------

def cmd_verify(args):
    from .verify import run_suite

    reports = run_suite(args.suite, fault=args.inject_fault)
    passed = all(r.passed for r in reports)
    doc = {"passed": passed, "suites": [r.to_dict() for r in reports]}
    text = json.dumps(doc, indent=2, default=_json_default) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    for r in reports:
        log.info("%-9s %s (%d checks)", r.suite, "PASS" if r.passed else "FAIL", len(r.checks))
        for c in r.failures()[:10]:
            log.error("  %s: %.3e > %.1e %s", c.name, c.value, c.tolerance, c.detail)
    return EXIT_OK if passed else EXIT_FAIL


# -- w-report ----------------------------------------------------------------------

def _read_full_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ncol = len(header) - 1
    d = int(round(math.sqrt(ncol / 2)))
    if header[0] != "t" or 2 * d * d != ncol:
        raise UsageError(f"{path}: not a full-matrix trajectory CSV")
    flat = data[:, 1:].reshape(len(data), d * d, 2)
    states = (flat[..., 0] + 1j * flat[..., 1]).reshape(len(data), d, d)
    return Trajectory(data[:, 0], states)


def cmd_w_report(args):
    from .elliptic import w_report
    from .seeds import example3x3

    _check_grid(args)
    if args.out is None:
        raise UsageError("w-report needs --out")
    if args.traj:
        if args.a is None:
            raise UsageError("w-report --traj needs --a (the Hamiltonian)")
        h = load_matrix(args.a)
        traj = _read_full_csv(args.traj)
    else:
        ex = example3x3()
        h = ex.h
        traj = Trajectory.from_generator(ex.rho_xy, _grid(args.t0, args.t1, args.dt))
    rep = w_report(h, traj)
    _write_json(args.out, rep.to_dict())
    log.info("w-report: a=%.6g b=%.6g c=%.6g residual=%.2e; k=1 fit misfit %.2e (%s)",
             rep.quad.a, rep.quad.b, rep.quad.c, rep.quad.residual, rep.k1.misfit,
             "pass" if rep.k1.passed else "fail")
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser ------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="vndarboux", description=__doc__.split("\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="only report errors")
    sub = p.add_subparsers(dest="command", required=True)

    def grid(sp, t0, t1, dt):
        sp.add_argument("--t0", type=float, default=t0)
        sp.add_argument("--t1", type=float, default=t1)
        sp.add_argument("--dt", type=float, default=dt)

    s = sub.add_parser("simulate", help="RK4 integration from a matrix JSON initial condition")
    s.add_argument("--n", type=int, default=None, help="family index n (default 1)")
    s.add_argument("--a", help="matrix JSON for A (H when n=1)")
    s.add_argument("--rho0", help="matrix JSON for the initial state")
    s.add_argument("--example", choices=["3x3", "8x8"], help="use a worked example as initial condition")
    s.add_argument("--gate", choices=["density", "hermitian"], default="density",
                   help="invariant the initial state must satisfy")
    s.add_argument("--mode", choices=["observables", "full"], default="observables")
    s.add_argument("--store-every", type=int, default=1)
    s.add_argument("--out", required=True, help="CSV output path")
    grid(s, 0.0, 10.0, 1e-3)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("darboux", help="dress a seed and report spectrum and equation residual")
    s.add_argument("--example", choices=["3x3", "8x8"], default="3x3")
    s.add_argument("--bundle", help="JSON bundle {h, xi0, a, phi0[, delta]} for a strategy-1 seed")
    s.add_argument("--mu", type=_complex_arg, default=None, help="spectral parameter, e.g. i or 0.5+2i")
    s.add_argument("--mode", choices=["observables", "full"], default="full")
    s.add_argument("--out", help="output prefix; writes <out>.csv and <out>.json")
    grid(s, -10.0, 10.0, 0.1)
    s.set_defaults(func=cmd_darboux)

    s = sub.add_parser("reproduce", help="data behind the worked-example figures")
    s.add_argument("--example", choices=["3x3", "8x8"], default="3x3")
    s.add_argument("--target", choices=["fig1", "fig2", "fig3", "matrix", "fixture"], required=True)
    s.add_argument("--times", type=_times_arg, default=None, help="comma separated times for --target matrix")
    s.add_argument("--dt", type=float, default=0.01, help="sampling step for figure data")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("verify", help="run invariant suites; JSON report, nonzero exit on failure")
    s.add_argument("--suite", choices=["all", "theorem1", "theorem2", "examples", "elliptic", "casimir"],
                   default="all")
    s.add_argument("--out", help="report path (default: standard output)")
    s.add_argument("--inject-fault", choices=["corrupt-P"], default=None, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("w-report", help="fit W'' = aW^2 + bW + c and the k=1 solution")
    s.add_argument("--traj", help="full-matrix trajectory CSV (default: the 3x3 example)")
    s.add_argument("--a", help="Hamiltonian matrix JSON, required with --traj")
    s.add_argument("--out", required=True, help="JSON output path")
    grid(s, -8.0, 8.0, 0.01)
    s.set_defaults(func=cmd_w_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (UsageError, MatrixFormatError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except VNError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAIL
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
