"""Command-line interface: ``qrabi <subcommand> [options]``.

Every subcommand writes long-format tables plus ``manifest.json`` into
``--out``.  Exit status is 0 on success, 1 for invalid input and 2 when a
computation fails (for example a truncation that does not converge).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import adiabatic, dynamics, gfunction, wigner as wig
from .chain import Parity, build_chain, converged_spectrum, diagonalize
from .errors import QRabiError
from .fock import ModelParams
from .output import RunManifest, write_table

SUBCOMMANDS = ("spectrum", "gfunc-scan", "evolve", "sweep", "distances", "projections",
               "wigner", "cat", "rerun")

FIG2_GBARS = (0.7, 1.2, 2.0)
FIG3_GBARS = (0.7, 2.0)
FIG5_GBARS = (0.7, 2.0)
FIG_DBAR = 0.25
FIG7_GBAR = 2.0
FIG8_GBAR = 2.0
FIG8_ALPHAS = "0,1,2,3"
CONTOUR_LEVELS = (0.01, 0.05)


class UsageError(Exception):
    """Invalid command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def axis_spec(text: str) -> np.ndarray:
    """``start:stop:num`` into an evenly spaced axis."""
    try:
        start, stop, num = text.split(":")
        num = int(num)
        start, stop = float(start), float(stop)
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must look like start:stop:num, got {text!r}")
    if num < 1:
        raise argparse.ArgumentTypeError("axis needs at least one point")
    return text


def _axis(text: str) -> np.ndarray:
    start, stop, num = text.split(":")
    return np.linspace(float(start), float(stop), int(num))


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    grp = common.add_argument_group("model and run options")
    grp.add_argument("--omega", type=float, default=1.0, help="mode frequency (default 1.0)")
    grp.add_argument("--delta", type=float, default=0.0, help="qubit half splitting")
    grp.add_argument("--g", type=float, default=0.0, help="coupling strength")
    grp.add_argument("--parity", choices=["+", "-"], default="+", help="parity chain")
    grp.add_argument("--nmax", type=int, default=None,
                     help="fixed Fock truncation; default doubles until converged")
    grp.add_argument("--tol", type=float, default=1e-10, help="eigenvalue convergence tolerance")
    grp.add_argument("--out", default=".", help="output directory")
    grp.add_argument("--format", choices=["csv", "json"], default="csv", help="table format")
    grp.add_argument("--jobs", type=int, default=1, help="worker processes for grid sweeps")
    grp.add_argument("--config", default=None, help="key=value file; flags override it")
    grp.add_argument("--plot", action="store_true", help="also render PNG figures")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrabi", description="Parity-chain tools for the quantum Rabi model.")
    parser.add_argument("--version", action="store_true", help="print version and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = _common_parser()
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("spectrum", parents=[common], formatter_class=fmt,
                       help="lowest levels from G-function roots and diagonalization",
                       description="Columns of spectrum.csv: n, E_n, x_n, residual\n"
                                   "E_n from diagonalization, x_n the G-function root, "
                                   "residual = |x_n - (E_n + g^2/omega)|.")
    p.add_argument("--levels", type=int, default=10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gfunc-scan", parents=[common], formatter_class=fmt,
                       help="G-function values on an energy grid",
                       description="gfunc.csv: x, G (NaN next to poles)\n"
                                   "gfunc_roots.csv: n, x_n, E_n, residual")
    p.add_argument("--xmin", type=float, default=None, help="default -(delta + omega)")
    p.add_argument("--xmax", type=float, default=None, help="default 10 omega")
    p.add_argument("--points", type=int, default=2001)
    p.set_defaults(func=cmd_gfunc_scan)

    p = sub.add_parser("evolve", parents=[common], formatter_class=fmt,
                       help="time evolution inside one parity chain",
                       description="evolve_photon.csv / evolve_revival.csv: init, gbar, dbar, t, value\n"
                                   "evolve_distribution.csv: init, gbar, dbar, t, n, prob\n"
                                   "evolve_variants.csv: init, gbar, dbar, variant, t, value\n"
                                   "Times are omega*t.")
    p.add_argument("--init", default="fock:0", help="fock:M, coherent:A or cat:A")
    p.add_argument("--tmax", type=float, default=dynamics.DEFAULT_TMAX, help="final omega*t")
    p.add_argument("--steps", type=int, default=dynamics.DEFAULT_STEPS)
    p.add_argument("--observable", choices=["photon", "revival", "distribution"],
                   default="photon")
    p.add_argument("--variant", choices=list(adiabatic.VARIANTS) + ["all"], default=None,
                   help="photon number under an exact or adiabatic description")
    p.add_argument("--nshow", type=int, default=None, help="largest n+1 in distribution output")
    presets = p.add_mutually_exclusive_group()
    presets.add_argument("--fig2", action="store_true", help="revivals of |0>, |4>")
    presets.add_argument("--fig3", action="store_true", help="photon distributions")
    presets.add_argument("--fig5", action="store_true", help="adiabatic variants")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", parents=[common], formatter_class=fmt,
                       help="time-averaged photon number, exact vs rotating wave",
                       description="sweep_exact.csv: gbar, dbar, value, dim\n"
                                   "sweep_jc.csv, sweep_diff.csv: gbar, dbar, value\n"
                                   "sweep_contour.csv: segment, gbar, dbar (diff = 0)")
    p.add_argument("--gbar-axis", type=axis_spec, default="0.01:1.0:100")
    p.add_argument("--dbar-axis", type=axis_spec, default="0.01:1.0:100")
    p.add_argument("--levels", type=int, default=8, help="levels checked for convergence")
    p.add_argument("--fig1", action="store_true", help="100x100 grid, vacuum, parity +")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("distances", parents=[common], formatter_class=fmt,
                       help="shifted-oscillator distances D_n and D_n^E",
                       description="distances.csv: gbar, dbar, D, DE, dim  (DE in units of omega)\n"
                                   "distances_contours.csv: quantity, level, segment, gbar, dbar")
    p.add_argument("--gbar-axis", type=axis_spec, default="0.05:2.5:50")
    p.add_argument("--dbar-axis", type=axis_spec, default="0:1:21")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--fig6", action="store_true", help="ground-state distances, parity +")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("projections", parents=[common], formatter_class=fmt,
                       help="eigenstates projected on shifted and Fock states",
                       description="projections.csv: basis, m, n, value  (|<m;basis|psi_n>|^2)\n"
                                   "bounds.csv: n_init, n_min, n_max")
    p.add_argument("--size", type=int, default=31)
    p.add_argument("--threshold", type=float, default=1e-3, help="wavepacket bound threshold")
    p.add_argument("--fig4", action="store_true", help="gbar=0.7, dbar=0.25, parity +")
    p.set_defaults(func=cmd_projections)

    p = sub.add_parser("wigner", parents=[common], formatter_class=fmt,
                       help="Wigner functions of chain eigenstates",
                       description="wigner.csv: parity, state, x, p, W\n"
                                   "wigner_summary.csv: parity, state, normalization, rings, "
                                   "center_x, center_p, min_W_times_pi\n"
                                   "x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2).")
    p.add_argument("--states", default="0", help="comma-separated eigenstate indices")
    p.add_argument("--points", type=int, default=121)
    p.add_argument("--extent", type=float, default=None, help="default sqrt2*gbar + 4")
    p.add_argument("--fig7", action="store_true",
                   help="gbar=2, dbar=0.25: H- states 0-3 and H+ states 0-1")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("cat", parents=[common], formatter_class=fmt,
                       help="revival probability of cat states",
                       description="cat.csv: alpha, t, P\n"
                                   "cat_summary.csv: alpha, min_P, mean_P, omega_band_fraction")
    p.add_argument("--alpha", default="2", help="comma-separated amplitudes")
    p.add_argument("--tmax", type=float, default=dynamics.DEFAULT_TMAX)
    p.add_argument("--steps", type=int, default=dynamics.DEFAULT_STEPS)
    p.add_argument("--fig8", action="store_true", help="gbar=2, dbar=0.25, alpha in 0..3")
    p.set_defaults(func=cmd_cat)

    p = sub.add_parser("rerun", help="repeat a run from its manifest.json")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output directory (default: the manifest's)")
    p.set_defaults(func=None)
    return parser


def read_config(path) -> list[str]:
    """Turn a ``key=value`` file into command-line tokens."""
    tokens = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.append(f"{flag}={value}")
    return tokens


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv):
    parser = build_parser()
    argv = list(argv)
    config = _config_path(argv)
    digest = None
    if config:
        tokens = read_config(config)
        digest = hashlib.sha256(Path(config).read_bytes()).hexdigest()
        pos = next((i for i, t in enumerate(argv) if t in SUBCOMMANDS), None)
        if pos is None:
            raise UsageError("--config needs a subcommand")
        # config first so explicit flags win
        argv = argv[: pos + 1] + tokens + argv[pos + 1:]
    return parser, parser.parse_args(argv), digest


# ---------------------------------------------------------------- helpers

def _params(args) -> ModelParams:
    try:
        return ModelParams(omega=args.omega, delta=args.delta, g=args.g)
    except ValueError as exc:
        raise UsageError(str(exc))


def _ratio_params(args, gbar, dbar) -> ModelParams:
    return ModelParams.from_ratios(gbar, dbar, args.omega)


def _decomp(args, params, parity, levels, run, label):
    if args.nmax:
        if args.nmax <= levels:
            raise UsageError(f"--nmax {args.nmax} must exceed the {levels} levels needed")
        dec = diagonalize(build_chain(params, parity, args.nmax))
        run.record(label, params=params.as_dict(), parity=Parity.parse(parity).symbol,
                   dim=dec.dim, fixed_truncation=True)
        return dec
    dec = converged_spectrum(params, parity, levels, tol=args.tol)
    run.record(label, params=params.as_dict(), parity=Parity.parse(parity).symbol, dim=dec.dim,
               tol=args.tol, levels=levels, dims=dec.info["dims"],
               eigenvalue_change=dec.info["eigenvalue_change"])
    return dec


def _levels_for(photons: float, gbar: float) -> int:
    reach = photons + 4 * gbar * gbar
    return int(math.ceil(reach + 6 * math.sqrt(reach + 1) + 10))


def _write(args, run, stem, columns, rows):
    path = write_table(args.out, stem, columns, rows, args.format)
    run.add_output(path)
    return path


def _figure(args, name) -> Path:
    return Path(args.out) / f"{name}.png"


# ---------------------------------------------------------------- commands

def cmd_spectrum(args, run):
    params = _params(args)
    if params.g == 0:
        raise UsageError("spectrum compares against G-function roots, which need --g > 0")
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    parity = Parity.parse(args.parity)
    dec = _decomp(args, params, parity, args.levels + 1, run, "spectrum")
    shift = params.g * params.gbar
    x_ref = dec.eigenvalues[: args.levels + 1] + shift
    x_max = 0.5 * (x_ref[args.levels - 1] + x_ref[args.levels])
    roots = gfunction.find_roots(params, parity, x_max)
    if len(roots) < args.levels:
        raise gfunction.MissedRootError(
            f"G-function gave {len(roots)} roots below {x_max:g}, expected {args.levels}")
    run.record("gfunction", x_max=x_max, roots=len(roots), info=roots.info)
    rows = []
    for n in range(args.levels):
        e_n = dec.eigenvalues[n]
        x_n = roots.roots[n]
        rows.append((n, e_n, x_n, abs(x_n - (e_n + shift))))
    _write(args, run, "spectrum", ("n", "E_n", "x_n", "residual"), rows)
    if args.plot:
        from .plotting import plot_series
        plot_series([("E_n", np.arange(args.levels), dec.eigenvalues[: args.levels])],
                    _figure(args, "spectrum"), xlabel="n", ylabel="E_n")


def cmd_gfunc_scan(args, run):
    params = _params(args)
    if params.g == 0:
        raise UsageError("the G-function needs --g > 0")
    w = params.omega
    xmin = -(params.delta + w) if args.xmin is None else args.xmin
    xmax = 10 * w if args.xmax is None else args.xmax
    if not xmax > xmin or args.points < 2:
        raise UsageError("need --xmax > --xmin and --points >= 2")
    parity = Parity.parse(args.parity)
    xs = np.linspace(xmin, xmax, args.points)
    near_pole = (np.abs(xs / w - np.round(xs / w)) < 1e-6) & (np.round(xs / w) >= 0)
    vals = np.full(xs.shape, np.nan)
    if params.delta == 0:
        near_pole[:] = False
    ok = ~near_pole
    vals[ok] = gfunction.GFunctionEvaluator(params, parity).evaluate(xs[ok])[0]
    _write(args, run, "gfunc", ("x", "G"), zip(xs, vals))
    roots = gfunction.find_roots(params, parity, xmax) if xmax > 0 else None
    rows = []
    if roots is not None:
        for n, (x, res) in enumerate(zip(roots.roots, roots.residuals)):
            rows.append((n, x, x - params.g * params.gbar, res))
    _write(args, run, "gfunc_roots", ("n", "x_n", "E_n", "residual"), rows)
    run.record("gfunc-scan", params=params.as_dict(), parity=parity.symbol, points=args.points)
    if args.plot:
        from .plotting import plot_series
        clipped = np.clip(vals, -5, 5)
        plot_series([(f"G{parity.symbol}", xs, clipped)], _figure(args, "gfunc"),
                    xlabel="x", ylabel="G(x)")


def _evolve_cases(args):
    if args.fig2:
        args.observable, args.tmax, args.steps = "revival", dynamics.DEFAULT_TMAX, 2000
        return [(gb, FIG_DBAR, init) for init in ("fock:0", "fock:4") for gb in FIG2_GBARS]
    if args.fig3:
        args.observable, args.tmax, args.steps, args.nshow = "distribution", dynamics.DEFAULT_TMAX, 500, 80
        return [(gb, FIG_DBAR, init) for gb in FIG3_GBARS for init in ("fock:0", "fock:16")]
    if args.fig5:
        args.variant, args.tmax, args.steps = "all", 4 * math.pi, 1000
        return [(gb, FIG_DBAR, "fock:0") for gb in FIG5_GBARS]
    params = _params(args)
    return [(params.gbar, params.dbar, args.init)]


def cmd_evolve(args, run):
    cases = _evolve_cases(args)
    if args.fig2 or args.fig3 or args.fig5:
        args.parity = "+"
    if args.steps < 2 or not args.tmax > 0:
        raise UsageError("need --steps >= 2 and --tmax > 0")
    parity = Parity.parse(args.parity)
    times = dynamics.time_grid(args.tmax, args.steps) / args.omega
    rows, curves = [], []
    for gbar, dbar, init_text in cases:
        params = _ratio_params(args, gbar, dbar)
        try:
            init = dynamics.InitialState.parse(init_text)
        except ValueError as exc:
            raise UsageError(str(exc))
        label = init.label()
        dec = _decomp(args, params, parity, _levels_for(init.mean_photons(), gbar), run,
                      f"evolve {label} gbar={gbar:g}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            phi0 = init.resolve(dec.dim)
        wt = times * args.omega
        if args.variant:
            chosen = adiabatic.VARIANTS if args.variant == "all" else (args.variant,)
            for variant in chosen:
                series = adiabatic.approx_evolution(variant, params, phi0, times, parity, dec)
                rows += [(label, gbar, dbar, variant, t, v) for t, v in zip(wt, series.values)]
                curves.append((f"gbar={gbar:g} {variant}", wt, series.values))
        elif args.observable == "distribution":
            probs = dynamics.photon_distribution(dec, phi0, times).values
            nshow = dec.dim if args.nshow is None else min(args.nshow, dec.dim)
            for t, row in zip(wt, probs):
                rows += [(label, gbar, dbar, t, n, row[n]) for n in range(nshow)]
            curves.append((f"{label} gbar={gbar:g}", wt, probs[:, :nshow]))
        else:
            if args.observable == "revival":
                series = dynamics.revival_series(dec, phi0, times)
            else:
                series = dynamics.photon_number_series(dec, phi0, times)
            rows += [(label, gbar, dbar, t, v) for t, v in zip(wt, series.values)]
            curves.append((f"{label} gbar={gbar:g}", wt, series.values))
    if args.variant:
        _write(args, run, "evolve_variants", ("init", "gbar", "dbar", "variant", "t", "value"), rows)
    elif args.observable == "distribution":
        _write(args, run, "evolve_distribution", ("init", "gbar", "dbar", "t", "n", "prob"), rows)
    else:
        _write(args, run, f"evolve_{args.observable}", ("init", "gbar", "dbar", "t", "value"), rows)
    if args.plot:
        from . import plotting
        if args.observable == "distribution" and not args.variant:
            for i, (name, wt_, probs) in enumerate(curves):
                plotting.plot_surface(wt_, np.arange(probs.shape[1]), probs,
                                      _figure(args, f"evolve_distribution_{i}"),
                                      r"$\omega t$", "n", title=name)
        else:
            ylabel = "P(t)" if args.observable == "revival" and not args.variant else "n(t)"
            plotting.plot_series(curves, _figure(args, "evolve"), ylabel=ylabel)


def _contour_rows(x, y, values, levels, name=None):
    rows = []
    for level in levels:
        for seg, (cx, cy) in enumerate(dynamics.contour_lines(x, y, values, level)):
            for a, b in zip(cx, cy):
                rows.append(((name, level, seg, a, b) if name else (seg, a, b)))
    return rows


def cmd_sweep(args, run):
    if args.fig1:
        args.gbar_axis, args.dbar_axis, args.parity = "0.01:1.0:100", "0.01:1.0:100", "+"
    gb, db = _axis(args.gbar_axis), _axis(args.dbar_axis)
    grid = dynamics.sweep_navg(gb, db, args.parity, levels=args.levels, tol=args.tol,
                               omega=args.omega, jobs=max(1, args.jobs))
    valid_dims = grid.dims[grid.valid]
    run.record("sweep", cells=int(grid.exact.size), failed=len(grid.errors), tol=args.tol,
               levels=args.levels, min_dim=int(valid_dims.min()) if valid_dims.size else 0,
               max_dim=int(valid_dims.max()) if valid_dims.size else 0,
               errors={f"{i},{j}": msg for (i, j), msg in sorted(grid.errors.items())})
    ij = [(i, j) for i in range(gb.size) for j in range(db.size)]
    _write(args, run, "sweep_exact", ("gbar", "dbar", "value", "dim"),
           [(gb[i], db[j], grid.exact[i, j], int(grid.dims[i, j])) for i, j in ij])
    _write(args, run, "sweep_jc", ("gbar", "dbar", "value"),
           [(gb[i], db[j], grid.jc[i, j]) for i, j in ij])
    diff = grid.diff
    _write(args, run, "sweep_diff", ("gbar", "dbar", "value"), [(gb[i], db[j], diff[i, j]) for i, j in ij])
    contour = _contour_rows(gb, db, diff, (0.0,)) if gb.size > 1 and db.size > 1 else []
    _write(args, run, "sweep_contour", ("segment", "gbar", "dbar"), contour)
    if grid.errors:
        print(f"warning: {len(grid.errors)} sweep cells failed; see manifest", file=sys.stderr)
    if args.plot and gb.size > 1 and db.size > 1:
        from .plotting import plot_surface
        lines = dynamics.contour_lines(gb, db, diff, 0.0)
        plot_surface(gb, db, grid.exact, _figure(args, "sweep_exact"), r"$g/\omega$",
                     r"$\Delta/\omega$", title="exact")
        plot_surface(gb, db, diff, _figure(args, "sweep_diff"), r"$g/\omega$",
                     r"$\Delta/\omega$", title="exact - JC", lines=lines)


def cmd_distances(args, run):
    if args.fig6:
        args.gbar_axis, args.dbar_axis, args.level, args.parity = "0.05:2.5:50", "0:1:21", 0, "+"
    gb, db = _axis(args.gbar_axis), _axis(args.dbar_axis)
    if args.level < 0:
        raise UsageError("--level must be >= 0")
    basis, energy, dims = adiabatic.distance_surface(gb, db, args.level, args.parity, args.omega,
                                                     jobs=max(1, args.jobs))
    run.record("distances", level=args.level, tol=1e-12, min_dim=int(dims.min()),
               max_dim=int(dims.max()))
    ij = [(i, j) for i in range(gb.size) for j in range(db.size)]
    _write(args, run, "distances", ("gbar", "dbar", "D", "DE", "dim"),
           [(gb[i], db[j], basis[i, j], energy[i, j], int(dims[i, j])) for i, j in ij])
    rows = []
    if gb.size > 1 and db.size > 1:
        rows = (_contour_rows(gb, db, basis, CONTOUR_LEVELS, "D")
                + _contour_rows(gb, db, energy, CONTOUR_LEVELS, "DE"))
    _write(args, run, "distances_contours", ("quantity", "level", "segment", "gbar", "dbar"), rows)
    if args.plot and gb.size > 1 and db.size > 1:
        from .plotting import plot_surface
        for name, vals in (("D", basis), ("DE", energy)):
            plot_surface(gb, db, vals, _figure(args, f"distances_{name}"), r"$g/\omega$",
                         r"$\Delta/\omega$", title=name, log=True, contours=CONTOUR_LEVELS)


def cmd_projections(args, run):
    if args.fig4:
        args.omega, args.g, args.delta, args.parity, args.size = 1.0, 0.7, FIG_DBAR, "+", 31
    params = _params(args)
    parity = Parity.parse(args.parity)
    if args.size < 1:
        raise UsageError("--size must be >= 1")
    dec = _decomp(args, params, parity, args.size, run, "projections")
    shifted, fock = adiabatic.projection_heatmaps(dec, size=args.size)
    size = shifted.values.shape[0]
    rows = []
    for heat in (shifted, fock):
        rows += [(heat.basis, m, n, heat.values[m, n]) for m in range(size) for n in range(size)]
    _write(args, run, "projections", ("basis", "m", "n", "value"), rows)
    bounds = []
    for n_init in range(size):
        try:
            lo, hi = adiabatic.wavepacket_bounds(n_init, dec, args.threshold)
        except adiabatic.ThresholdError as exc:
            raise UsageError(str(exc))
        bounds.append((n_init, lo, hi))
    _write(args, run, "bounds", ("n_init", "n_min", "n_max"), bounds)
    if args.plot:
        from .plotting import plot_matrix
        plot_matrix(shifted.values, _figure(args, "projections_shifted"), title="shifted")
        plot_matrix(fock.values, _figure(args, "projections_fock"), title="Fock")


def cmd_wigner(args, run):
    if args.fig7:
        args.omega, args.g, args.delta = 1.0, FIG7_GBAR, FIG7_GBAR * FIG_DBAR
        args.points, args.extent = 121, None
        targets = [("-", k) for k in range(4)] + [("+", k) for k in range(2)]
    else:
        targets = [(args.parity, k) for k in _int_list(args.states)]
    params = _params(args)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if any(k < 0 for _, k in targets):
        raise UsageError("state indices must be >= 0")
    extent = args.extent if args.extent else math.sqrt(2) * params.gbar + 4
    axis = np.linspace(-extent, extent, args.points)
    decomps = {}
    rows, summary, grids = [], [], []
    for sym, k in targets:
        if sym not in decomps:
            top = max(kk for s, kk in targets if s == sym)
            decomps[sym] = _decomp(args, params, sym, top + 1, run, f"wigner parity {sym}")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            grid = wig.wigner(decomps[sym].eigenvectors[:, k], axis, axis)
        for w in caught:
            print(f"warning: parity {sym} state {k}: {w.message}", file=sys.stderr)
        rows += [(sym, k, x, p, v) for x, p, v in grid.long_rows()]
        cx, cp = wig.weighted_center(grid)
        summary.append((sym, k, grid.normalization(), wig.ring_crossings(grid), cx, cp,
                        grid.values.min() * math.pi))
        grids.append((sym, k, grid))
    run.record("wigner", convention=wig.CONVENTION, points=args.points, extent=extent)
    _write(args, run, "wigner", ("parity", "state", "x", "p", "W"), rows)
    _write(args, run, "wigner_summary", ("parity", "state", "normalization", "rings", "center_x",
                                         "center_p", "min_W_times_pi"), summary)
    if args.plot:
        from .plotting import plot_wigner
        for sym, k, grid in grids:
            tag = "minus" if sym == "-" else "plus"
            plot_wigner(grid, _figure(args, f"wigner_{tag}_{k}"), title=f"H{sym} state {k}")


def cmd_cat(args, run):
    if args.fig8:
        args.omega, args.g, args.delta, args.parity = 1.0, FIG8_GBAR, FIG8_GBAR * FIG_DBAR, "+"
        args.alpha, args.tmax, args.steps = FIG8_ALPHAS, dynamics.DEFAULT_TMAX, dynamics.DEFAULT_STEPS
    params = _params(args)
    alphas = _float_list(args.alpha)
    if not alphas:
        raise UsageError("--alpha needs at least one value")
    if args.steps < 2 or not args.tmax > 0:
        raise UsageError("need --steps >= 2 and --tmax > 0")
    parity = Parity.parse(args.parity)
    wt = dynamics.time_grid(args.tmax, args.steps)
    times = wt / params.omega
    photons = max(a * a for a in alphas)
    dec = _decomp(args, params, parity, _levels_for(photons, params.gbar), run, "cat")
    rows, summary, curves = [], [], []
    for alpha in alphas:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            phi0 = dynamics.InitialState("cat", alpha).resolve(dec.dim)
        prob = dynamics.revival_probability(dec, phi0, times)
        rows += [(alpha, t, v) for t, v in zip(wt, prob)]
        summary.append((alpha, prob.min(), prob.mean(),
                        dynamics.band_power_fraction(wt, prob, 1.0)))
        curves.append((f"alpha={alpha:g}", wt, prob))
    _write(args, run, "cat", ("alpha", "t", "P"), rows)
    _write(args, run, "cat_summary", ("alpha", "min_P", "mean_P", "omega_band_fraction"), summary)
    if args.plot:
        from .plotting import plot_series
        plot_series(curves, _figure(args, "cat"), ylabel="P(t)")


# ---------------------------------------------------------------- driver

def _execute(args, digest=None) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.nmax is not None and args.nmax < 2:
        raise UsageError("--nmax must be >= 2")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    resolved = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    run = RunManifest(args.command, resolved, digest)
    args.func(args, run)
    # presets may have filled in values; record what actually ran
    run.args = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    path = run.write(args.out)
    for name in run.outputs:
        print(Path(args.out) / name)
    print(path)
    return 0


def _rerun(args) -> int:
    try:
        data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        saved = dict(data["args"])
        command = data["command"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest}: {exc}")
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices.get(command)
    if sub is None or command == "rerun":
        raise UsageError(f"manifest names unknown command {command!r}")
    ns = sub.parse_args([])
    for key, value in saved.items():
        setattr(ns, key, value)
    ns.command = command
    ns.config = None
    if args.out:
        ns.out = args.out
    return _execute(ns, data.get("config_digest"))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        parser, args, digest = parse_args(argv)
        if args.version:
            from .output import version
            print(version())
            return 0
        if args.command is None:
            parser.print_help()
            return 1
        if args.command == "rerun":
            return _rerun(args)
        return _execute(args, digest)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except QRabiError as exc:
        code = 1 if isinstance(exc, ValueError) else 2
        print(f"error: {exc}", file=sys.stderr)
        return code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: computation failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
