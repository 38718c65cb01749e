"""Command-line surface.

One subcommand per library capability; JSON for records, CSV for grids
and point sets.  Reruns with the same arguments produce byte-identical
files (see gridio), thread count never changes output bytes, and
environment variables are never consulted.

Exit status: 0 on success, 2 on a validation problem (bad flag, bad
range, inconsistent parameter set), 1 on a runtime failure (solver
stall, escaped orbit, I/O).  Failures print a one-line JSON error
record to stderr.  Per-cell failures inside a scan are recorded in the
cell's flags and do not fail the run.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import gridio
from .odelab import (
    IntegrationError,
    OdeParams,
    SCAN_IC,
    State4,
    equilibria_check,
    lyapunov_spectrum,
    ode_scan,
)
from .orbits import (
    EscapedOrbit,
    OrbitSettings,
    ScanAxis,
    Side,
    iterate,
    manifold_trace,
    scan,
)
from .resonance import (
    BTBranch,
    PointClass,
    SolverError,
    bt_locate,
    bt_nondegeneracy,
    bt_points,
    fixed_points,
    peak_omega,
    sample_surfaces,
    wedge_center,
    wedge_membership,
)
from .retmap import (
    LiftPoint,
    MapConstants,
    Params,
    SaddleValues,
    admissibility,
    derive_constants,
    peak_value,
)

__all__ = ["main"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; route everything through CliError so
    # main() can emit the machine-readable record with status 2
    def error(self, message: str):
        raise CliError(2, message)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def _warn(message: str) -> None:
    sys.stderr.write(f"warning: {message}\n")


# -- argument parsing helpers -------------------------------------------------


def _parse_range(text: str, name: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise CliError(2, f"{name}: expected a range 'lo:hi', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise CliError(2, f"{name}: non-numeric range {text!r}") from None
    if not lo <= hi:
        raise CliError(2, f"{name}: range min must be <= max, got {text!r}")
    return lo, hi


def _parse_grid(text: str, name: str, want: int) -> tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != want:
        raise CliError(2, f"{name}: expected {want} comma-separated counts, got {text!r}")
    try:
        counts = tuple(int(p) for p in parts)
    except ValueError:
        raise CliError(2, f"{name}: non-integer count in {text!r}") from None
    if any(n < 1 for n in counts):
        raise CliError(2, f"{name}: resolutions must be >= 1, got {text!r}")
    return counts


def _scalar_or_range(text: str, name: str):
    if ":" in text:
        return _parse_range(text, name)
    try:
        return float(text)
    except ValueError:
        raise CliError(2, f"{name}: expected a number or 'lo:hi', got {text!r}") from None


def _require(args, names: list[str], sub: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise CliError(2, f"missing required keys for {sub}: {', '.join(missing)}")


def _constants_from(args) -> MapConstants:
    """Constants either from four saddle rates or from --delta/--K.

    The --delta route splits the contraction evenly (delta1 = delta2 =
    sqrt(delta)); the factor stages are unavailable in that case but
    nothing on the CLI needs them.
    """
    rates = [args.c1, args.e1, args.c2, args.e2]
    if any(v is not None for v in rates):
        if any(v is None for v in rates):
            raise CliError(2, "saddle constants need all of --c1 --e1 --c2 --e2")
        try:
            return derive_constants(
                SaddleValues(args.c1, args.e1, args.c2, args.e2, args.spin)
            )
        except ValueError as exc:
            raise CliError(2, str(exc)) from None
    if args.delta is None:
        raise CliError(2, "constants need either --delta (with --K) or the four saddle rates")
    d = args.delta
    if d <= 1.0:
        raise CliError(2, f"not weakly attracting: delta = {d!r} <= 1")
    root = math.sqrt(d)
    return MapConstants(delta1=root, delta2=root, delta=d, twist=args.K, peak=peak_value(d))


def _mu_from(args) -> Params:
    try:
        return Params(A=args.A, lam=args.lam, omega=args.omega)
    except ValueError as exc:
        raise CliError(2, str(exc)) from None


def _warn_cone(mu: Params, c: MapConstants) -> None:
    bad = admissibility(mu, c)
    if bad:
        _warn("outside the admissible cone: " + "; ".join(bad) + " (run proceeds)")


def _emit_json(obj, args) -> None:
    if getattr(args, "out", None):
        gridio.dump_json(obj, args.out)
    else:
        gridio.dump_json(obj, sys.stdout)


def _require_out(args, sub: str) -> None:
    if not getattr(args, "out", None):
        raise CliError(2, f"{sub} writes CSV and needs --out PATH")


def _hint(args, text: str) -> None:
    if getattr(args, "gnuplot_hint", False):
        sys.stderr.write(text)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return os.cpu_count() or 1


# -- flag groups --------------------------------------------------------------


def _add_common(p: _Parser) -> None:
    p.add_argument("--out", help="output path (default: stdout for JSON; required for CSV)")
    p.add_argument("--config", help="key=value file with defaults; flags override")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for stochastic steps (all current subcommands are "
                        "deterministic; accepted so scripted calls stay stable)")
    p.add_argument("--gnuplot-hint", action="store_true",
                   help="print a gnuplot recipe for the output to stderr")


def _add_constants(p: _Parser) -> None:
    g = p.add_argument_group("map constants (either --delta/--K or the saddle rates)")
    g.add_argument("--delta", type=float, help="composite contraction exponent, > 1")
    g.add_argument("--K", type=float, default=1.0, help="logarithmic twist factor (default 1)")
    g.add_argument("--c1", type=float, help="contraction rate at the first saddle")
    g.add_argument("--e1", type=float, help="expansion rate at the first saddle")
    g.add_argument("--c2", type=float, help="contraction rate at the second saddle")
    g.add_argument("--e2", type=float, help="expansion rate at the second saddle")
    g.add_argument("--spin", type=float, default=1.0, help="spin frequency (default 1)")


def _add_mu(p: _Parser) -> None:
    p.add_argument("--A", type=float, required=True, help="forcing offset")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="forcing amplitude")
    p.add_argument("--omega", type=float, required=True, help="forcing frequency")


def _add_ode_params(p: _Parser) -> None:
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--tau1", type=float, default=0.0)
    p.add_argument("--tau2", type=float, default=0.0)


# -- subcommand bodies --------------------------------------------------------


def _cmd_constants(args) -> int:
    c = _constants_from(args)
    peaks = [{"ell": l, "omega": peak_omega(l, c)} for l in (args.ell or [])]
    _emit_json({"constants": c, "wedge_peaks": peaks}, args)
    return 0


def _cmd_fixed_points(args) -> int:
    c = _constants_from(args)
    mu = _mu_from(args)
    _warn_cone(mu, c)
    try:
        recs = fixed_points(mu, c, args.ell)
    except SolverError as exc:
        return _fail(1, "runtime", str(exc))
    _emit_json(
        {"membership": wedge_membership(mu, args.ell, c), "records": recs}, args
    )
    return 0


def _cmd_bt(args) -> int:
    c = _constants_from(args)
    try:
        pair = bt_points(args.lam, args.ell, c)
    except ValueError as exc:
        raise CliError(2, str(exc)) from None
    out = []
    for bt in pair:
        try:
            bt = bt_nondegeneracy(bt, c, step=args.step)
            continued = (
                bt_locate(args.lam, args.ell, c, bt.branch) if args.locate else None
            )
        except SolverError as exc:
            return _fail(1, "runtime", str(exc))
        out.append({"point": bt, "continued": continued})
    _emit_json(out, args)
    return 0


def _cmd_surfaces(args) -> int:
    _require(args, ["A", "lam", "omega"], "surfaces")
    _require_out(args, "surfaces")
    c = _constants_from(args)
    region = (
        _parse_range(args.A, "--A"),
        _parse_range(args.lam, "--lambda"),
        _parse_range(args.omega, "--omega"),
    )
    grid = _parse_grid(args.grid, "--grid", 3)
    try:
        samples = sample_surfaces(region, args.ell, c, grid)
    except ValueError as exc:
        raise CliError(2, str(exc)) from None
    gridio.write_surfaces(samples, args.out)
    _hint(args, _SURFACES_HINT.format(out=args.out))
    sys.stdout.write(json.dumps({"written": args.out, "samples": len(samples)}) + "\n")
    return 0


def _cmd_wedge(args) -> int:
    c = _constants_from(args)
    mu = _mu_from(args)
    _warn_cone(mu, c)
    center = wedge_center(mu.omega, args.ell, c)
    _emit_json(
        {
            "ell": args.ell,
            "membership": wedge_membership(mu, args.ell, c),
            "center": center,
            "gap": abs(center - mu.A),
            "amplitude": mu.lam,
            "peak": c.peak,
            "peak_omega": peak_omega(args.ell, c),
        },
        args,
    )
    return 0


def _cmd_iterate(args) -> int:
    c = _constants_from(args)
    mu = _mu_from(args)
    _warn_cone(mu, c)
    try:
        res = iterate(
            LiftPoint(args.x0, args.y0), mu, c, args.n, args.transient,
            conv_tol=args.conv_tol,
        )
    except EscapedOrbit as exc:
        return _fail(1, "runtime", f"orbit escaped at step {exc.index}: {exc}")
    except ValueError as exc:
        raise CliError(2, str(exc)) from None
    _emit_json(res, args)
    return 0


def _cmd_manifolds(args) -> int:
    _require_out(args, "manifolds")
    c = _constants_from(args)
    mu = _mu_from(args)
    _warn_cone(mu, c)
    try:
        recs = fixed_points(mu, c, args.ell)
    except SolverError as exc:
        return _fail(1, "runtime", str(exc))
    saddles = [r for r in recs if r.cls is PointClass.SADDLE]
    if not saddles:
        return _fail(1, "runtime", "no saddle fixed point at these parameters")
    side = Side.UNSTABLE if args.side == "unstable" else Side.STABLE
    try:
        trace = manifold_trace(
            saddles[0], mu, c, side,
            steps=args.steps, step_cap=args.step_cap, eps=args.eps,
            orientation=args.orientation, max_points=args.max_points,
        )
    except (ValueError, SolverError) as exc:
        return _fail(1, "runtime", str(exc))
    gridio.write_points(trace.points, args.out)
    _hint(args, _MANIFOLD_HINT.format(out=args.out))
    gridio.dump_json(
        {
            "written": args.out,
            "side": trace.side,
            "points": trace.points.shape[0],
            "arclength": trace.arclength,
            "saddle": trace.saddle,
            "flags": list(trace.flags),
        },
        sys.stdout,
    )
    return 0


def _cmd_scan_map(args) -> int:
    _require(args, ["A", "lam", "omega"], "scan-map")
    _require_out(args, "scan-map")
    c = _constants_from(args)
    values = {
        "A": _scalar_or_range(args.A, "--A"),
        "lam": _scalar_or_range(args.lam, "--lambda"),
        "omega": _scalar_or_range(args.omega, "--omega"),
    }
    swept = [k for k in ("A", "lam", "omega") if isinstance(values[k], tuple)]
    if len(swept) != 2:
        raise CliError(
            2,
            "scan-map sweeps exactly two of --A/--lambda/--omega as 'lo:hi' "
            f"ranges with the third a scalar; got ranges for {swept or 'none'}",
        )
    counts = _parse_grid(args.grid, "--grid", 2)
    # axis order fixed to (A, lam, omega) restricted to the swept pair, so
    # --grid counts bind predictably
    axes = tuple(
        ScanAxis(name, values[name][0], values[name][1], counts[k])
        for k, name in enumerate(swept)
    )
    fixed = {k: values[k] for k in values if k not in swept}
    settings = OrbitSettings(
        n=args.n, transient=args.transient, conv_tol=args.conv_tol,
        threshold=args.threshold, seed_count=args.seeds,
    )
    try:
        grid = scan(axes, fixed, c, settings, ell=args.ell, threads=_threads(args))
    except ValueError as exc:
        raise CliError(2, str(exc)) from None
    gridio.write_map_grid(grid, args.out)
    _hint(args, _MAP_GRID_HINT.format(out=args.out))
    sys.stdout.write(
        json.dumps({"written": args.out, "cells": grid.shape[0] * grid.shape[1]}) + "\n"
    )
    return 0


def _cmd_ode_spectrum(args) -> int:
    p = _ode_params(args)
    s0 = SCAN_IC
    if args.s0 is not None:
        vals = args.s0.split(",")
        if len(vals) != 4:
            raise CliError(2, f"--s0 needs four comma-separated numbers, got {args.s0!r}")
        try:
            s0 = State4(*(float(v) for v in vals))
        except ValueError:
            raise CliError(2, f"--s0 has a non-numeric entry: {args.s0!r}") from None
    res = lyapunov_spectrum(
        s0, p, t_final=args.t_final, renorm_dt=args.renorm_dt,
        transient=args.transient, tol=args.tol,
    )
    _emit_json(res, args)
    return 0


def _cmd_ode_scan(args) -> int:
    _require_out(args, "ode-scan")
    base = _ode_params(args, tau_default=0.0)
    r1 = _parse_range(args.tau1, "--tau1")
    r2 = _parse_range(args.tau2, "--tau2")
    counts = _parse_grid(args.grid, "--grid", 2)
    try:
        axes = (
            ScanAxis("tau1", r1[0], r1[1], counts[0]),
            ScanAxis("tau2", r2[0], r2[1], counts[1]),
        )
        grid = ode_scan(
            axes, base, t_final=args.t_final, renorm_dt=args.renorm_dt,
            transient=args.transient, tol=args.tol, threads=_threads(args),
        )
    except ValueError as exc:
        raise CliError(2, str(exc)) from None
    gridio.write_ode_grid(grid, args.out)
    _hint(args, _ODE_GRID_HINT.format(out=args.out))
    n_fail = int((grid.classes < 0).sum())
    sys.stdout.write(
        json.dumps(
            {
                "written": args.out,
                "cells": grid.shape[0] * grid.shape[1],
                "failed": n_fail,
            }
        )
        + "\n"
    )
    return 0


def _cmd_ode_check(args) -> int:
    p = _ode_params(args)
    _emit_json(equilibria_check(p), args)
    return 0


def _ode_params(args, tau_default: float = 0.0) -> OdeParams:
    try:
        tau1 = getattr(args, "tau1", tau_default)
        tau2 = getattr(args, "tau2", tau_default)
        return OdeParams(
            alpha=args.alpha, beta=args.beta, omega=args.omega,
            tau1=tau1 if isinstance(tau1, float) else tau_default,
            tau2=tau2 if isinstance(tau2, float) else tau_default,
        )
    except ValueError as exc:
        raise CliError(2, str(exc)) from None


# -- gnuplot recipes ----------------------------------------------------------

_MAP_GRID_HINT = """# gnuplot recipe (class map)
set datafile separator ','
set key off
classnum(s) = s eq 'PeriodicSink' ? 1 : s eq 'InvariantCircle' ? 2 : \\
              s eq 'Chaotic' ? 3 : s eq 'Escaped' ? 4 : 0
plot '{out}' skip 1 using 3:4:(classnum(stringcolumn(5))) with image
"""

_ODE_GRID_HINT = """# gnuplot recipe (non-negative exponent count)
set datafile separator ','
set key off
plot '{out}' skip 1 using 3:4:5 with image
"""

_SURFACES_HINT = """# gnuplot recipe (surface slices, colored by family)
set datafile separator ','
lab(s) = s eq 'SN1' ? 1 : s eq 'SN2' ? 2 : s eq 'HOPF' ? 3 : s eq 'PD' ? 4 : 5
splot '{out}' skip 1 using 6:4:5:(lab(stringcolumn(1))) with points pt 7 ps 0.3 lc variable
"""

_MANIFOLD_HINT = """# gnuplot recipe (manifold trace)
set datafile separator ','
plot '{out}' skip 1 using 2:3 with lines
"""


# -- wiring -------------------------------------------------------------------


def _build_parser() -> _Parser:
    top = _Parser(prog="wedgelab", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="cmd", metavar="SUBCOMMAND")
    sub.required = True

    def new(name: str, help_: str, fn) -> _Parser:
        # subparsers inherit _Parser from the top-level parser type
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        _add_common(p)
        return p

    p = new("constants", "derive map constants from saddle data", _cmd_constants)
    _add_constants(p)
    p.add_argument("--ell", type=int, action="append",
                   help="also report the wedge peak location (repeatable)")

    p = new("fixed-points", "closed-form fixed points with classification", _cmd_fixed_points)
    _add_constants(p)
    _add_mu(p)
    p.add_argument("--ell", type=int, default=1, help="winding number of the wedge (default 1)")

    p = new("bt", "double-unit-eigenvalue points with nondegeneracy data", _cmd_bt)
    _add_constants(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--step", type=float, default=1e-4,
                   help="finite-difference step for the quadratic coefficients")
    p.add_argument("--locate", action="store_true",
                   help="also run the free 4-d Newton search from rough seeds")

    p = new("surfaces", "bisection-sample the five bifurcation surface families", _cmd_surfaces)
    _add_constants(p)
    p.add_argument("--A", help="range 'lo:hi'")
    p.add_argument("--lambda", dest="lam", help="range 'lo:hi'")
    p.add_argument("--omega", help="range 'lo:hi'")
    p.add_argument("--grid", default="64,32,128", help="nodes per axis: nA,nLam,nOmega")
    p.add_argument("--ell", type=int, default=1)

    p = new("wedge", "membership and center data for one parameter point", _cmd_wedge)
    _add_constants(p)
    _add_mu(p)
    p.add_argument("--ell", type=int, default=1)

    p = new("iterate", "iterate the map from one initial point", _cmd_iterate)
    _add_constants(p)
    _add_mu(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--transient", type=int, default=0)
    p.add_argument("--conv-tol", type=float, default=1e-13)

    p = new("manifolds", "grow one invariant manifold branch of the saddle", _cmd_manifolds)
    _add_constants(p)
    _add_mu(p)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--side", choices=["unstable", "stable"], default="unstable")
    p.add_argument("--orientation", type=int, choices=[1, -1], default=1)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--step-cap", type=float, default=0.05)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-points", type=int, default=20000)

    p = new("scan-map", "classify attractors on a two-parameter grid", _cmd_scan_map)
    _add_constants(p)
    p.add_argument("--A", help="number or range 'lo:hi'")
    p.add_argument("--lambda", dest="lam", help="number or range 'lo:hi'")
    p.add_argument("--omega", help="number or range 'lo:hi'")
    p.add_argument("--grid", default="100,100",
                   help="cells per swept axis, in (A, lambda, omega) order")
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--transient", type=int, default=500)
    p.add_argument("--conv-tol", type=float, default=1e-13)
    p.add_argument("--threshold", type=float, default=5e-4)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available parallelism)")

    p = new("ode-spectrum", "Lyapunov spectrum of the flow at one parameter point",
            _cmd_ode_spectrum)
    _add_ode_params(p)
    p.add_argument("--s0", help="initial state 'x1,x2,x3,x4' (default the scan seed)")
    p.add_argument("--t-final", type=float, default=1000.0)
    p.add_argument("--renorm-dt", type=float, default=0.5)
    p.add_argument("--transient", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)

    p = new("ode-scan", "classify the flow on a (tau1, tau2) grid", _cmd_ode_scan)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--tau1", required=True, help="range 'lo:hi'")
    p.add_argument("--tau2", required=True, help="range 'lo:hi'")
    p.add_argument("--grid", default="50,50")
    p.add_argument("--t-final", type=float, default=1000.0)
    p.add_argument("--renorm-dt", type=float, default=0.5)
    p.add_argument("--transient", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--threads", type=int, default=None)

    p = new("ode-check", "equilibria residuals and eigenvalue comparison", _cmd_ode_check)
    _add_ode_params(p)

    return top


def _config_tokens(path: str) -> list[str]:
    """key=value lines to CLI tokens; placed before the explicit flags so
    those win."""
    tokens: list[str] = []
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(2, f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(2, f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise CliError(2, f"{path}:{lineno}: empty key")
        flag = "--" + key
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into its tokens right after the subcommand."""
    path = None
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            break
    if path is None or not argv:
        return argv
    return [argv[0]] + _config_tokens(path) + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _splice_config(argv)
        args = _build_parser().parse_args(argv)
        return args.fn(args)
    except CliError as exc:
        return _fail(exc.code, "validation" if exc.code == 2 else "runtime", str(exc))
    except (SolverError, IntegrationError, EscapedOrbit) as exc:
        return _fail(1, "runtime", str(exc))
    except BrokenPipeError:
        return 1
    except OSError as exc:
        return _fail(1, "runtime", str(exc))


if __name__ == "__main__":
    sys.exit(main())
