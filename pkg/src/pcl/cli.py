"""Command-line front end: ``pcl trajectory|certify|plotdata``.

Exit codes: 0 pass, 2 certification failure, 3 runtime or domain error,
4 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import correspondence as corr
from . import dynamics as dyn
from . import transport as tr
from .certify import SUITES, Context, run_suites
from .config import default_config, load_config
from .errors import BlowUpError, ConfigError, PCLError

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_RUNTIME = 3
EXIT_CONFIG = 4

PLOT_KINDS = ("potential", "separation", "residual_sweep")


class _Parser(argparse.ArgumentParser):
    """Usage errors map to the bad-config exit code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser():
    p = _Parser(prog="pcl", description="Trajectories, certification suites and plot data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON run configuration")
        src.add_argument("--kind", help="use the built-in defaults for this kind")
        sp.add_argument("--out", help="output directory (overrides the config)")

    common(sub.add_parser("trajectory", help="integrate and write trajectory.csv, summary.json"))
    c = sub.add_parser("certify", help="run a certification suite and write report.json")
    common(c)
    c.add_argument("--suite", default="all", choices=SUITES + ("all",))
    c.add_argument("--no-shift", action="store_true", help="debug: drop the parameter shift table")
    d = sub.add_parser("plotdata", help="write x-versus-value CSV data")
    common(d)
    d.add_argument("--what", required=True, choices=PLOT_KINDS)
    return p


def _format_x(x, real_grid):
    return repr(float(x.real)) if real_grid else repr(complex(x))


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _json(data):
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _state_json(s):
    return {"t": s.t, "u": [s.u.real, s.u.imag], "du": [s.du.real, s.du.imag]}


def _drift(traj):
    """``H(end) - H(start) - int dH/dt``; zero up to quadrature and integrator error."""
    kind, params = traj.kind, traj.params
    h0 = dyn.hamiltonian(kind, params, traj.state(traj.t0))
    h1 = dyn.hamiltonian(kind, params, traj.state(traj.t1))
    q = dyn.Quadrature(traj, lambda s: dyn.hamiltonian_dt(kind, params, s))
    integral = q(traj.t1)
    r = h1 - h0 - integral
    return {
        "H_start": [h0.real, h0.imag],
        "H_end": [h1.real, h1.imag],
        "integral_dH_dt": [integral.real, integral.imag],
        "residual": abs(r),
    }


def cmd_trajectory(cfg, out):
    init = dyn.CalogeroState(cfg.t0, cfg.u0, cfg.du0)
    try:
        traj = dyn.integrate(cfg.kind, cfg.params, init, cfg.t_end, tol=cfg.tol)
    except BlowUpError as exc:
        if exc.partial is not None:
            exc.partial.to_csv(os.path.join(out, "trajectory.csv"))
        summary = {"kind": cfg.kind.value, "error": str(exc)}
        if exc.last_state is not None:
            summary["final_state"] = _state_json(exc.last_state)
        _write(os.path.join(out, "summary.json"), _json(summary))
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    summary = {
        "kind": cfg.kind.value,
        "n_points": int(traj.t.size),
        "final_state": _state_json(traj.state(traj.t1)),
        "H_drift_check": _drift(traj),
    }
    _write(os.path.join(out, "summary.json"), _json(summary))
    print(f"{cfg.kind.value}: {traj.t.size} points, t = {traj.t0:g} .. {traj.t1:g}")
    return EXIT_OK


def cmd_certify(cfg, out, suite):
    report = run_suites(cfg, suite)
    _write(os.path.join(out, "report.json"), report.to_json())
    for it in report.items:
        flag = "ok  " if it.passed else "FAIL"
        print(f"{flag} {it.suite:15s} {it.name:45s} {it.residual:.3e} {it.relation} {it.threshold}")
    n_bad = len(report.failures)
    print(f"{cfg.kind.value} {suite}: {len(report.items) - n_bad}/{len(report.items)} passed ({report.seconds:.1f} s)")
    return EXIT_OK if report.passed else EXIT_FAILED


def _plot_grid(cfg, t, u):
    g = cfg.grid
    if g.x_start is not None:
        return np.linspace(g.x_start, g.x_end, g.count)
    s0, s1 = corr.default_segment(cfg.kind)
    return corr.safe_segment(cfg.kind, t, u, n=g.count, start=s0.real, end=s1.real)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_plotdata(cfg, out, what):
    path = os.path.join(out, f"{what}.csv")
    if what == "potential":
        x = _plot_grid(cfg, cfg.t0, cfg.u0)
        v = np.asarray(dyn.potential(cfg.kind, cfg.params, x, cfg.t0))
        real = bool(np.all(x.imag == 0))
        rows = [[_format_x(a, real), repr(float(b.real)), repr(float(b.imag))] for a, b in zip(x, v)]
        _write(path, _csv(["x", "re_value", "im_value"], rows))
        return EXIT_OK
    ctx = Context(cfg)
    t = ctx.t_mid()
    if what == "separation":
        x = _plot_grid(cfg, t, ctx.traj.state(t).u)
        rep = corr.separation_check(
            cfg.kind, cfg.params, ctx.traj, t, x_grid=x, apply_shift=not cfg.disable_shift, pipeline=ctx.pipeline
        )
        real = bool(np.all(x.imag == 0))
        rows = [[_format_x(a, real), repr(float(d.real)), repr(float(d.imag))] for a, d in zip(x, rep.deviation)]
        _write(path, _csv(["x", "re_deviation", "im_deviation"], rows))
        return EXIT_OK
    rep = tr.schrodinger_residual(ctx.pipeline, ctx.grid(t), t, cfg.h_t, apply_shift=not cfg.disable_shift)
    tr.sweep_csv(rep, path)
    return EXIT_OK


def _load(args):
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        try:
            cfg = default_config(args.kind)
        except (PCLError, ValueError, KeyError) as exc:
            raise ConfigError(f"unknown kind {args.kind!r}: {exc}") from None
    if args.out:
        cfg = cfg.with_changes(out=args.out)
    if getattr(args, "no_shift", False):
        cfg = cfg.with_changes(disable_shift=True)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "trajectory":
            return cmd_trajectory(cfg, cfg.out)
        if args.command == "certify":
            return cmd_certify(cfg, cfg.out, args.suite)
        return cmd_plotdata(cfg, cfg.out, args.what)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PCLError, ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
