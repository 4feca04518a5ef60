"""Certification suites: named residuals with thresholds.

Every item records a residual, the threshold it is compared against and the
comparison used (``<`` for identities, ``>=`` for negative controls that must
stay large, ``in`` for order ratios).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import correspondence as corr
from . import dynamics as dyn
from . import lax
from . import transport as tr
from .elliptic_checks import elliptic_identity_residuals
from .params import PainleveKind as K

SUITES = ("elliptic", "lax", "correspondence", "transport")

ELLIPTIC_TAUS = (1j, 0.3 + 0.8j)
ELLIPTIC_TOL = 1e-8
ORDER_RATIO = (3.5, 4.5)
ZC_CONSTANT = 1e3
SCHRODINGER_CONSTANT = 1e4
NEGATIVE_OFFSET = 1e-3
ZC_PLATEAU = 1e-4
BX_TOL = {True: 1e-14, False: 1e-8}
SEPARATION_TOL = 1e-6
SHIFT_DETECT = 1e-3
OFFSET_TOL = 1e-8
INTEGRAL_TOL = 1e-8
AUX_ODE_TOL = 1e-5
K_EVOLUTION_TOL = 1e-6
AUX_ODE_STEP = 2e-5
K_STEP = 1e-5
ORIGINAL_TOL = 1e-5
RELATION_TOL = 1e-6
PLAQUETTE_RATIO = 6.0
PLAQUETTE_STEPS = 4
PLAQUETTE_PLATEAU = 1e-5
SCHRODINGER_PLATEAU = 1e-3
ELIMINATION_TOL = 1e-6
WRONSKIAN_TOL = 1e-8
GAUGE_TOL = 1e-7
GRID_MARGIN = 0.05
P6_ORIGINAL_WINDOW = (0.15, 0.35)


@dataclass(frozen=True)
class CheckItem:
    suite: str
    name: str
    residual: float
    threshold: object
    relation: str

    @property
    def passed(self) -> bool:
        r = self.residual
        if not np.isfinite(r):
            return False
        if self.relation == "<":
            return r < self.threshold
        if self.relation == ">=":
            return r >= self.threshold
        lo, hi = self.threshold
        return lo <= r <= hi

    def to_dict(self):
        thr = list(self.threshold) if isinstance(self.threshold, tuple) else self.threshold
        return {
            "suite": self.suite,
            "name": self.name,
            "residual": float(self.residual),
            "threshold": thr,
            "relation": self.relation,
            "passed": self.passed,
        }


@dataclass
class Report:
    kind: str
    suites: tuple
    items: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items)

    @property
    def failures(self):
        return [it for it in self.items if not it.passed]

    def to_json(self, with_timing=False) -> str:
        data = {
            "kind": self.kind,
            "suites": list(self.suites),
            "passed": self.passed,
            "n_items": len(self.items),
            "n_failed": len(self.failures),
            "items": [it.to_dict() for it in self.items],
        }
        if with_timing:
            data["seconds"] = self.seconds
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


# --- shared context -------------------------------------------------------------


class Context:
    """Trajectory, pipelines and sample points derived from one run configuration."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.kind = cfg.kind
        self.params = cfg.params
        self.seed = cfg.seeds.for_kind(cfg.kind)
        self._traj = None
        self._pipe = None

    @property
    def traj(self):
        if self._traj is None:
            c = self.cfg
            self._traj = dyn.integrate(c.kind, c.params, dyn.CalogeroState(c.t0, c.u0, c.du0), c.t_end, tol=c.tol)
        return self._traj

    @property
    def pipeline(self):
        if self._pipe is None:
            self._pipe = lax.LaxPipeline(self.kind, self.params, self.traj, self.seed)
        return self._pipe

    def perturbed(self, offset=NEGATIVE_OFFSET):
        return lax.LaxPipeline(self.kind, self.params, self.traj, self.seed, du_offset=offset)

    @property
    def t_lo(self):
        return float(self.traj.t[0])

    @property
    def t_hi(self):
        return float(self.traj.t[-1])

    def t_mid(self):
        return 0.5 * (self.t_lo + self.t_hi)

    def sample_points(self, n=None):
        """Random ``(x, t)`` in the middle half of the time span, away from ``+-u`` and poles."""
        n = self.cfg.samples if n is None else n
        rng = np.random.default_rng(self.cfg.sample_seed)
        s0, s1 = corr.default_segment(self.kind)
        span = self.t_hi - self.t_lo
        out = []
        tries = 0
        while len(out) < n:
            tries += 1
            if tries > 1000 * n:
                raise RuntimeError("could not place sample points")
            t = self.t_lo + span * rng.uniform(0.25, 0.75)
            x = s0 + (s1 - s0) * rng.uniform(0, 1) + 0.2j * rng.uniform(-1, 1)
            u = self.traj.state(t).u
            d = min(abs(x - u), abs(x + u), float(dyn.singular_distance(self.kind, x, t)))
            if d >= GRID_MARGIN:
                out.append((complex(x), float(t)))
        return out

    def grid(self, t):
        g = self.cfg.grid
        if g.x_start is None:
            return tr.transport_grid(self.pipeline, t, n=g.count)
        return np.linspace(g.x_start, g.x_end, g.count)


def _item(out, suite, name, residual, threshold, relation="<"):
    out.append(CheckItem(suite, name, float(residual), threshold, relation))


# --- suites ----------------------------------------------------------------------


def suite_elliptic(ctx=None):
    out = []
    for tau in ELLIPTIC_TAUS:
        label = f"tau={tau.real:g}{tau.imag:+g}i"
        for name, r in elliptic_identity_residuals(tau).items():
            _item(out, "elliptic", f"{name}[{label}]", r, ELLIPTIC_TOL)
    return out


def _aux_items(ctx, out):
    kind, pipe = ctx.kind, ctx.pipeline
    track = pipe.aux_track
    samples = [track.at(t) for t in ctx.traj.t]
    if kind is K.P6:
        dev = max(max(abs(c) for c in a.constraints()) for a in samples)
    else:
        first = np.array(samples[0].integrals())
        dev = max(float(np.max(np.abs(np.array(a.integrals()) - first))) for a in samples)
    _item(out, "lax", "aux_integrals_constant", dev, INTEGRAL_TOL)
    checker = {K.P3: lax.p3_ode_residuals, K.P5: lax.p5_ode_residuals, K.P6: lax.p6_ode_residuals}[kind]
    h = AUX_ODE_STEP
    ts = np.linspace(ctx.t_lo + 2 * h, ctx.t_hi - 2 * h, 7)
    ode = max(max(abs(r) for r in checker(lambda s: track.at(s), float(t), h)) for t in ts)
    _item(out, "lax", "aux_ode_system", ode, AUX_ODE_TOL)
    if kind is K.P6:
        xi = ctx.params.residues()[4]
        worst = 0.0
        for t in ts:
            ap, am = track.at(t + K_STEP), track.at(t - K_STEP)
            a = track.at(t)
            dlogK_dT = (np.log(ap.K / am.K)) / (ap.T - am.T)
            rhs = -(2 * xi + 1) * (a.y - a.T) / (a.T * (a.T - 1))
            worst = max(worst, abs(dlogK_dT - rhs) / max(1.0, abs(rhs)))
        _item(out, "lax", "K_evolution", worst, K_EVOLUTION_TOL)


def _original_window(ctx):
    if ctx.kind is K.P6:
        lo, hi = P6_ORIGINAL_WINDOW
        return max(lo, ctx.t_lo), min(hi, ctx.t_hi)
    return ctx.t_lo, ctx.t_hi


def suite_lax(ctx):
    out = []
    pipe, kind = ctx.pipeline, ctx.kind
    h = ctx.cfg.h_t
    neg = ctx.perturbed()
    worst_scaled = 0.0
    ratios = []
    neg_min = np.inf
    neg_ratio = 0.0
    bx = 0.0
    for x, t in ctx.sample_points():
        rep = lax.zero_curvature_residual(kind, ctx.traj, ctx.params, x, t, h_t=h, h_x=ctx.cfg.h_x, pipeline=pipe)
        fr = pipe.frame(t)
        U, V = lax._mat(fr.entries(x))
        scale = 1.0 + np.linalg.norm(U) * np.linalg.norm(V)
        worst_scaled = max(worst_scaled, rep.residual / (scale * h**2))
        ratios.append(rep.ratio)
        # the perturbation is probed where the O(h^2) part is already small
        nrep = lax.zero_curvature_residual(
            kind, ctx.traj, ctx.params, x, t, h_t=h / 4, h_x=ctx.cfg.h_x, pipeline=neg
        )
        neg_min = min(neg_min, nrep.residual, nrep.halved_residual)
        neg_ratio = max(neg_ratio, nrep.ratio)
        v = abs(complex(np.asarray(lax.bx_minus_2B(fr, np.array([x]), ctx.cfg.h_x))[0]))
        b = abs(complex(np.asarray(fr.entries(np.array([x]))[1])[0]))
        bx = max(bx, v / max(1.0, b))
    _item(out, "lax", "zero_curvature_relative_over_h2", worst_scaled, ZC_CONSTANT)
    _item(out, "lax", "zero_curvature_ratio_min", min(ratios), ORDER_RATIO, "in")
    _item(out, "lax", "zero_curvature_ratio_max", max(ratios), ORDER_RATIO, "in")
    _item(out, "lax", "negative_control_plateau", neg_min, ZC_PLATEAU, ">=")
    _item(out, "lax", "negative_control_not_converging", 1.0 / neg_ratio, 1.0 / 1.5, ">=")
    _item(out, "lax", "bx_minus_2B", bx, BX_TOL[kind is not K.P6])
    if pipe.aux_track is not None:
        _aux_items(ctx, out)
    lo, hi = _original_window(ctx)
    sub = _window_trajectory(ctx.traj, lo, hi)
    _item(out, "lax", "original_form", dyn.original_form_residual(kind, ctx.params, sub), ORIGINAL_TOL)
    return out


def _window_trajectory(traj, lo, hi):
    """Trajectory restricted to the nodes inside ``[lo, hi]``."""
    m = (traj.t >= lo - 1e-15) & (traj.t <= hi + 1e-15)
    return dyn.Trajectory(traj.kind, traj.params, traj.t[m], traj.u[m], traj.du[m], traj.acc[m], traj.meta)


def suite_correspondence(ctx):
    out = []
    pipe, kind = ctx.pipeline, ctx.kind
    t = ctx.t_mid()
    apply_shift = not ctx.cfg.disable_shift
    rep = corr.separation_check(kind, ctx.params, ctx.traj, t, apply_shift=apply_shift, pipeline=pipe)
    _item(out, "correspondence", "separation_max_dev", rep.max_dev, SEPARATION_TOL)
    _item(out, "correspondence", "offset_vs_hamiltonian", abs(rep.extracted_hamiltonian - rep.hamiltonian), OFFSET_TOL)
    if kind in (K.P4, K.P5, K.P6):
        raw = corr.separation_check(kind, ctx.params, ctx.traj, t, apply_shift=False, pipeline=pipe)
        _item(out, "correspondence", "unshifted_detected", raw.max_dev, SHIFT_DETECT, ">=")
    # a second trajectory of the same equation
    c = ctx.cfg
    s = ctx.traj.state(t)
    other_init = dyn.CalogeroState(t, s.u + 0.05 + 0.03j, s.du - 0.1)
    other = dyn.integrate(kind, ctx.params, other_init, t + 0.01, tol=c.tol)
    pipe_b = lax.LaxPipeline(kind, ctx.params, other, ctx.seed)
    grid = corr.safe_segment(kind, t, s.u, n=32)
    grid = grid[[min(abs(x - other_init.u), abs(x + other_init.u)) > GRID_MARGIN for x in grid]]
    _item(out, "correspondence", "u_independence", corr.separation_u_independence(pipe, pipe_b, t, grid), SEPARATION_TOL)
    x0 = _generic_point(ctx, t)
    sr = corr.stationary_reduction(pipe, x0, t, h_t=c.h_t / 4)
    _item(out, "correspondence", "stationary_relation", sr.relation_residual, RELATION_TOL)
    _item(out, "correspondence", "check_identity", sr.check_identity_residual, RELATION_TOL)
    sr2 = corr.stationary_reduction(pipe, x0, t, h_t=c.h_t / 8)
    ratio = sr.fg_residual / sr2.fg_residual if sr2.fg_residual > 0 else np.inf
    _item(out, "correspondence", "fuchs_garnier_ratio", ratio, ORDER_RATIO, "in")
    return out


def _generic_point(ctx, t):
    for x, _ in ctx.sample_points(5):
        u = ctx.traj.state(t).u
        if min(abs(x - u), abs(x + u), float(dyn.singular_distance(ctx.kind, x, t))) > 0.1:
            return x
    return ctx.sample_points(1)[0][0]


def suite_transport(ctx):
    out = []
    pipe, kind = ctx.pipeline, ctx.kind
    t = ctx.t_mid()
    x0 = _generic_point(ctx, t)
    side = min(0.2, 0.5 * (ctx.t_hi - ctx.t_lo))
    d1 = tr.plaquette_defect(pipe, x0, t - side / 2, side, side, PLAQUETTE_STEPS)
    d2 = tr.plaquette_defect(pipe, x0, t - side / 2, side / 2, side / 2, PLAQUETTE_STEPS)
    _item(out, "transport", "plaquette_refinement_ratio", d1 / d2 if d2 > 0 else np.inf, PLAQUETTE_RATIO, ">=")
    neg = ctx.perturbed()
    dn = min(tr.plaquette_defect(neg, x0, t - side / 2, 0.2, side, n) for n in (8, 16))
    _item(out, "transport", "plaquette_negative_plateau", dn, PLAQUETTE_PLATEAU, ">=")
    Mx = tr.transport_matrix_x(pipe, x0, x0 + 0.2, t, 64)
    Mt = tr.transport_matrix_t(pipe, x0, t - 0.05, t + 0.05, 32)
    _item(out, "transport", "wronskian_x", abs(tr.wronskian(Mx) - 1), WRONSKIAN_TOL)
    _item(out, "transport", "wronskian_t", abs(tr.wronskian(Mt) - 1), WRONSKIAN_TOL)
    grid = ctx.grid(t)
    h = ctx.cfg.h_t
    apply_shift = not ctx.cfg.disable_shift
    r1 = tr.schrodinger_residual(pipe, grid, t, h, apply_shift=apply_shift).residual
    r2 = tr.schrodinger_residual(pipe, grid, t, h / 2, apply_shift=apply_shift).residual
    _item(out, "transport", "schrodinger_over_h2", r1 / h**2, SCHRODINGER_CONSTANT)
    _item(out, "transport", "schrodinger_ratio", r1 / r2 if r2 > 0 else np.inf, ORDER_RATIO, "in")
    if kind in (K.P4, K.P5, K.P6):
        r0 = tr.schrodinger_residual(pipe, grid, t, h, apply_shift=False).residual
        _item(out, "transport", "schrodinger_unshifted_plateau", r0, SCHRODINGER_PLATEAU, ">=")
    _item(out, "transport", "psi2_elimination", tr.elimination_consistency(pipe, grid, t), ELIMINATION_TOL)
    if kind is K.P6:
        _item(out, "transport", "gauge_consistency_x", tr.gauge_consistency_x(pipe, x0, x0 + 0.1, t), GAUGE_TOL)
        _item(out, "transport", "gauge_consistency_t", tr.gauge_consistency_t(pipe, x0, t - 0.05, t + 0.05, 16), GAUGE_TOL)
    return out


_RUNNERS = {
    "elliptic": suite_elliptic,
    "lax": suite_lax,
    "correspondence": suite_correspondence,
    "transport": suite_transport,
}


def resolve_suites(suite):
    if suite == "all":
        return SUITES
    if suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}")
    return (suite,)


def thread_count():
    """Worker count from ``PCL_THREADS`` (default 1)."""
    raw = os.environ.get("PCL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def run_suites(cfg, suite="all") -> Report:
    """Run the named suite (or all) for one configuration; items keep suite order."""
    names = resolve_suites(suite)
    ctx = Context(cfg)
    start = time.perf_counter()
    if len(names) > 1 and thread_count() > 1:
        ctx.pipeline  # build shared state before fanning out
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            results = list(pool.map(lambda n: _RUNNERS[n](ctx), names))
    else:
        results = [_RUNNERS[n](ctx) for n in names]
    items = [it for res in results for it in res]
    return Report(cfg.kind.value, names, items, time.perf_counter() - start)
