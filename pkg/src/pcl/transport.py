"""Transport of the two-component wave function along ``x`` and ``t``.

``d_x Psi = U Psi`` and ``d_t Psi = V Psi`` are integrated with classical RK4
on fixed step counts.  Compatibility of the two flows is probed by transporting
a basis around a rectangle; the scalar ``e^{int H} psi_1`` is checked against
the non-stationary Schrodinger equation with the shifted classical potential.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import dynamics as dyn
from . import numdiff as nd
from .correspondence import default_segment, safe_segment, shift_params
from .errors import DomainError, PathError
from .lax import frame_entries_dx

PATH_MARGIN = 1e-6
SAMPLES_PER_STEP = 4
GAUGE_FD_STEP = 1e-4
GRID_POINTS = 64
GRID_SPAN = 0.25


@dataclass(frozen=True)
class WaveState:
    psi1: complex
    psi2: complex
    x: complex
    t: float

    def __post_init__(self):
        object.__setattr__(self, "psi1", complex(self.psi1))
        object.__setattr__(self, "psi2", complex(self.psi2))
        object.__setattr__(self, "x", complex(self.x))
        object.__setattr__(self, "t", float(self.t))
        v = np.array([self.psi1, self.psi2, self.x, self.t])
        if not np.all(np.isfinite(v)):
            raise DomainError("wave state must be finite")
        if self.psi1 == 0 and self.psi2 == 0:
            raise DomainError("wave state must not vanish")

    @property
    def vector(self):
        return np.array([self.psi1, self.psi2])


def _mats(e):
    """Stack entries ``(p, q, r)`` into ``[[p, q], [r, -p]]`` along the last two axes."""
    p, q, r = (np.asarray(v, dtype=complex) for v in e)
    out = np.empty(p.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = p
    out[..., 0, 1] = q
    out[..., 1, 0] = r
    out[..., 1, 1] = -p
    return out


def _rk4_fixed(mats, M0):
    """RK4 for ``Y' = A Y`` given ``A`` at nodes and midpoints.

    ``mats`` has shape ``(2n+1, 2, 2)`` with entry ``2k`` at node ``k`` and
    ``2k+1`` at the midpoint of step ``k``; each matrix is already multiplied by
    the step.
    """
    Y = np.array(M0, dtype=complex)
    n = (len(mats) - 1) // 2
    for k in range(n):
        A0, Am, A1 = mats[2 * k], mats[2 * k + 1], mats[2 * k + 2]
        k1 = A0 @ Y
        k2 = Am @ (Y + 0.5 * k1)
        k3 = Am @ (Y + 0.5 * k2)
        k4 = A1 @ (Y + k3)
        Y = Y + (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return Y


def _check_path_x(frame, x0, x1, steps):
    n = SAMPLES_PER_STEP * steps + 1
    pts = x0 + (x1 - x0) * np.linspace(0, 1, n)
    spacing = abs(x1 - x0) / (n - 1)
    d = np.asarray(frame.singular_distance(pts), dtype=float)
    if np.any(d <= max(PATH_MARGIN, 0.5 * spacing)):
        raise PathError(f"x-path from {x0} to {x1} passes too close to a pole of U")
    return pts


def _x_operators(frame, x0, x1, steps, pregauge=False):
    x0, x1 = complex(x0), complex(x1)
    _check_path_x(frame, x0, x1, steps)
    pts = x0 + (x1 - x0) * np.linspace(0, 1, 2 * steps + 1)
    if pregauge:
        e, _ = frame.pregauge(pts)
    else:
        e = frame.entries(pts)
    return _mats(e[:3]) * ((x1 - x0) / steps)


def transport_matrix_x(pipeline, x0, x1, t, steps, M0=None, frame=None):
    """Fundamental matrix of ``d_x Y = U Y`` from ``x0`` to ``x1`` at fixed ``t``."""
    if steps < 1:
        raise DomainError("steps must be positive")
    M0 = np.eye(2, dtype=complex) if M0 is None else np.asarray(M0, dtype=complex)
    if complex(x0) == complex(x1):
        return M0.copy()
    frame = frame or pipeline.frame(t)
    return _rk4_fixed(_x_operators(frame, x0, x1, steps), M0)


def _t_operators(pipeline, x, t0, t1, steps, pregauge=False):
    x = complex(x)
    ts = np.linspace(t0, t1, 2 * steps + 1)
    ops = []
    for s in ts:
        fr = pipeline.frame(s)
        if np.any(np.asarray(fr.singular_distance(np.array([x]))) <= PATH_MARGIN):
            raise PathError(f"t-path at x={x} meets a pole of V at t={s}")
        if pregauge:
            e, _ = fr.pregauge(np.array([x]))
        else:
            e = fr.entries(np.array([x]))
        ops.append(_mats(e[3:])[0])
    return np.array(ops) * ((t1 - t0) / steps)


def transport_matrix_t(pipeline, x, t0, t1, steps, M0=None):
    """Fundamental matrix of ``d_t Y = V Y`` from ``t0`` to ``t1`` at fixed ``x``."""
    if steps < 1:
        raise DomainError("steps must be positive")
    M0 = np.eye(2, dtype=complex) if M0 is None else np.asarray(M0, dtype=complex)
    if float(t0) == float(t1):
        return M0.copy()
    return _rk4_fixed(_t_operators(pipeline, x, float(t0), float(t1), steps), M0)


def transport_x(pipeline, wave: WaveState, x_target, steps) -> WaveState:
    v = transport_matrix_x(pipeline, wave.x, x_target, wave.t, steps, wave.vector)
    return WaveState(v[0], v[1], x_target, wave.t)


def transport_t(pipeline, wave: WaveState, t_target, steps) -> WaveState:
    v = transport_matrix_t(pipeline, wave.x, wave.t, t_target, steps, wave.vector)
    return WaveState(v[0], v[1], wave.x, t_target)


def wronskian(M):
    """Determinant of a pair of solutions stored as columns."""
    return complex(np.linalg.det(np.asarray(M)))


def plaquette_loop(pipeline, x0, t0, dx, dt, steps):
    """Transport the identity right, up, left and down around the rectangle.

    The left and down edges use the inverse of the forward propagator on the
    same edge, so a degenerate rectangle closes to round-off.
    """
    x0, t0 = complex(x0), float(t0)
    x1, t1 = x0 + dx, t0 + dt
    bottom = transport_matrix_x(pipeline, x0, x1, t0, steps)
    right = transport_matrix_t(pipeline, x1, t0, t1, steps)
    top = transport_matrix_x(pipeline, x0, x1, t1, steps)
    left = transport_matrix_t(pipeline, x0, t0, t1, steps)
    return np.linalg.solve(left, np.linalg.solve(top, right @ bottom))


def plaquette_defect(pipeline, x0, t0, dx, dt, steps=8) -> float:
    """``||M_loop - I||_F`` for the rectangle ``[x0, x0+dx] x [t0, t0+dt]``."""
    M = plaquette_loop(pipeline, x0, t0, dx, dt, steps)
    return float(np.linalg.norm(M - np.eye(2)))


# --- Schrodinger equation for the scalar wave function --------------------------


def _check_grid(x_grid):
    x = np.asarray(x_grid, dtype=complex)
    if x.ndim != 1 or x.size < 5:
        raise DomainError("x_grid needs at least five points")
    dx = np.diff(x)
    if np.max(np.abs(dx - dx[0])) > 1e-9 * max(1.0, abs(dx[0])) or dx[0] == 0:
        raise DomainError("x_grid must be uniform")
    return x, complex(dx[0])


def transport_grid(pipeline, t, n=GRID_POINTS, span=GRID_SPAN):
    """Uniform grid on the first ``span`` of the default segment, clear of ``+-u`` and poles.

    The five-point stencils need a spacing of a few ``1e-3`` before the
    time-difference error dominates.
    """
    s0, s1 = default_segment(pipeline.kind)
    u = pipeline.state(t).u
    return safe_segment(pipeline.kind, t, u, n, start=s0, end=s0 + span * (s1 - s0))


def psi_block(pipeline, x_grid, t, h_t, levels=(-1, 0, 1), steps_t=4, steps_x=2, basis=None):
    """``Psi`` on ``x_grid`` at times ``t + k h_t`` for ``k`` in ``levels``.

    The solution is fixed by ``Psi(x_grid[0], t) = basis``: it is transported in
    ``t`` at ``x_grid[0]`` and then along the grid at each time level with
    ``steps_x`` RK4 steps per cell.  Returns an array of shape
    ``(len(levels), len(x_grid), 2, 2)`` whose columns are the two solutions.
    """
    x, dx = _check_grid(x_grid)
    basis = np.eye(2, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    out = []
    for k in levels:
        tk = t + k * h_t
        M = transport_matrix_t(pipeline, x[0], t, tk, max(1, steps_t * abs(k)), basis) if k else basis
        fr = pipeline.frame(tk)
        n_sub = steps_x * (x.size - 1)
        ops = _x_operators(fr, x[0], x[-1], n_sub)
        col = [M]
        Y = M
        for j in range(x.size - 1):
            Y = _rk4_fixed(ops[2 * steps_x * j: 2 * steps_x * (j + 1) + 1], Y)
            col.append(Y)
        out.append(np.array(col))
    return np.array(out)


@dataclass(frozen=True)
class SchrodingerReport:
    kind: str
    t: float
    h_t: float
    x: np.ndarray
    psi: np.ndarray
    pointwise: np.ndarray
    residual: float


def schrodinger_residual(pipeline, x_grid, t, h_t=4e-3, apply_shift=True, column=None, steps_t=4, steps_x=2):
    """Residual of ``d_t Psi = Psi_xx / 2 + V~ Psi`` for ``Psi = e^{int H} psi_1``.

    ``d_t`` is a central difference with step ``h_t`` and ``d_x^2`` the five-point
    stencil on the uniform grid.  The residual is ``max |...| / max |Psi|`` over
    the interior points, maximized over both basis solutions unless ``column``
    selects one.
    """
    x, dx = _check_grid(x_grid)
    kind, params = pipeline.kind, pipeline.params
    blk = psi_block(pipeline, x, t, h_t, (-1, 0, 1), steps_t, steps_x)
    quad = dyn.hamiltonian_integral(pipeline.traj)
    scale = np.array([np.exp(quad(t + k * h_t)) for k in (-1, 0, 1)])
    Vp = shift_params(kind, params).params if apply_shift else params
    Vt = np.asarray(dyn.potential(kind, Vp, x, t), dtype=complex)
    cols = (0, 1) if column is None else (column,)
    worst = None
    psis = None
    for c in cols:
        Psi = scale[:, None] * blk[:, :, 0, c]
        dpt = (Psi[2] - Psi[0]) / (2 * h_t)
        lap = nd.second5(Psi[1], dx)
        res = np.abs(dpt[2:-2] - 0.5 * lap - Vt[2:-2] * Psi[1, 2:-2]) / np.max(np.abs(Psi[1]))
        pointwise = np.full(x.size, np.nan)
        pointwise[2:-2] = res
        if worst is None or np.nanmax(pointwise) > np.nanmax(worst):
            worst, psis = pointwise, Psi[1]
    return SchrodingerReport(kind.value, float(t), float(h_t), x, psis, worst, float(np.nanmax(worst)))


def sweep_csv(report: SchrodingerReport, path=None) -> str:
    """CSV ``x,re_psi,im_psi,residual``; ``x`` is written as a real number on real grids."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "re_psi", "im_psi", "residual"])
    real_grid = bool(np.all(report.x.imag == 0))
    for xv, p, r in zip(report.x, report.psi, report.pointwise):
        xs = repr(float(xv.real)) if real_grid else repr(complex(xv))
        w.writerow([xs, repr(float(p.real)), repr(float(p.imag)), "" if np.isnan(r) else repr(float(r))])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def elimination_consistency(pipeline, x_grid, t, h_t=2e-3, steps_t=4, steps_x=2):
    """Compare ``psi_2`` from the x-equation and from the t-equation with ``psi_2`` itself.

    Both derivatives of ``psi_1`` are fourth order.  Returns the largest of
    ``|(psi_1x - a psi_1)/b - (psi_1t - A psi_1)/B|`` and the two differences
    with the transported ``psi_2``, relative to ``max |Psi|``.
    """
    x, dx = _check_grid(x_grid)
    blk = psi_block(pipeline, x, t, h_t, (-2, -1, 0, 1, 2), steps_t, steps_x)
    a, b, _, A, B, _ = pipeline.frame(t).entries(x)
    sl = slice(2, -2)
    worst = 0.0
    for c in (0, 1):
        p1 = blk[:, :, 0, c]
        p2 = blk[2, :, 1, c]
        d1x = nd.first5(p1[2], dx)
        d1t = (8 * (p1[3] - p1[1]) - (p1[4] - p1[0]))[sl] / (12 * h_t)
        from_x = (d1x - a[sl] * p1[2, sl]) / b[sl]
        from_t = (d1t - A[sl] * p1[2, sl]) / B[sl]
        norm = np.max(np.abs(blk[2, :, :, c]))
        dev = max(np.max(np.abs(from_x - from_t)), np.max(np.abs(from_x - p2[sl])), np.max(np.abs(from_t - p2[sl])))
        worst = max(worst, float(dev / norm))
    return worst


def stationary_potential(frame, x):
    """``W`` and ``d_x log b`` on an array of ``x`` for the stationary equation."""
    x = np.asarray(x, dtype=complex)
    a, b, c, _, _, _ = frame.entries(x)
    ax, bx = frame_entries_dx(frame, x, GAUGE_FD_STEP)[:2]
    lb = bx / b
    return 0.5 * (-a * a - b * c) - 0.5 * ax + 0.5 * a * lb, lb


def stationary_residual(pipeline, x_grid, t, steps_x=2):
    """``max |psi''/2 - (log b)' psi'/2 + W psi| / max |psi|`` at fixed ``t``."""
    x, dx = _check_grid(x_grid)
    fr = pipeline.frame(t)
    blk = psi_block(pipeline, x, t, 0.0, (0,), steps_x=steps_x)[0]
    W, lb = stationary_potential(fr, x)
    sl = slice(2, -2)
    worst = 0.0
    for c in (0, 1):
        p = blk[:, 0, c]
        r = 0.5 * nd.second5(p, dx) - 0.5 * lb[sl] * nd.first5(p, dx) + W[sl] * p[sl]
        worst = max(worst, float(np.max(np.abs(r)) / np.max(np.abs(p))))
    return worst


# --- gauge consistency ----------------------------------------------------------


def _omega_along(om2):
    """Square roots of ``omega^2`` along a path, continued by sign tracking."""
    om = np.sqrt(np.asarray(om2, dtype=complex))
    for k in range(1, om.size):
        if abs(om[k] + om[k - 1]) < abs(om[k] - om[k - 1]):
            om[k:] = -om[k:]
    return om


def gauge_consistency_x(pipeline, x0, x1, t, steps=32):
    """Transport with the pre-gauge ``U`` and undo the gauge; compare with the gauged transport.

    Only frames exposing ``pregauge`` (P6) are supported.  Returns the Frobenius
    norm of the difference of the two fundamental matrices.
    """
    fr = pipeline.frame(t)
    if not hasattr(fr, "pregauge"):
        raise DomainError(f"{pipeline.kind.value} has no pre-gauge pair")
    x0, x1 = complex(x0), complex(x1)
    pts = x0 + (x1 - x0) * np.linspace(0, 1, 2 * steps + 1)
    _, om2 = fr.pregauge(pts)
    om = _omega_along(om2)
    M_pre = _rk4_fixed(_x_operators(fr, x0, x1, steps, pregauge=True), np.eye(2))
    via_pre = np.diag([om[-1], 1 / om[-1]]) @ M_pre @ np.diag([1 / om[0], om[0]])
    direct = transport_matrix_x(pipeline, x0, x1, t, steps, frame=fr)
    return float(np.linalg.norm(via_pre - direct))


def gauge_consistency_t(pipeline, x, t0, t1, steps=8):
    """Time-direction analogue of :func:`gauge_consistency_x`."""
    x = complex(x)
    ts = np.linspace(t0, t1, 2 * steps + 1)
    om2 = []
    for s in ts:
        fr = pipeline.frame(s)
        if not hasattr(fr, "pregauge"):
            raise DomainError(f"{pipeline.kind.value} has no pre-gauge pair")
        om2.append(complex(fr.pregauge(np.array([x]))[1][0]))
    om = _omega_along(np.array(om2))
    M_pre = _rk4_fixed(_t_operators(pipeline, x, float(t0), float(t1), steps, pregauge=True), np.eye(2))
    via_pre = np.diag([om[-1], 1 / om[-1]]) @ M_pre @ np.diag([1 / om[0], om[0]])
    direct = transport_matrix_t(pipeline, x, t0, t1, steps)
    return float(np.linalg.norm(via_pre - direct))
