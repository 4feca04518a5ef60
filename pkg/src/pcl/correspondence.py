"""Schrodinger potential of a U-V pair and its separation into classical pieces.

With ``b_x = 2B`` the first component of ``Psi`` solves
``d_t psi = (d_x^2/2 + U(x, t)) psi`` where
``U = det(U)/2 - a_x/2 + A``.  Along a solution this potential splits as
``U(x, t) = V~(x, t) - H(du, u)``: ``V~`` is the classical potential with
shifted parameters and ``H`` the classical Hamiltonian with the original ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import dynamics as dyn
from . import numdiff as nd
from .errors import AmbiguityError, ConvergenceError, DomainError, PoleError
from .lax import LaxPipeline, frame_entries_dx
from .params import PainleveKind as K
from .params import as_kind, check_params, params_to_json

GRID_MARGIN = 0.05
P6_AX_STEP = 1e-4


# --- shift table --------------------------------------------------------------


@dataclass(frozen=True)
class ShiftedParams:
    kind: K
    params: object
    shifted: tuple

    def to_json(self):
        return {"params": params_to_json(self.params), "shifted": list(self.shifted)}


def shift_params(kind, params) -> ShiftedParams:
    """Parameters of the classical potential that appears in the Schrodinger equation."""
    kind = as_kind(kind)
    check_params(kind, params)
    if kind is K.P4:
        return ShiftedParams(kind, replace(params, beta=params.beta + 0.5), ("beta",))
    if kind is K.P5:
        return ShiftedParams(kind, replace(params, alpha=params.alpha - 0.125, beta=params.beta + 0.125),
                             ("alpha", "beta"))
    if kind is K.P6:
        new = replace(
            params,
            alpha=params.alpha - 0.125,
            beta=params.beta + 0.125,
            gamma=params.gamma - 0.125,
            delta=params.delta + 0.125,
            xis=None,
        )
        return ShiftedParams(kind, new, ("alpha", "beta", "gamma", "delta"))
    return ShiftedParams(kind, params, ())


# --- Schrodinger potential ----------------------------------------------------


def schrodinger_potential(lax, a_x):
    """``det(U)/2 - a_x/2 + A`` for a traceless pair."""
    return 0.5 * complex(np.linalg.det(lax.U)) - 0.5 * a_x + complex(lax.A)


def frame_potential(frame, x):
    """Schrodinger potential of a frame on an array of ``x``.

    ``a_x`` is analytic for the closed-form pairs and a fourth-order central
    difference (step ``1e-4``) for P6.
    """
    x = np.asarray(x, dtype=complex)
    a, b, c, A, _, _ = frame.entries(x)
    ax = frame_entries_dx(frame, x, P6_AX_STEP)[0]
    return 0.5 * (-a * a - b * c) - 0.5 * ax + A


def _forbidden(kind, t, u, x):
    d = np.minimum(np.abs(x - u), np.abs(x + u))
    return np.minimum(d, dyn.singular_distance(kind, x, t))


_DEFAULT_SEGMENTS = {
    K.P6: (0.08 + 0.06j, 0.42 + 0.34j),
}


def default_segment(kind):
    """Endpoints of the default spectral segment for ``kind``."""
    return _DEFAULT_SEGMENTS.get(as_kind(kind), (0.15 + 0.1j, 1.05 + 0.4j))


def safe_segment(kind, t, u, n=50, start=None, end=None, margin=GRID_MARGIN):
    """Uniform grid on a segment kept ``margin`` away from ``+-u`` and the singular set.

    The segment is translated in the imaginary direction until every point is
    admissible.
    """
    kind = as_kind(kind)
    s0, s1 = default_segment(kind)
    start = s0 if start is None else complex(start)
    end = s1 if end is None else complex(end)
    base = np.linspace(start, end, n)
    for k in range(60):
        shift = (k + 1) // 2 * 0.013j * (1 if k % 2 else -1)
        x = base + shift
        if np.all(_forbidden(kind, t, u, x) >= margin):
            return x
    raise DomainError("no admissible x-grid found near the requested segment")


@dataclass(frozen=True)
class SeparationReport:
    kind: str
    t: float
    params: object
    shifted: ShiftedParams
    x: np.ndarray
    potential: np.ndarray
    model: np.ndarray
    hamiltonian: complex
    apply_shift: bool

    @property
    def deviation(self):
        return self.potential - self.model

    @property
    def max_dev(self):
        return float(np.max(np.abs(self.deviation)))

    @property
    def offset(self):
        """Constant best fitting the deviation (least squares)."""
        return complex(np.mean(self.deviation))

    @property
    def extracted_hamiltonian(self):
        """x-independent part ``V~ - U`` averaged over the grid."""
        return self.hamiltonian - self.offset

    @property
    def grid_size(self):
        return int(self.x.size)

    def to_json(self) -> str:
        off = self.offset
        return json.dumps(
            {
                "kind": self.kind,
                "t": self.t,
                "params": params_to_json(self.params),
                "shifted_params": params_to_json(self.shifted.params),
                "max_dev": self.max_dev,
                "offset": [off.real, off.imag],
                "grid_size": self.grid_size,
            },
            sort_keys=True,
        )


def separation_check(kind, params, traj, t, x_grid=None, apply_shift=True, seed=1.0, pipeline=None):
    """Compare ``U(x, t) + H`` with ``V~(x, t)`` along a grid."""
    kind = as_kind(kind)
    pipe = pipeline or LaxPipeline(kind, params, traj, seed)
    frame = pipe.frame(t)
    state = frame.state
    x = safe_segment(kind, t, state.u) if x_grid is None else np.asarray(x_grid, dtype=complex)
    sp = shift_params(kind, params)
    model_params = sp.params if apply_shift else params
    H = dyn.hamiltonian(kind, params, state)
    pot = frame_potential(frame, x)
    model = np.asarray(dyn.potential(kind, model_params, x, t)) - H
    return SeparationReport(kind.value, float(t), params, sp, x, pot, model, H, apply_shift)


def separation_u_independence(pipe_a, pipe_b, t, x_grid):
    """``max_x |(U_a + H_a) - (U_b + H_b)|`` for two trajectories of the same equation."""
    out = []
    for pipe in (pipe_a, pipe_b):
        fr = pipe.frame(t)
        H = dyn.hamiltonian(pipe.kind, pipe.params, fr.state)
        out.append(frame_potential(fr, x_grid) + H)
    return float(np.max(np.abs(out[0] - out[1])))


# --- stationary reduction -----------------------------------------------------


def _series_at(frame, x0, radius, n_coef=8, n_points=64):
    """Taylor series of ``(a, b, c, A)`` at ``x0``."""
    return nd.taylor_coefficients(lambda z: tuple(frame.entries(z)[:4]), x0, radius, n_coef, n_points)


def _analytic_radius(frame, x0):
    u = frame.state.u
    d = min(abs(x0 - u), abs(x0 + u), float(frame.singular_distance(x0)))
    if d < 1e-3:
        raise PoleError("stationary reduction too close to a zero of b or a pole")
    return 0.5 * d


@dataclass(frozen=True)
class StationaryReduction:
    x: complex
    t: float
    W: complex
    W_check: complex
    Lam: complex
    relation_residual: float
    check_identity_residual: float
    fg_residual: float


def _stationary_series(frame, x0, radius):
    """Series of ``W``, ``W_check`` and ``Lambda`` around ``x0``."""
    a, b, c, _ = _series_at(frame, x0, radius)
    if abs(b[0]) < 1e-12:
        raise PoleError("b vanishes at the expansion point")
    bx = nd.s_deriv(b)
    lb = nd.s_div(bx, b)  # d_x log b
    ax = nd.s_deriv(a)
    W = 0.5 * (-nd.s_mul(a, a) - nd.s_mul(b, c)) - 0.5 * ax + 0.5 * nd.s_mul(a, lb)
    lbx = nd.s_deriv(lb)
    Wc = W + 0.25 * lbx - 0.125 * nd.s_mul(lb, lb)
    return W, Wc, 0.5 * lb, b


def stationary_reduction(pipeline, x, t, h_t=1e-4) -> StationaryReduction:
    """Potentials of the stationary equation in ``x`` at fixed ``t`` and the Fuchs-Garnier residual.

    ``W`` comes from eliminating ``psi_2`` in ``d_x Psi = U Psi``:
    ``psi'' - (log b)' psi' + 2 W psi = 0``.  ``relation_residual`` measures
    ``W - U + d_t log b / 2 - b_xx/(4 b)`` with a fourth-order central ``b_t``;
    ``fg_residual`` measures
    ``d_t Wc - 2 Wc Lambda_x - Lambda Wc_x - Lambda_xxx / 4`` with ``d_t`` by
    central differences.
    """
    x = complex(x)
    fr = pipeline.frame(t)
    radius = _analytic_radius(fr, x)
    W, Wc, Lam, b = _stationary_series(fr, x, radius)
    frp, frm = pipeline.frame(t + h_t), pipeline.frame(t - h_t)
    _, Wcp, _, bp = _stationary_series(frp, x, radius)
    _, Wcm, _, bm = _stationary_series(frm, x, radius)
    # fourth-order b_t: the relation is an identity, not an order probe
    bpp = complex(pipeline.frame(t + 2 * h_t).entries(np.array([x]))[1][0])
    bmm = complex(pipeline.frame(t - 2 * h_t).entries(np.array([x]))[1][0])
    bt = (8 * (bp[0] - bm[0]) - (bpp - bmm)) / (12 * h_t)
    pot = complex(frame_potential(fr, np.array([x]))[0])
    relation = W[0] - pot + 0.5 * bt / b[0] - 0.25 * nd.s_value(b, 2) / b[0]
    # identity between W_check and W through log-derivatives computed separately
    lb = nd.s_div(nd.s_deriv(b), b)
    logb_xx = nd.s_value(nd.s_deriv(lb), 0)
    check_id = Wc[0] - W[0] - 0.25 * logb_xx + 0.125 * lb[0] ** 2
    Wc_t = (Wcp[0] - Wcm[0]) / (2 * h_t)
    fg = Wc_t - 2 * Wc[0] * nd.s_value(Lam, 1) - Lam[0] * nd.s_value(Wc, 1) - 0.25 * nd.s_value(Lam, 3)
    return StationaryReduction(x, float(t), W[0], Wc[0], Lam[0], abs(relation), abs(check_id), abs(fg))


# --- locating u as a zero of b ------------------------------------------------


def _winding(f, corners, n=400, max_refine=6):
    """Winding number of ``f`` around the polygon ``corners`` (closed)."""
    for _ in range(max_refine):
        pts = []
        for p, q in zip(corners, corners[1:] + corners[:1]):
            s = np.linspace(0, 1, n, endpoint=False)
            pts.append(p + s * (q - p))
        z = np.concatenate(pts)
        v = f(z)
        if np.any(np.abs(v) < 1e-14):
            raise AmbiguityError("b vanishes on the search box boundary")
        dphi = np.angle(np.roll(v, -1) / v)
        if np.max(np.abs(dphi)) < 0.5:
            return int(round(dphi.sum() / (2 * np.pi)))
        n *= 2
    raise AmbiguityError("argument principle did not resolve")


def locate_u_from_b(frame, center, half_width, tol=1e-13, max_iter=50):
    """Zero of ``b(x)`` inside the square ``center +- half_width (1 + i)``."""
    center = complex(center)
    hw = float(half_width)
    corners = [center + hw * (-1 - 1j), center + hw * (1 - 1j), center + hw * (1 + 1j), center + hw * (-1 + 1j)]

    def bfun(z):
        return frame.entries(z)[1]

    count = _winding(bfun, corners)
    if count != 1:
        raise AmbiguityError(f"search box contains {count} zeros of b (counted with multiplicity), need 1")
    x = center
    for _ in range(max_iter):
        val = complex(np.asarray(bfun(np.array([x])))[0])
        der = complex(np.asarray(frame_entries_dx(frame, np.array([x]))[1])[0])
        if der == 0:
            break
        step = val / der
        x = x - step
        if abs(step) <= tol * (1 + abs(x)):
            if abs(x.real - center.real) > hw or abs(x.imag - center.imag) > hw:
                raise ConvergenceError("Newton left the search box")
            return x
    raise ConvergenceError("Newton iteration for the zero of b did not converge")
