"""Painleve equations in Newton form ``u'' = -dV/du``.

Potentials ``V(x, t)``:

* P1: ``-x^3/2 - t x/4``
* P2: ``-(x^2 + t/2)^2/2 + alpha x``
* P3: ``-nu^2 e^t cosh(2x - 2 rho) - mu^2 e^{2t} cosh 4x``
* P4: ``-x^6/8 - t x^4/2 - (t^2 - alpha) x^2/2 + beta/(4 x^2)``
* P5: ``-alpha/sinh^2 x - beta/cosh^2 x + gamma e^{2t} cosh(2x)/2 + delta e^{4t} cosh(4x)/8``
* P6: ``-sum_k nu_k wp(x + omega_k | 1, 2 pi i t)``

The Hamiltonian is always ``H = du^2/2 + V(u, t)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from .errors import BlowUpError, BranchError, ConfigError, DomainError, PoleError
from .params import PainleveKind as K
from .params import as_kind, check_params

SINGULAR_MARGIN = 1e-6
VELOCITY_GUARD = 1e8
BRANCH_GUARD = 1e-8


@dataclass(frozen=True)
class CalogeroState:
    t: float
    u: complex
    du: complex

    def __post_init__(self):
        for name in ("u", "du"):
            z = complex(getattr(self, name))
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise DomainError(f"state component {name} is not finite")
            object.__setattr__(self, name, z)
        t = complex(self.t)
        if t.imag != 0 or not math.isfinite(t.real):
            raise DomainError("time must be real and finite")
        object.__setattr__(self, "t", t.real)


# --- potentials ---------------------------------------------------------------


def _tau(t):
    return ell.as_tau(2j * np.pi * complex(t))


def singular_distance(kind, x, t=None):
    """Distance from ``x`` to the set where the potential is singular."""
    kind = as_kind(kind)
    x = np.asarray(x, dtype=complex)
    if kind is K.P4:
        d = np.abs(x)
    elif kind is K.P5:
        # zeros of sinh x cosh x: i pi Z / 2
        step = np.pi / 2
        d = np.abs(x - 1j * step * np.round(x.imag / step))
    elif kind is K.P6:
        d = 0.5 * ell.lattice_distance(2 * x, _tau(t))
    else:
        d = np.full(x.shape, np.inf)
    return d[()] if d.ndim == 0 else d


def _check_regular(kind, x, t, what):
    if np.any(singular_distance(kind, x, t) < ell.POLE_GUARD):
        raise PoleError(f"{what}: {as_kind(kind).value} potential is singular at x")


def _p6_points(x, t):
    tau = _tau(t)
    hp = ell.half_periods(tau)
    return tau, [x + hp[k] for k in range(4)]


def _p6_wp(x, t):
    """``wp`` and ``wp'`` at ``x + omega_k``, stacked along a new leading axis."""
    tau, pts = _p6_points(x, t)
    return ell.wp_pair(np.stack(pts), tau)


def potential(kind, params, x, t):
    """``V(x, t)``; accepts arrays of ``x``."""
    kind = as_kind(kind)
    check_params(kind, params)
    x = np.asarray(x, dtype=complex)
    _check_regular(kind, x, t, "potential")
    et = np.exp(t)
    if kind is K.P1:
        v = -(x**3) / 2 - t * x / 4
    elif kind is K.P2:
        v = -0.5 * (x**2 + t / 2) ** 2 + params.alpha * x
    elif kind in (K.P3, K.P3_TRUNCATED):
        v = -params.nu**2 * et * np.cosh(2 * x - 2 * params.rho) - params.mu**2 * et**2 * np.cosh(4 * x)
    elif kind is K.P4:
        v = -(x**6) / 8 - t * x**4 / 2 - 0.5 * (t**2 - params.alpha) * x**2 + params.beta / (4 * x**2)
    elif kind is K.P5:
        v = (
            -params.alpha / np.sinh(x) ** 2
            - params.beta / np.cosh(x) ** 2
            + 0.5 * params.gamma * et**2 * np.cosh(2 * x)
            + params.delta * et**4 * np.cosh(4 * x) / 8
        )
    else:
        w, _ = _p6_wp(x, t)
        v = -sum(nu * w[k] for k, nu in enumerate(params.nu))
    return v[()] if np.ndim(v) == 0 else v


def potential_dx(kind, params, x, t):
    """``dV/dx`` at fixed ``t``."""
    kind = as_kind(kind)
    check_params(kind, params)
    x = np.asarray(x, dtype=complex)
    _check_regular(kind, x, t, "potential_dx")
    et = np.exp(t)
    if kind is K.P1:
        d = -1.5 * x**2 - t / 4
    elif kind is K.P2:
        d = -2 * x * (x**2 + t / 2) + params.alpha
    elif kind in (K.P3, K.P3_TRUNCATED):
        d = -2 * params.nu**2 * et * np.sinh(2 * x - 2 * params.rho) - 4 * params.mu**2 * et**2 * np.sinh(4 * x)
    elif kind is K.P4:
        d = -0.75 * x**5 - 2 * t * x**3 - (t**2 - params.alpha) * x - params.beta / (2 * x**3)
    elif kind is K.P5:
        sh, ch = np.sinh(x), np.cosh(x)
        d = (
            2 * params.alpha * ch / sh**3
            + 2 * params.beta * sh / ch**3
            + params.gamma * et**2 * np.sinh(2 * x)
            + 0.5 * params.delta * et**4 * np.sinh(4 * x)
        )
    else:
        _, dw = _p6_wp(x, t)
        d = -sum(nu * dw[k] for k, nu in enumerate(params.nu))
    return d[()] if np.ndim(d) == 0 else d


def potential_dt(kind, params, x, t):
    """Explicit ``dV/dt`` at fixed ``x``."""
    kind = as_kind(kind)
    check_params(kind, params)
    x = np.asarray(x, dtype=complex)
    _check_regular(kind, x, t, "potential_dt")
    et = np.exp(t)
    if kind is K.P1:
        d = -x / 4
    elif kind is K.P2:
        d = -0.5 * (x**2 + t / 2)
    elif kind in (K.P3, K.P3_TRUNCATED):
        d = -params.nu**2 * et * np.cosh(2 * x - 2 * params.rho) - 2 * params.mu**2 * et**2 * np.cosh(4 * x)
    elif kind is K.P4:
        d = -(x**4) / 2 - t * x**2
    elif kind is K.P5:
        d = params.gamma * et**2 * np.cosh(2 * x) + params.delta * et**4 * np.cosh(4 * x) / 2
    else:
        # d/dt wp(x + omega_k(tau) | tau) with tau = 2 pi i t
        tau, pts = _p6_points(x, t)
        deta = ell.d_tau_eta(tau)
        d = 0
        for k, (nu, p) in enumerate(zip(params.nu, pts)):
            dwp = ell.d_tau_E2(p, tau) - 2 * deta + ell.wp_prime(p, tau) * ell.d_tau_omega(k)
            d = d - nu * 2j * np.pi * dwp
    return d[()] if np.ndim(d) == 0 else d


def hamiltonian(kind, params, state: CalogeroState):
    return 0.5 * state.du**2 + complex(potential(kind, params, state.u, state.t))


def hamiltonian_dt(kind, params, state: CalogeroState):
    """Partial time derivative of ``H``."""
    return complex(potential_dt(kind, params, state.u, state.t))


def rhs(kind, params, state: CalogeroState):
    """Acceleration ``u'' = -dV/du``."""
    return -complex(potential_dx(kind, params, state.u, state.t))


# --- integration --------------------------------------------------------------

# Dormand-Prince 5(4)
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = _B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class Trajectory:
    """Accepted integrator nodes in increasing time with quintic Hermite dense output."""

    kind: K
    params: object
    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    acc: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size < 2 or np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must be strictly increasing with at least two samples")

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t1(self):
        return float(self.t[-1])

    def _locate(self, t):
        if not (self.t[0] - 1e-12 <= t <= self.t[-1] + 1e-12):
            raise DomainError(f"t = {t} outside trajectory span [{self.t[0]}, {self.t[-1]}]")
        i = int(np.searchsorted(self.t, t, side="right") - 1)
        return min(max(i, 0), self.t.size - 2)

    def state(self, t) -> CalogeroState:
        t = float(t)
        i = self._locate(t)
        t0, t1 = self.t[i], self.t[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        # quintic Hermite basis on [0, 1] and its derivative
        s2, s3, s4, s5 = s * s, s**3, s**4, s**5
        h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5
        h10 = s - 6 * s3 + 8 * s4 - 3 * s5
        h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5)
        h01 = 10 * s3 - 15 * s4 + 6 * s5
        h11 = -4 * s3 + 7 * s4 - 3 * s5
        h21 = 0.5 * (s3 - 2 * s4 + s5)
        d00 = -30 * s2 + 60 * s3 - 30 * s4
        d10 = 1 - 18 * s2 + 32 * s3 - 15 * s4
        d20 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4)
        d11 = -12 * s2 + 28 * s3 - 15 * s4
        d21 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4)
        u0, u1 = self.u[i], self.u[i + 1]
        v0, v1 = self.du[i], self.du[i + 1]
        a0, a1 = self.acc[i], self.acc[i + 1]
        u = h00 * u0 + h10 * h * v0 + h20 * h * h * a0 + h01 * u1 + h11 * h * v1 + h21 * h * h * a1
        du = (d00 * (u0 - u1)) / h + d10 * v0 + d20 * h * a0 + d11 * v1 + d21 * h * a1
        return CalogeroState(t, complex(u), complex(du))

    def states(self):
        return [CalogeroState(float(t), complex(u), complex(v)) for t, u, v in zip(self.t, self.u, self.du)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_u", "im_u", "re_du", "im_du"])
        for t, u, v in zip(self.t, self.u, self.du):
            w.writerow([repr(float(t)), repr(float(u.real)), repr(float(u.imag)), repr(float(v.real)), repr(float(v.imag))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source, kind, params) -> "Trajectory":
        """Read a trajectory written by :meth:`to_csv` (path or text)."""
        text = source
        if "\n" not in str(source):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t", "re_u", "im_u", "re_du", "im_du"]:
            raise ConfigError("trajectory CSV must start with header t,re_u,im_u,re_du,im_du")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        t = data[:, 0]
        u = data[:, 1] + 1j * data[:, 2]
        du = data[:, 3] + 1j * data[:, 4]
        acc = np.array([rhs(kind, params, CalogeroState(a, b, c)) for a, b, c in zip(t, u, du)])
        return cls(as_kind(kind), params, t, u, du, acc)


def _monitor(kind, t, u, du):
    if not (np.isfinite(u) and np.isfinite(du)):
        return "non-finite state"
    if abs(du) > VELOCITY_GUARD:
        return f"|du| exceeded {VELOCITY_GUARD:g}"
    if singular_distance(kind, u, t) < SINGULAR_MARGIN:
        return "u approached the singular set of the potential"
    return None


def integrate(kind, params, initial: CalogeroState, t_end, tol=1e-10, h0=None, max_steps=200000) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) with PI step control on the complex pair ``(u, du)``.

    Integrates backwards when ``t_end < initial.t``; the returned trajectory is
    always ordered by increasing time.
    """
    kind = as_kind(kind)
    check_params(kind, params)
    if not (1e-14 <= tol <= 1e-2):
        raise DomainError(f"tol out of range: {tol!r}")
    t_end = float(t_end)
    span = t_end - initial.t
    if span == 0:
        raise DomainError("empty integration span")
    direction = 1.0 if span > 0 else -1.0

    def f(t, y):
        try:
            a = -complex(potential_dx(kind, params, y[0], t))
        except PoleError as exc:
            raise _Abort(str(exc)) from None
        return np.array([y[1], a])

    t = initial.t
    y = np.array([initial.u, initial.du], dtype=complex)
    k1 = f(t, y)
    ts, us, dus, accs = [t], [y[0]], [y[1]], [k1[1]]
    h = abs(h0) if h0 else min(abs(span), 1e-2)
    err_prev = 1e-4
    n_acc = n_rej = 0
    h_min, h_max = np.inf, 0.0
    try:
        for _ in range(max_steps):
            if direction * (t_end - t) <= 1e-14 * max(1.0, abs(t_end)):
                break
            h = min(h, abs(t_end - t))
            hs = direction * h
            k = [k1]
            for i in range(1, 7):
                yi = y + hs * sum(a * kj for a, kj in zip(_A[i], k))
                k.append(f(t + _C[i] * hs, yi))
            y_new = y + hs * sum(b * kj for b, kj in zip(_B, k))
            err_vec = hs * sum(e * kj for e, kj in zip(_E, k))
            scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
            err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))
            if err <= 1.0:
                t = t + hs
                y = y_new
                k1 = k[6]
                ts.append(t)
                us.append(y[0])
                dus.append(y[1])
                accs.append(k1[1])
                n_acc += 1
                h_min, h_max = min(h_min, h), max(h_max, h)
                reason = _monitor(kind, t, y[0], y[1])
                if reason:
                    raise _Abort(reason)
                fac = 0.9 * max(err, 1e-10) ** -0.14 * err_prev**0.08
                h = h * min(5.0, max(0.2, fac))
                err_prev = max(err, 1e-4)
            else:
                n_rej += 1
                h = h * max(0.2, 0.9 * err**-0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    raise _Abort("step size underflow")
        else:
            raise _Abort("maximum number of steps exceeded")
    except _Abort as exc:
        partial = None
        if len(ts) >= 2:
            partial = _make_traj(kind, params, ts, us, dus, accs, direction, {})
        last = CalogeroState(ts[-1], us[-1], dus[-1])
        raise BlowUpError(f"integration stopped at t = {ts[-1]:.6g}: {exc}", last, partial) from None
    meta = {"tol": tol, "n_steps": n_acc, "n_rejected": n_rej, "h_min": h_min, "h_max": h_max}
    return _make_traj(kind, params, ts, us, dus, accs, direction, meta)


class _Abort(Exception):
    pass


def _make_traj(kind, params, ts, us, dus, accs, direction, meta):
    arrs = [np.asarray(a) for a in (ts, us, dus, accs)]
    if direction < 0:
        arrs = [a[::-1] for a in arrs]
    return Trajectory(kind, params, arrs[0], arrs[1].astype(complex), arrs[2].astype(complex),
                      arrs[3].astype(complex), meta)


# --- quadrature along a trajectory -------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


class Quadrature:
    """``F(t) = int_{t_anchor}^t rate(state(s)) ds`` along a trajectory.

    Each integrator interval uses 6-point Gauss-Legendre on the dense output.
    """

    def __init__(self, traj: Trajectory, rate, t_anchor=None):
        self.traj = traj
        self.rate = rate
        nodes = traj.t
        pieces = [self._piece(nodes[i], nodes[i + 1]) for i in range(nodes.size - 1)]
        self.cum = np.concatenate([[0j], np.cumsum(pieces)])
        anchor = traj.t0 if t_anchor is None else float(t_anchor)
        self.offset = 0j
        self.offset = self(anchor)

    def _piece(self, a, b):
        if a == b:
            return 0j
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * sum(w * self.rate(self.traj.state(mid + half * x)) for x, w in zip(_GL_X, _GL_W))

    def __call__(self, t):
        t = float(t)
        i = self.traj._locate(t)
        return complex(self.cum[i] + self._piece(self.traj.t[i], t) - self.offset)


def hamiltonian_integral(traj: Trajectory, t_anchor=None) -> Quadrature:
    """Running ``int H dt`` with lower limit ``t_anchor`` (default: start of the trajectory)."""
    return Quadrature(traj, lambda s: hamiltonian(traj.kind, traj.params, s), t_anchor)


# --- original variables -------------------------------------------------------


def original_time(kind, t):
    """``(T, dT/dt, d^2T/dt^2)``."""
    kind = as_kind(kind)
    if kind in (K.P1, K.P2, K.P4):
        return float(t), 1.0, 0.0
    if kind in (K.P3, K.P3_TRUNCATED):
        e = math.exp(t)
        return e, e, e
    if kind is K.P5:
        e = math.exp(2 * t)
        return e, 2 * e, 4 * e
    ctx = ell.elliptic_context(_tau(t))
    e21 = ctx.e2 - ctx.e1
    T = (ctx.e3 - ctx.e1) / e21
    Tt = 2 * e21 * T * (T - 1)
    # d_t log(e2 - e1) = -2 (e3 + 2 eta)
    Ttt = Tt * (-2 * (ctx.e3 + 2 * ctx.eta) + 2 * e21 * (2 * T - 1))
    return T, Tt, Ttt


def _branch(kind, value, what):
    if abs(value) < BRANCH_GUARD:
        raise BranchError(f"{as_kind(kind).value}: {what} at a branch point of the change of variables")


def _p6_yt(u, du, t):
    """``y`` and ``dy/dt`` for P6 as functions of ``(u, du, t)``."""
    tau = _tau(t)
    ctx = ell.elliptic_context(tau)
    e21 = ctx.e2 - ctx.e1
    y = (complex(ctx.wp(u)) - ctx.e1) / e21
    yu = complex(ctx.wp_prime(u)) / e21
    th, thp = ell.theta_derivs(0, u, tau, 1)
    return y, yu, yu * (du + complex(thp / th))


def original_variables(kind, state: CalogeroState):
    """``(y, T, dy/dT)`` for a state."""
    kind = as_kind(kind)
    u, du, t = state.u, state.du, state.t
    T, Tt, _ = original_time(kind, t)
    if kind in (K.P1, K.P2):
        y, yt = u, du
    elif kind is K.P4:
        _branch(kind, u, "u = 0")
        y, yt = u * u, 2 * u * du
    elif kind in (K.P3, K.P3_TRUNCATED):
        y = np.exp(2 * u)
        yt = 2 * y * du
    elif kind is K.P5:
        sh, ch = np.sinh(u), np.cosh(u)
        _branch(kind, sh * ch, "sinh u cosh u = 0")
        y = (ch / sh) ** 2
        yt = -2 * ch / sh**3 * du
    else:
        _branch(kind, singular_distance(kind, u, t), "u at a half period")
        y, _, yt = _p6_yt(u, du, t)
    return complex(y), T, complex(yt / Tt)


def to_original_variables(kind, traj_or_state):
    """Map a state or a trajectory to ``(y, T)`` samples."""
    if isinstance(traj_or_state, CalogeroState):
        y, T, _ = original_variables(kind, traj_or_state)
        return y, T
    out = [original_variables(kind, s)[:2] for s in traj_or_state.states()]
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def original_params(kind, params):
    """Parameters of the original equation; identical to ``params`` except for P3."""
    kind = as_kind(kind)
    if kind in (K.P3, K.P3_TRUNCATED):
        return params.original()
    if kind is K.P1:
        return ()
    if kind is K.P2:
        return (params.alpha,)
    if kind is K.P4:
        return (params.alpha, params.beta)
    return (params.alpha, params.beta, params.gamma, params.delta)


def original_rhs(kind, params, y, T, yT):
    """Right-hand side of the original equation for ``d^2y/dT^2``."""
    kind = as_kind(kind)
    if kind is K.P1:
        return (6 * y * y + T) / 4
    if kind is K.P2:
        return 2 * y**3 + T * y - params.alpha
    if kind is K.P4:
        a, b = params.alpha, params.beta
        return yT**2 / (2 * y) + 1.5 * y**3 + 4 * T * y**2 + 2 * (T * T - a) * y + b / y
    if kind in (K.P3, K.P3_TRUNCATED):
        a, b, g, d = params.original()
        return yT**2 / y - yT / T + (a * y * y + b) / T + g * y**3 + d / y
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    if kind is K.P5:
        return (
            (1 / (2 * y) + 1 / (y - 1)) * yT**2
            - yT / T
            + y * (y - 1) ** 2 / T**2 * (a + b / y**2 + g * T / (y - 1) ** 2 + d * T * T * (y + 1) / (y - 1) ** 3)
        )
    return (
        0.5 * (1 / y + 1 / (y - 1) + 1 / (y - T)) * yT**2
        - (1 / T + 1 / (T - 1) + 1 / (y - T)) * yT
        + y * (y - 1) * (y - T) / (T**2 * (T - 1) ** 2)
        * (a + b * T / y**2 + g * (T - 1) / (y - 1) ** 2 + d * T * (T - 1) / (y - T) ** 2)
    )


def _c4(f, x, h):
    """Fourth-order central difference."""
    return (8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12 * h)


def original_second_derivative(kind, params, state: CalogeroState):
    """``d^2y/dT^2`` from the Newton-form state by the chain rule."""
    kind = as_kind(kind)
    u, du, t = state.u, state.du, state.t
    a = rhs(kind, params, state)
    T, Tt, Ttt = original_time(kind, t)
    if kind in (K.P1, K.P2):
        yt, ytt = du, a
    elif kind is K.P4:
        yt, ytt = 2 * u * du, 2 * du * du + 2 * u * a
    elif kind in (K.P3, K.P3_TRUNCATED):
        y = np.exp(2 * u)
        yt, ytt = 2 * y * du, 4 * y * du * du + 2 * y * a
    elif kind is K.P5:
        sh, ch = np.sinh(u), np.cosh(u)
        yu = -2 * ch / sh**3
        yuu = -2 / sh**2 + 6 * ch * ch / sh**4
        yt, ytt = yu * du, yuu * du * du + yu * a
    else:
        y, yu, yt = _p6_yt(u, du, t)
        h = 1e-3
        f_u = _c4(lambda s: _p6_yt(s, du, t)[2], u, h)
        f_t = _c4(lambda s: _p6_yt(u, du, s)[2], t, h)
        ytt = f_u * du + yu * a + f_t
    yT = yt / Tt
    return complex((ytt - yT * Ttt) / Tt**2)


def original_form_residual(kind, params, traj: Trajectory, every=1):
    """Max over trajectory nodes of ``|y_TT - RHS(T, y, y_T)|`` in the original variables."""
    kind = as_kind(kind)
    worst = 0.0
    for s in traj.states()[::every]:
        y, T, yT = original_variables(kind, s)
        lhs = original_second_derivative(kind, params, s)
        worst = max(worst, abs(lhs - original_rhs(kind, params, y, T, yT)))
    return worst
