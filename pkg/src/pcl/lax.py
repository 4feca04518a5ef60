"""U-V pairs for the Newton-form Painleve equations.

Every pair is traceless, ``U = [[a, b], [c, -a]]`` and ``V = [[A, B], [C, -A]]``,
normalized so that ``b_x = 2B``.  Compatibility of ``d_x Psi = U Psi`` and
``d_t Psi = V Psi`` is the zero-curvature equation
``d_t U - d_x V + [U, V] = 0``.

P1, P2, P4 and the truncated P3 pair depend on the classical state only.  The
general P3, P5 and P6 pairs are written through auxiliary variables that are
reconstructed along a trajectory (see the ``reconstruct_aux_*`` functions); one
of them is fixed by a quadrature whose initial value is a free scale.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import dynamics as dyn
from . import elliptic as ell
from .errors import BranchError, ConsistencyError, DegeneracyError, DomainError, PoleError
from .numdiff import central4
from .params import PainleveKind as K
from .params import as_kind, check_params

AUX_KINDS = (K.P3, K.P5, K.P6)
CONSISTENCY_TOL = 1e-7
DEGENERACY_GUARD = 1e-12


@dataclass(frozen=True)
class LaxEval:
    U: np.ndarray
    V: np.ndarray
    x: complex
    t: float

    @property
    def a(self):
        return self.U[0, 0]

    @property
    def b(self):
        return self.U[0, 1]

    @property
    def c(self):
        return self.U[1, 0]

    @property
    def A(self):
        return self.V[0, 0]

    @property
    def B(self):
        return self.V[0, 1]

    @property
    def C(self):
        return self.V[1, 0]


def _pair(entries, x, t) -> LaxEval:
    a, b, c, A, B, C = (complex(np.asarray(e).reshape(-1)[0]) if np.ndim(e) else complex(e) for e in entries)
    U = np.array([[a, b], [c, -a]], dtype=complex)
    V = np.array([[A, B], [C, -A]], dtype=complex)
    return LaxEval(U, V, complex(x), float(t))


def _bcast(value, x):
    return np.broadcast_to(np.asarray(value, dtype=complex), np.shape(x)).copy()


# --- auxiliary data -----------------------------------------------------------


@dataclass(frozen=True)
class P3Aux:
    """Auxiliary variables of the general P3 pair, in the shifted time ``s``."""

    t: float
    s: float
    g11: complex
    g12: complex
    g21: complex
    v: complex
    w: complex
    theta: complex
    lam: complex
    chi: complex

    def integrals(self):
        """``(g11^2 + g12 g21, v g21 + w g12 + theta g11)``, equal to ``(chi, lambda)``."""
        return (
            self.g11**2 + self.g12 * self.g21,
            self.v * self.g21 + self.w * self.g12 + self.theta * self.g11,
        )


@dataclass(frozen=True)
class P5Aux:
    t: float
    g: complex
    v: complex
    w: complex
    v1: complex
    w1: complex
    zeta: complex
    xi: complex
    sigma: complex

    def integrals(self):
        """``(v v1 + g^2, w w1 + g (g + 2 sigma))``, equal to ``(zeta^2, xi^2 + 2 xi sigma)``."""
        return (
            self.v * self.v1 + self.g**2,
            self.w * self.w1 + self.g * (self.g + 2 * self.sigma),
        )


@dataclass(frozen=True)
class P6Aux:
    t: float
    K: complex
    y: complex
    T: complex
    yT: complex
    z: complex
    g: tuple
    u: tuple
    xis: tuple
    xi: complex

    @property
    def ug(self):
        return tuple(ui * gi for ui, gi in zip(self.u, self.g))

    def constraints(self):
        """Deviations of the three conserved combinations from their prescribed values."""
        g, u, xs = self.g, self.u, self.xis
        return (
            sum(g) - xs[3],
            sum(ui * gi for ui, gi in zip(u, g)),
            sum((gi + 2 * x) / ui for gi, x, ui in zip(g, xs, u)),
        )

    def a_of(self, X):
        """``a(X) = sum (g_i + xi_i)/(X - X_i)`` with ``X_i = 0, 1, T``."""
        return sum((gi + x) / (X - p) for gi, x, p in zip(self.g, self.xis, (0.0, 1.0, self.T)))


def p3_constants(params):
    """``(theta, lambda, chi, s_offset)`` for the general P3 pair.

    The pair is written for ``mu = 1/2``; other ``mu != 0`` are reached by the
    time shift ``s = t + log(2 mu)`` with ``nu -> nu/sqrt(2 mu)``, which leaves
    the potential unchanged.
    """
    mu = complex(params.mu)
    if abs(mu) < DEGENERACY_GUARD:
        raise DomainError("the general P3 pair needs mu != 0; use the truncated pair")
    off = cmath.log(2 * mu)
    if abs(off.imag) > 1e-14:
        raise DomainError("the general P3 pair needs 2 mu > 0 so that the time shift is real")
    nu2 = params.nu**2 / (2 * mu)
    theta = nu2 * cmath.exp(-2 * params.rho) - 1
    lam = -nu2 * cmath.exp(2 * params.rho) / 4
    return theta, lam, 1 / 16, off.real


def _p3_f_g(state, theta, off):
    s = state.t + off
    f = cmath.exp(-2 * state.u + s)
    fdot = (1 - 2 * state.du) * f
    g = (fdot + 2 * theta * f + cmath.exp(2 * s)) / (4 * f * f)
    return s, f, fdot, g


def _p5_g(state, sigma):
    sh, ch = cmath.sinh(state.u), cmath.cosh(state.u)
    return -0.5 * state.du * sh * ch + 0.5 * cmath.exp(2 * state.t) * (sh * ch) ** 2 - sigma * ch * ch


def _p6_residue_g(y, T, yT, xs, xi):
    """``g_0, g_1, g_2`` from the residue formulas in terms of ``(y, y_T)``."""
    x0, x1, x2, _ = xs
    G0 = (T - 1) / 4 - xi * (xi * T + xi + 1)
    G1 = (T - 1) / 4 - xi**2 * (T - 1)
    G2 = (T - 1) / 4 + xi * (xi + 1) * (T - 1)
    A0 = (T - 1) ** 2 / 4 * yT**2
    A1 = T**2 / 4 * yT**2
    A2 = (yT - 1) ** 2 / 4
    c = (xi + 0.5) ** 2
    g0 = y / (2 * xi) * (
        -c / T * y - G0 / T - (A0 - xi * (T - 1) * yT + x0 * (2 * xi - x0)) / y
        + (T - 1) / (T * (y - 1)) * (A1 - x1**2) - (T - 1) / (y - T) * (A2 - x2**2)
    )
    g1 = (y - 1) / (2 * xi) * (
        c / (T - 1) * y + G1 / (T - 1) + T / ((T - 1) * y) * (A0 - x0**2)
        + (-A1 - xi * T * yT + x1 * (x1 - 2 * xi)) / (y - 1) + T / (y - T) * (A2 - x2**2)
    )
    g2 = (y - T) / (2 * xi) * (
        -c / (T * (T - 1)) * y - G2 / (T * (T - 1)) - (A0 - x0**2) / ((T - 1) * y)
        + (A1 - x1**2) / (T * (y - 1)) - (A2 - xi * (yT - 1) + x2 * (2 * xi - x2)) / (y - T)
    )
    return g0, g1, g2


def p6_explicit_g(y, T, z, xs, xi):
    """``g_0, g_1, g_2`` as quadratic polynomials in ``z - sum xi_i/(y - X_i)``.

    A second route to the same quantities as the residue formulas.
    """
    x0, x1, x2, x3 = xs
    zt = z - x0 / y - x1 / (y - 1) - x2 / (y - T)
    P = y * (y - 1) * (y - T)
    g0 = -y / (2 * xi * T) * (
        P * zt**2 - 2 * (x3 * (y - 1) * (y - T) - x1 * (y - T) - x2 * T * (y - 1)) * zt
        + x3 * (x3 * (y - 1) - (2 * x2 + x3) * T - 2 * x1)
    )
    g1 = (y - 1) / (2 * xi * (T - 1)) * (
        P * zt**2 - 2 * (x3 * y * (y - T) + x0 * (y - T) - x2 * (T - 1) * y) * zt
        + x3 * (x3 * (y - 1) - (2 * x2 + x3) * (T - 1) + 2 * x0 + x3)
    )
    g2 = -(y - T) / (2 * xi * T * (T - 1)) * (
        P * zt**2 - 2 * (x3 * y * (y - 1) + x0 * T * (y - 1) + x1 * (T - 1) * y) * zt
        + x3 * (x3 * (y - 1) + (2 * x0 + x3) * T + 2 * x1 * (T - 1))
    )
    return g0, g1, g2


def _p6_state_part(state, ctx):
    """``y``, ``T``, ``dT/dt``, ``y_T`` and ``z`` of a P6 state."""
    e21 = ctx.e2 - ctx.e1
    T = (ctx.e3 - ctx.e1) / e21
    Tt = 2 * e21 * T * (T - 1)
    wu, wpu = ell.wp_pair(state.u, ctx.tau)
    y = (complex(wu) - ctx.e1) / e21
    for X in (0.0, 1.0, T):
        if abs(y - X) < 1e-10:
            raise BranchError("P6: y coincides with a singular point 0, 1 or T")
    th, thp = ell.theta_derivs(0, state.u, ctx.tau, 1)
    yT = complex(wpu) / e21 * (state.du + complex(thp / th)) / Tt
    z = 0.5 * (T * (T - 1) * yT / (y * (y - 1) * (y - T)) - 1 / (y - T))
    return y, T, Tt, yT, z


def _p6_dlogK_dt(state, params):
    """``d log K / dt = -2 (2 xi + 1)(e_2 - e_1)(y - T)``."""
    ctx = ell.elliptic_context(dyn._tau(state.t))
    e21 = ctx.e2 - ctx.e1
    wu, _ = ell.wp_pair(state.u, ctx.tau)
    y = (complex(wu) - ctx.e1) / e21
    T = (ctx.e3 - ctx.e1) / e21
    xi = params.residues()[4]
    return -2 * (2 * xi + 1) * e21 * (y - T)


def p6_aux_from_state(state, params, K_value):
    xs5 = params.residues()
    xs, xi = xs5[:4], xs5[4]
    if abs(xi) < DEGENERACY_GUARD:
        raise DegeneracyError("P6 reconstruction needs xi != 0")
    ctx = ell.elliptic_context(dyn._tau(state.t))
    y, T, _, yT, z = _p6_state_part(state, ctx)
    g = _p6_residue_g(y, T, yT, xs, xi)
    ug = (K_value * y / T, -K_value * (y - 1) / (T - 1), K_value * (y - T) / (T * (T - 1)))
    for gi in g:
        if abs(gi) < DEGENERACY_GUARD:
            raise DegeneracyError("P6 reconstruction: some g_i vanishes")
    u = tuple(a / b for a, b in zip(ug, g))
    return P6Aux(state.t, complex(K_value), y, T, yT, z, tuple(g), u, tuple(xs), xi)


class AuxTrack:
    """Auxiliary variables along a trajectory.

    ``at(t)`` evaluates at any time in the span; ``state_override`` lets
    callers feed a modified classical state (used by negative controls).
    """

    def __init__(self, kind, params, traj, seed=1.0):
        self.kind = as_kind(kind)
        if self.kind not in AUX_KINDS:
            raise DomainError(f"{self.kind.value} has no auxiliary variables")
        check_params(self.kind, params)
        seed = complex(seed)
        if abs(seed) < DEGENERACY_GUARD:
            raise DegeneracyError("auxiliary seed must be non-zero")
        self.params = params
        self.traj = traj
        self.seed = seed
        if self.kind is K.P3:
            self.consts = p3_constants(params)
            theta, _, _, off = self.consts

            def rate(s):
                _, f, _, g = _p3_f_g(s, theta, off)
                return theta - 4 * f * g

        elif self.kind is K.P5:
            xs2, z2, sigma = params.jimbo_miwa()
            self.consts = (cmath.sqrt(xs2) - sigma, cmath.sqrt(z2), sigma)

            def rate(s):
                sh, ch = cmath.sinh(s.u), cmath.cosh(s.u)
                return -4 * (1 - (sh / ch) ** 2) * _p5_g(s, sigma)

        else:
            self.consts = params.residues()

            def rate(s):
                return _p6_dlogK_dt(s, params)

        self._log = dyn.Quadrature(traj, rate)

    def scale(self, t):
        """The quadrature-fixed variable (``g12``, ``v`` or ``K``) at time ``t``."""
        return self.seed * cmath.exp(self._log(t))

    def at(self, t, state=None):
        state = self.traj.state(t) if state is None else state
        m = self.scale(t)
        if self.kind is K.P3:
            theta, lam, chi, off = self.consts
            s, f, _, g = _p3_f_g(state, theta, off)
            g12 = m
            v = f * g12
            g21 = (chi - g * g) / g12
            w = (lam - theta * g - v * g21) / g12
            return P3Aux(state.t, s, g, g12, g21, v, w, theta, lam, chi)
        if self.kind is K.P5:
            xi, zeta, sigma = self.consts
            sh, ch = cmath.sinh(state.u), cmath.cosh(state.u)
            if abs(sh * ch) < DEGENERACY_GUARD:
                raise DegeneracyError("P5 reconstruction at a zero of sinh u cosh u")
            g = _p5_g(state, sigma)
            v = m
            w = v * (sh / ch) ** 2
            v1 = (zeta - g) * (zeta + g) / v
            w1 = (xi - g) * (2 * sigma + xi + g) / w
            return P5Aux(state.t, g, v, w, v1, w1, zeta, xi, sigma)
        return p6_aux_from_state(state, self.params, m)

    def samples(self):
        return [self.at(t) for t in self.traj.t]


def reconstruct_aux_P3(traj, params, g12_0=1.0) -> AuxTrack:
    return AuxTrack(K.P3, params, traj, g12_0)


def reconstruct_aux_P5(traj, params, v_0=1.0) -> AuxTrack:
    return AuxTrack(K.P5, params, traj, v_0)


def reconstruct_aux_P6(traj, params, K_0=1.0) -> AuxTrack:
    return AuxTrack(K.P6, params, traj, K_0)


def p3_ode_residuals(aux_fn, t, h=1e-4):
    """Residuals of the five first-order equations for the P3 variables (central differences)."""
    a = aux_fn(t)
    p, m = aux_fn(t + h), aux_fn(t - h)

    def d(name):
        return (getattr(p, name) - getattr(m, name)) / (2 * h)

    e2s = cmath.exp(2 * a.s)
    return (
        d("g11") - 2 * (a.v * a.g21 - a.w * a.g12),
        d("g12") - (a.theta * a.g12 - 4 * a.v * a.g11),
        d("g21") - (-a.theta * a.g21 + 4 * a.w * a.g11),
        d("v") - (-a.theta * a.v - a.g12 * e2s),
        d("w") - (a.theta * a.w + a.g21 * e2s),
    )


def p5_ode_residuals(aux_fn, t, h=1e-4):
    """Residuals of the five first-order equations for the P5 variables."""
    a = aux_fn(t)
    p, m = aux_fn(t + h), aux_fn(t - h)

    def d(name):
        return (getattr(p, name) - getattr(m, name)) / (2 * h)

    e2t = cmath.exp(2 * t)
    dvw = a.v - a.w
    return (
        d("g") - 2 * (a.v * a.w1 - a.w * a.v1),
        d("v") + 4 * dvw * a.g,
        d("w") - (-4 * dvw * (a.g + a.sigma) + 2 * a.w * e2t),
        d("v1") - 4 * (a.v1 - a.w1) * a.g,
        d("w1") - (4 * (a.v1 - a.w1) * (a.g + a.sigma) - 2 * a.w1 * e2t),
    )


def p6_ode_residuals(aux_fn, t, h=1e-4):
    """Residuals of the six equations for ``g_i``, ``u_i`` in the variable ``T``.

    They are the residues at ``X = 0`` and ``X = 1`` of the zero curvature
    condition: ``T d_T U_0 = [U_0, V_2]`` and ``(T - 1) d_T U_1 = [U_1, V_2]``.
    """
    a = aux_fn(t)
    p, m = aux_fn(t + h), aux_fn(t - h)
    dT = p.T - m.T
    x0, x1, x2, _ = a.xis

    def qs(b):
        return (
            b.u[0] * b.g[0],
            b.u[1] * b.g[1],
            b.g[0],
            b.g[1],
            (b.g[0] + 2 * x0) / b.u[0],
            (b.g[1] + 2 * x1) / b.u[1],
        )

    dq = [(qp - qm) / dT for qp, qm in zip(qs(p), qs(m))]
    T = a.T
    (u0, u1, u2), (g0, g1, g2) = a.u, a.g
    return (
        T * dq[0] - (2 * u0 * g0 * (g0 + g2 + x0 + x2) + 2 * u1 * g1 * (g0 + x0)),
        (T - 1) * dq[1] - (2 * u1 * g1 * (g1 + g2 + x1 + x2) + 2 * u0 * g0 * (g1 + x1)),
        T * dq[2] - (u0 / u2 * g0 * (g2 + 2 * x2) - u2 / u0 * g2 * (g0 + 2 * x0)),
        (T - 1) * dq[3] - (u1 / u2 * g1 * (g2 + 2 * x2) - u2 / u1 * g2 * (g1 + 2 * x1)),
        T * dq[4] - (2 / u2 * (g2 + 2 * x2) * (g0 + x0) - 2 / u0 * (g0 + 2 * x0) * (g2 + x2)),
        (T - 1) * dq[5] - (2 / u2 * (g2 + 2 * x2) * (g1 + x1) - 2 / u1 * (g1 + 2 * x1) * (g2 + x2)),
    )


# --- frames: x-independent data at a fixed time ------------------------------


def _check_aux_consistency(kind, state, aux, params):
    if kind is K.P3:
        theta, _, _, off = p3_constants(params)
        _, f, _, g = _p3_f_g(state, theta, off)
        if abs(aux.v / aux.g12 - f) > CONSISTENCY_TOL * abs(f) or abs(aux.g11 - g) > CONSISTENCY_TOL * (1 + abs(g)):
            raise ConsistencyError("P3 auxiliary data does not match the state")
    elif kind is K.P5:
        sigma = params.jimbo_miwa()[2]
        y = (cmath.cosh(state.u) / cmath.sinh(state.u)) ** 2
        g = _p5_g(state, sigma)
        if abs(aux.w * y - aux.v) > CONSISTENCY_TOL * abs(aux.v) or abs(aux.g - g) > CONSISTENCY_TOL * (1 + abs(g)):
            raise ConsistencyError("P5 auxiliary data does not match the state")
    elif kind is K.P6:
        ctx = ell.elliptic_context(dyn._tau(state.t))
        wu, _ = ell.wp_pair(state.u, ctx.tau)
        y = (complex(wu) - ctx.e1) / (ctx.e2 - ctx.e1)
        if abs(aux.y - y) > CONSISTENCY_TOL * (1 + abs(y)):
            raise ConsistencyError("P6 auxiliary data does not match the state")
    if abs(aux.t - state.t) > 1e-12:
        raise ConsistencyError("auxiliary data and state are given at different times")


class Frame:
    """Pair entries at a fixed time as vectorized functions of ``x``."""

    has_dx = True

    def __init__(self, kind, params, state, aux=None):
        self.kind = as_kind(kind)
        self.params = check_params(self.kind, params) if params is not None else None
        self.state = state
        self.aux = aux
        self.t = state.t

    def singular_distance(self, x):
        """Distance from ``x`` to the poles of the entries."""
        if self.kind in (K.P4, K.P5, K.P6):
            return dyn.singular_distance(self.kind, x, self.t)
        return np.full(np.shape(x), np.inf)

    def _guard(self, x):
        if np.any(self.singular_distance(x) < ell.POLE_GUARD):
            raise PoleError(f"{self.kind.value} pair evaluated at a pole in x")

    def pair(self, x) -> LaxEval:
        return _pair(self.entries(x), x, self.t)

    def entries(self, x):
        raise NotImplementedError

    def entries_dx(self, x):
        raise NotImplementedError


class _P1Frame(Frame):
    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        u, du, t = self.state.u, self.state.du, self.t
        return (_bcast(du, x), x - u, x * x + x * u + u * u + t / 2, _bcast(0, x), _bcast(0.5, x), x / 2 + u)

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        u = self.state.u
        z, one = _bcast(0, x), _bcast(1, x)
        return (z, one, 2 * x + u, z, z, 0.5 * one)


class _P2Frame(Frame):
    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        u, du, t, al = self.state.u, self.state.du, self.t, self.params.alpha
        return (
            x * x + du - u * u,
            x - u,
            (x + u) * (2 * u * u - 2 * du + t) - 2 * al - 1,
            (x + u) / 2,
            _bcast(0.5, x),
            _bcast(u * u - du + t / 2, x),
        )

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        u, du, t = self.state.u, self.state.du, self.t
        z = _bcast(0, x)
        return (2 * x, _bcast(1, x), _bcast(2 * u * u - 2 * du + t, x), _bcast(0.5, x), z, z)


class _P4Frame(Frame):
    def __init__(self, *args):
        super().__init__(*args)
        u, du, t = self.state.u, self.state.du, self.t
        if abs(u) < ell.POLE_GUARD:
            raise PoleError("P4 pair needs u != 0")
        self.Q = u * du - u**4 / 2 - t * u * u

    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        self._guard(x)
        u, t, Q = self.state.u, self.t, self.Q
        al, be = self.params.alpha, self.params.beta
        return (
            x**3 / 2 + t * x + (Q + 0.5) / x,
            x * x - u * u,
            (Q * Q + be / 2) / (u * u * x * x) - Q - al - 1,
            (x * x + u * u) / 2 + t,
            x.copy(),
            -(Q + al + 1) / x,
        )

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        self._guard(x)
        u, t, Q = self.state.u, self.t, self.Q
        al, be = self.params.alpha, self.params.beta
        return (
            1.5 * x * x + t - (Q + 0.5) / x**2,
            2 * x,
            -2 * (Q * Q + be / 2) / (u * u * x**3),
            x.copy(),
            _bcast(1, x),
            (Q + al + 1) / x**2,
        )


class _P3TruncFrame(Frame):
    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        u, du = self.state.u, self.state.du
        k = self.params.nu * cmath.exp(self.t / 2)
        z = _bcast(0, x)
        return (_bcast(du, x), 2 * k * np.sinh(x - u), 2 * k * np.sinh(x + u), z, k * np.cosh(x - u), k * np.cosh(x + u))

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        u = self.state.u
        k = self.params.nu * cmath.exp(self.t / 2)
        z = _bcast(0, x)
        return (z, 2 * k * np.cosh(x - u), 2 * k * np.cosh(x + u), z, k * np.sinh(x - u), k * np.sinh(x + u))


class _P3Frame(Frame):
    def __init__(self, *args):
        super().__init__(*args)
        _check_aux_consistency(self.kind, self.state, self.aux, self.params)
        a = self.aux
        s = a.s
        self.es = cmath.exp(s)
        self.fh = cmath.exp(-self.state.u + s / 2)
        f = self.fh**2
        fdot_f = 1 - 2 * self.state.du
        self.h = fdot_f / 4 + cmath.exp(2 * s) / (2 * f) + a.theta / 2

    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        a, es, fh = self.aux, self.es, self.fh
        ep, em, em3 = np.exp(x), np.exp(-x), np.exp(-3 * x)
        return (
            0.5 * ep * ep * es - 2 * a.g11 * em * em * es + a.theta + 0.5,
            fh * ep - em * es / fh,
            4 * fh * a.g12 * (a.w * em - a.g21 * em3 * es),
            0.25 * ep * ep * es + a.g11 * em * em * es + self.h,
            0.5 * (fh * ep + em * es / fh),
            2 * fh * a.g12 * (a.w * em + a.g21 * em3 * es),
        )

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        a, es, fh = self.aux, self.es, self.fh
        ep, em, em3 = np.exp(x), np.exp(-x), np.exp(-3 * x)
        return (
            ep * ep * es + 4 * a.g11 * em * em * es,
            fh * ep + em * es / fh,
            4 * fh * a.g12 * (-a.w * em + 3 * a.g21 * em3 * es),
            0.5 * ep * ep * es - 2 * a.g11 * em * em * es,
            0.5 * (fh * ep - em * es / fh),
            2 * fh * a.g12 * (-a.w * em - 3 * a.g21 * em3 * es),
        )


class _P5Frame(Frame):
    def __init__(self, *args):
        super().__init__(*args)
        _check_aux_consistency(self.kind, self.state, self.aux, self.params)

    def entries(self, x):
        x = np.asarray(x, dtype=complex)
        self._guard(x)
        a, t, u = self.aux, self.t, self.state.u
        sh, ch = np.sinh(x), np.cosh(x)
        et = math.exp(t)
        p, q = (a.v - a.w) * a.v1, (a.v - a.w) * a.w1
        return (
            et * et * sh * ch + (2 * a.g + 0.5) * sh / ch - (2 * a.g + 2 * a.sigma - 0.5) * ch / sh,
            2 * et * np.sinh(x - u) * np.sinh(x + u),
            2 / et * (p / ch**2 - q / sh**2),
            et * et * (ch * ch + cmath.sinh(u) ** 2) - 2 * a.sigma + 0.5,
            et * np.sinh(2 * x),
            4 * (p - q) / (et * np.sinh(2 * x)),
        )

    def entries_dx(self, x):
        x = np.asarray(x, dtype=complex)
        self._guard(x)
        a, t = self.aux, self.t
        sh, ch = np.sinh(x), np.cosh(x)
        et = math.exp(t)
        p, q = (a.v - a.w) * a.v1, (a.v - a.w) * a.w1
        s2 = np.sinh(2 * x)
        return (
            et * et * np.cosh(2 * x) + (2 * a.g + 0.5) / ch**2 + (2 * a.g + 2 * a.sigma - 0.5) / sh**2,
            2 * et * s2,
            2 / et * (-2 * p * sh / ch**3 + 2 * q * ch / sh**3),
            et * et * s2,
            2 * et * np.cosh(2 * x),
            -8 * (p - q) * np.cosh(2 * x) / (et * s2 * s2),
        )


RHO_CHOICES = ("corrected", "plain")


class _P6Frame(Frame):
    """Rational pair in ``X = (wp(x) - e_1)/(e_2 - e_1)``, then the diagonal gauge.

    ``rho="plain"`` uses ``rho^2 = theta_1'(0)^{2/3} theta_1(u)^2 / K``;
    ``rho="corrected"`` additionally divides by ``theta_0(0)^6``, which removes a
    spurious x-independent term ``3 d_t log theta_0(0)`` from the Schrodinger
    potential.
    """

    has_dx = False

    def __init__(self, kind, params, state, aux, rho="corrected"):
        super().__init__(kind, params, state, aux)
        if rho not in RHO_CHOICES:
            raise DomainError(f"rho must be one of {RHO_CHOICES}")
        _check_aux_consistency(self.kind, state, aux, params)
        self.rho = rho
        tau = dyn._tau(self.t)
        self.ctx = ctx = ell.elliptic_context(tau)
        self.e21 = ctx.e2 - ctx.e1
        T = aux.T
        self.Tt = 2 * self.e21 * T * (T - 1)
        u, du = state.u, state.du
        th1, th1p, th1pp = (complex(v) for v in ell.theta_derivs(1, u, tau, 2))
        if abs(th1) < DEGENERACY_GUARD:
            raise DegeneracyError("P6 gauge: theta_1(u) vanishes")
        rho2 = ctx.th1p0 ** (2 / 3) * th1**2 / aux.K
        dlogK = -2 * (2 * aux.xi + 1) * self.e21 * (aux.y - T)
        dt_log_rho2 = -2 * ctx.eta + 2 * (th1p * du + 0.5 * th1pp) / th1 - dlogK
        if rho == "corrected":
            t00, t02 = (complex(v) for v in ell.theta_derivs(0, 0.0, tau, 2)[::2])
            rho2 = rho2 / t00**6
            dt_log_rho2 -= 3 * t02 / t00
        self.rho2 = rho2
        self.dt_log_rho2 = dt_log_rho2

    def _pieces(self, x):
        x = np.asarray(x, dtype=complex)
        self._guard(x)
        ctx, aux = self.ctx, self.aux
        wpx, wppx = ell.wp_pair(x, ctx.tau)
        wpsx = 6 * wpx * wpx - 0.5 * ctx.g2
        X = (wpx - ctx.e1) / self.e21
        Xx = wppx / self.e21
        Xxx = wpsx / self.e21
        t0, t0p, t0pp = ell.theta_derivs(0, x, ctx.tau, 2)
        L = t0p / t0
        Xt = Xx * L
        T = aux.T
        P = (0.0, 1.0, T)
        g, uu, xs = aux.g, aux.u, aux.xis
        ra = sum((g[i] + xs[i]) / (X - P[i]) for i in range(3))
        rb = -sum(uu[i] * g[i] / (X - P[i]) for i in range(3))
        rc = sum((g[i] + 2 * xs[i]) / (uu[i] * (X - P[i])) for i in range(3))
        rA = -(g[2] + xs[2]) / (X - T)
        rB = uu[2] * g[2] / (X - T)
        rC = -(g[2] + 2 * xs[2]) / (uu[2] * (X - T))
        pre = (
            Xx * ra, Xx * rb, Xx * rc,
            self.Tt * rA + Xt * ra, self.Tt * rB + Xt * rb, self.Tt * rC + Xt * rc,
        )
        om2 = wppx * t0**2 / (2 * (wpx - ctx.e3)) * self.rho2
        dx_log_om2 = wpsx / wppx - wppx / (wpx - ctx.e3) + 2 * L
        w3, _ = ell.wp_pair(x + ctx.tau / 2, ctx.tau)
        Lx = -w3 - 2 * ctx.eta
        dt_log_om2 = (Xxx / Xx * L + Lx) - (Xt - self.Tt) / (X - T) + t0pp / t0 + self.dt_log_rho2
        return pre, om2, dx_log_om2, dt_log_om2

    def pregauge(self, x):
        """Entries before the diagonal gauge, and ``omega^2``."""
        pre, om2, _, _ = self._pieces(x)
        return pre, om2

    def entries(self, x):
        (a, b, c, A, B, C), om2, dxl, dtl = self._pieces(x)
        return (a + 0.5 * dxl, om2 * b, c / om2, A + 0.5 * dtl, om2 * B, C / om2)


_FRAMES = {
    K.P1: _P1Frame,
    K.P2: _P2Frame,
    K.P4: _P4Frame,
    K.P3_TRUNCATED: _P3TruncFrame,
    K.P3: _P3Frame,
    K.P5: _P5Frame,
    K.P6: _P6Frame,
}


def make_frame(kind, params, state, aux=None, rho="corrected") -> Frame:
    kind = as_kind(kind)
    if kind in AUX_KINDS and aux is None:
        raise ConsistencyError(f"{kind.value} pair needs auxiliary data")
    if kind is K.P6:
        return _P6Frame(kind, params, state, aux, rho)
    return _FRAMES[kind](kind, params, state, aux)


def build_P1(state, x) -> LaxEval:
    return make_frame(K.P1, None, state).pair(x)


def build_P2(state, params, x) -> LaxEval:
    return make_frame(K.P2, params, state).pair(x)


def build_P4(state, params, x) -> LaxEval:
    return make_frame(K.P4, params, state).pair(x)


def build_P3_truncated(state, params, x) -> LaxEval:
    return make_frame(K.P3_TRUNCATED, params, state).pair(x)


def build_P3_general(state, aux, params, x) -> LaxEval:
    return make_frame(K.P3, params, state, aux).pair(x)


def build_P5(state, aux, params, x) -> LaxEval:
    return make_frame(K.P5, params, state, aux).pair(x)


def build_P6(state, aux, params, x, rho="corrected") -> LaxEval:
    return make_frame(K.P6, params, state, aux, rho).pair(x)


def p6_gauge_omega2(x, t, u, K_value, form="quotient"):
    """``omega^2`` of the P6 gauge with the plain ``rho``.

    ``form='quotient'`` uses ``wp'(x) theta_0(x)^2 / (2 (wp(x) - e_3)) rho^2``;
    ``form='theta'`` is the product of theta functions, which equals minus the
    quotient form.
    """
    tau = dyn._tau(t)
    ctx = ell.elliptic_context(tau)
    th1u = ell.theta(1, u, tau)
    if form == "quotient":
        wpx, wppx = ell.wp_pair(x, tau)
        rho2 = ctx.th1p0 ** (2 / 3) * th1u**2 / K_value
        return wppx * ell.theta(0, x, tau) ** 2 / (2 * (wpx - ctx.e3)) * rho2
    if form == "theta":
        c = ctx.theta0
        num = ell.theta(2, x, tau) * ell.theta(3, x, tau) * ell.theta(0, x, tau)
        return ctx.th1p0 ** (5 / 3) * c[0] / (c[2] * c[3]) * num * th1u**2 / (ell.theta(1, x, tau) * K_value)
    raise DomainError(f"unknown form {form!r}")


# --- pipelines ----------------------------------------------------------------


class LaxPipeline:
    """Trajectory plus auxiliary reconstruction plus pair builder.

    ``du_offset`` perturbs the velocity fed to the pair (not the trajectory);
    it exists for negative controls.
    """

    def __init__(self, kind, params, traj, seed=1.0, du_offset=0.0, rho="corrected"):
        self.kind = as_kind(kind)
        self.params = check_params(self.kind, params)
        self.traj = traj
        self.seed = seed
        self.du_offset = complex(du_offset)
        self.rho = rho
        self.aux_track = AuxTrack(self.kind, params, traj, seed) if self.kind in AUX_KINDS else None

    def state(self, t):
        s = self.traj.state(t)
        if self.du_offset:
            s = replace(s, du=s.du + self.du_offset)
        return s

    def aux(self, t):
        if self.aux_track is None:
            return None
        return self.aux_track.at(t, self.state(t))

    def frame(self, t) -> Frame:
        s = self.state(t)
        aux = self.aux_track.at(t, s) if self.aux_track is not None else None
        return make_frame(self.kind, self.params, s, aux, self.rho)

    def pair(self, x, t) -> LaxEval:
        return self.frame(t).pair(x)


# --- derivatives in x ---------------------------------------------------------


def frame_entries_dx(frame, x, h_x=1e-3):
    """x-derivatives of the six entries: analytic when available, else fourth-order differences."""
    if frame.has_dx:
        return frame.entries_dx(x)
    x = np.asarray(x, dtype=complex)
    stack = central4(lambda z: np.array(frame.entries(z)), x, h_x)
    return tuple(stack)


def _mat(e):
    a, b, c, A, B, C = (complex(v) for v in e)
    return np.array([[a, b], [c, -a]]), np.array([[A, B], [C, -A]])


def zero_curvature_matrix(pipeline, x, t, h_t, h_x=1e-3):
    fr = pipeline.frame(t)
    U, V = _mat(fr.entries(x))
    _, Vx = _mat(frame_entries_dx(fr, x, h_x))
    Up, _ = _mat(pipeline.frame(t + h_t).entries(x))
    Um, _ = _mat(pipeline.frame(t - h_t).entries(x))
    Ut = (Up - Um) / (2 * h_t)
    return Ut - Vx + U @ V - V @ U


@dataclass(frozen=True)
class ResidualReport:
    kind: str
    x: complex
    t: float
    h: float
    residual: float
    halved_residual: float

    @property
    def order_estimate(self):
        if self.halved_residual <= 0 or self.residual <= 0:
            return float("nan")
        return math.log2(self.residual / self.halved_residual)

    @property
    def ratio(self):
        return self.residual / self.halved_residual if self.halved_residual > 0 else float("inf")

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "x": [self.x.real, self.x.imag],
                "t": self.t,
                "h": self.h,
                "residual": self.residual,
                "halved_residual": self.halved_residual,
                "order_estimate": self.order_estimate,
            },
            sort_keys=True,
        )


def zero_curvature_residual(kind, traj, params, x, t, h_t=1e-4, h_x=1e-3, seed=1.0, pipeline=None):
    """Frobenius norm of ``d_t U - d_x V + [U, V]`` at ``h_t`` and ``h_t/2``."""
    pipe = pipeline or LaxPipeline(kind, params, traj, seed)
    r1 = float(np.linalg.norm(zero_curvature_matrix(pipe, x, t, h_t, h_x)))
    r2 = float(np.linalg.norm(zero_curvature_matrix(pipe, x, t, h_t / 2, h_x)))
    return ResidualReport(as_kind(kind).value, complex(x), float(t), float(h_t), r1, r2)


def gauge_transform(entries, dx_log_om, dt_log_om, om2):
    """Apply ``Psi -> diag(omega, 1/omega) Psi`` to pair entries."""
    a, b, c, A, B, C = entries
    return (a + dx_log_om, b * om2, c / om2, A + dt_log_om, B * om2, C / om2)


def bx_minus_2B(frame, x, h_x=1e-3):
    """``b_x - 2B`` for one frame."""
    d = frame_entries_dx(frame, x, h_x)
    e = frame.entries(x)
    return d[1] - 2 * e[4]
