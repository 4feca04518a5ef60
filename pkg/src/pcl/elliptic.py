"""Jacobi theta functions, Weierstrass functions and their relatives.

Conventions: periods ``1`` and ``tau`` (``Im tau > 0``), half-periods
``omega_0 = 0``, ``omega_1 = 1/2``, ``omega_2 = (1 + tau)/2``,
``omega_3 = tau/2``.  The theta index is understood modulo 4, so
``theta_0`` (often written ``theta_4``) is the one with zeros at
``omega_3``.  The time variable of the Painleve VI problem is
``t = tau / (2 pi i)``; in that variable every theta function solves the heat
equation ``2 d_t theta = d_z^2 theta``.

All functions accept a scalar or an array ``z`` and either a complex ``tau``
or a :class:`ModularParam`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, PoleError

KAPPA = 1.0 / (2j * np.pi)
POLE_GUARD = 1e-8
MAX_TERMS = 200
_REL_CUTOFF = 1e-17

# (c, d, sign): theta_a(z) = sign * sum_k exp(i pi tau (k+c)^2 + 2 pi i (z+d)(k+c))
_CHAR = {
    0: (0.0, 0.5, 1.0),
    1: (0.5, 0.5, -1.0),
    2: (0.5, 0.0, 1.0),
    3: (0.0, 0.0, 1.0),
}
# theta_a(z + 1) = _UNIT_SHIFT[a] * theta_a(z)
_UNIT_SHIFT = {0: 1.0, 1: -1.0, 2: -1.0, 3: 1.0}
# d omega_k / d tau
_DTAU_OMEGA = (0.0, 0.0, 0.5, 0.5)


@dataclass(frozen=True)
class ModularParam:
    """The modular parameter ``tau`` (upper half plane)."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not (math.isfinite(tau.real) and math.isfinite(tau.imag)):
            raise DomainError(f"tau must be finite, got {tau!r}")
        if not tau.imag > 0:
            raise DomainError(f"Im(tau) must be positive, got {tau!r}")
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_time(cls, t) -> "ModularParam":
        return cls(2j * np.pi * complex(t))

    @property
    def t(self) -> complex:
        return self.tau / (2j * np.pi)

    @property
    def nome(self) -> complex:
        return complex(np.exp(1j * np.pi * self.tau))


@dataclass(frozen=True)
class HalfPeriods:
    omega0: complex
    omega1: complex
    omega2: complex
    omega3: complex

    def __getitem__(self, k):
        return (self.omega0, self.omega1, self.omega2, self.omega3)[k]


@dataclass(frozen=True)
class EllipticConstants:
    """``eta`` and the half-period values ``e_k = wp(omega_k)``."""

    eta: complex
    e1: complex
    e2: complex
    e3: complex

    def __getitem__(self, k):
        return (None, self.e1, self.e2, self.e3)[k]


def as_tau(tau) -> complex:
    if isinstance(tau, ModularParam):
        return tau.tau
    return ModularParam(tau).tau


def half_periods(tau) -> HalfPeriods:
    tau = as_tau(tau)
    return HalfPeriods(0j, 0.5 + 0j, 0.5 * (1 + tau), 0.5 * tau)


def d_tau_omega(k: int) -> float:
    return _DTAU_OMEGA[k]


def _check_index(a) -> int:
    if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
        raise DomainError(f"theta index must be an integer, got {a!r}")
    if not 0 <= a <= 3:
        raise DomainError(f"theta index must be in 0..3, got {a}")
    return int(a)


def _as_z(z):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite argument")
    return arr


def _window(tau_im, center_abs, order):
    """Half-width of the summation window around the dominant term."""
    j = 1
    while j < MAX_TERMS:
        decay = np.pi * tau_im * j * j
        growth = order * math.log((center_abs + j + 1.0) / (center_abs + 1.0)) if order else 0.0
        if decay - growth > -math.log(_REL_CUTOFF):
            break
        j += 1
    return j


def _theta_series(a, z, tau, orders):
    """Sum the theta series for theta_a and the requested z-derivatives.

    ``z`` must already be reduced to ``-1/2 <= Re z < 1/2``.
    """
    c, d, sign = _CHAR[a]
    tau_im = tau.imag
    flat = z.reshape(-1)
    center = -flat.imag / tau_im - c
    lo = int(np.floor(center.min())) if flat.size else 0
    hi = int(np.ceil(center.max())) if flat.size else 0
    width = _window(tau_im, max(abs(lo), abs(hi)), max(orders))
    k = np.arange(lo - width, hi + width + 1, dtype=float) + c
    expo = 1j * np.pi * tau * k**2 + 2j * np.pi * np.outer(flat + d, k)
    base = np.exp(expo)
    out = []
    for n in orders:
        factor = (2j * np.pi * k) ** n if n else 1.0
        out.append((sign * (base * factor).sum(axis=1)).reshape(z.shape))
    return out


def _theta_multi(a, z, tau, orders):
    a = _check_index(a)
    tau = as_tau(tau)
    z = _as_z(z)
    shift = np.floor(z.real + 0.5)
    z0 = z - shift
    vals = _theta_series(a, z0, tau, orders)
    if _UNIT_SHIFT[a] < 0:
        parity = np.where(np.mod(shift, 2) == 0, 1.0, -1.0)
        vals = [v * parity for v in vals]
    return [v[()] if v.ndim == 0 else v for v in vals]


def theta(a, z, tau):
    """Jacobi theta function ``theta_a(z | tau)``."""
    return _theta_multi(a, z, tau, (0,))[0]


def theta_dz(a, z, tau, order=1):
    """``order``-th z-derivative of ``theta_a`` (order 1, 2 or 3)."""
    if order not in (1, 2, 3):
        raise DomainError(f"derivative order must be 1, 2 or 3, got {order!r}")
    return _theta_multi(a, z, tau, (order,))[0]


def theta_derivs(a, z, tau, max_order=2):
    """Values ``[theta_a, theta_a', ..., theta_a^(max_order)]`` in one pass."""
    if max_order not in (0, 1, 2, 3):
        raise DomainError(f"max_order must be in 0..3, got {max_order!r}")
    return _theta_multi(a, z, tau, tuple(range(max_order + 1)))


def theta_dt(a, z, tau):
    """Explicit derivative with respect to ``t = tau/(2 pi i)`` (heat equation)."""
    return 0.5 * theta_dz(a, z, tau, 2)


def theta_constant(a, tau):
    return complex(theta(a, 0.0, tau))


def theta1_prime0(tau) -> complex:
    return complex(theta_dz(1, 0.0, tau, 1))


def eta_const(tau) -> complex:
    d1, d3 = _theta_multi(1, 0.0, tau, (1, 3))
    return complex(-d3 / (6.0 * d1))


def lattice_distance(z, tau):
    """Distance from ``z`` to the nearest point of ``Z + tau Z``."""
    tau = as_tau(tau)
    z = _as_z(z)
    n0 = np.round(z.imag / tau.imag)
    best = np.full(z.shape, np.inf)
    for dn in (-1, 0, 1):
        n = n0 + dn
        w = z - n * tau
        m0 = np.round(w.real)
        for dm in (-1, 0, 1):
            best = np.minimum(best, np.abs(w - (m0 + dm)))
    return best[()] if best.ndim == 0 else best


def _guard(z, tau, what):
    if np.any(lattice_distance(z, tau) < POLE_GUARD):
        raise PoleError(f"{what}: argument within {POLE_GUARD:g} of a lattice point")


def eisenstein_E1(z, tau):
    """``E_1(z) = d/dz log theta_1(z)``."""
    _guard(z, tau, "E1")
    t0, t1 = _theta_multi(1, z, tau, (0, 1))
    return t1 / t0


def eisenstein_E2(z, tau):
    """``E_2(z) = -d^2/dz^2 log theta_1(z) = wp(z) + 2 eta``."""
    _guard(z, tau, "E2")
    t0, t1, t2 = _theta_multi(1, z, tau, (0, 1, 2))
    e1 = t1 / t0
    return e1 * e1 - t2 / t0


def wp(z, tau):
    """Weierstrass ``wp(z | 1, tau)``."""
    return eisenstein_E2(z, tau) - 2.0 * eta_const(tau)


def _theta_consts(tau):
    return {a: theta_constant(a, tau) for a in range(4)}


def wp_prime(z, tau):
    """``wp'(z)`` from the theta quotient."""
    _guard(z, tau, "wp'")
    c = _theta_consts(tau)
    pref = -2.0 * theta1_prime0(tau) ** 3 / (c[2] * c[3] * c[0])
    return pref * theta(2, z, tau) * theta(3, z, tau) * theta(0, z, tau) / theta(1, z, tau) ** 3


def g2_invariant(tau) -> complex:
    ec = e_values(tau)
    return 2.0 * (ec.e1**2 + ec.e2**2 + ec.e3**2)


def wp_second(z, tau):
    """``wp''(z) = 6 wp^2 - g2/2``."""
    return 6.0 * wp(z, tau) ** 2 - 0.5 * g2_invariant(tau)


def e_values(tau) -> EllipticConstants:
    hp = half_periods(tau)
    return EllipticConstants(
        eta=eta_const(tau),
        e1=complex(wp(hp.omega1, tau)),
        e2=complex(wp(hp.omega2, tau)),
        e3=complex(wp(hp.omega3, tau)),
    )


def e_differences(tau):
    """``e_j - e_k`` in the two theta-constant representations.

    Returns ``{(j, k): (pi^2 theta^4 form, log-derivative form)}`` for the
    pairs (1,2), (1,3), (2,3).  The second form uses the heat equation:
    ``4 pi i d_tau log theta_a(0) = theta_a''(0)/theta_a(0)``.
    """
    tau = as_tau(tau)
    val = {}
    second = {}
    for a in (0, 2, 3):
        v0, v2 = _theta_multi(a, 0.0, tau, (0, 2))
        val[a] = complex(v0)
        second[a] = complex(v2 / v0)
    pi2 = np.pi**2
    return {
        (1, 2): (pi2 * val[0] ** 4, second[3] - second[2]),
        (1, 3): (pi2 * val[3] ** 4, second[0] - second[2]),
        (2, 3): (pi2 * val[2] ** 4, second[0] - second[3]),
    }


def e_from_log_derivatives(tau):
    """``e_k = 4 pi i d_tau (log theta_1'(0)/3 - log theta_{k+1}(0))``."""
    tau = as_tau(tau)
    d1, d3 = _theta_multi(1, 0.0, tau, (1, 3))
    base = complex(d3 / d1) / 3.0
    out = []
    for k in (1, 2, 3):
        a = (k + 1) % 4
        v0, v2 = _theta_multi(a, 0.0, tau, (0, 2))
        out.append(base - complex(v2 / v0))
    return tuple(out)


def phi(u, z, tau):
    """``Phi(u, z) = theta_1(u+z) theta_1'(0) / (theta_1(u) theta_1(z))``."""
    u = _as_z(u)
    z = _as_z(z)
    _guard(u, tau, "Phi")
    _guard(z, tau, "Phi")
    return theta(1, u + z, tau) * theta1_prime0(tau) / (theta(1, u, tau) * theta(1, z, tau))


def phi_j(j, z, tau):
    """``phi_j(z) = exp(2 pi i z d_tau omega_j) Phi(z, omega_j)``, j = 1, 2, 3."""
    if j not in (1, 2, 3):
        raise DomainError(f"phi_j index must be 1, 2 or 3, got {j!r}")
    tau = as_tau(tau)
    om = half_periods(tau)[j]
    z = _as_z(z)
    return np.exp(2j * np.pi * z * _DTAU_OMEGA[j]) * phi(z, om, tau)


def x_map(z, tau):
    """``X(z) = (wp(z) - e_1)/(e_2 - e_1)``."""
    ec = e_values(tau)
    return (wp(z, tau) - ec.e1) / (ec.e2 - ec.e1)


def cross_ratio_T(tau) -> complex:
    """``T = (e_3 - e_1)/(e_2 - e_1) = (theta_3(0)/theta_0(0))^4``."""
    ec = e_values(tau)
    return (ec.e3 - ec.e1) / (ec.e2 - ec.e1)


# --- analytic tau-derivatives -------------------------------------------------


def d_tau_phi(z, u, tau):
    """``d_tau Phi(z, u) = kappa d_z d_u Phi(z, u)`` evaluated in closed form."""
    z = _as_z(z)
    u = _as_z(u)
    e1zu = eisenstein_E1(z + u, tau)
    cross = (e1zu - eisenstein_E1(u, tau)) * (e1zu - eisenstein_E1(z, tau)) - eisenstein_E2(z + u, tau)
    return KAPPA * phi(z, u, tau) * cross


def d_tau_E1(z, tau):
    """``d_tau E_1 = (kappa/2) d_z (E_1^2 - wp)``."""
    return 0.5 * KAPPA * (-2.0 * eisenstein_E1(z, tau) * eisenstein_E2(z, tau) - wp_prime(z, tau))


def d_tau_E2(z, tau):
    """``d_tau E_2 = kappa E_1 E_2' - kappa E_2^2 + (kappa/2) wp''``."""
    e2 = eisenstein_E2(z, tau)
    return KAPPA * (eisenstein_E1(z, tau) * wp_prime(z, tau) - e2 * e2 + 0.5 * wp_second(z, tau))


def d_tau_x_map(z, tau):
    """``d_tau X = kappa X'(z) d_z log theta_0(z)``."""
    ec = e_values(tau)
    t0, t1 = _theta_multi(0, z, tau, (0, 1))
    return KAPPA * wp_prime(z, tau) / (ec.e2 - ec.e1) * t1 / t0


def d_t_cross_ratio_T(tau) -> complex:
    """``dT/dt = 2 (e_2 - e_1) T (T - 1)`` with ``t = tau/(2 pi i)``."""
    ec = e_values(tau)
    T = (ec.e3 - ec.e1) / (ec.e2 - ec.e1)
    return 2.0 * (ec.e2 - ec.e1) * T * (T - 1.0)


def quasi_period_factor(a, z, tau, shift):
    """Multiplier ``m`` with ``theta_a(z + s) = m theta_a(z)`` for ``s = 1`` or ``s = tau``.

    The factors are ``exp(pi i (1 + 2 d_tau omega_{a-1}))`` for the unit shift and
    ``exp(pi i (a + 2 d_tau omega_{a-1})) exp(-pi i tau - 2 pi i z)`` for the
    ``tau`` shift.
    """
    a = _check_index(a)
    tau = as_tau(tau)
    z = _as_z(z)
    dw = _DTAU_OMEGA[(a - 1) % 4]
    if shift == "1":
        return np.exp(1j * np.pi * (1 + 2 * dw)) * np.ones_like(z)
    if shift == "tau":
        return np.exp(1j * np.pi * (a + 2 * dw)) * np.exp(-1j * np.pi * tau - 2j * np.pi * z)
    raise DomainError(f"shift must be '1' or 'tau', got {shift!r}")


def d_tau_eta(tau) -> complex:
    """``d_tau eta``, from ``sum_k e_k = 0`` and the formula for ``d_tau E_2``."""
    ctx = elliptic_context(tau)
    hp = half_periods(tau)
    total = 0j
    for k, e in ((1, ctx.e1), (2, ctx.e2), (3, ctx.e3)):
        e2k = e + 2 * ctx.eta
        total += KAPPA * (-e2k * e2k + 0.5 * complex(ctx.wp_second(hp[k])))
    return total / 6.0


@dataclass(frozen=True)
class EllipticContext:
    """Constants of a fixed ``tau`` bundled for repeated evaluation."""

    tau: complex
    eta: complex
    e1: complex
    e2: complex
    e3: complex
    theta0: tuple
    th1p0: complex

    @property
    def g2(self) -> complex:
        return 2.0 * (self.e1**2 + self.e2**2 + self.e3**2)

    def wp(self, z):
        _guard(z, self.tau, "wp")
        t0, t1, t2 = _theta_multi(1, z, self.tau, (0, 1, 2))
        e1 = t1 / t0
        return e1 * e1 - t2 / t0 - 2.0 * self.eta

    def wp_prime(self, z):
        _guard(z, self.tau, "wp'")
        c = self.theta0
        pref = -2.0 * self.th1p0**3 / (c[2] * c[3] * c[0])
        num = theta(2, z, self.tau) * theta(3, z, self.tau) * theta(0, z, self.tau)
        return pref * num / theta(1, z, self.tau) ** 3

    def wp_second(self, z):
        return 6.0 * self.wp(z) ** 2 - 0.5 * self.g2


def elliptic_context(tau) -> EllipticContext:
    return _elliptic_context(as_tau(tau))


@lru_cache(maxsize=512)
def _elliptic_context(tau) -> EllipticContext:
    ec = e_values(tau)
    return EllipticContext(
        tau=tau, eta=ec.eta, e1=ec.e1, e2=ec.e2, e3=ec.e3,
        theta0=tuple(theta_constant(a, tau) for a in range(4)),
        th1p0=theta1_prime0(tau),
    )


def wp_pair(z, tau):
    """``(wp(z), wp'(z))`` from the log-derivatives of ``theta_1``.

    One series pass; independent of the theta-quotient route used by
    :func:`wp_prime`.
    """
    _guard(z, tau, "wp")
    t0, t1, t2, t3 = _theta_multi(1, z, tau, (0, 1, 2, 3))
    e1 = t1 / t0
    r2, r3 = t2 / t0, t3 / t0
    e2 = e1 * e1 - r2
    # E_2' = 2 E_1 E_1' - (r3 - r2 E_1), E_1' = r2 - E_1^2
    de2 = 2 * e1 * (r2 - e1 * e1) - (r3 - r2 * e1)
    return e2 - 2.0 * eta_const(tau), de2
