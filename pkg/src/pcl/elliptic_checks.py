"""Residuals of the theta, Weierstrass and Eisenstein identities on sample grids.

Each check compares two independent routes to the same quantity and reports
``max |lhs - rhs| / max(1, |lhs|, |rhs|)`` over the grid.  Derivatives in
``tau`` are fourth-order central differences of the library functions, so the
closed-form ``d_tau`` formulas are checked against plain evaluation.
"""

from __future__ import annotations

import numpy as np

from . import elliptic as ell
from .numdiff import central4

TAU_STEP = 2e-4
Z_STEP = 2e-4
MIN_SEPARATION = 0.08


def _scaled(lhs, rhs):
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs) / scale))


def _half_lattice_distance(z, tau):
    """Distance to the nearest half period (including the lattice itself)."""
    return 0.5 * ell.lattice_distance(2 * np.asarray(z, dtype=complex), 2 * tau)


def sample_points(tau, n=20, seed=0):
    """``(z, u, w)`` arrays of ``n`` generic points.

    All of ``z, u, w, z+u, z-u, u+w, z+u+w`` keep ``MIN_SEPARATION`` from the
    half periods.
    """
    tau = ell.as_tau(tau)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b = rng.uniform(0.05, 0.95, size=(2, 3))
        z, u, w = a + b * tau
        combos = np.array([z, u, w, z + u, z - u, u + w, z + u + w])
        if np.min(_half_lattice_distance(combos, tau)) >= MIN_SEPARATION:
            out.append((z, u, w))
    arr = np.array(out)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def direct_theta(a, z, tau, n_terms=40):
    """Unreduced theta series summed over ``|k| <= n_terms``."""
    c, d, sign = ell._CHAR[a]
    k = np.arange(-n_terms, n_terms + 1) + c
    z = np.asarray(z, dtype=complex)
    expo = 1j * np.pi * tau * k**2 + 2j * np.pi * np.multiply.outer(z + d, k)
    return sign * np.exp(expo).sum(axis=-1)


def _d_tau(f, tau):
    return central4(f, tau, TAU_STEP)


def _cyclic():
    return ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def heat_residual(tau, z):
    res = 0.0
    for a in range(4):
        lhs = 4j * np.pi * _d_tau(lambda s: ell.theta(a, z, s), tau)
        res = max(res, _scaled(lhs, ell.theta_dz(a, z, tau, 2)))
    return res


def quasi_period_residuals(tau, z):
    r1 = rt = 0.0
    for a in range(4):
        base = direct_theta(a, z, tau)
        r1 = max(r1, _scaled(direct_theta(a, z + 1, tau), ell.quasi_period_factor(a, z, tau, "1") * base))
        rt = max(rt, _scaled(ell.theta(a, z + tau, tau), ell.quasi_period_factor(a, z, tau, "tau") * ell.theta(a, z, tau)))
    return r1, rt


def phi_quasi_period_residual(tau, z, u):
    p = ell.phi(u, z, tau)
    return max(
        _scaled(ell.phi(u, z + 1, tau), p),
        _scaled(ell.phi(u, z + tau, tau), np.exp(-2j * np.pi * u) * p),
    )


def weierstrass_ode_residual(tau, z):
    ec = ell.e_values(tau)
    w = ell.wp(z, tau)
    return _scaled(ell.wp_prime(z, tau) ** 2, 4 * (w - ec.e1) * (w - ec.e2) * (w - ec.e3))


def e_value_residuals(tau):
    """Sum rule, the two difference representations and the log-derivative form."""
    ec = ell.e_values(tau)
    e = {1: ec.e1, 2: ec.e2, 3: ec.e3}
    out = {"e_sum": abs(ec.e1 + ec.e2 + ec.e3) / max(1.0, abs(ec.e1))}
    diffs = ell.e_differences(tau)
    r = 0.0
    for (j, k), (theta_form, log_form) in diffs.items():
        r = max(r, _scaled(theta_form, e[j] - e[k]), _scaled(log_form, e[j] - e[k]))
    out["e_differences"] = r
    out["e_log_derivatives"] = _scaled(np.array(ell.e_from_log_derivatives(tau)), np.array([ec.e1, ec.e2, ec.e3]))

    def ev(s):
        c = ell.e_values(s)
        return np.array([c.e1, c.e2, c.e3])

    de = _d_tau(ev, tau)
    dd = r9a = 0.0
    for j, k, l in _cyclic():
        dlog = (de[j - 1] - de[k - 1]) / (e[j] - e[k])
        dd = max(dd, _scaled(1j * np.pi * dlog, -e[l] - 2 * ec.eta))
        dlog_l = (de[l - 1] - de[k - 1]) / (e[l] - e[k])
        r9a = max(r9a, _scaled(1j * np.pi * (dlog - dlog_l), e[j] - e[l]))
    out["e_difference_tau"] = dd
    out["e_ratio_tau"] = r9a
    eta_fd = _d_tau(lambda s: ell.eta_const(s), tau)
    out["eta_tau"] = _scaled(eta_fd, ell.d_tau_eta(tau))
    return out


def phi_identity_residuals(tau, z, u, w):
    E1 = ell.eisenstein_E1
    out = {
        "phi_product": _scaled(ell.phi(u, z, tau) * ell.phi(-u, z, tau), ell.wp(z, tau) - ell.wp(u, tau)),
        "phi_addition": _scaled(
            ell.phi(u, z, tau) * ell.phi(w, z, tau),
            ell.phi(u + w, z, tau) * (E1(z, tau) + E1(u, tau) + E1(w, tau) - E1(z + u + w, tau)),
        ),
        "eisenstein_square": _scaled(
            (E1(z + u, tau) - E1(u, tau) - E1(z, tau)) ** 2,
            ell.wp(z, tau) + ell.wp(u, tau) + ell.wp(z + u, tau),
        ),
    }
    ec = ell.e_values(tau)
    e = {1: ec.e1, 2: ec.e2, 3: ec.e3}
    hp = ell.half_periods(tau)
    ph = {j: ell.phi_j(j, z, tau) for j in (1, 2, 3)}
    sq = prod = der = 0.0
    for j, k, l in _cyclic():
        sq = max(sq, _scaled(ph[j] ** 2, ell.wp(z, tau) - e[j]), _scaled(ph[j] ** 2 - ph[k] ** 2, e[k] - e[j]))
        om = hp[l]
        prod = max(prod, _scaled(ph[j] * ph[k], ph[l] * (E1(z, tau) + E1(om, tau) - E1(z + om, tau))))
        fd = central4(lambda s: ell.phi_j(j, s, tau), z, Z_STEP)
        closed = ph[j] * (E1(z + hp[j], tau) - E1(hp[j], tau) - E1(z, tau))
        der = max(der, _scaled(fd, closed), _scaled(closed, -ph[k] * ph[l]))
    out["phi_j_square"] = sq
    out["phi_j_product"] = prod
    out["phi_j_derivative"] = der
    return out


def tau_derivative_residuals(tau, z, u):
    return {
        "tau_phi": _scaled(_d_tau(lambda s: ell.phi(z, u, s), tau), ell.d_tau_phi(z, u, tau)),
        "tau_E1": _scaled(_d_tau(lambda s: ell.eisenstein_E1(z, s), tau), ell.d_tau_E1(z, tau)),
        "tau_E2": _scaled(_d_tau(lambda s: ell.eisenstein_E2(z, s), tau), ell.d_tau_E2(z, tau)),
        "tau_X": _scaled(_d_tau(lambda s: ell.x_map(z, s), tau), ell.d_tau_x_map(z, tau)),
    }


def elliptic_identity_residuals(tau, n=20, seed=0) -> dict:
    """All identity residuals at one ``tau`` on an ``n``-point grid."""
    tau = ell.as_tau(tau)
    z, u, w = sample_points(tau, n, seed)
    q1, qt = quasi_period_residuals(tau, z)
    out = {
        "heat": heat_residual(tau, z),
        "quasi_period_unit": q1,
        "quasi_period_tau": qt,
        "phi_quasi_period": phi_quasi_period_residual(tau, z, u),
        "weierstrass_ode": weierstrass_ode_residual(tau, z),
    }
    out.update(e_value_residuals(tau))
    out.update(phi_identity_residuals(tau, z, u, w))
    out.update(tau_derivative_residuals(tau, z, u))
    return out
