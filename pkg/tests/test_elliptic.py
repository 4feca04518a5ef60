import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcl import elliptic as ell
from pcl.elliptic_checks import direct_theta, elliptic_identity_residuals
from pcl.errors import DomainError, PoleError
from pcl.numdiff import central4

TAUS = (1j, 0.3 + 0.8j)
# theta index of this package -> mpmath jtheta index (argument pi z, nome e^{i pi tau})
MP_INDEX = {0: 4, 1: 1, 2: 2, 3: 3}


def mp_theta(a, z, tau):
    q = mpmath.exp(1j * mpmath.pi * tau)
    return complex(mpmath.jtheta(MP_INDEX[a], mpmath.pi * z, q))


def mp_wp(z, tau, rows=30):
    """Lattice sum with each row summed in closed form: sum_m (z + m)^-2 = pi^2 / sin^2(pi z)."""
    pi2 = mpmath.pi**2
    total = pi2 / mpmath.sin(mpmath.pi * z) ** 2 - pi2 / 3
    for n in range(1, rows + 1):
        for s in (n, -n):
            total += pi2 / mpmath.sin(mpmath.pi * (z + s * tau)) ** 2 - pi2 / mpmath.sin(mpmath.pi * s * tau) ** 2
    return complex(total)


def test_theta3_at_i_matches_closed_form():
    # theta_3(0 | i) = pi^(1/4) / Gamma(3/4)
    ref = float(mpmath.pi**0.25 / mpmath.gamma(0.75))
    assert abs(ref - 1.0864348112133080) < 1e-15
    assert abs(ell.theta(3, 0.0, 1j) - ref) < 1e-14


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("a", range(4))
def test_theta_matches_mpmath(a, tau):
    for z in (0.13 + 0.07j, -0.41 + 0.3j, 0.77 - 0.2j, 2.3 + 1.1j):
        ref = mp_theta(a, z, tau)
        assert abs(ell.theta(a, z, tau) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("tau", TAUS)
def test_wp_matches_lattice_sum(tau):
    for z in (0.21 + 0.13j, 0.4 + 0.35j, -0.3 + 0.1j):
        ref = mp_wp(z, tau)
        assert abs(ell.wp(z, tau) - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("tau", TAUS)
def test_theta_dz_matches_differences(tau):
    z = 0.23 + 0.11j
    for a in range(4):
        fd = central4(lambda s: ell.theta(a, s, tau), z, 1e-3)
        assert abs(ell.theta_dz(a, z, tau) - fd) < 1e-9


@pytest.mark.parametrize("tau", TAUS)
def test_identity_suite_below_threshold(tau):
    res = elliptic_identity_residuals(tau)
    assert len(res) >= 20
    bad = {k: v for k, v in res.items() if not v < 1e-8}
    assert not bad


def test_e_values_sum_to_zero():
    ec = ell.e_values(0.3 + 0.8j)
    assert abs(ec.e1 + ec.e2 + ec.e3) < 1e-12


def test_array_input_matches_scalar():
    z = np.array([0.1 + 0.2j, 0.35 - 0.05j, 0.6 + 0.4j])
    vals = ell.wp(z, 1j)
    assert vals.shape == z.shape
    for zi, v in zip(z, vals):
        assert v == pytest.approx(ell.wp(zi, 1j), rel=1e-14)


@pytest.mark.parametrize("tau", [0.0, -1j, 0.5 + 0j, complex("nan")])
def test_bad_tau_raises(tau):
    with pytest.raises(DomainError):
        ell.theta(3, 0.1, tau)


def test_wp_at_lattice_point_raises():
    with pytest.raises(PoleError):
        ell.wp(1 + 1j, 1j)


def test_modular_param_time_round_trip():
    mp = ell.ModularParam.from_time(0.3 - 0.1j)
    assert mp.t == pytest.approx(0.3 - 0.1j, abs=1e-15)


coords = st.floats(-2.0, 2.0, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(coords, coords, st.integers(0, 3))
def test_theta_unit_shift_property(x, y, a):
    z = complex(x, y / 2)
    tau = 0.3 + 0.8j
    lhs = ell.theta(a, z + 1, tau)
    rhs = ell.quasi_period_factor(a, z, tau, "1") * ell.theta(a, z, tau)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 3))
def test_reduced_series_matches_direct_series(x, y, a):
    tau = 1j
    z = x + y * tau
    ref = direct_theta(a, z, tau)
    assert abs(ell.theta(a, z, tau) - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.1, 0.9))
def test_wp_is_even_and_periodic(x, y):
    tau = 0.3 + 0.8j
    z = x + y * tau
    w = ell.wp(z, tau)
    assert abs(ell.wp(-z, tau) - w) <= 1e-10 * max(1.0, abs(w))
    assert abs(ell.wp(z + tau, tau) - w) <= 1e-10 * max(1.0, abs(w))
