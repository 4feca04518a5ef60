import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import KINDS, configs
from pcl import dynamics as dyn
from pcl.config import default_config
from pcl.errors import BlowUpError, ConfigError, DomainError


def _initial(cfg):
    return dyn.CalogeroState(cfg.t0, cfg.u0, cfg.du0)


def _rk4_reference(kind, params, init, t_end, n=1000):
    """Plain fixed-step RK4 on (u, du); an independent route to the final state."""

    def f(t, y):
        return np.array([y[1], dyn.rhs(kind, params, dyn.CalogeroState(t, y[0], y[1]))])

    h = (t_end - init.t) / n
    t, y = init.t, np.array([init.u, init.du])
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def test_p1_potential_closed_form():
    x = np.linspace(-1.0, 1.0, 9)
    assert np.allclose(dyn.potential("P1", default_config("P1").params, x, 0.0), -(x**3) / 2, atol=1e-15)
    v = dyn.potential("P1", default_config("P1").params, 0.3 + 0.1j, 0.7)
    assert v == pytest.approx(-((0.3 + 0.1j) ** 3) / 2 - 0.7 * (0.3 + 0.1j) / 4)


@pytest.mark.parametrize("kind", KINDS)
def test_potential_gradient_matches_differences(kind):
    cfg = default_config(kind)
    x, t, h = cfg.u0 + 0.05j, cfg.t0 + 0.1, 1e-4
    V = lambda s: dyn.potential(kind, cfg.params, s, t)  # noqa: E731
    fd = (8 * (V(x + h) - V(x - h)) - (V(x + 2 * h) - V(x - 2 * h))) / (12 * h)
    assert abs(dyn.potential_dx(kind, cfg.params, x, t) - fd) < 1e-8 * max(1.0, abs(fd))
    W = lambda s: dyn.potential(kind, cfg.params, x, s)  # noqa: E731
    ft = (8 * (W(t + h) - W(t - h)) - (W(t + 2 * h) - W(t - 2 * h))) / (12 * h)
    assert abs(dyn.potential_dt(kind, cfg.params, x, t) - ft) < 1e-8 * max(1.0, abs(ft))


@pytest.mark.parametrize("kind", KINDS)
def test_integrator_matches_fixed_step_reference(kind):
    cfg = default_config(kind)
    init = _initial(cfg)
    traj = dyn.integrate(kind, cfg.params, init, cfg.t_end, tol=1e-12)
    ref = _rk4_reference(kind, cfg.params, init, cfg.t_end)
    end = traj.state(cfg.t_end)
    assert abs(end.u - ref[0]) < 1e-9
    assert abs(end.du - ref[1]) < 1e-8


def test_p1_time_column_is_monotone():
    cfg = default_config("P1")
    traj = dyn.integrate("P1", cfg.params, _initial(cfg), cfg.t_end)
    assert traj.t[0] == cfg.t0 and traj.t[-1] == cfg.t_end
    assert np.all(np.diff(traj.t) > 0)


def test_backward_integration_is_ordered_and_consistent():
    cfg = default_config("P2")
    fwd = dyn.integrate("P2", cfg.params, _initial(cfg), cfg.t_end, tol=1e-12)
    end = fwd.state(cfg.t_end)
    back = dyn.integrate("P2", cfg.params, end, cfg.t0, tol=1e-12)
    assert np.all(np.diff(back.t) > 0)
    assert abs(back.state(cfg.t0).u - cfg.u0) < 1e-10


def test_halving_tolerance_moves_final_state_little():
    cfg = default_config("P1")
    tol = 1e-8
    a = dyn.integrate("P1", cfg.params, _initial(cfg), cfg.t_end, tol=tol).state(cfg.t_end)
    b = dyn.integrate("P1", cfg.params, _initial(cfg), cfg.t_end, tol=tol / 2).state(cfg.t_end)
    assert abs(a.u - b.u) < 10 * tol


@pytest.mark.parametrize("kind", KINDS)
def test_hamiltonian_changes_only_through_explicit_time(kind):
    cfg = default_config(kind)
    traj = dyn.integrate(kind, cfg.params, _initial(cfg), cfg.t_end, tol=1e-12)
    q = dyn.Quadrature(traj, lambda s: dyn.hamiltonian_dt(kind, cfg.params, s))
    h0 = dyn.hamiltonian(kind, cfg.params, traj.state(traj.t0))
    h1 = dyn.hamiltonian(kind, cfg.params, traj.state(traj.t1))
    assert abs(h1 - h0 - q(traj.t1)) < 1e-9


def test_hamiltonian_integral_starts_at_zero_and_is_additive():
    cfg = default_config("P4")
    traj = dyn.integrate("P4", cfg.params, _initial(cfg), cfg.t_end, tol=1e-12)
    q = dyn.hamiltonian_integral(traj)
    assert q(traj.t0) == 0
    mid = 0.5 * (traj.t0 + traj.t1)
    shifted = dyn.hamiltonian_integral(traj, t_anchor=mid)
    assert abs(q(traj.t1) - q(mid) - shifted(traj.t1)) < 1e-13


@pytest.mark.parametrize("kind", KINDS)
def test_original_form_residual(kind):
    for cfg in configs(kind):
        traj = dyn.integrate(kind, cfg.params, _initial(cfg), cfg.t_end, tol=1e-12)
        if kind.value == "P6":
            m = (traj.t >= 0.2) & (traj.t <= 0.35)
            traj = dyn.Trajectory(traj.kind, traj.params, traj.t[m], traj.u[m], traj.du[m], traj.acc[m], traj.meta)
        assert dyn.original_form_residual(kind, cfg.params, traj) < 1e-5


def test_csv_round_trip_is_exact():
    cfg = default_config("P5")
    traj = dyn.integrate("P5", cfg.params, _initial(cfg), cfg.t_end)
    text = traj.to_csv()
    assert text.splitlines()[0] == "t,re_u,im_u,re_du,im_du"
    back = dyn.Trajectory.from_csv(text, "P5", cfg.params)
    assert np.array_equal(back.t, traj.t) and np.array_equal(back.u, traj.u) and np.array_equal(back.du, traj.du)
    with pytest.raises(ConfigError):
        dyn.Trajectory.from_csv("a,b\n1,2\n", "P5", cfg.params)


def test_blow_up_keeps_partial_trajectory():
    params = default_config("P1").params
    with pytest.raises(BlowUpError) as info:
        dyn.integrate("P1", params, dyn.CalogeroState(0.0, 0.0, 0.0), 400.0)
    exc = info.value
    assert exc.partial is not None and exc.partial.t[-1] < 400.0
    assert exc.last_state.t == pytest.approx(exc.partial.t[-1])


def test_invalid_inputs():
    params = default_config("P1").params
    with pytest.raises(DomainError):
        dyn.CalogeroState(0.0, float("nan"), 0.0)
    with pytest.raises(DomainError):
        dyn.CalogeroState(1j, 0.1, 0.0)
    with pytest.raises(DomainError):
        dyn.integrate("P1", params, dyn.CalogeroState(0.0, 0.1, 0.0), 0.0)
    with pytest.raises(DomainError):
        dyn.integrate("P1", params, dyn.CalogeroState(0.0, 0.1, 0.0), 1.0, tol=1.0)
    with pytest.raises(ConfigError):
        dyn.integrate("P2", params, dyn.CalogeroState(0.0, 0.1, 0.0), 1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_dense_output_interpolates_nodes(re_u, im_u, du):
    cfg = default_config("P2")
    init = dyn.CalogeroState(0.0, complex(0.6 + re_u, im_u), du)
    traj = dyn.integrate("P2", cfg.params, init, 0.3, tol=1e-11)
    for i in range(0, traj.t.size, 5):
        s = traj.state(traj.t[i])
        assert s.u == traj.u[i] or abs(s.u - traj.u[i]) < 1e-14
