import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import KINDS, configs
from pcl import correspondence as corr
from pcl import dynamics as dyn
from pcl import lax
from pcl.config import default_config
from pcl.errors import AmbiguityError
from pcl.params import P4Params, P5Params, P6Params

SHIFTED_KINDS = ("P4", "P5", "P6")


def _pipeline(cfg):
    traj = dyn.integrate(cfg.kind, cfg.params, dyn.CalogeroState(cfg.t0, cfg.u0, cfg.du0), cfg.t_end, tol=1e-12)
    return lax.LaxPipeline(cfg.kind, cfg.params, traj, cfg.seeds.for_kind(cfg.kind))


def _mid(pipe):
    return 0.5 * (pipe.traj.t0 + pipe.traj.t1)


def test_shift_table_values():
    p4 = corr.shift_params("P4", P4Params(0.5, 0.3)).params
    assert (p4.alpha, p4.beta) == (0.5, 0.8)
    p5 = corr.shift_params("P5", P5Params(1.0, -0.5, 0.2, -0.5)).params
    assert (p5.alpha, p5.beta, p5.gamma, p5.delta) == (0.875, -0.375, 0.2, -0.5)
    p6 = corr.shift_params("P6", P6Params(1.0, -0.5, 0.2, 0.3)).params
    assert (p6.alpha, p6.beta, p6.gamma, p6.delta) == pytest.approx((0.875, -0.375, 0.075, 0.425), abs=1e-15)
    assert p6.xis is None
    p2 = default_config("P2").params
    assert corr.shift_params("P2", p2).params == p2


@pytest.mark.parametrize("kind", KINDS)
def test_separation_holds_with_shift(kind):
    for cfg in configs(kind):
        pipe = _pipeline(cfg)
        rep = corr.separation_check(kind, cfg.params, pipe.traj, _mid(pipe), pipeline=pipe)
        assert rep.max_dev < 1e-6
        assert abs(rep.extracted_hamiltonian - rep.hamiltonian) < 1e-8
        if kind.value in SHIFTED_KINDS:
            raw = corr.separation_check(kind, cfg.params, pipe.traj, _mid(pipe), apply_shift=False, pipeline=pipe)
            assert raw.max_dev > 1e-3


def test_separation_report_json_fields():
    cfg = default_config("P4")
    pipe = _pipeline(cfg)
    data = json.loads(corr.separation_check("P4", cfg.params, pipe.traj, 0.2, pipeline=pipe).to_json())
    assert set(data) == {"kind", "t", "params", "shifted_params", "max_dev", "offset", "grid_size"}
    assert data["grid_size"] == 50


@pytest.mark.parametrize("kind", ["P2", "P5"])
def test_potential_does_not_depend_on_the_trajectory(kind):
    cfg = default_config(kind)
    pipe = _pipeline(cfg)
    t = _mid(pipe)
    s = pipe.traj.state(t)
    other = dyn.integrate(kind, cfg.params, dyn.CalogeroState(t, s.u + 0.05 + 0.03j, s.du - 0.1), t + 0.01, tol=1e-12)
    pipe_b = lax.LaxPipeline(kind, cfg.params, other, pipe.seed)
    grid = corr.safe_segment(kind, t, s.u, n=16)
    assert corr.separation_u_independence(pipe, pipe_b, t, grid) < 1e-6


@pytest.mark.parametrize("kind", KINDS)
def test_stationary_reduction(kind):
    pipe = _pipeline(default_config(kind))
    t = _mid(pipe)
    x = 0.2 + 0.25j if kind.value == "P6" else 0.47 + 0.23j
    a = corr.stationary_reduction(pipe, x, t, h_t=1e-3)
    b = corr.stationary_reduction(pipe, x, t, h_t=5e-4)
    assert a.relation_residual < 1e-6
    assert a.check_identity_residual < 1e-6
    assert 3.5 <= a.fg_residual / b.fg_residual <= 4.5


@pytest.mark.parametrize("kind", KINDS)
def test_locate_u_from_b(kind):
    pipe = _pipeline(default_config(kind))
    t = _mid(pipe)
    u = pipe.traj.state(t).u
    found = corr.locate_u_from_b(pipe.frame(t), u + 0.01 - 0.005j, 0.04)
    assert abs(found - u) < 1e-10


def test_locate_u_is_stable_under_diagonal_gauge():
    cfg = default_config("P6")
    pipe = _pipeline(cfg)
    t = _mid(pipe)
    fr = pipe.frame(t)
    u = fr.state.u

    class PreGauge:
        has_dx = False

        def entries(self, z):
            e, _ = fr.pregauge(z)
            return e

    a = corr.locate_u_from_b(fr, u + 0.01, 0.04)
    b = corr.locate_u_from_b(PreGauge(), u + 0.01, 0.04)
    assert abs(a - b) < 1e-10


def test_locate_u_needs_exactly_one_zero():
    pipe = _pipeline(default_config("P1"))
    fr = pipe.frame(0.2)
    with pytest.raises(AmbiguityError):
        corr.locate_u_from_b(fr, fr.state.u + 1.0, 0.2)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.3), st.integers(5, 80))
def test_safe_segment_keeps_margin(t, n):
    u = 0.5 + 0.15j
    x = corr.safe_segment("P5", t, u, n=n)
    assert x.size == n
    assert np.all(np.minimum(np.abs(x - u), np.abs(x + u)) >= corr.GRID_MARGIN)
    assert np.all(np.asarray(dyn.singular_distance("P5", x, t)) >= corr.GRID_MARGIN)


def test_p6_plain_rho_leaves_a_constant_offset():
    """Without the theta_0(0)^-6 factor the potential is off by exactly 3 d_t log theta_0(0)."""
    from pcl import elliptic as ell

    cfg = default_config("P6")
    pipe = _pipeline(cfg)
    plain = lax.LaxPipeline("P6", cfg.params, pipe.traj, pipe.seed, rho="plain")
    t = 0.27
    good = corr.separation_check("P6", cfg.params, pipe.traj, t, pipeline=pipe)
    off = corr.separation_check("P6", cfg.params, pipe.traj, t, pipeline=plain)
    diff = off.deviation - good.deviation
    t00, _, t02 = ell.theta_derivs(0, 0.0, dyn._tau(t), 2)
    expected = 3 * 0.5 * t02 / t00  # d_t theta = theta'' / 2
    assert good.max_dev < 1e-6
    assert np.max(np.abs(diff - expected)) < 1e-9
    assert abs(expected) > 0.1
