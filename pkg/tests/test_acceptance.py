"""Acceptance criteria; each test records one PASS/FAIL line in the terminal summary.

Run on its own with ``python3 -m pytest tests/test_acceptance.py -v -s``.
"""

import json
import time
from functools import lru_cache

import numpy as np
import pytest

from cases import KINDS, configs
from pcl import correspondence as corr
from pcl import dynamics as dyn
from pcl import lax
from pcl.certify import Context, suite_correspondence, suite_lax, suite_transport
from pcl.cli import main
from pcl.config import default_config
from pcl.elliptic_checks import elliptic_identity_residuals
from pcl.params import P3Params, P4Params, P5Params, P6Params, PainleveKind, make_params

K = PainleveKind
AUX_KINDS = (K.P3, K.P5, K.P6)


@lru_cache(maxsize=None)
def _suite(kind, index, name):
    """Items and wall time of one suite for configuration ``index`` of ``kind``."""
    ctx = Context(configs(kind)[index])
    runner = {"lax": suite_lax, "correspondence": suite_correspondence, "transport": suite_transport}[name]
    start = time.perf_counter()
    ctx.traj  # the trajectory is shared by the suites of one context
    items = runner(ctx)
    return {it.name: it for it in items}, time.perf_counter() - start


def _collect(name, wanted):
    """``{item name: [items over kinds and configs]}`` plus total seconds."""
    out = {w: [] for w in wanted}
    seconds = 0.0
    for kind in KINDS:
        for index in range(2):
            items, sec = _suite(kind, index, name)
            seconds += sec
            for w in wanted:
                if w in items:
                    out[w].append((kind.value, index, items[w]))
    return out, seconds


def _worst(entries, largest=True):
    vals = [it.residual for _, _, it in entries]
    return max(vals) if largest else min(vals)


def _all_pass(entries):
    return all(it.passed for _, _, it in entries)


def _failures(*groups):
    return [f"{k}#{i}:{it.name}={it.residual:.2e}" for g in groups for k, i, it in g if not it.passed]


def test_criterion_1_elliptic_identities(acceptance_line):
    start = time.perf_counter()
    res = {tau: elliptic_identity_residuals(tau, n=20) for tau in (1j, 0.3 + 0.8j)}
    seconds = time.perf_counter() - start
    worst = max(max(r.values()) for r in res.values())
    n = sum(len(r) for r in res.values())
    ok = worst < 1e-8 and seconds < 5
    acceptance_line(1, ok, f"{n} identity residuals, worst {worst:.2e} < 1e-8, {seconds:.1f} s < 5 s")
    assert ok


def test_criterion_2_zero_curvature(acceptance_line):
    names = (
        "zero_curvature_relative_over_h2",
        "zero_curvature_ratio_min",
        "zero_curvature_ratio_max",
        "negative_control_plateau",
        "negative_control_not_converging",
    )
    got, seconds = _collect("lax", names)
    ok = all(_all_pass(got[n]) for n in names) and seconds < 60
    ratios = (_worst(got["zero_curvature_ratio_min"], False), _worst(got["zero_curvature_ratio_max"]))
    acceptance_line(
        2,
        ok,
        f"7 kinds x 2 configs x 10 points; ratio in [{ratios[0]:.3f}, {ratios[1]:.3f}] within 4+-0.5; "
        f"max |Z|/((1+|U||V|) h^2) = {_worst(got[names[0]]):.1f} < 1e3; "
        f"negative plateau >= {_worst(got['negative_control_plateau'], False):.1e}; {seconds:.1f} s < 60 s",
    )
    assert ok, _failures(*got.values())


def test_criterion_3_gauge_condition(acceptance_line):
    got, _ = _collect("lax", ("bx_minus_2B",))
    entries = got["bx_minus_2B"]
    p15 = max(it.residual for k, _, it in entries if k != "P6")
    p6 = max(it.residual for k, _, it in entries if k == "P6")
    ok = p15 <= 1e-14 and p6 <= 1e-8
    acceptance_line(3, ok, f"b_x - 2B: P1-P5 {p15:.1e} <= 1e-14, P6 {p6:.1e} <= 1e-8")
    assert ok


def _random_params(kind, rng):
    d = lambda s=0.1: complex(rng.uniform(-s, s), rng.uniform(-s / 3, s / 3))  # noqa: E731
    if kind is K.P1:
        return default_config(kind).params
    if kind is K.P2:
        return make_params(kind, alpha=0.3 + d(0.3))
    if kind is K.P3_TRUNCATED:
        return make_params(kind, nu=1.0 + d())
    if kind is K.P3:
        # the pair needs real positive mu
        return P3Params(0.7 + d(), 0.5 + rng.uniform(-0.1, 0.1), 0.2 + d())
    if kind is K.P4:
        return P4Params(0.5 + d(), 0.3 + d())
    if kind is K.P5:
        return P5Params.from_xi_zeta_sigma(0.3 + d(), 0.4 + d(), 0.2 + d())
    return P6Params.from_xi(0.1 + d(0.05), 0.2 + d(0.05), 0.15 + d(0.05), -0.8 + d(0.05))


def test_criterion_4_separation(acceptance_line):
    rng = np.random.default_rng(2024)
    worst_dev = worst_off = 0.0
    min_raw = np.inf
    runs = 0
    for kind in KINDS:
        base = default_config(kind)
        for _ in range(3):
            params = _random_params(kind, rng)
            for u0, du0 in ((base.u0, base.du0), (base.u0 + 0.03 - 0.02j, base.du0 + 0.05)):
                init = dyn.CalogeroState(base.t0, u0, du0)
                traj = dyn.integrate(kind, params, init, base.t0 + 0.1, tol=1e-12)
                pipe = lax.LaxPipeline(kind, params, traj)
                t = base.t0 + 0.05
                rep = corr.separation_check(kind, params, traj, t, pipeline=pipe)
                worst_dev = max(worst_dev, rep.max_dev)
                worst_off = max(worst_off, abs(rep.extracted_hamiltonian - rep.hamiltonian))
                if kind in (K.P4, K.P5, K.P6):
                    raw = corr.separation_check(kind, params, traj, t, apply_shift=False, pipeline=pipe)
                    min_raw = min(min_raw, raw.max_dev)
                runs += 1
    ok = worst_dev < 1e-6 and worst_off < 1e-8 and min_raw > 1e-3
    acceptance_line(
        4,
        ok,
        f"{runs} runs (3 parameter sets x 2 initial states per kind): max dev {worst_dev:.1e} < 1e-6, "
        f"offset vs H {worst_off:.1e} < 1e-8, unshifted P4-P6 dev >= {min_raw:.2e} > 1e-3",
    )
    assert ok


def test_criterion_5_auxiliary_systems(acceptance_line):
    got, _ = _collect("lax", ("aux_integrals_constant", "aux_ode_system", "K_evolution"))
    ok = all(_all_pass(v) for v in got.values()) and len(got["aux_ode_system"]) == 2 * len(AUX_KINDS)
    acceptance_line(
        5,
        ok,
        f"integrals/constraints drift {_worst(got['aux_integrals_constant']):.1e} < 1e-8, "
        f"ODE systems {_worst(got['aux_ode_system']):.1e} < 1e-5, "
        f"K evolution {_worst(got['K_evolution']):.1e} < 1e-6",
    )
    assert ok, _failures(*got.values())


def test_criterion_6_transport(acceptance_line):
    names = (
        "plaquette_refinement_ratio",
        "plaquette_negative_plateau",
        "schrodinger_over_h2",
        "schrodinger_ratio",
        "schrodinger_unshifted_plateau",
        "psi2_elimination",
        "wronskian_x",
        "wronskian_t",
    )
    got, seconds = _collect("transport", names)
    ok = all(_all_pass(got[n]) for n in names) and seconds < 60
    sr = [it.residual for _, _, it in got["schrodinger_ratio"]]
    acceptance_line(
        6,
        ok,
        f"plaquette ratio >= {_worst(got['plaquette_refinement_ratio'], False):.1f} (>= 6), "
        f"perturbed plateau >= {_worst(got['plaquette_negative_plateau'], False):.1e}; "
        f"Schroedinger ratio in [{min(sr):.3f}, {max(sr):.3f}], unshifted plateau >= "
        f"{_worst(got['schrodinger_unshifted_plateau'], False):.1e}; "
        f"psi2 elimination {_worst(got['psi2_elimination']):.1e} < 1e-6; {seconds:.1f} s < 60 s",
    )
    assert ok, _failures(*got.values())


def test_criterion_7_original_form(acceptance_line):
    got, _ = _collect("lax", ("original_form",))
    entries = got["original_form"]
    ok = _all_pass(entries) and len(entries) == 2 * len(KINDS)
    acceptance_line(7, ok, f"original equations on {len(entries)} trajectories, worst {_worst(entries):.1e} < 1e-5")
    assert ok, _failures(entries)


def test_criterion_8_cli_contract(acceptance_line, tmp_path):
    codes = {}
    start = time.perf_counter()
    for kind in KINDS:
        codes[kind.value] = main(["certify", "--kind", kind.value, "--suite", "all", "--out", str(tmp_path / kind.value)])
    seconds = time.perf_counter() - start
    again = main(["certify", "--kind", "P2", "--suite", "all", "--out", str(tmp_path / "again")])
    same_report = (tmp_path / "P2" / "report.json").read_bytes() == (tmp_path / "again" / "report.json").read_bytes()
    main(["trajectory", "--kind", "P1", "--out", str(tmp_path / "t1")])
    main(["trajectory", "--kind", "P1", "--out", str(tmp_path / "t2")])
    same_csv = (tmp_path / "t1" / "trajectory.csv").read_bytes() == (tmp_path / "t2" / "trajectory.csv").read_bytes()
    no_shift = [main(["certify", "--kind", k, "--suite", "correspondence", "--no-shift", "--out", str(tmp_path / "ns")])
                for k in ("P4", "P5", "P6")]
    blow = tmp_path / "blow.json"
    blow.write_text(json.dumps({"kind": "P1", "u0": [0.0, 0.0], "du0": [0.0, 0.0], "t_end": 400.0,
                                "out": str(tmp_path / "blow")}))
    runtime_code = main(["trajectory", "--config", str(blow)])
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "P1", "tol": 1.0}')
    config_code = main(["certify", "--config", str(bad)])
    ok = (
        all(c == 0 for c in codes.values())
        and again == 0
        and same_report
        and same_csv
        and no_shift == [2, 2, 2]
        and runtime_code == 3
        and config_code == 4
        and seconds < 120
    )
    acceptance_line(
        8,
        ok,
        f"certify all exit 0 for 7 kinds in {seconds:.1f} s < 120 s; byte-identical reruns "
        f"{same_report and same_csv}; exit codes no-shift {no_shift}, blow-up {runtime_code}, bad config {config_code}",
    )
    assert ok, codes


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
