import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from pcl.cli import main
from pcl.config import GridSpec, default_config


def _write_config(tmp_path, kind, name="cfg.json", **changes):
    cfg = default_config(kind).with_changes(out=str(tmp_path / "out"), **changes)
    path = tmp_path / name
    path.write_text(cfg.to_json())
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_trajectory_outputs(tmp_path):
    cfg = _write_config(tmp_path, "P1")
    assert main(["trajectory", "--config", str(cfg)]) == 0
    rows = _rows(tmp_path / "out" / "trajectory.csv")
    assert rows[0] == ["t", "re_u", "im_u", "re_du", "im_du"]
    t = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(t) > 0)
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["final_state"]["t"] == pytest.approx(0.4)
    assert summary["H_drift_check"]["residual"] < 1e-9


def test_trajectory_is_byte_identical(tmp_path):
    cfg = _write_config(tmp_path, "P5")
    assert main(["trajectory", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["trajectory", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_blow_up_exits_3_with_partial_output(tmp_path):
    cfg = _write_config(tmp_path, "P1", u0=0.0, du0=0.0, t_end=400.0)
    assert main(["trajectory", "--config", str(cfg)]) == 3
    assert len(_rows(tmp_path / "out" / "trajectory.csv")) > 2
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert "error" in summary and "final_state" in summary


def test_certify_elliptic_passes(tmp_path):
    cfg = _write_config(tmp_path, "P1")
    assert main(["certify", "--config", str(cfg), "--suite", "elliptic"]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["passed"] and report["n_failed"] == 0
    assert all({"residual", "threshold", "relation", "passed"} <= set(it) for it in report["items"])
    assert any("tau=0+1i" in it["name"] for it in report["items"])


@pytest.mark.parametrize("kind", ["P4", "P5", "P6"])
def test_disabled_shift_fails_correspondence(tmp_path, kind):
    cfg = _write_config(tmp_path, kind)
    assert main(["certify", "--config", str(cfg), "--suite", "correspondence"]) == 0
    assert main(["certify", "--config", str(cfg), "--suite", "correspondence", "--no-shift"]) == 2
    cfg_flag = _write_config(tmp_path, kind, name="flag.json", disable_shift=True)
    assert main(["certify", "--config", str(cfg_flag), "--suite", "correspondence"]) == 2


def test_certify_report_is_deterministic_across_threads(tmp_path, monkeypatch):
    cfg = _write_config(tmp_path, "P2")
    monkeypatch.setenv("PCL_THREADS", "1")
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("PCL_THREADS", "4")
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_plotdata_potential_p1(tmp_path):
    cfg = _write_config(tmp_path, "P1")
    assert main(["plotdata", "--config", str(cfg), "--what", "potential"]) == 0
    rows = _rows(tmp_path / "out" / "potential.csv")
    assert rows[0] == ["x", "re_value", "im_value"]
    x = np.array([float(r[0]) for r in rows[1:]])
    v = np.array([float(r[1]) for r in rows[1:]])
    assert len(x) == 64
    assert np.allclose(v, -(x**3) / 2, rtol=0, atol=1e-15)


def test_plotdata_separation_near_zero(tmp_path):
    cfg = _write_config(tmp_path, "P4")
    assert main(["plotdata", "--config", str(cfg), "--what", "separation"]) == 0
    rows = _rows(tmp_path / "out" / "separation.csv")
    assert rows[0] == ["x", "re_deviation", "im_deviation"]
    dev = np.array([[float(r[1]), float(r[2])] for r in rows[1:]])
    assert np.max(np.abs(dev)) < 1e-6


def test_plotdata_residual_sweep_schema(tmp_path):
    cfg = _write_config(tmp_path, "P2")
    assert main(["plotdata", "--config", str(cfg), "--what", "residual_sweep"]) == 0
    rows = _rows(tmp_path / "out" / "residual_sweep.csv")
    assert rows[0] == ["x", "re_psi", "im_psi", "residual"]
    assert len(rows) == 65
    res = [float(r[3]) for r in rows[1:] if r[3]]
    assert len(res) == 60 and max(res) < 1e-3


@pytest.mark.parametrize(
    "argv",
    [
        ["certify", "--config", "missing.json"],
        ["certify", "--kind", "P9"],
        ["certify", "--kind", "P1", "--suite", "bogus"],
        ["plotdata", "--kind", "P1"],
        ["frobnicate"],
    ],
)
def test_bad_usage_exits_4(tmp_path, argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 4


def test_bad_config_files_exit_4(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["trajectory", "--config", str(bad)]) == 4
    bad.write_text(json.dumps({"kind": "P1", "tol": 1.0}))
    assert main(["trajectory", "--config", str(bad)]) == 4
    bad.write_text(json.dumps({"kind": "P1", "mystery": 1}))
    assert main(["trajectory", "--config", str(bad)]) == 4


def test_runtime_error_exits_3(tmp_path):
    # the spectral grid runs through the pole of U at x = 0
    cfg = _write_config(tmp_path, "P5", grid=GridSpec(-0.3, 0.3, 17))
    assert main(["plotdata", "--config", str(cfg), "--what", "potential"]) == 3


@pytest.mark.skipif(shutil.which("pcl") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(
        ["pcl", "certify", "--kind", "P1", "--suite", "elliptic", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "report.json").exists()
