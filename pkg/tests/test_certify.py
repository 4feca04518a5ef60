import json

import numpy as np
import pytest

from pcl.certify import CheckItem, Report, resolve_suites, run_suites, suite_elliptic, thread_count
from pcl.config import default_config


def test_check_item_relations():
    assert CheckItem("s", "a", 1e-9, 1e-8, "<").passed
    assert not CheckItem("s", "a", 1e-8, 1e-8, "<").passed
    assert CheckItem("s", "b", 1e-3, 1e-4, ">=").passed
    assert CheckItem("s", "c", 4.1, (3.5, 4.5), "in").passed
    assert not CheckItem("s", "c", 5.0, (3.5, 4.5), "in").passed
    assert not CheckItem("s", "d", float("nan"), 1.0, "<").passed
    assert not CheckItem("s", "d", float("inf"), 1.0, ">=").passed


def test_report_json_has_no_timing():
    rep = Report("P1", ("elliptic",), [CheckItem("elliptic", "x", 0.0, 1.0, "<")], seconds=1.5)
    data = json.loads(rep.to_json())
    assert "seconds" not in data and data["passed"] and data["n_items"] == 1
    assert json.loads(rep.to_json(with_timing=True))["seconds"] == 1.5


def test_resolve_suites():
    assert resolve_suites("all") == ("elliptic", "lax", "correspondence", "transport")
    assert resolve_suites("lax") == ("lax",)
    with pytest.raises(ValueError):
        resolve_suites("nope")


@pytest.mark.parametrize("raw,expected", [("1", 1), ("4", 4), ("0", 1), ("-3", 1), ("many", 1)])
def test_thread_count(monkeypatch, raw, expected):
    monkeypatch.setenv("PCL_THREADS", raw)
    assert thread_count() == expected


def test_elliptic_suite_covers_both_taus():
    items = suite_elliptic()
    assert all(it.passed for it in items)
    assert {it.name.split("[")[1] for it in items} == {"tau=0+1i]", "tau=0.3+0.8i]"}


def test_item_order_is_stable():
    cfg = default_config("P2")
    a = [it.name for it in run_suites(cfg, "all").items]
    b = [it.name for it in run_suites(cfg, "all").items]
    assert a == b
    assert a[0].startswith("heat")


def test_negative_controls_fail_on_perturbed_config():
    cfg = default_config("P4").with_changes(disable_shift=True)
    rep = run_suites(cfg, "correspondence")
    names = {it.name for it in rep.failures}
    assert "separation_max_dev" in names
    assert np.isfinite([it.residual for it in rep.items]).all()
