import json

import numpy as np
import pytest

from hybridleg.controller import ControlSchedule
from hybridleg.leg import DropConfig, run_drop
from hybridleg.model import BodyParams, ComplianceSplit, ConfigurationError
from hybridleg.quadruped import QuadrupedConfig, load_cases, run_quadruped_case, run_table, write_summary


def test_bundled_table():
    cases = load_cases()
    assert [c.case for c in cases] == [str(i) for i in range(1, 8)]
    assert [c.expected for c in cases] == ["landed", "failed"] * 3 + ["landed"]
    assert all(c.body_mass == 2.0 and c.n_legs == 4 for c in cases)
    assert cases[3].schedule.delay == pytest.approx(0.017)


def test_four_legs_equal_one_leg_with_quarter_load():
    case = load_cases()[4]
    quad, _, _ = run_quadruped_case(case)
    single = run_drop(DropConfig(
        drop_height=case.drop_height, split=case.split, schedule=case.schedule,
        duration=case.duration, body=BodyParams(mass=case.body_mass / 4)))
    assert np.array_equal(quad.z, single.z)
    assert np.array_equal(quad.theta, single.theta)


def test_config_validation():
    split, sched = ComplianceSplit(1.0, 1.0), ControlSchedule()
    with pytest.raises(ConfigurationError):
        QuadrupedConfig("x", split, sched, 0.7, body_mass=0.0)
    with pytest.raises(ConfigurationError):
        QuadrupedConfig("x", split, sched, 0.7, expected="maybe")


def test_table_reports_discrepancies(tmp_path):
    cases = load_cases()[:2]
    summary = run_table(cases, tmp_path)
    assert summary["judged"] == 2
    wrong = [r for r in summary["cases"] if r["outcome"] != r["expected"]]
    assert len(summary["discrepancies"]) == len(wrong)
    for entry in summary["discrepancies"]:
        assert entry["case"] in summary["trajectories"]
        assert (tmp_path / entry["trajectory_csv"]).exists()
    doc = json.loads(write_summary(summary, tmp_path / "s.json").read_text())
    assert "trajectories" not in doc and doc["matches"] == summary["matches"]


def test_custom_table(tmp_path):
    path = tmp_path / "cases.json"
    path.write_text(json.dumps({"cases": [
        {"case": "a", "k_total": 1.6717, "lambda_passive": 1.0, "frequency": 1000,
         "delay_ms": 0, "drop_height": 0.5}]}))
    (case,) = load_cases(path)
    assert case.expected is None and case.duration == 4.0
    assert run_table([case])["judged"] == 0
