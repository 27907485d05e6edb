import json
import os

import numpy as np
import pytest

from semidecay.cli import main
from semidecay.reports import load_report, reports_equal

BASE_TESTBED = {
    "schema_version": 1,
    "command": "testbed",
    "seed": 1,
    "n_seeds": 1,
    "instance": {"n": 2, "a": -0.75, "gap": -1.0, "strength": 0.5},
}

BASE_FP = {
    "schema_version": 1,
    "command": "fp-decay",
    "problem": {"d": 1, "s": 2.0, "L": 8.0, "N": 120,
                "weight": {"kind": "polynomial", "k": 3.0},
                "scheme": "crank-nicolson", "t_max": 1.5, "dt": 0.01,
                "initial_data": "heavy-tail"},
}


def write_config(tmp_path, mapping, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(mapping))
    return str(path)


def test_testbed_passes_on_pinned_seed(tmp_path):
    cfg = write_config(tmp_path, {**BASE_TESTBED, "out_dir": str(tmp_path / "out")})
    assert main(["testbed", "--config", cfg]) == 0
    report = load_report(tmp_path / "out" / "report.json")
    assert report["all_passed"]
    assert report["verdicts"]["seed_1.h1"]["verdict"] == "pass"


def test_unknown_config_key_gives_exit_four(tmp_path):
    cfg = write_config(tmp_path, {**BASE_TESTBED, "bogus": True})
    assert main(["testbed", "--config", cfg]) == 4


def test_missing_config_file_gives_exit_four(tmp_path):
    assert main(["testbed", "--config", str(tmp_path / "absent.json")]) == 4


def test_weight_order_violation_gives_exit_four(tmp_path):
    bad = json.loads(json.dumps(BASE_FP))
    bad["problem"]["weight"]["k"] = 0.5
    cfg = write_config(tmp_path, bad)
    assert main(["fp-decay", "--config", cfg]) == 4


def test_infeasible_decomposition_gives_exit_three(tmp_path):
    cfg_map = json.loads(json.dumps(BASE_FP))
    cfg_map["problem"]["target_a"] = -50.0
    cfg_map["out_dir"] = str(tmp_path / "out")
    cfg = write_config(tmp_path, cfg_map)
    assert main(["fp-decay", "--config", cfg]) == 3
    report = load_report(tmp_path / "out" / "report.json")
    # the frontier of best-achieved values ships with the failure
    assert report["constants"]["decomposition"]["frontier"]


def test_abscissa_on_spectrum_reports_indeterminate(tmp_path):
    from semidecay import generate_instance, save_instance
    inst = generate_instance(1, 2)
    inst_dir = tmp_path / "inst"
    save_instance(inst, inst_dir)
    manifest = json.loads((inst_dir / "instance.json").read_text())
    manifest["certificate"]["a"] = -1.0   # sits exactly on an eigenvalue
    (inst_dir / "instance.json").write_text(json.dumps(manifest))
    cfg = write_config(tmp_path, {
        "schema_version": 1, "command": "enlarge-check",
        "instance_path": str(inst_dir), "out_dir": str(tmp_path / "out")})
    assert main(["enlarge-check", "--config", cfg]) == 2
    report = load_report(tmp_path / "out" / "report.json")
    assert report["verdicts"]["seed_loaded.h1"]["verdict"] == "indeterminate"


def test_determinism_byte_identical_csv(tmp_path):
    for name in ("one", "two"):
        cfg = write_config(tmp_path,
                           {**BASE_FP, "out_dir": str(tmp_path / name)},
                           name=f"{name}.json")
        assert main(["fp-decay", "--config", cfg]) == 0
    csv_one = (tmp_path / "one" / "trajectory.csv").read_bytes()
    csv_two = (tmp_path / "two" / "trajectory.csv").read_bytes()
    assert csv_one == csv_two
    rep_one = load_report(tmp_path / "one" / "report.json")
    rep_two = load_report(tmp_path / "two" / "report.json")
    rep_two["config"]["out_dir"] = rep_one["config"]["out_dir"]
    assert reports_equal(rep_one, rep_two, rtol=0.0)


def test_jobs_do_not_change_results(tmp_path):
    reports = {}
    for jobs in (1, 2):
        out = tmp_path / f"jobs{jobs}"
        cfg = write_config(tmp_path,
                           {**BASE_TESTBED, "n_seeds": 3, "instance": {"n": 6},
                            "out_dir": str(out)},
                           name=f"jobs{jobs}.json")
        assert main(["testbed", "--config", cfg, "--jobs", str(jobs)]) == 0
        reports[jobs] = load_report(out / "report.json")
    reports[2]["config"]["out_dir"] = reports[1]["config"]["out_dir"]
    reports[2]["config"]["jobs"] = reports[1]["config"]["jobs"]
    assert reports_equal(reports[1], reports[2], rtol=0.0)


def test_tolerance_override_lands_in_report(tmp_path):
    cfg = write_config(tmp_path, {**BASE_TESTBED, "out_dir": str(tmp_path / "out")})
    assert main(["testbed", "--config", cfg, "--tolerance", "tol_proj=1e-7"]) == 0
    report = load_report(tmp_path / "out" / "report.json")
    assert report["config"]["tolerances"]["tol_proj"] == 1e-7


def test_golden_seed_one_report(tmp_path):
    golden_path = os.path.join(os.path.dirname(__file__), "data",
                               "testbed_seed1_report.json")
    cfg = write_config(tmp_path, {**BASE_TESTBED, "out_dir": str(tmp_path / "out")})
    assert main(["testbed", "--config", cfg]) == 0
    produced = load_report(tmp_path / "out" / "report.json")
    golden = load_report(golden_path)
    golden["config"]["out_dir"] = produced["config"]["out_dir"]
    assert reports_equal(produced, golden, rtol=1e-8)
