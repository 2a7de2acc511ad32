import json
import os
import subprocess
import sys

import jsonschema

from neurovariety import COMPLEX, WeightSet
from neurovariety.schemas import (
    DIMENSION_REPORT_SCHEMA,
    EDIM_REPORT_SCHEMA,
    FIBER_CHECK_SCHEMA,
    HOMOGENEITY_CHECK_SCHEMA,
    THRESHOLD_REPORT_SCHEMA,
    TICKET_REPORT_SCHEMA,
    ZERO_WITNESS_SCHEMA,
)


def run_cli(*args, cwd, env=None):
    return subprocess.run(
        [sys.executable, "-m", "neurovariety", *args],
        capture_output=True, text=True, cwd=cwd, env=env)


def test_dim_report_validates_against_schema(tmp_path):
    proc = run_cli("dim", "--arch", "2,2,2", "--degree", "2", cwd=tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    jsonschema.validate(report, DIMENSION_REPORT_SCHEMA)
    assert report["dim"] == 6 and report["defect"] == 0


def test_defect_command_shares_the_dim_cache(tmp_path):
    first = run_cli("dim", "--arch", "2,2,2", "--degree", "2", cwd=tmp_path)
    second = run_cli("defect", "--arch", "2,2,2", "--degree", "2", cwd=tmp_path)
    assert first.stdout == second.stdout
    store = tmp_path / "neurovariety_results.jsonl"
    assert len(store.read_text().strip().splitlines()) == 1


def test_edim_command(tmp_path):
    proc = run_cli("edim", "--arch", "2,5,1", "--degree", "2", cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, EDIM_REPORT_SCHEMA)
    assert report["edim"] == 3 and report["edim_branch"] == "ambient_space"


def test_alexander_hirschowitz_via_cli(tmp_path):
    proc = run_cli("dim", "--arch", "3,5,1", "--degree", "4", cwd=tmp_path)
    report = json.loads(proc.stdout)
    assert report["dim"] == 14 and report["defect"] == 1


def test_usage_error_exits_one(tmp_path):
    proc = run_cli("dim", "--arch", "not-an-arch", "--degree", "2",
                   cwd=tmp_path)
    assert proc.returncode == 1
    proc2 = run_cli("dim", "--arch", "2,2,2", cwd=tmp_path)  # missing degree
    assert proc2.returncode == 1


def test_capacity_error_exits_two_and_names_the_stage(tmp_path):
    env = dict(os.environ, NEUROVARIETY_CAP="10")
    proc = run_cli("dim", "--arch", "3,3,3", "--degree", "9",
                   cwd=tmp_path, env=env)
    assert proc.returncode == 2
    assert "dim" in proc.stderr and "capacity" in proc.stderr.lower()


def test_rerun_with_store_is_byte_identical(tmp_path):
    first = run_cli("dim", "--arch", "2,3,2", "--degree", "2", cwd=tmp_path)
    second = run_cli("dim", "--arch", "2,3,2", "--degree", "2", cwd=tmp_path)
    assert first.stdout == second.stdout


def test_forced_recompute_identical_modulo_elapsed(tmp_path):
    args = ("dim", "--arch", "2,3,2", "--degree", "2", "--force")
    a = json.loads(run_cli(*args, cwd=tmp_path).stdout)
    b = json.loads(run_cli(*args, cwd=tmp_path).stdout)
    a.pop("elapsed_ms"), b.pop("elapsed_ms")
    assert a == b


def test_csv_format_matches_json_fields(tmp_path):
    json_report = json.loads(run_cli(
        "dim", "--arch", "2,2,2", "--degree", "2", cwd=tmp_path).stdout)
    proc = run_cli("dim", "--arch", "2,2,2", "--degree", "2",
                   "--format", "csv", cwd=tmp_path)
    header, row = proc.stdout.strip().splitlines()
    assert header == "arch,r,dim,edim,defect"
    assert row == '"2,2,2",2,{dim},{edim},{defect}'.format(**json_report)


def test_threshold_command(tmp_path):
    proc = run_cli("threshold", "--arch", "2,2,2", "--rmax", "3",
                   "--trials", "2", cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, THRESHOLD_REPORT_SCHEMA)
    assert report["theoretical_bound"] == 71
    assert report["estimated_threshold"] <= 1
    assert report["bound_hypothesis_met"] is True


def test_threshold_single_layer_estimates_zero(tmp_path):
    proc = run_cli("threshold", "--arch", "3,3", "--rmax", "4",
                   "--trials", "2", cwd=tmp_path)
    report = json.loads(proc.stdout)
    assert report["estimated_threshold"] == 0
    assert report["theoretical_bound"] == 0


def test_threshold_flags_unmet_hypothesis(tmp_path):
    proc = run_cli("threshold", "--arch", "2,1,2", "--rmax", "3",
                   "--trials", "2", cwd=tmp_path)
    assert json.loads(proc.stdout)["bound_hypothesis_met"] is False


def test_ticket_builtin_family(tmp_path):
    proc = run_cli("ticket", "--family", "builtin", "--mmax", "5",
                   cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, TICKET_REPORT_SCHEMA)
    assert report["members"] == [1, 2]


def test_ticket_from_file(tmp_path):
    family = [
        {"vars": 2, "degree": 1, "terms": [["1", [1, 0]]]},
        {"vars": 2, "degree": 1, "terms": [["1", [0, 1]]]},
        {"vars": 2, "degree": 1, "terms": [["1", [1, 0]], ["1", [0, 1]]]},
    ]
    path = tmp_path / "fam.json"
    path.write_text(json.dumps(family))
    proc = run_cli("ticket", "--input", "fam.json", "--mmax", "3",
                   cwd=tmp_path)
    report = json.loads(proc.stdout)
    assert report["members"] == [1]
    assert report["ns_bound"] == 31


def test_ticket_requires_exactly_one_source(tmp_path):
    proc = run_cli("ticket", "--family", "builtin", "--random", "3,3,2",
                   "--mmax", "2", cwd=tmp_path)
    assert proc.returncode == 1


def test_ticket_exact_field(tmp_path):
    proc = run_cli("ticket", "--family", "builtin", "--mmax", "3",
                   "--field", "exact", cwd=tmp_path)
    report = json.loads(proc.stdout)
    assert report["members"] == [1, 2]
    assert report["certificate_field"] == {"kind": "exact_rational"}


def test_zero_witness_command(tmp_path):
    w = WeightSet(COMPLEX, (((1, 0), (0, 1)), ((1, 1), (1, 1))))
    path = tmp_path / "weights.json"
    path.write_text(json.dumps(w.to_json()))
    proc = run_cli("zero-witness", "--input", "weights.json", "--degree", "2",
                   cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, ZERO_WITNESS_SCHEMA)
    assert report["found"] is True
    assert report["residual"] < 1e-12
    assert report["singular_layer_index"] == 2


def test_homogeneity_check_command(tmp_path):
    proc = run_cli("homogeneity-check", "--arch", "2,3,2", "--degree", "3",
                   "--trials", "25", cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, HOMOGENEITY_CHECK_SCHEMA)
    assert proc.returncode == 0 and report["passed"] is True


def test_fiber_check_command(tmp_path):
    proc = run_cli("fiber-check", "--arch", "3,3,3", "--degree", "2",
                   cwd=tmp_path)
    report = json.loads(proc.stdout)
    jsonschema.validate(report, FIBER_CHECK_SCHEMA)
    assert proc.returncode == 0
    assert report["ok"] is True
    assert report["fiber_dim"] == report["lower_bound"] == 3


def test_config_file_defaults_with_flag_override(tmp_path):
    (tmp_path / "config.toml").write_text(
        'trials = 2\nseed = 9\nfield = "float"\n')
    by_config = json.loads(run_cli(
        "--config", "config.toml", "dim", "--arch", "2,2,2", "--degree", "2",
        cwd=tmp_path).stdout)
    assert by_config["trials"] == 2
    assert by_config["field"] == {"kind": "complex_float"}
    overridden = json.loads(run_cli(
        "--config", "config.toml", "dim", "--arch", "2,2,2", "--degree", "2",
        "--trials", "4", "--field", "fp", "--force", cwd=tmp_path).stdout)
    assert overridden["trials"] == 4
    assert overridden["field"]["kind"] == "prime_field"


class TestSweep:
    SPEC = """
degrees = [2, 3]

[equi_width]
d = [2, 3]
L = [2, 3]

[options]
trials = 2
seed = 0
"""

    def test_equi_width_grid_all_zero_defect(self, tmp_path):
        (tmp_path / "sweep.toml").write_text(self.SPEC)
        proc = run_cli("sweep", "sweep.toml", "--out", "table.csv",
                       cwd=tmp_path)
        assert proc.returncode == 0, proc.stderr
        lines = (tmp_path / "table.csv").read_text().strip().splitlines()
        assert lines[0] == "arch,r,dim,edim,defect"
        assert len(lines) == 9  # header + 8 records
        assert all(line.endswith(",0") for line in lines[1:])

    def test_rerun_hits_the_cache(self, tmp_path):
        (tmp_path / "sweep.toml").write_text(self.SPEC)
        run_cli("sweep", "sweep.toml", cwd=tmp_path)
        store = tmp_path / "neurovariety_results.jsonl"
        before = store.read_text()
        second = run_cli("sweep", "sweep.toml", cwd=tmp_path)
        assert second.returncode == 0
        assert store.read_text() == before  # nothing recomputed

    def test_parallel_jobs_match_serial_results(self, tmp_path):
        (tmp_path / "sweep.toml").write_text(self.SPEC)
        serial = run_cli("sweep", "sweep.toml", "--store", "a.jsonl",
                         cwd=tmp_path)
        parallel = run_cli("sweep", "sweep.toml", "--store", "b.jsonl",
                           "--jobs", "2", cwd=tmp_path)
        assert serial.stdout == parallel.stdout

    def test_non_increasing_grid(self, tmp_path):
        spec = """
architectures = ["3,2,2", "4,3,2"]
degrees = [2, 3]

[options]
trials = 2
"""
        (tmp_path / "ni.toml").write_text(spec)
        proc = run_cli("sweep", "ni.toml", "--format", "json",
                       "--out", "records.jsonl", cwd=tmp_path)
        assert proc.returncode == 0
        records = [json.loads(line) for line in
                   (tmp_path / "records.jsonl").read_text().splitlines()]
        assert len(records) == 4
        for rec in records:
            jsonschema.validate(rec, DIMENSION_REPORT_SCHEMA)
            assert rec["defect"] >= 0  # reported, never asserted zero

    def test_empty_spec_is_a_usage_error(self, tmp_path):
        (tmp_path / "empty.toml").write_text("degrees = []\n")
        proc = run_cli("sweep", "empty.toml", cwd=tmp_path)
        assert proc.returncode == 1

    def test_partial_failure_still_exits_zero(self, tmp_path):
        spec = 'architectures = ["3,3,3"]\ndegrees = [2, 9]\n'
        (tmp_path / "partial.toml").write_text(spec)
        env = dict(os.environ, NEUROVARIETY_CAP="30")
        proc = run_cli("sweep", "partial.toml", cwd=tmp_path, env=env)
        assert proc.returncode == 0
        assert "skipped 3,3,3 r=9" in proc.stdout
        assert "| 3,3,3 | 2 |" in proc.stdout


def test_md_format_renders_a_table(tmp_path):
    proc = run_cli("dim", "--arch", "2,2,2", "--degree", "2",
                   "--format", "md", cwd=tmp_path)
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "| arch | r | dim | edim | defect |"
    assert lines[2] == "| 2,2,2 | 2 | 6 | 6 | 0 |"
