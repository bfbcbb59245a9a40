"""End-to-end tests of the command-line front end."""

import json
import os
import subprocess
import sys

import pytest

from maxtype.cli import main

RUN = [sys.executable, "-m", "maxtype.cli"]


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_gen_info_json(capsys):
    code, out = run_cli(["gen-info", "--p0", "2", "--nmax", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["experiment"] == "gen-info"
    assert doc["params"]["points"]["dec"] == "1300"
    assert doc["rows"][1]["d_n"]["exact"] == "129/524293"


def test_gen_info_dump_points(capsys):
    code, out = run_cli(["gen-info", "--nmax", "1", "--dump-points"], capsys)
    doc = json.loads(out)
    labels = [r["label"] for r in doc["rows"] if "label" in r]
    assert code == 0 and len(labels) == 2  # quotient X_1: one branch, one leaf orbit


def test_verify_balls_passes(capsys):
    code, out = run_cli(["verify-balls", "--p0", "3/2", "--nmax", "2",
                         "--gen", "second"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["rows"][0]["mismatches"]["dec"] == "0"
    assert "balls checked: all match" in doc["notes"]


def test_eval_maximal(capsys):
    code, out = run_cli(["eval-maximal", "--nmax", "1", "--op", "centered"],
                        capsys)
    doc = json.loads(out)
    assert code == 0
    # weak ratio of f_1 on X_1 is 129/81
    assert doc["rows"][0]["weak_ratio"]["dec"].startswith("0.1592592592")


def test_growth_table_csv(capsys):
    code, out = run_cli(["growth-table", "--nmax", "2", "--format", "csv"],
                        capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].split(",")[:3] == ["n", "R", "L"]
    assert len(lines) == 3


def test_strong11_check(capsys):
    code, out = run_cli(["strong11-check", "--nmax", "1", "--trials", "20"],
                        capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "pass"


def test_rwt_search_golden_match(capsys):
    code, out = run_cli(["rwt-search", "--p0", "2", "--nmax", "1",
                         "--mode", "exhaustive"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["golden_ref"] == "first_p0_2_N1_p2"
    assert doc["rows"][0]["max_exact"] == "43/27"
    assert doc["rows"][1]["ok"] is True


def test_rwt_search_random(capsys):
    code, out = run_cli(["rwt-search", "--nmax", "2", "--mode", "random",
                         "--budget", "20"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["rows"][0]["subsets"]["dec"] == "20"


def test_golden_dir_override(tmp_path, capsys, monkeypatch):
    golden = {"first_p0_2_N1_p2": {"max": "1/1"}}
    (tmp_path / "rwt_golden.json").write_text(json.dumps(golden))
    monkeypatch.setenv("MAXTYPE_GOLDEN_DIR", str(tmp_path))
    code, out = run_cli(["rwt-search", "--p0", "2", "--nmax", "1",
                         "--mode", "exhaustive"], capsys)
    doc = json.loads(out)
    assert code == 2 and doc["verdict"] == "fail"  # deliberate golden mismatch


def test_dirac_and_leaf_and_glue_and_agreement(capsys):
    for argv in (["dirac-rwt", "--nmax", "1", "--gen", "second"],
                 ["leaf-rwt", "--nmax", "1", "--budget", "40"],
                 ["glue-check", "--nmax", "1", "--trials", "5"],
                 ["mode-agreement", "--nmax", "1"]):
        code, out = run_cli(argv, capsys)
        assert code == 0, argv
        assert json.loads(out)["verdict"] == "pass"


def test_exit_code_on_bad_p0(capsys):
    assert main(["gen-info", "--p0", "1"]) == 1
    assert main(["gen-info", "--p0", "1/2"]) == 1


def test_exit_code_on_bad_usage(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["glue-check", "--mode", "quotient", "--threads", "0"]) == 1


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["gen-info", "--nmax", "1", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["experiment"] == "gen-info"


def test_threads_do_not_change_bytes(tmp_path):
    """--threads 1 vs --threads 4 must give byte-identical reports."""
    outs = []
    for th in ("1", "4"):
        path = tmp_path / f"t{th}.json"
        env = dict(os.environ)
        r = subprocess.run(RUN + ["strong11-check", "--nmax", "1", "--trials",
                                  "10", "--threads", th, "--out", str(path)],
                           env=env, capture_output=True)
        assert r.returncode == 0, r.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_installed_entry_point():
    r = subprocess.run(["maxtype", "gen-info", "--nmax", "1"],
                       capture_output=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["experiment"] == "gen-info"
