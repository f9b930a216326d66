import json
import subprocess
import sys

import pytest

from entromax.cli import main
from entromax.fileio import dumps, network_to_dict, problem_to_dict
from entromax.catalog import reference

from conftest import tiny_problem


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version_prints_convention_fingerprint():
    out = subprocess.run([sys.executable, "-m", "entromax.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "entromax 0.1.0" in out.stdout
    assert "conventions" in out.stdout


def test_analyze_catalog_name_emits_single_json_document(capsys):
    code, out, err = run_cli(["analyze", "resnet50"], capsys)
    assert code == 0
    doc = json.loads(out)  # exactly one well-formed document on stdout
    assert doc["format"] == "entromax-metrics"
    assert doc["rho"] == pytest.approx(0.09, abs=0.01)
    assert doc["params"] == 25_557_032


def test_analyze_stable_field_order(capsys):
    _, out1, _ = run_cli(["analyze", "resnet18"], capsys)
    _, out2, _ = run_cli(["analyze", "resnet18"], capsys)
    assert out1 == out2
    keys = list(json.loads(out1).keys())
    assert keys.index("rho") < keys.index("params") < keys.index("flops")


def test_analyze_empty_file_is_usage_error(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    with pytest.raises(SystemExit) as err:
        run_cli(["analyze", str(empty)], capsys)
    assert err.value.code == 2


def test_analyze_malformed_json_is_domain_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json}\n")
    code, _, err = run_cli(["analyze", str(bad)], capsys)
    assert code == 1
    assert "line" in err


def test_analyze_alpha_mismatch_is_domain_error(capsys):
    with pytest.raises(SystemExit) as err:
        run_cli(["analyze", "resnet18", "--alphas", "1,2"], capsys)
    assert err.value.code == 1


def test_analyze_unknown_name_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        run_cli(["analyze", "resnet999"], capsys)
    assert err.value.code == 2


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as err:
        main(["analyze", "resnet18", "--frobnicate"])
    assert err.value.code == 2


def test_solve_writes_architecture_and_report(tmp_path, capsys):
    prob_file = tmp_path / "tiny.json"
    prob_file.write_text(dumps(problem_to_dict(tiny_problem(0))))
    arch = tmp_path / "arch.json"
    report = tmp_path / "report.json"
    code, out, err = run_cli(
        ["solve", "--problem", str(prob_file), "--seed", "3",
         "--out", str(arch), "--report", str(report)], capsys)
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["format"] == "entromax-solve-report"
    assert doc["feasible"] is True
    assert doc["metrics"]["format"] == "entromax-metrics"
    net_doc = json.loads(arch.read_text())
    assert net_doc["format"] == "entromax-architecture"
    assert [s["width"] for s in net_doc["stages"]] == doc["best"]["widths"]


def test_solve_same_seed_byte_identical(tmp_path, capsys):
    prob_file = tmp_path / "tiny.json"
    prob_file.write_text(dumps(problem_to_dict(tiny_problem(1))))
    outs = []
    for tag in ("a", "b"):
        arch = tmp_path / f"arch_{tag}.json"
        report = tmp_path / f"report_{tag}.json"
        code, _, _ = run_cli(
            ["solve", "--problem", str(prob_file), "--seed", "11",
             "--out", str(arch), "--report", str(report)], capsys)
        assert code == 0
        outs.append((arch.read_bytes(), report.read_bytes()))
    assert outs[0] == outs[1]


def test_solve_infeasible_budget_exits_one(tmp_path, capsys):
    import dataclasses

    prob = dataclasses.replace(tiny_problem(0), max_params=10)
    prob_file = tmp_path / "impossible.json"
    prob_file.write_text(dumps(problem_to_dict(prob)))
    code, out, err = run_cli(["solve", "--problem", str(prob_file)], capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["feasible"] is False
    assert doc["infeasibility"] == "params"


def test_solve_max_evals_one_flags_exhaustion(tmp_path, capsys):
    prob_file = tmp_path / "tiny.json"
    prob_file.write_text(dumps(problem_to_dict(tiny_problem(2))))
    code, out, _ = run_cli(
        ["solve", "--problem", str(prob_file), "--max-evals", "1"], capsys)
    doc = json.loads(out)
    assert doc["budget_exhausted"] is True
    assert doc["evaluations"] <= 1


def test_solve_trace_does_not_change_result(tmp_path, capsys):
    prob_file = tmp_path / "tiny.json"
    prob_file.write_text(dumps(problem_to_dict(tiny_problem(3))))
    code, plain, _ = run_cli(["solve", "--problem", str(prob_file), "--seed", "4"],
                             capsys)
    code, traced, _ = run_cli(["solve", "--problem", str(prob_file), "--seed", "4",
                               "--trace"], capsys)
    a, b = json.loads(plain), json.loads(traced)
    assert a["best"] == b["best"]
    assert a["objective"] == b["objective"]
    assert "trace" in b and "trace" not in a
    assert len(traced) > len(plain)


def test_compare_self_is_all_zero_deltas(capsys):
    code, out, _ = run_cli(["compare", "resnet18", "resnet18", "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert all(v == 0 for v in doc["delta"].values())


def test_compare_across_block_kinds(capsys):
    code, out, _ = run_cli(["compare", "resnet50", "mobilenet_v2", "--json"],
                           capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["delta"]["params"] == 3_504_872 - 25_557_032


def test_compare_human_table(capsys):
    code, out, _ = run_cli(["compare", "resnet18", "resnet34"], capsys)
    assert code == 0
    assert "rho" in out and "delta" in out


def test_verify_variance_json(capsys):
    code, out, _ = run_cli(
        ["verify-variance", "--widths", "16,32", "--samples", "20000",
         "--seed", "2024", "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["theoretical"] == 512.0
    assert doc["passed"] is True


def test_verify_variance_text_mode(capsys):
    code, out, _ = run_cli(
        ["verify-variance", "--widths", "8,8", "--samples", "20000",
         "--seed", "2024"], capsys)
    assert code == 0
    assert "pass" in out
    assert "theoretical" in out


def test_catalog_listing_and_show(capsys):
    code, out, _ = run_cli(["catalog"], capsys)
    assert code == 0
    assert "resnet50" in out
    code, out, _ = run_cli(["catalog", "resnet34"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc == network_to_dict(reference("resnet34").spec)


def test_catalog_analyze(capsys):
    code, out, _ = run_cli(["catalog", "efficientnet_b0", "--analyze"], capsys)
    assert code == 0
    assert json.loads(out)["rho"] == pytest.approx(0.6, abs=0.1)


def test_calibrate_passes_and_writes(tmp_path, capsys):
    target = tmp_path / "calibration.md"
    code, _, err = run_cli(["calibrate", "--write", str(target)], capsys)
    assert code == 0
    assert "forced to 2" in target.read_text()
