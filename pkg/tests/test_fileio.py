import json

import pytest

from entromax.catalog import reference
from entromax.fileio import (
    ParseError,
    dumps,
    load_json,
    network_from_dict,
    network_to_dict,
    problem_from_dict,
    problem_to_dict,
    read_network,
    read_problem,
    solve_report_to_dict,
    write_network,
)
from entromax.solver import Candidate, SolveReport


def test_network_file_round_trip(tmp_path):
    net = reference("efficientnet_b0").spec
    path = tmp_path / "net.json"
    write_network(net, path)
    assert read_network(path) == net
    # canonical serialization is byte-stable
    write_network(read_network(path), tmp_path / "again.json")
    assert path.read_text() == (tmp_path / "again.json").read_text()


def test_unknown_fields_rejected_by_default():
    obj = network_to_dict(reference("resnet18").spec)
    obj["favourite_color"] = "green"
    with pytest.raises(ParseError, match="unknown fields"):
        network_from_dict(obj)
    assert network_from_dict(obj, allow_unknown=True) == reference("resnet18").spec


def test_unknown_stage_fields_rejected():
    obj = network_to_dict(reference("resnet18").spec)
    obj["stages"][0]["padding"] = 1
    with pytest.raises(ParseError, match="stage 0"):
        network_from_dict(obj)


def test_missing_fields_reported():
    obj = network_to_dict(reference("resnet18").spec)
    del obj["stem"]
    with pytest.raises(ParseError, match="missing fields"):
        network_from_dict(obj)


def test_wrong_format_tag_rejected():
    obj = network_to_dict(reference("resnet18").spec)
    obj["format"] = "other"
    with pytest.raises(ParseError, match="format"):
        network_from_dict(obj)


def test_wrong_version_rejected():
    obj = network_to_dict(reference("resnet18").spec)
    obj["version"] = 99
    with pytest.raises(ParseError, match="version"):
        network_from_dict(obj)


def test_parse_error_carries_line_context(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "format": "entromax-architecture",\n  oops\n}\n')
    with pytest.raises(ParseError, match="line 3"):
        load_json(path)


def test_problem_round_trip(tmp_path):
    from importlib import resources

    src = resources.files("entromax.data.problems").joinpath("resnet18_scale.json")
    with resources.as_file(src) as p:
        prob = read_problem(p)
    again = problem_from_dict(problem_to_dict(prob))
    assert again == prob


def test_shipped_problems_parse_and_check():
    from importlib import resources

    for name in ("resnet18_scale", "resnet34_scale", "resnet50_scale",
                 "efficientnet_b0_scale", "mobilenet_scale"):
        src = resources.files("entromax.data.problems").joinpath(f"{name}.json")
        with resources.as_file(src) as p:
            prob = read_problem(p)
        assert prob.stages == len(prob.alphas)


def test_solve_report_serialization_omits_wall_time():
    report = SolveReport(
        best=Candidate((8, 16), (1, 2)), objective=12.5, feasible=True,
        slacks={"rho": 0.1, "flops": 10, "params": 20}, restarts_used=4,
        evaluations=100, wall_time=1.23)
    doc = solve_report_to_dict(report)
    assert "wall_time" not in json.dumps(doc)
    assert doc["best"] == {"widths": [8, 16], "depths": [1, 2]}
    assert doc["objective"] == 12.5


def test_dumps_ends_with_newline():
    assert dumps({"a": 1}).endswith("\n")
