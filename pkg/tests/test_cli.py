import json
from pathlib import Path

import numpy as np
import pytest

from idinfer import fixtures
from idinfer.cli import main
from idinfer.documents import (
    DocumentError,
    ResultDocument,
    diagram_to_dict,
    dumps_diagram,
    loads_diagram,
    save_diagram,
)
from idinfer.evaluator import eval_id
from idinfer.oracle import brute_force

SHIPPED = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture()
def fixture_dir(tmp_path):
    fixtures.write_all(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_shipped_fixtures_are_current(fixture_dir):
    for path in sorted(fixture_dir.rglob("*.json")):
        assert (SHIPPED / path.relative_to(fixture_dir)).read_text() == path.read_text()


def test_every_shipped_valid_fixture_validates(capsys):
    paths = sorted(SHIPPED.glob("*.json"))
    assert len(paths) == len(fixtures.FIXTURES)
    for path in paths:
        assert run(capsys, "validate", path) == (0, "", "")


def test_validate_reports_value_node_child(capsys):
    code, out, _ = run(capsys, "validate", SHIPPED / "invalid" / "value_with_child.json")
    assert code == 1
    assert out.splitlines() == ["value node has child v->d2"]


def test_parse_error_names_the_node(capsys):
    code, out, err = run(capsys, "validate", SHIPPED / "invalid" / "bad_table_length.json")
    assert code == 2 and out == ""
    assert "node 'forecast'" in err and "table has 3 entries, expected 4" in err


def test_unreadable_and_malformed_files(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "idinfer-network",\n "version": 1,\n "variables": [}')
    code, _, err = run(capsys, "validate", bad)
    assert code == 2 and "line 3" in err


def test_decompose_prints_the_sets(capsys):
    code, out, _ = run(capsys, "decompose", SHIPPED / "observed_downstream.json")
    assert code == 0
    assert "pi_d,2 = {c_4}" in out.splitlines()
    code, out, _ = run(capsys, "decompose", SHIPPED / "four_decisions.json")
    assert "pi_d,r = {c_10, d_2}" in out.splitlines()
    code, out, _ = run(capsys, "decompose", SHIPPED / "lone_decision.json")
    assert "X1 = {}" in out.splitlines()
    code, out, _ = run(capsys, "decompose", SHIPPED / "lone_decision.json", "--json")
    assert json.loads(out)["X2"] == ["d", "v"]


def test_decompose_needs_a_decision(capsys):
    code, _, err = run(capsys, "decompose", SHIPPED / "zero_decisions.json")
    assert code == 1 and "no decision" in err


@pytest.mark.parametrize("method", ["reduction", "fusion", "shachter-peot", "brute-force"])
def test_evaluate_lone_decision_any_method(capsys, tmp_path, method):
    out_path = tmp_path / "r.json"
    code, out, _ = run(capsys, "evaluate", SHIPPED / "lone_decision.json", "--method", method, "--out", out_path)
    assert code == 0
    assert "expected value: 5.0" in out
    assert "(always) -> d=1" in out
    doc = ResultDocument.loads(out_path.read_text())
    assert doc.expected_value == 5.0 and doc.policy[0].table == [1]


def test_evaluate_inapplicable_method(capsys):
    code, out, err = run(capsys, "evaluate", SHIPPED / "two_values.json", "--method", "shachter-peot")
    assert code == 3 and out == ""
    assert "method requires a single value node" in err
    code, _, err = run(capsys, "evaluate", SHIPPED / "over_cap.json", "--method", "brute-force")
    assert code == 3


def test_evaluate_invalid_diagram(capsys):
    code, _, err = run(capsys, "evaluate", SHIPPED / "invalid" / "value_with_child.json")
    assert code == 1 and "value node has child" in err


def test_reduction_and_brute_force_runs_agree(capsys, tmp_path):
    values = {}
    for method in ("reduction", "brute-force"):
        out_path = tmp_path / f"{method}.json"
        assert run(capsys, "evaluate", SHIPPED / "suite_m2.json", "--method", method, "--out", out_path)[0] == 0
        values[method] = ResultDocument.loads(out_path.read_text()).expected_value
    assert abs(values["reduction"] - values["brute-force"]) <= 1e-8


def test_output_is_byte_identical_across_runs(capsys, tmp_path):
    for args in (["evaluate", SHIPPED / "observed_downstream.json"],
                 ["compare", SHIPPED / "suite_m2.json", "--oracle"],
                 ["decompose", SHIPPED / "four_decisions.json"]):
        first, second = run(capsys, *args), run(capsys, *args)
        assert first == second


def test_compare_output(capsys):
    code, out, _ = run(capsys, "compare", SHIPPED / "lone_decision.json", "--oracle")
    assert code == 0 and "(1+m) bound: PASS" in out
    assert out.count(" 5 ") >= 3 or out.count("5  ") >= 3
    code, out, _ = run(capsys, "compare", SHIPPED / "over_cap.json", "--oracle")
    assert "skipped (cap)" in out
    code, out, _ = run(capsys, "compare", SHIPPED / "suite_m2.json", "--json")
    report = json.loads(out)
    assert report["tails"][0]["m"] == 2 and report["tails"][0]["ratio"] <= 3


def test_gen_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "gen", "--seed", 9, "--out", a)[0] == 0
    assert run(capsys, "gen", "--seed", 9, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(capsys, "validate", a) == (0, "", "")
    code, out, _ = run(capsys, "gen", "--seed", 9)
    assert out == a.read_text()


def test_network_round_trip(diagrams):
    for diagram in [*diagrams[:50], *(make() for make in fixtures.FIXTURES.values())]:
        text = dumps_diagram(diagram)
        again = loads_diagram(text)
        assert dumps_diagram(again) == text
        for name in diagram:
            node, other = diagram[name], again[name]
            assert node.parents == other.parents
            table = node.cpt if node.is_random else node.utility
            table2 = other.cpt if other.is_random else other.utility
            if table is not None:
                assert np.array_equal(table.values, table2.values)


def test_table_layout_is_parents_then_node():
    doc = diagram_to_dict(fixtures.two_values())
    forecast = next(n for n in doc["nodes"] if n["name"] == "forecast")
    assert forecast["parents"] == ["weather"]
    # P(forecast | weather=0) first, forecast varying fastest
    assert forecast["table"] == [0.8, 0.2, 0.25, 0.75]


def test_parse_errors_name_fields():
    base = diagram_to_dict(fixtures.lone_decision())
    cases = [
        ({**base, "version": 2}, "unsupported version"),
        ({**base, "format": "x"}, "format"),
        ({k: v for k, v in base.items() if k != "nodes"}, "missing field 'nodes'"),
    ]
    broken = json.loads(json.dumps(base))
    broken["nodes"][1]["parents"] = ["ghost"]
    cases.append((broken, "node 'v': parent 'ghost'"))
    broken = json.loads(json.dumps(base))
    broken["nodes"][0]["kind"] = "chance"
    cases.append((broken, "node 'd': field 'kind'"))
    for data, fragment in cases:
        with pytest.raises(DocumentError, match=fragment.replace("(", r"\(")):
            loads_diagram(json.dumps(data))


def test_labels_survive_round_trip(tmp_path):
    doc = diagram_to_dict(fixtures.lone_decision())
    doc["variables"][0]["labels"] = ["low", "mid", "high"]
    diagram = loads_diagram(json.dumps(doc))
    assert diagram.variable("d").label(1) == "mid"
    save_diagram(diagram, tmp_path / "x.json")
    assert json.loads((tmp_path / "x.json").read_text())["variables"][0]["labels"] == ["low", "mid", "high"]


def test_result_document_round_trip(small_suite):
    for diagram in small_suite[:20]:
        for result in (eval_id(diagram), brute_force(diagram)):
            doc = ResultDocument.from_result(result)
            again = ResultDocument.loads(doc.dumps())
            assert again == doc
            assert again.dumps() == doc.dumps()
