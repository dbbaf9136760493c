import csv
import io
import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sigma_lab import FiniteSpace, Partition, RandomVariable
from sigma_lab.detect import ExplicitScenario, detect
from sigma_lab.errors import DocumentError
from sigma_lab.gallery import SQRT6_X, Warren
from sigma_lab.io import (creal_from_json, creal_to_json, event_from_json, load_json, partition_from_json,
                          partition_to_json, rv_from_json, rv_to_json, scalar_from_json, scalar_to_json,
                          scenario_from_json, space_from_json, space_to_json, value_from_json, value_to_json)
from sigma_lab.report import RunReport, emit_series, file_digest, series_rows, significant
from sigma_lab.scalar import CReal, quad

from conftest import space_with

rationals = st.fractions(min_value=-100, max_value=100, max_denominator=1000)


def through_text(doc):
    return json.loads(json.dumps(doc))


def same_creal(x, y):
    return (x.lo, x.hi, x.exact, x.power, x.exponent) == (y.lo, y.hi, y.exact, y.power, y.exponent)


@given(rationals, rationals)
def test_scalar_round_trip(a, b):
    assert scalar_from_json(through_text(scalar_to_json(a))) == a
    x = quad(a, b, 6)
    back = scalar_from_json(through_text(scalar_to_json(x)))
    assert back == x and type(back) is type(x)


def test_quadratic_example():
    assert scalar_to_json(SQRT6_X) == {"a": "-1/8", "b": "1/8", "d": 6}


@given(st.fractions(min_value=0, max_value=20, max_denominator=50), st.sampled_from([2, 3, Fraction(3, 2)]))
def test_certified_real_round_trip(x, k):
    c = CReal.root(x, k)
    doc = through_text(creal_to_json(c))
    assert same_creal(creal_from_json(doc), c)
    back = value_from_json(through_text(value_to_json(c)))
    if c.exact is None:
        assert same_creal(back, c) and doc["ulp"] == "1e-50"
        # the printed decimal sits within one unit in the 50th place of the enclosure
        assert c.lo - Fraction(1, 10**50) <= Fraction(doc["decimal"]) <= c.hi
    else:
        # exact values travel as plain scalars
        assert back == c.exact


def test_exact_fractional_root():
    r = CReal.root(Fraction(8, 27), Fraction(3, 2))
    assert r.exact == Fraction(4, 9)
    assert CReal.root(0, Fraction(3, 2)).exact == 0
    assert CReal.root(2, Fraction(3, 2)).exact is None


@pytest.mark.parametrize("obj,where", [
    (0.5, "mass"), (True, "mass"), ("1/0", "mass"), ("one", "mass"), ({"a": "1", "b": "1"}, "mass"),
    ({"a": "1", "b": "1", "d": 8}, "mass.d"),
])
def test_scalar_diagnostics(obj, where):
    with pytest.raises(DocumentError) as exc:
        scalar_from_json(obj, "mass")
    assert exc.value.where == where


def test_space_partition_round_trip():
    sp = FiniteSpace(["a", "b", "c", "d"], [Fraction(1, 3), Fraction(1, 3), Fraction(1, 3), 0])
    sp2 = space_from_json(through_text(space_to_json(sp)))
    assert sp2 == sp
    part = Partition.from_atoms(sp, [["a"], ["b", "c"]])
    doc = through_text(partition_to_json(part, "s.json"))
    assert doc["null"] == ["d"]
    assert partition_from_json(doc, sp2) == part.on(sp2)
    rv = RandomVariable(sp, [1, Fraction(-2, 3), 5, 0])
    assert rv_from_json(through_text(rv_to_json(rv)), sp) == rv
    assert event_from_json({"event": ["a", "c"]}, sp) == sp.event(["a", "c"])


@pytest.mark.parametrize("doc,where", [
    ({"outcomes": [{"id": "a", "mass": 0.5}, {"id": "b", "mass": "1/2"}]}, "space.outcomes[0].mass"),
    ({"outcomes": [{"id": "a"}]}, "space.outcomes[0]"),
    ({"outcomes": []}, "space.outcomes"),
    ({"outcomes": [{"id": "a", "mass": "1/2"}, {"id": "b", "mass": "1/3"}]}, "space.outcomes"),
])
def test_space_diagnostics(doc, where):
    with pytest.raises(DocumentError) as exc:
        space_from_json(doc)
    assert exc.value.where == where


def test_partition_diagnostics():
    sp = FiniteSpace.uniform(3)
    a, b, c = sp.ids
    with pytest.raises(DocumentError, match="not covered"):
        partition_from_json({"atoms": [[a, b]]}, sp)
    with pytest.raises(DocumentError) as exc:
        partition_from_json({"atoms": [[a, b], [b, c]]}, sp)
    assert exc.value.where == "partition.atoms[1]"
    with pytest.raises(DocumentError) as exc:
        partition_from_json({"atoms": [[a, "zz"]]}, sp)
    assert exc.value.where == "partition.atoms[0][1]"


def test_json_syntax_error_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "a": ,\n}')
    with pytest.raises(DocumentError) as exc:
        load_json(p)
    assert exc.value.where.endswith("bad.json:2:8")


def test_scenario_documents():
    scen = scenario_from_json({"type": "gallery:warren", "params": {"p": "3"}})
    assert isinstance(scen, Warren) and scen.p == 3
    doc = {"type": "explicit", "tail": "constant",
           "params": {"space": {"outcomes": [{"id": "x", "mass": "1/2"}, {"id": "y", "mass": "1/2"}]},
                      "stages": [[["x"], ["y"]]] * 3, "limit": [["x"], ["y"]],
                      "events": {"E": ["x"]}}}
    scen = scenario_from_json(doc)
    assert isinstance(scen, ExplicitScenario) and len(scen.parts) == 3 and scen.events == {"E": 1}
    for bad, where in ((dict(doc, type="gallery:nope"), "scenario.type"),
                       (dict(doc, tail="sideways"), "scenario.tail"),
                       ({"type": "explicit", "params": {}}, "scenario.params"),
                       ({"type": "gallery:warren", "params": {"p": "1"}}, "scenario.params")):
        with pytest.raises(DocumentError) as exc:
            scenario_from_json(bad)
        assert exc.value.where == where


def test_significant_digits():
    assert significant(Fraction(1, 3)) == "0.333333333333333333333333333333"
    assert significant(Fraction(0)) == "0"
    assert significant(quad(0, 1, 6)) == "2.44948974278317809819728407471"
    assert significant(Fraction(1, 3 * 10**8)).startswith("3.33333333333333333333333333333e-9")


def test_constant_scenario_csv_is_all_zero(tmp_path, uniform4):
    a = Partition.from_atoms(uniform4, [uniform4.ids[:2], uniform4.ids[2:]])
    rep = detect(ExplicitScenario(uniform4, [a] * 4, a).materialize(), ("WC", "SC", "HC", "ONC", "ASC", "OC"))
    path = tmp_path / "s.csv"
    text = emit_series(rep, path)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows and {r["statistic"] for r in rows} == {"0"} and {r["exact"] for r in rows} == {"true"}
    assert path.read_text() == text
    side = json.loads((tmp_path / "s.exact.json").read_text())
    assert set(side["series"]) == {"WC", "SC", "HC", "ONC", "ASC", "OC", "WC-BP"}


def test_irrational_norms_flagged_inexact():
    mat = Warren(2).materialize(3)
    rep = detect(mat, ["ONC"], 2, 2)
    rows = series_rows(rep)
    assert [r["exact"] for r in rows] == [False] * 3
    side = json.loads(json.dumps(value_to_json(rep.series["ONC"][0].value)))
    assert "power" in side and side["exponent"] == "2/1"


def test_run_report_is_deterministic(tmp_path):
    p = tmp_path / "in.json"
    p.write_text("{}")
    r = RunReport(["metric"], {str(p): file_digest(p)}, {"D": "0/1"}, provenance=["b", "a", "a"])
    assert r.dumps() == RunReport(["metric"], {str(p): file_digest(p)}, {"D": "0/1"},
                                  provenance=["a", "b"]).dumps()
    assert r.to_json()["provenance"] == ["a", "b"]
    assert file_digest(p).startswith("sha256:")


@given(space_with(1, max_size=6))
def test_partition_document_round_trip(data):
    sp, a = data
    assert partition_from_json(through_text(partition_to_json(a)), sp) == a
