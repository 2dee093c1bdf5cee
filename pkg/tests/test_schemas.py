# tests/test_schemas.py
import json

import pytest

from genus2core import Genus2FiveTuple
from genus3core import Genus3FiveTuple
from reporting import invariants_report
from schemas import Report, TupleFile
from utils.errors import SchemaError

ELLIPTIC = {
    "kind": "genus2",
    "base": {"genus": 1},
    "v1": {"expr": "(E 2 (line 1))"},
    "tau": {"degree": 1, "context": "L1"},
    "xi": {"pattern": "f2=f3=0"},
}


def _pg3_file(**extra):
    identity = [["1" if i == j else "0" for j in range(6)] for i in range(6)]
    body = {
        "kind": "genus3",
        "v1": {"degrees": [2, 2, 2]},
        "xi": {"v2_degrees": [4] * 6, "sigma2": identity},
    }
    body.update(extra)
    return TupleFile.model_validate(body)


def test_elliptic_tuple_file():
    t = TupleFile.from_json(json.dumps(ELLIPTIC)).to_tuple()
    assert isinstance(t, Genus2FiveTuple)
    assert (t.v1_degree, t.tau_degree, t.pattern) == (1, 1, (2, 3))
    assert str(t.tau_context) == "[0]+L1"


def test_genus3_tuple_file():
    t = _pg3_file().to_tuple()
    assert isinstance(t, Genus3FiveTuple)
    assert t.sigma2.target_degrees == (4,) * 6


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        json.dumps({"kind": "genus4", "v1": {"degree": 1}}),
        json.dumps({"kind": "genus2", "v1": {}}),
        json.dumps({"kind": "genus2", "v1": {"degrees": [1, 1], "expr": "(line 1)"}}),
        json.dumps({"kind": "genus2", "v1": {"degrees": [1, 1]}, "xi": {"sigma2": [["1"]]}}),
    ],
)
def test_invalid_files_raise_schema_error(text):
    with pytest.raises(SchemaError):
        TupleFile.from_json(text)


def test_conversion_errors():
    with pytest.raises(SchemaError):
        TupleFile.model_validate({"kind": "genus2", "v1": {"degrees": [1, 1], "degree": 3}}).to_tuple()
    with pytest.raises(SchemaError):
        TupleFile.model_validate({"kind": "genus2", "v1": {"expr": "(E 2 (line 1))"}}).to_tuple()
    with pytest.raises(SchemaError):
        _pg3_file(w=["1", "2"]).to_tuple()


def test_bad_sigma2_entry_degree():
    body = {
        "kind": "genus2",
        "v1": {"degrees": [1, 1]},
        "tau": {"degree": 5},
        "xi": {"v2_degrees": [4, 4, 3], "sigma2": [["t0", "0", "0"], ["0", "t1^2", "0"], ["0", "0", "t0"]]},
    }
    with pytest.raises(SchemaError):
        TupleFile.model_validate(body).to_tuple()


def test_dump_omits_missing_fields():
    text = TupleFile.model_validate(ELLIPTIC).dump()
    assert "\"w\"" not in text
    assert TupleFile.from_json(text) == TupleFile.model_validate(ELLIPTIC)


def test_report_json_is_sorted():
    rep = Report(command="x", invariants={"b": 1, "a": 2})
    body = rep.to_json()
    assert body.index("\"a\"") < body.index("\"b\"")
    assert json.loads(body)["admissibility"] == []


def test_invariants_report_elliptic():
    rep = invariants_report(TupleFile.model_validate(ELLIPTIC))
    assert rep.invariants["chi"] == 1
    assert rep.invariants["K2"] == 3
    assert rep.invariants["horikawa_defect"] == 1
    status = {c.name: c.status for c in rep.admissibility}
    assert status["i"] == "verified"
    assert status["ii"] == "out-of-scope"


def test_invariants_report_genus3():
    rep = invariants_report(_pg3_file())
    assert (rep.invariants["chi"], rep.invariants["K2"]) == (4, 2)
    assert rep.bundles["V3"]["degrees"] == [6] * 10
    assert rep.invariants["torsion_ranks"]["T4"] == 5
