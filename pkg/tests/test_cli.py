# tests/test_cli.py
import json

import pytest
from click.testing import CliRunner

from cli import main

ELLIPTIC = {
    "kind": "genus2",
    "base": {"genus": 1},
    "v1": {"expr": "(E 2 (line 1))"},
    "tau": {"degree": 1, "context": "L1"},
    "xi": {"pattern": "f2=f3=0"},
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tuple_file(tmp_path):
    path = tmp_path / "tuple.json"
    path.write_text(json.dumps(ELLIPTIC), encoding="utf-8")
    return path


def test_invariants_command(runner, tuple_file):
    result = runner.invoke(main, ["invariants", str(tuple_file)])
    assert result.exit_code == 0, result.output
    body = json.loads(result.stdout)
    assert body["command"] == "invariants"
    assert (body["invariants"]["chi"], body["invariants"]["K2"]) == (1, 3)


def test_invariants_rejects_bad_file(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"kind\": \"genus2\"}", encoding="utf-8")
    result = runner.invoke(main, ["invariants", str(path)])
    assert result.exit_code == 2


def test_classify_command(runner):
    result = runner.invoke(main, ["classify", "--pattern", "f2=f3=0", "--tau", "L2"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.stdout)
    assert body["invariants"]["stratum"] == "III"
    assert body["invariants"]["h0_A6"] == 4


def test_classify_exit_codes(runner):
    assert runner.invoke(main, ["classify", "--pattern", "f0=0"]).exit_code == 2
    assert runner.invoke(main, ["classify", "--pattern", "f1=f2=f3=0"]).exit_code == 3


def test_pg3_example_command(runner):
    result = runner.invoke(main, ["pg3-example", "--d", "0"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.stdout)
    assert body["invariants"]["linear_system_dim"] == 44
    assert body["bundles"]["S2V2_display_value"]["rank"] == 15


def test_pg3_example_out_of_scope(runner):
    assert runner.invoke(main, ["pg3-example", "--d", "4"]).exit_code == 4


def test_stratify_command_writes_tsv(runner, tmp_path):
    out = tmp_path / "run.tsv"
    result = runner.invoke(main, ["stratify", "--samples", "5", "--lines", "0", "--seed", "2", "-o", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].split("\t") == ["seed", "trial", "a", "b", "c", "d", "rank", "corank", "h0"]
    assert len([ln for ln in lines[1:] if not ln.startswith("#")]) == 5


def test_stratify_rejects_composite_prime(runner):
    assert runner.invoke(main, ["stratify", "--samples", "2", "--prime", "9"]).exit_code == 2


def test_a6_command(runner, tuple_file):
    from_file = json.loads(runner.invoke(main, ["a6", "--file", str(tuple_file)]).stdout)
    assert from_file["bundles"]["A6_tilde"]["h0"] == 5
    general = json.loads(runner.invoke(main, ["a6"]).stdout)
    assert general["bundles"]["A6_tilde"]["h0"] == 2


def test_torsion_command(runner):
    result = runner.invoke(main, ["torsion", "--n", "4", "--deg-tau", "3", "--s", "1", "--s", "2"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.stdout)
    assert body["invariants"]["structure"]["degree"] == 12
    for row in body["invariants"]["local"]:
        assert row["expected"] == row["oracle"]


def test_torsion_command_inconsistent(runner):
    assert runner.invoke(main, ["torsion", "--n", "4", "--deg-tau", "3", "--s", "1"]).exit_code == 3


def test_horikawa_command(runner):
    body = json.loads(runner.invoke(main, ["horikawa", "--s", "1", "--lambda-zero"]).stdout)
    assert body["invariants"]["types"] == ["III_1", "V"]
    assert body["invariants"]["ambiguous"] is True
