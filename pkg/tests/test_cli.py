import csv
import io
import json

import numpy as np
import pytest

from specball import cli
from specball.flows import matrix_to_json


def run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def test_tables_matches_golden(capsys):
    code, out = run(capsys, ["tables", "--n", "3"])
    assert code == 0
    payload = json.loads(out)
    assert payload["schema_version"] == 1
    assert payload["config"]["command"] == "tables"
    assert payload["golden_match"] is True


def test_tables_n2_emits_three_generators(capsys):
    code, out = run(capsys, ["tables", "--n", "2"])
    assert code == 0
    payload = json.loads(out)
    assert payload["golden_match"] is None
    assert len(payload["tables"]["generators"]) == 3


def test_tables_n10_uses_bracketed_syntax(capsys):
    code, out = run(capsys, ["tables", "--n", "10"])
    assert code == 0
    payload = json.loads(out)
    assert payload["tables"]["variables"][0] == "x[1,1]"


def test_verify_all(capsys):
    code, out = run(capsys, ["verify", "--all", "--n", "2"])
    assert code == 0
    payload = json.loads(out)
    assert all(r["holds"] for r in payload["identities"])


def test_verify_single_id(capsys):
    code, out = run(capsys, ["verify", "--id", "d2-hyperbolic", "--n", "3"])
    assert code == 0
    payload = json.loads(out)
    (res,) = payload["identities"]
    assert res["holds"] and not res["matches_printed"]


def test_verify_unknown_id_is_usage_error(capsys):
    code, _ = run(capsys, ["verify", "--id", "not-a-thing", "--n", "2"])
    assert code == 2


def test_missing_subcommand_is_usage_error(capsys):
    assert cli.main([]) == 2


def test_generate_small(capsys):
    code, out = run(capsys, ["generate", "--n", "2", "--max-degree", "2"])
    assert code == 0
    payload = json.loads(out)
    for entry in payload["degrees"]:
        assert entry["certified"]
        assert entry["achieved_rank"] == entry["target_rank"]
        assert not entry["missing_witnesses"]


def test_generate_budget_exhaustion(capsys):
    code, out = run(capsys, ["generate", "--n", "2", "--max-degree", "3",
                             "--budget-brackets", "4"])
    assert code == 3
    payload = json.loads(out)
    assert not payload["complete"]


def test_kernels_csv(capsys):
    code, out = run(capsys, ["kernels", "--n", "2", "--field", "xi1", "--m", "0..4"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config:")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert rows[0][:6] == ["n", "field", "m", "slice_dim", "dim_ker", "dim_ker_sq"]
    data = rows[1:]
    assert [int(r[4]) for r in data] == [1, 2, 4, 6, 9]
    # weight DP column agrees with the exact nullity
    assert all(r[7] == r[4] for r in data)


def test_growth_chain(capsys):
    code, out = run(capsys, ["growth", "--chain", "--m", "1..12"])
    assert code == 0
    rows = list(csv.reader(io.StringIO("\n".join(out.splitlines()[1:]))))[1:]
    assert all(r[-1] == "True" for r in rows)


def test_growth_field(capsys):
    code, out = run(capsys, ["growth", "--field", "theta12", "--n", "2", "--m", "0..6"])
    assert code == 0


def test_jets(capsys):
    code, out = run(capsys, ["jets", "--n", "2", "--k", "5", "--m", "0..10"])
    assert code == 0
    assert "# crossover_m0: 5" in out


def test_jets_cumulative(capsys):
    code, out = run(capsys, ["jets", "--n", "2", "--k", "5", "--m", "0..10",
                             "--cumulative"])
    assert code == 0
    assert "# crossover_m0: None" in out


@pytest.fixture
def orbit_files(tmp_path):
    A = np.array([[0.3, 0.2], [0.1, -0.2]], dtype=complex)
    mat = tmp_path / "A.json"
    mat.write_text(json.dumps(matrix_to_json(A)))
    word = tmp_path / "w.json"
    word.write_text(json.dumps([
        {"overshear": {"theta": [1, 2], "f": "x11", "t": [0.3, 0.0]}},
        {"transpose": {}},
    ]))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(matrix_to_json(np.diag([1.5, 0.2]))))
    empty = tmp_path / "empty.json"
    empty.write_text("[]")
    return mat, word, bad, empty


def test_orbit_identity_word_echoes_input(capsys, orbit_files):
    mat, word, bad, empty = orbit_files
    code, out = run(capsys, ["orbit", "--word", str(empty), "--matrix", str(mat)])
    assert code == 0
    payload = json.loads(out)
    assert payload["result"] == payload["trajectory"][0]


def test_orbit_fibre_check(capsys, orbit_files):
    mat, word, bad, empty = orbit_files
    code, out = run(capsys, ["orbit", "--word", str(word), "--matrix", str(mat),
                             "--check-fibre"])
    assert code == 0
    payload = json.loads(out)
    assert payload["fibre_drift"] < 1e-8
    assert payload["in_ball"] is True
    assert len(payload["trajectory"]) == 3


def test_orbit_outside_ball_is_precondition_error(capsys, orbit_files):
    mat, word, bad, empty = orbit_files
    code, _ = run(capsys, ["orbit", "--word", str(word), "--matrix", str(bad)])
    assert code == 4


def test_out_file_atomic_write(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code = cli.main(["tables", "--n", "3", "--out", str(out_path)])
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["golden_match"] is True
    assert not list(tmp_path.glob(".specball-*"))


def test_reports_carry_config_echo(capsys):
    code, out = run(capsys, ["generate", "--n", "2", "--max-degree", "1"])
    payload = json.loads(out)
    assert payload["schema_version"] == 1
    assert payload["config"]["n"] == 2 and payload["config"]["max_degree"] == 1
