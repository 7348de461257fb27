import csv
import json

import pytest

from qkdlab import cli, gates


def _run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_json_round_trips(capsys):
    code, out, _ = _run(
        capsys,
        ["run", "--protocol", "bb84", "--scenario", "conv", "--eve", "hd",
         "--trials", "5", "--seed", "7", "--format", "json"],
    )
    assert code == 0
    doc = json.loads(out)
    assert cli.render_json(doc) == out
    assert doc["aggregate"]["qber"] == 0.0
    assert doc["aggregate"]["alice_knowledge"] == 1.0
    assert doc["aggregate"]["matches"] == 1.0
    assert doc["config"]["scenario"] == "conv"
    assert doc["catalog_fingerprint"] == gates.catalog_fingerprint()


def test_run_output_is_byte_deterministic(capsys):
    argv = ["run", "--protocol", "ssp", "--eve", "standard", "--trials", "5",
            "--seed", "11", "--format", "json"]
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second


def test_run_csv_has_trial_rows_and_mean(capsys):
    code, out, _ = _run(
        capsys,
        ["run", "--protocol", "bb84", "--trials", "3", "--seed", "7", "--format", "csv"],
    )
    assert code == 0
    assert "\r\n" in out
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 4
    assert rows[-1]["trial"] == "mean"
    assert float(rows[-1]["qber"]) == 0.0
    assert rows[0]["alice_knowledge"] == ""


def test_run_table_format_shows_percentages(capsys):
    code, out, _ = _run(
        capsys,
        ["run", "--protocol", "bb84", "--eve", "standard", "--trials", "5", "--seed", "7"],
    )
    assert code == 0
    assert "%" in out
    assert "protocol=bb84" in out


def test_run_rejects_zero_trials(capsys):
    code, _, err = _run(capsys, ["run", "--protocol", "bb84", "--trials", "0"])
    assert code == cli.EXIT_CONFIG
    assert "trials" in err


def test_run_rejects_invalid_pairing(capsys):
    code, _, err = _run(
        capsys, ["run", "--protocol", "bb84", "--scenario", "control", "--eve", "hd"]
    )
    assert code == cli.EXIT_CONFIG
    assert "eavesdropper" in err


def test_run_rejects_unknown_protocol():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["run", "--protocol", "b92"])
    assert excinfo.value.code == cli.EXIT_CONFIG


def test_run_writes_out_file(tmp_path, capsys):
    out_path = tmp_path / "doc.json"
    code, out, _ = _run(
        capsys,
        ["run", "--protocol", "bb84", "--trials", "2", "--seed", "7",
         "--format", "json", "--out", str(out_path)],
    )
    assert code == 0
    assert out == ""
    doc = json.loads(out_path.read_text())
    assert doc["config"]["trials"] == 2


def test_seed_env_var_sets_default(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "123")
    _, out, _ = _run(
        capsys, ["run", "--protocol", "bb84", "--trials", "2", "--format", "json"]
    )
    assert json.loads(out)["config"]["seed"] == 123


def test_seed_env_var_must_be_integer(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "not-a-seed")
    code, _, err = _run(capsys, ["run", "--protocol", "bb84", "--trials", "2"])
    assert code == cli.EXIT_CONFIG
    assert cli.SEED_ENV in err


def test_validate_gates_passes_and_reports(capsys):
    code, out, _ = _run(capsys, ["validate-gates", "--seed", "7"])
    assert code == cli.EXIT_OK
    assert "FAIL" not in out
    lines = [line for line in out.splitlines() if line.startswith("PASS")]
    assert any("unitary[QidJ]" in line for line in lines)
    assert any("candidate[bruss]" in line for line in lines)
    assert out.strip().endswith("checks passed")


def test_validate_gates_dump_writes_catalog(tmp_path, capsys):
    dump_path = tmp_path / "catalog.json"
    code, _, _ = _run(capsys, ["validate-gates", "--seed", "7", "--dump", str(dump_path)])
    assert code == cli.EXIT_OK
    dump = json.loads(dump_path.read_text())
    names = {item["name"] for item in dump}
    assert {"X", "QidPhi", "CHJ", "QidConv3"} <= names
    entry = next(item for item in dump if item["name"] == "X")
    assert entry["dims"] == [2]
    assert entry["matrix"][0][1] == [1.0, 0.0]


def test_validate_gates_failure_exit_code(capsys, monkeypatch):
    broken = [gates.CheckResult("synthetic", False, "forced failure")]
    monkeypatch.setattr(cli.gates, "validate_catalog", lambda rng: broken)
    code, out, _ = _run(capsys, ["validate-gates"])
    assert code == cli.EXIT_VALIDATION
    assert "FAIL synthetic" in out


def test_reproduce_paper_writes_tables_and_figure_data(tmp_path, capsys):
    code, out, _ = _run(
        capsys, ["reproduce-paper", "--seed", "2", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    files = {p.name for p in tmp_path.iterdir()}
    assert files == {
        "results_bb84.csv",
        "results_hdbb84.csv",
        "results_ssp.csv",
        "qber_with_eve.csv",
    }
    rows = {
        row["scenario"]: row
        for row in csv.DictReader((tmp_path / "results_bb84.csv").read_text().splitlines())
    }
    assert set(rows) == {
        "control", "scenario1", "scenario2",
        "control_eve", "scenario1_eve", "scenario2_eve",
    }
    for label in ("control", "scenario1", "scenario2"):
        assert float(rows[label]["qber"]) == 0.0
        assert float(rows[label]["matches"]) == 1.0
    assert 0.22 <= float(rows["control_eve"]["qber"]) <= 0.28
    assert float(rows["scenario1_eve"]["qber"]) == 0.0
    assert float(rows["scenario1_eve"]["alice_knowledge"]) == 1.0

    figure = list(csv.DictReader((tmp_path / "qber_with_eve.csv").read_text().splitlines()))
    assert len(figure) == 9
    eve_free_rows = [r for r in figure if r["scenario"] != "control_eve"]
    assert all(float(r["qber"]) == 0.0 for r in eve_free_rows)


def test_hypothesis_table_lists_dimension_rule(capsys):
    code, out, _ = _run(capsys, ["hypothesis-table"])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert lines[1].split() == ["bb84", "2", "2", "4"]
    assert lines[2].split() == ["hdbb84", "4", "2", "8"]
    assert lines[3].split() == ["ssp", "2", "3", "6"]
