import json

import pytest

import app


def _run(capsys, *argv):
    code = app.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_measure_cyclic_group_conditionals(capsys, reports_dir):
    code, out, _ = _run(capsys, "measure", "--ell", "3", "--n", "1", "--t", "1", "--group", "1", "--out", "m")
    assert code == app.EXIT_OK
    assert "Q^1μ" in out
    with open(reports_dir / "m.json", encoding="utf-8") as f:
        data = json.load(f)
    assert data["params"]["t"] == 1
    assert "malle" in data["group"]
    conditionals = sorted(float(c["conditional"]) for c in data["classes"])
    assert conditionals == pytest.approx([0.25, 0.375, 0.375])


def test_measure_csv_output(capsys, reports_dir):
    code, _, _ = _run(capsys, "measure", "--group", "1,1", "--format", "csv", "--out", "tabela")
    assert code == app.EXIT_OK
    lines = (reports_dir / "tabela.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",")[0] == "group"
    assert len(lines) == 11


def test_measure_trivial_group(capsys):
    code, out, _ = _run(capsys, "measure", "--group", "")
    assert code == app.EXIT_OK
    assert "0.639" in out


def test_measure_single_triple(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(
        json.dumps({"ell": 3, "n": 1, "exponents": [1], "omega": [], "psi": [[1]]}), encoding="utf-8"
    )
    code, out, _ = _run(capsys, "measure", "--triple", str(path))
    assert code == app.EXIT_OK
    assert "Q^0μ" in out


def test_measure_requires_a_group(capsys):
    code, _, err = _run(capsys, "measure")
    assert code == app.EXIT_CONFIG
    assert "--group" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("measure", "--ell", "4", "--group", "1"),
        ("measure", "--n", "0", "--group", "1"),
        ("measure", "--t", "-1", "--group", "1"),
        ("measure", "--group", "1,a"),
        ("sample", "--model", "nonlinear", "--N", "1"),
        ("sample", "--q", "10", "--N", "1"),
        ("sample", "--K", "1", "--N", "1"),
    ],
)
def test_invalid_arguments_exit_with_config_error(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == app.EXIT_CONFIG
    assert "Configuração inválida" in err


def test_all_problems_are_reported_together(capsys):
    code, _, err = _run(capsys, "measure", "--ell", "4", "--n", "0", "--group", "1")
    assert code == app.EXIT_CONFIG
    assert "--ell" in err and "--n" in err


def test_sample_with_no_draws_writes_empty_histogram(capsys, tmp_path):
    out = tmp_path / "s"
    code, _, _ = _run(capsys, "sample", "--N", "0", "--out", str(out))
    assert code == app.EXIT_OK
    with open(tmp_path / "s_histogram.json", encoding="utf-8") as f:
        data = json.load(f)
    assert data["total"] == 0 and data["classes"] == []


def test_sample_writes_report(capsys, tmp_path):
    out = tmp_path / "run"
    code, stdout, _ = _run(
        capsys, "sample", "--g", "3", "--K", "8", "--N", "60", "--seed", "5", "--workers", "1",
        "--report-only", "--max-unresolved", "1", "--out", str(out),
    )
    assert code == app.EXIT_OK
    assert "TV =" in stdout
    with open(tmp_path / "run_report.json", encoding="utf-8") as f:
        report = json.load(f)
    with open(tmp_path / "run_histogram.json", encoding="utf-8") as f:
        hist = json.load(f)
    assert report["histogram_fingerprint"] == hist["fingerprint"]
    assert hist["total"] == 60


def test_oracle_single_suite(capsys):
    code, out, _ = _run(capsys, "oracle", "--suite", "begs", "--ell", "3", "--group", "1,1", "--n", "1")
    assert code == app.EXIT_OK
    assert "[PASS] begs" in out
    assert "81" in out


def test_bad_environment_is_a_config_error(capsys, monkeypatch):
    monkeypatch.setenv("BEG_TOL", "abc")
    app.get_settings.cache_clear()
    try:
        code, _, err = _run(capsys, "measure", "--group", "1")
    finally:
        app.get_settings.cache_clear()
    assert code == app.EXIT_CONFIG
    assert "BEG_TOL" in err
