import csv
import io
import json

import pytest

from poiseuille_waves import cli
from poiseuille_waves.config import OUTDIR_ENV


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_json_and_csv_agree(capsys):
    code, out, _ = run(capsys, "solve", "--epsilon", "0.05", "--json")
    assert code == 0
    rec = json.loads(out)
    code, out_csv, _ = run(capsys, "solve", "--epsilon", "0.05", "--csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out_csv)))
    assert float(row["mu_tilde_star"]) == rec["mu_tilde_star"]
    assert float(row["lambda_star"]) == rec["lambda_star"]
    assert float(row["residual_det"]) == rec["residuals"]["det"]
    assert rec["mu_tilde_star"] == pytest.approx(0.5129346612358009, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["solve", "--epsilon", "-1"],
    ["solve", "--epsilon", "0.3"],
    ["sweep", "--epsilons", "0.05"],
    ["sweep", "--epsilons", "a,b"],
    ["bogus"],
    ["field", "--sigma", "0.7", "--out", "x.csv", "--nx", "16", "--ny", "9"],
    ["verify", "--groups", "nope"],
])
def test_usage_errors(capsys, tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == 64


def test_config_unknown_key(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"nope": 1}')
    assert run(capsys, "solve", "--config", str(p))[0] == 64


def test_sweep(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--epsilons", "0.1,0.05", "--n-max", "3", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.reader((tmp_path / "sweep.csv").open()))
    assert rows[0] == cli.sweep_columns(3)
    assert len(rows) == 3 and all(r[-1] == "ok" for r in rows[1:])


def test_sweep_env_outdir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    assert run(capsys, "sweep", "--epsilons", "0.1,0.05", "--n-max", "2")[0] == 0
    assert (tmp_path / "sweep.csv").exists()


def test_field(capsys, tmp_path):
    out = tmp_path / "f.csv"
    code, _, _ = run(capsys, "field", "--sigma", "0.05", "--nx", "16", "--ny", "9", "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 1 + 16 * 9
    assert json.loads(out.with_suffix(".json").read_text())["sigma"] == 0.05


def test_verify_pass_and_forced_fail(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--groups", "identities,kernel", "--out", str(tmp_path))
    assert code == 0 and "FAIL" not in out
    assert json.loads((tmp_path / "verification_report.json").read_text())["passed"]
    code, out, _ = run(capsys, "verify", "--groups", "kernel", "--tolerance", "1e-300", "--out", str(tmp_path))
    assert code == 1 and "FAIL" in out
    assert not json.loads((tmp_path / "verification_report.json").read_text())["passed"]


def test_solver_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise cli.kernel.DispersionError("no root")

    monkeypatch.setattr(cli, "solve_record", boom)
    code, out, _ = run(capsys, "solve")
    assert code == 2 and json.loads(out)["error"] == "DispersionError"
