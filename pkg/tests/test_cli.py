import csv
import io
import json

import pytest

from renyi_ldp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# cfg: ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_periodic(capsys):
    code, out, _ = run(capsys, "periodic", "--beta", "1", "--n", "1", "--max-digit", "3")
    rows = _csv(out)
    assert code == 0 and len(rows) == 3
    assert rows[1]["surd"] == "(-1+1*sqrt(5))/2"
    assert rows[1]["xi"].startswith("0.6180339887498948482")
    assert all(r["exact_residual"] == "0" for r in rows)


def test_pressure_divergent_exit_zero(capsys):
    code, out, _ = run(capsys, "pressure", "--beta", "0.4", "--n", "1", "--max-digit", "10")
    obj = json.loads(out)
    assert code == 0 and obj["divergent"] is True and obj["hi"] is None


def test_gamma0(capsys):
    code, out, _ = run(capsys, "gamma0", "--beta", "1", "--pmax", "100", "--mmax", "100", "--tol", "0.01")
    obj = json.loads(out)
    assert code == 0 and -0.02 <= obj["gamma0"] <= 0.02 and obj["lo"] <= 0 <= obj["hi"]


def test_equidist_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nbeta = 1\nn_max = 3\nmax_digit = 2  # small\neps=0.2\n")
    code, out, _ = run(capsys, "equidist", "--config", str(cfg), "--max-digit", "3")
    rows = _csv(out)
    assert code == 0 and [r["n"] for r in rows] == ["2", "3"]
    assert "max_digit=3" in out.splitlines()[0]
    assert set(rows[0]) == {"n", "a_n", "z_n_lower", "tail", "tail_defect"}


def test_byte_identical_reruns(capsys):
    args = ("expo-check", "--n-min", "2", "--n-max", "3", "--max-digit", "5")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b and "true" in a


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "ensemble", "--n", "20", "--max-digit", "9")
    assert code == 3 and "budget" in err


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "pressure", "--beta", "-1")[0] == 2
    assert run(capsys, "pressure", "--tol", "0")[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("frobnicate=1\n")
    code, _, err = run(capsys, "pressure", "--config", str(bad))
    assert code == 2 and "frobnicate" in err
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


@pytest.mark.parametrize("cmd", ["ensemble", "corollary", "tightness", "rate-profile", "gibbs-check"])
def test_table_commands_emit_header(capsys, cmd):
    extra = {"gibbs-check": ["--letters", "1", "--pmax", "3", "--mmax", "3"], "tightness": ["--n-min", "3", "--n-max", "3"], "corollary": ["--n-min", "2", "--n-max", "2"]}.get(cmd, [])
    code, out, _ = run(capsys, cmd, "--n", "2", "--max-digit", "2", *extra)
    assert code == 0 and len(_csv(out)) >= 1


def test_json_tables(capsys):
    code, out, _ = run(capsys, "ensemble", "--n", "1", "--max-digit", "2", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and len(obj["rows"]) == 2 and obj["rows"][0]["word"] == "1"


def test_kac_spread_command(capsys):
    code, out, _ = run(capsys, "kac-spread", "--beta", "0.8", "--pmax", "60", "--mmax", "60", "--bins", "4", "--tol", "0.01")
    rows = _csv(out)
    assert code == 0 and len(rows) == 4 and float(rows[0]["defect"]) > 0
