import io
import json

import pytest

from helmshape.cli import load_config, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_regularity_json():
    code, out = call("regularity", "--r", "2", "--q", "2", "--k", "1", "--beta", "1",
                     "--mode", "sharp", "--format", "json")
    assert code == 0
    js = json.loads(out)
    assert js["md"]["index"] == "1" and js["sd"]["index"] == "1"
    assert js["provenance"]["schema"] == 1


def test_regularity_k_defaults_to_r():
    _, out = call("regularity", "--r", "3", "--q", "2", "--beta", "1")
    assert json.loads(out)["query"]["k"] == "3"


def test_precondition_message(capsys):
    code, out = call("regularity", "--r", "1", "--q", "0.5", "--beta", "1")
    assert code == 2 and out == ""
    assert "q ≥ 1" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["nope"], ["regularity", "--r", "1"],
                                  ["solve", "--beta", "7"], ["solve", "--format", "csv"],
                                  ["solve", "--beta", "3", "--curve", "ellipse"],
                                  ["taylor", "--ladder", "1,x"]])
def test_usage_errors(argv, capsys):
    assert call(*argv)[0] == 2
    assert capsys.readouterr().err.startswith("helmshape: error")


def test_threads_env_validated(monkeypatch):
    monkeypatch.setenv("HELMSHAPE_THREADS", "zero")
    assert call("regularity", "--r", "1", "--q", "1", "--beta", "0")[0] == 2


def test_json_byte_identical():
    argv = ("taylor", "--beta", "2", "--field", "random", "--seed", "3", "--target", "CMD")
    a, b = call(*argv), call(*argv)
    assert a == b and a[0] == 0


def test_taylor_csv():
    code, out = call("taylor", "--beta", "1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "label,target,t,remainder" and len(lines) == 6


def test_seed_changes_random_field():
    a = call("derive", "--beta", "1", "--field", "random", "--seed", "1")[1]
    b = call("derive", "--beta", "1", "--field", "random", "--seed", "2")[1]
    assert a != b


def test_table_format():
    code, out = call("mp-residual", "--beta", "1", "--format", "table")
    assert code == 0
    assert any(line.startswith("passed") and "true" in line for line in out.splitlines())


@pytest.mark.parametrize("cmd", ["hadamard", "crosscheck"])
def test_checks_exit_zero(cmd):
    code, out = call(cmd, "--beta", "1")
    assert code == 0 and json.loads(out)["passed"]


def test_failed_check_exits_one():
    # two ladder points with a non-asymptotic t fail the slope criterion
    code, out = call("taylor", "--beta", "1", "--target", "MD",
                     "--ladder", "0.9,0.8,0.7,0.6")
    assert code == 1 and json.loads(out)["passed"] is False


def test_solve_traces():
    code, out = call("solve", "--beta", "2", "--N", "64")
    js = json.loads(out)
    assert code == 0 and len(js["traces"]["exterior"]["lam"]) == 64
    assert js["provenance"]["backend"] == "mie"


def test_solve_bie_reports_residual():
    js = json.loads(call("solve", "--beta", "1", "--curve", "ellipse")[1])
    assert js["provenance"]["backend"] == "bie" and js["boundary_residual"] < 1e-9


def test_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# run parameters\nbeta = 2\nkappa = 3.5\nN = 32\n")
    js = json.loads(call("solve", "--config", str(cfg))[1])
    assert js["provenance"]["beta"] == 2 and js["provenance"]["params"]["kappa"] == 3.5
    js = json.loads(call("solve", "--config", str(cfg), "--beta", "1")[1])
    assert js["provenance"]["beta"] == 1 and js["provenance"]["params"]["kappa"] == 3.5


def test_config_fills_required(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("r = 2\nq = 2\nk = 1\nbeta = 1\n")
    code, out = call("regularity", "--config", str(cfg))
    assert code == 0 and json.loads(out)["md"]["index"] == "1"


@pytest.mark.parametrize("text", ["bogus = 1\n", "beta = seven\n", "beta = 9\n", "no equals sign\n"])
def test_config_rejects(tmp_path, text):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    assert call("solve", "--config", str(cfg))[0] == 2


def test_config_missing_file(tmp_path):
    assert call("solve", "--config", str(tmp_path / "none.cfg"))[0] == 2


def test_load_config_strips_comments(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("kappa = 2  # exterior\n\n  field-x = a=b\n")
    assert load_config(cfg) == {"kappa": "2", "field_x": "a=b"}
