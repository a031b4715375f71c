import json

import pytest

from nlsym import __version__
from nlsym.cli import main
from nlsym.config import ExperimentConfig, config_hash, load_config

TOY = {
    "kernel": {"family": "radial_profile", "profile": "constant", "value": 1.0, "truncation_radius": 3.0},
    "domain": {"shape": "interval", "lower": [0.0], "upper": [2.0], "h": 1.0},
}

FRAC = {
    "kernel": {"family": "fractional", "alpha": 0.5},
    "domain": {"shape": "interval", "lower": [-1.0], "upper": [1.0], "h": 0.0625},
    "nonlinearity": {"family": "constant", "value": 1.0},
    "spectral": {"scan_scales": [1.0, 0.5]},
    "verify": {"samples": 100},
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(path)


def _run(tmp_path, cmd, cfg, *extra):
    out = tmp_path / "out"
    return main([cmd, "--config", _write(tmp_path, cfg), "--out", str(out), *extra]), out


def test_verify_toy_lists_matrix(tmp_path):
    code, out = _run(tmp_path, "verify", TOY)
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["passed"]
    assert report["A"] == [[5.0, -1.0], [-1.0, 5.0]]
    assert report["version"] == __version__


def test_missing_kernel_block(tmp_path, capsys):
    cfg = {k: v for k, v in TOY.items() if k != "kernel"}
    code, _ = _run(tmp_path, "verify", cfg)
    assert code == 2
    assert "kernel" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = {**TOY, "kernal": {}}
    assert _run(tmp_path, "assemble", cfg)[0] == 2
    assert "kernal" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    code, _ = _run(tmp_path, "assemble", '{"kernel": {\n  "family": "fractional",,\n}}')
    assert code == 2
    assert ":2:" in capsys.readouterr().err


def test_missing_alpha_field_diagnostic(tmp_path, capsys):
    cfg = {**TOY, "kernel": {"family": "fractional"}}
    assert _run(tmp_path, "assemble", cfg)[0] == 2
    assert "alpha" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main(["frobnicate"]) == 2
    assert main(["verify"]) == 2
    assert main(["verify", "--config", str(tmp_path / "absent.json")]) == 2


def test_domain_errors_exit_two(tmp_path):
    cfg = {**TOY, "domain": {"shape": "interval", "lower": [0.1], "upper": [0.2], "h": 1.0}}
    assert _run(tmp_path, "assemble", cfg)[0] == 2


def test_assemble_outputs(tmp_path):
    code, out = _run(tmp_path, "assemble", TOY)
    assert code == 0
    lines = (out / "matrix.csv").read_text().splitlines()
    chash = config_hash(load_config(json.dumps(TOY)))
    assert lines[0] == f"# config_hash={chash} version={__version__}"
    assert lines[1] == "i,j,value"
    assert "0,0,5.0" in lines
    header = json.loads((out / "matrix.json").read_text())
    assert header["config_hash"] == chash and header["N"] == 1
    echo = json.loads((out / "config.echo.json").read_text())
    assert echo["solver"]["tol"] == 1e-10 and echo["domain"]["padding"] == 8
    assert not list(out.glob("*.tmp"))


def test_sweep_reports_lambda0_zero(tmp_path):
    code, out = _run(tmp_path, "sweep", FRAC, "--threads", "2")
    assert code == 0
    doc = json.loads((out / "sweep.json").read_text())
    assert doc["lambda0"] == 0.0 and doc["violations"] == []
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[1] == "lambda,min_v,certificate,S_lambda"


def test_lambda1_and_solve(tmp_path):
    code, out = _run(tmp_path, "lambda1", FRAC)
    assert code == 0
    spec = json.loads((out / "spectral.json").read_text())
    assert spec["lambda1_h"] >= spec["analytic_bound"]
    assert len((out / "scan.csv").read_text().splitlines()) == 4
    code, out = _run(tmp_path, "solve", FRAC)
    assert code == 0
    assert json.loads((out / "solve.json").read_text())["converged"]


def test_verdict_failure_exit_one(tmp_path):
    cfg = {**FRAC, "solver": {"max_iter": 1, "tol": 1e-30}, "nonlinearity": {"family": "logistic", "rate": 2.0, "source": 1.0}}
    assert _run(tmp_path, "solve", cfg)[0] == 1


def test_reproducible_outputs(tmp_path, monkeypatch):
    a = tmp_path / "a"
    b = tmp_path / "b"
    cfg = _write(tmp_path, FRAC)
    assert main(["sweep", "--config", cfg, "--out", str(a), "--threads", "1"]) == 0
    monkeypatch.setenv("NLSYM_THREADS", "3")
    assert main(["sweep", "--config", cfg, "--out", str(b)]) == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_seed_override_changes_hash(tmp_path):
    cfg = load_config(json.dumps(FRAC))
    assert config_hash(cfg) != config_hash(cfg.model_copy(update={"seed": 5}))
    code, out = _run(tmp_path, "verify", TOY, "--seed", "7")
    assert code == 0
    assert json.loads((out / "config.echo.json").read_text())["seed"] == 7


@pytest.mark.parametrize("block", [
    {"shape": "ball_p", "center": [0, 0], "radius": 1.0, "h": 0.25},
    {"shape": "union", "parts": [{"shape": "interval", "lower": [-2], "upper": [-1]},
                                 {"shape": "interval", "lower": [1], "upper": [2]}], "h": 0.25},
])
def test_schema_domains(block):
    cfg = ExperimentConfig.model_validate({"kernel": {"family": "fractional", "alpha": 0.5}, "domain": block})
    assert cfg.domain.dim in (1, 2)
