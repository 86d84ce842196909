import json
import math

import pytest
from click.testing import CliRunner

from conftest import small_config
from degenlab.cli import main

PI = math.pi


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(cfg.model_dump_json())
    return str(path)


def test_solve_pass_exit_zero_and_artifacts(tmp_path, runner):
    path = _write(tmp_path, small_config())
    out = tmp_path / "out"
    result = runner.invoke(main, ["solve", "--config", path, "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output
    assert (out / "report.json").exists()
    assert (out / "trace.csv").exists()
    assert (out / "energy.csv").exists()
    payload = json.loads((out / "report.json").read_text())
    assert payload["passed"] is True


def test_verify_linfty_failure_exit_one(tmp_path, runner):
    cfg = small_config(
        cylinder={
            "vertex_x": [PI / 2, PI / 2],
            "vertex_t": 0.4,
            "theta": 0.2,
            "rho": 0.3,
            "sigma": 0.5,
        },
        c_fit=1e-9,
    )
    path = _write(tmp_path, cfg)
    result = runner.invoke(main, ["verify-linfty", "--config", path])
    assert result.exit_code == 1, result.output
    assert "FAIL" in result.output


def test_missing_config_exit_two(tmp_path, runner):
    result = runner.invoke(main, ["solve", "--config", str(tmp_path / "absent.json")])
    assert result.exit_code == 2


def test_invalid_config_exit_two(tmp_path, runner):
    body = json.loads(small_config().model_dump_json())
    body["grid"]["mystery"] = 1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(body))
    result = runner.invoke(main, ["solve", "--config", str(path)])
    assert result.exit_code == 2


def test_domain_error_exit_two(tmp_path, runner):
    cfg = small_config(
        cylinder={
            "vertex_x": [PI / 2, PI / 2],
            "vertex_t": 0.4,
            "theta": 0.35,
            "rho": 9.0,
            "sigma": 0.5,
        }
    )
    path = _write(tmp_path, cfg)
    result = runner.invoke(main, ["solve", "--config", path])
    assert result.exit_code == 2


def test_isotropic_flag_switches_variant(tmp_path, runner):
    cfg = small_config(params={"p": 2.0, "variant": "orthotropic", "delta": [0.5, 0.5]})
    path = _write(tmp_path, cfg)
    out = tmp_path / "iso"
    result = runner.invoke(
        main, ["solve", "--config", path, "--out", str(out), "--isotropic"]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((out / "report.json").read_text())
    params = payload["report"]["config"]["params"]
    assert params["variant"] == "isotropic"
    assert params["lam"] == 0.5
    assert params["delta"] is None


def test_scheme_override_explicit(tmp_path, runner):
    path = _write(tmp_path, small_config())
    out = tmp_path / "exp"
    result = runner.invoke(
        main, ["solve", "--config", path, "--out", str(out), "--scheme", "explicit"]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((out / "report.json").read_text())
    assert payload["report"]["config"]["scheme"]["kind"] == "explicit"
    assert all(row["iterations"] == 0 for row in payload["report"]["solver"])


def test_seed_override(tmp_path, runner):
    cfg = small_config(data={"name": "random-bump"})
    path = _write(tmp_path, cfg)
    out = tmp_path / "seeded"
    result = runner.invoke(
        main, ["solve", "--config", path, "--out", str(out), "--seed", "5"]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((out / "report.json").read_text())
    assert payload["report"]["config"]["seed"] == 5


def test_lemma_check_command(tmp_path, runner):
    out = tmp_path / "lemma"
    result = runner.invoke(
        main,
        [
            "lemma-check",
            "--c-const", "2.0",
            "--b-const", "4.0",
            "--alpha", "0.5",
            "--y0", "1e-6",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert (out / "report.json").exists()


def test_steklov_and_interp_and_mms_and_calibrate(tmp_path, runner):
    path = _write(tmp_path, small_config())
    for args in (
        ["steklov-check", "--config", path],
        ["interp-check", "--config", path],
        ["mms-convergence", "--config", path, "--levels", "2", "--min-order", "1.5"],
        ["calibrate", "--config", path, "--refinements", "0"],
    ):
        result = runner.invoke(main, args)
        assert result.exit_code == 0, (args, result.output)
