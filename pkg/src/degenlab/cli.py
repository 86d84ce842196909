"""Command line interface: a thin client of the HTTP service.

Each subcommand posts one request to the service (an in-process instance by
default, or a remote one via --server), writes the returned report to the
output directory and sets the exit code: 0 when all verifications pass,
1 when a verification fails, 2 on configuration or runtime errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .harness import (
    ExperimentConfig,
    TRACE_COLUMNS,
    energy_to_csv,
    trace_to_csv,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


class CliConfigError(click.ClickException):
    """Configuration problems exit with code 2, not click's default 1."""

    exit_code = EXIT_ERROR


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _load_config(path: str, seed: int | None, isotropic: bool, scheme: str | None) -> dict:
    try:
        config = ExperimentConfig.model_validate_json(Path(path).read_text())
    except FileNotFoundError:
        raise CliConfigError(f"config file not found: {path}")
    except ValueError as exc:
        raise CliConfigError(f"invalid config: {exc}")
    if seed is not None:
        config.seed = seed
    if scheme is not None:
        config.scheme.kind = scheme
    if isotropic and config.params.variant != "isotropic":
        config.params.variant = "isotropic"
        if config.params.lam is None:
            delta_max = max(config.params.delta) if config.params.delta else 0.0
            config.params.lam = delta_max if delta_max > 0 else 1.0
        config.params.delta = None
    return config.model_dump()


def _finish(resp, out: str | None, with_csv: bool) -> None:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(EXIT_ERROR)
    payload = resp.json()
    passed = payload["passed"]
    report = payload["report"]
    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        if with_csv and isinstance(report, dict) and "trace" in report:
            from .harness import EnergyRow, TraceRow

            trace_rows = [TraceRow(**r) for r in report["trace"]]
            energy_rows = [EnergyRow(**r) for r in report["energy"]]
            (out_dir / "trace.csv").write_text(trace_to_csv(trace_rows))
            (out_dir / "energy.csv").write_text(energy_to_csv(energy_rows))
    click.echo("PASS" if passed else "FAIL")
    sys.exit(EXIT_PASS if passed else EXIT_FAIL)


def _common(f):
    f = click.option("--config", "config_path", required=True, type=click.Path())(f)
    f = click.option("--out", default=None, type=click.Path(), help="output directory")(f)
    f = click.option("--seed", default=None, type=int)(f)
    f = click.option("--isotropic", is_flag=True, help="switch to the isotropic equation")(f)
    f = click.option("--scheme", default=None, type=click.Choice(["implicit", "explicit"]))(f)
    f = click.option("--server", default=None, help="base URL of a running service")(f)
    return f


@click.group()
def main():
    """Degenerate parabolic solver and verification laboratory."""


def _experiment_command(name: str, endpoint: str):
    @main.command(name=name)
    @_common
    def _cmd(config_path, out, seed, isotropic, scheme, server, _endpoint=endpoint):
        body = {"config": _load_config(config_path, seed, isotropic, scheme)}
        with _client(server) as client:
            resp = client.post(_endpoint, json=body)
        _finish(resp, out, with_csv=True)

    return _cmd


_experiment_command("solve", "/experiments/solve")
_experiment_command("verify-energy", "/experiments/verify-energy")
_experiment_command("degiorgi-trace", "/experiments/degiorgi-trace")
_experiment_command("verify-linfty", "/experiments/verify-linfty")


@main.command(name="lemma-check")
@click.option("--c-const", "C", required=True, type=float)
@click.option("--b-const", "b", required=True, type=float)
@click.option("--alpha", required=True, type=float)
@click.option("--y0", "Y0", required=True, type=float)
@click.option("--j-max", default=50, type=int)
@click.option("--out", default=None, type=click.Path())
@click.option("--server", default=None)
def lemma_check(C, b, alpha, Y0, j_max, out, server):
    """Standalone fast-convergence lemma check."""
    body = {"C": C, "b": b, "alpha": alpha, "Y0": Y0, "j_max": j_max}
    with _client(server) as client:
        resp = client.post("/checks/lemma", json=body)
    _finish(resp, out, with_csv=False)


@main.command(name="steklov-check")
@_common
@click.option("--levels", default=3, type=int)
def steklov_check(config_path, out, seed, isotropic, scheme, server, levels):
    body = {"config": _load_config(config_path, seed, isotropic, scheme), "levels": levels}
    with _client(server) as client:
        resp = client.post("/checks/steklov", json=body)
    _finish(resp, out, with_csv=False)


@main.command(name="interp-check")
@_common
@click.option("-r", "r_exp", default=2.0, type=float)
@click.option("-s", "s_exp", default=2.0, type=float)
def interp_check(config_path, out, seed, isotropic, scheme, server, r_exp, s_exp):
    body = {
        "config": _load_config(config_path, seed, isotropic, scheme),
        "r": r_exp,
        "s": s_exp,
    }
    with _client(server) as client:
        resp = client.post("/checks/interpolation", json=body)
    _finish(resp, out, with_csv=False)


@main.command(name="mms-convergence")
@_common
@click.option("--levels", default=3, type=int)
@click.option("--min-order", default=1.8, type=float)
def mms_convergence(config_path, out, seed, isotropic, scheme, server, levels, min_order):
    body = {
        "config": _load_config(config_path, seed, isotropic, scheme),
        "levels": levels,
        "min_order": min_order,
    }
    with _client(server) as client:
        resp = client.post("/experiments/mms-convergence", json=body)
    _finish(resp, out, with_csv=False)


@main.command(name="calibrate")
@_common
@click.option("--refinements", default=1, type=int)
def calibrate(config_path, out, seed, isotropic, scheme, server, refinements):
    body = {
        "config": _load_config(config_path, seed, isotropic, scheme),
        "refinements": refinements,
    }
    with _client(server) as client:
        resp = client.post("/experiments/calibrate", json=body)
    _finish(resp, out, with_csv=False)


@main.command(name="serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("degenlab.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
