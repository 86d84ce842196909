"""FastAPI service exposing the experiment pipelines.

Every endpoint takes a strict JSON body, runs one pipeline and returns
``{"passed": ..., "report": ...}``.  Domain errors map to 400, validation
errors to FastAPI's standard 422.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from . import __version__
from .errors import DegenLabError
from .harness import (
    CalibrationReport,
    ConvergenceReport,
    ExperimentConfig,
    InterpReport,
    LemmaReport,
    RunReport,
    SteklovReport,
    calibrate_constants,
    convergence_study,
    interp_study,
    lemma_study,
    refine_config,
    run_experiment,
    steklov_study,
)


class StrictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ExperimentRequest(StrictRequest):
    config: ExperimentConfig


class LemmaRequest(StrictRequest):
    C: float
    b: float
    alpha: float
    Y0: float
    j_max: int = 50


class SteklovRequest(StrictRequest):
    config: ExperimentConfig
    h0: float | None = None
    levels: int = 3


class InterpRequest(StrictRequest):
    config: ExperimentConfig
    r: float = 2.0
    s: float = 2.0


class ConvergenceRequest(StrictRequest):
    config: ExperimentConfig
    levels: int = 3
    min_order: float = 1.8


class CalibrateRequest(StrictRequest):
    configs: list[ExperimentConfig] | None = None
    config: ExperimentConfig | None = None
    refinements: int = 1


class RunResponse(StrictRequest):
    passed: bool
    report: RunReport


class LemmaResponse(StrictRequest):
    passed: bool
    report: LemmaReport


class SteklovResponse(StrictRequest):
    passed: bool
    report: SteklovReport


class InterpResponse(StrictRequest):
    passed: bool
    report: InterpReport


class ConvergenceResponse(StrictRequest):
    passed: bool
    report: ConvergenceReport


class CalibrateResponse(StrictRequest):
    passed: bool
    report: CalibrationReport


def create_app() -> FastAPI:
    app = FastAPI(title="degenlab", version=__version__)

    @app.exception_handler(DegenLabError)
    async def _domain_error(request, exc):  # noqa: ANN001
        raise HTTPException(status_code=400, detail=str(exc))

    def guarded(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DegenLabError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/experiments/solve", response_model=RunResponse)
    def solve_endpoint(req: ExperimentRequest):
        report = guarded(run_experiment, req.config)
        # a solve succeeds if it completed; verification verdicts ride along
        return RunResponse(passed=True, report=report)

    @app.post("/experiments/verify-energy", response_model=RunResponse)
    def verify_energy(req: ExperimentRequest):
        report = guarded(run_experiment, req.config)
        ok = all(
            row.sup_term >= 0 and row.grad_term >= 0 and row.time_term >= -1e-15
            and row.space_term >= 0
            for row in report.energy
        )
        return RunResponse(passed=ok, report=report)

    @app.post("/experiments/degiorgi-trace", response_model=RunResponse)
    def degiorgi_trace(req: ExperimentRequest):
        report = guarded(run_experiment, req.config)
        return RunResponse(
            passed=report.superlevel_ok and report.measure_ratios_ok, report=report
        )

    @app.post("/experiments/verify-linfty", response_model=RunResponse)
    def verify_linfty_endpoint(req: ExperimentRequest):
        report = guarded(run_experiment, req.config)
        return RunResponse(passed=report.linfty.passed, report=report)

    @app.post("/checks/lemma", response_model=LemmaResponse)
    def lemma(req: LemmaRequest):
        report = guarded(lemma_study, req.C, req.b, req.alpha, req.Y0, req.j_max)
        return LemmaResponse(passed=report.passed, report=report)

    @app.post("/checks/steklov", response_model=SteklovResponse)
    def steklov(req: SteklovRequest):
        report = guarded(steklov_study, req.config, req.h0, req.levels)
        return SteklovResponse(passed=report.passed, report=report)

    @app.post("/checks/interpolation", response_model=InterpResponse)
    def interpolation(req: InterpRequest):
        report = guarded(interp_study, req.config, req.r, req.s)
        return InterpResponse(passed=report.passed, report=report)

    @app.post("/experiments/mms-convergence", response_model=ConvergenceResponse)
    def mms(req: ConvergenceRequest):
        report = guarded(convergence_study, req.config, req.levels, req.min_order)
        return ConvergenceResponse(passed=report.passed, report=report)

    @app.post("/experiments/calibrate", response_model=CalibrateResponse)
    def calibrate(req: CalibrateRequest):
        configs = req.configs
        if configs is None:
            if req.config is None:
                raise HTTPException(status_code=400, detail="provide config or configs")
            configs = [req.config]
            cfg = req.config
            for _ in range(req.refinements):
                cfg = refine_config(cfg)
                configs.append(cfg)
        report = guarded(calibrate_constants, configs)
        return CalibrateResponse(passed=report.passed, report=report)

    return app


app = create_app()
