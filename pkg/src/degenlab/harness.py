"""Experiment configuration, pipelines and report emission.

Configs are strict (unknown keys are errors) and versioned.  Reports embed a
hash of the canonical config so reruns are attributable; wall-clock timings
live in a separate key excluded from the bitwise-determinism contract.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydField, model_validator

from . import __version__ as _VERSION
from .degiorgi import (
    LevelLadder,
    compute_trace,
    cutoff_zeta,
    default_test_functions,
    energy_estimate_report,
    giusti_check,
    interpolation_check,
    required_linfty_constant,
    select_k_threshold,
    steklov_average,
    verify_linfty,
    verify_recursion,
)
from .errors import ConfigError, DegenLabError
from .flux import DegeneracyParams
from .geometry import (
    Cylinder,
    Grid,
    cylinder_inside_grid,
    make_shrinking_family,
    measure_ratio_check,
)
from .registry import build_data
from .solver import Explicit, Field, Implicit, Problem, solve

SCHEMA_VERSION = 1


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsSpec(StrictModel):
    p: float = 2.0
    variant: Literal["orthotropic", "isotropic"] = "orthotropic"
    delta: Optional[list[float]] = None
    lam: Optional[float] = None

    def build(self, n: int) -> DegeneracyParams:
        if self.variant == "orthotropic":
            delta = self.delta if self.delta is not None else [0.0] * n
            if len(delta) != n:
                raise ConfigError(f"params.delta must have length {n}")
            return DegeneracyParams.orthotropic(self.p, delta)
        if self.lam is None:
            raise ConfigError("params.lam required for the isotropic variant")
        return DegeneracyParams.isotropic(self.p, self.lam)


class GridSpec(StrictModel):
    lo: list[float]
    hi: list[float]
    h: float
    tau: float
    num_steps: int
    bc: Literal["dirichlet", "periodic"] = "dirichlet"

    def build(self) -> Grid:
        return Grid(
            lo=tuple(self.lo),
            hi=tuple(self.hi),
            h=self.h,
            tau=self.tau,
            num_steps=self.num_steps,
            bc=self.bc,
        )


class DataSpec(StrictModel):
    name: str
    options: dict[str, float] = PydField(default_factory=dict)


class CylinderSpec(StrictModel):
    vertex_x: list[float]
    vertex_t: float
    theta: float
    rho: float
    sigma: float

    def build(self) -> Cylinder:
        return Cylinder(tuple(self.vertex_x), self.vertex_t, self.theta, self.rho)


class LadderSpec(StrictModel):
    k: Optional[float] = None  # None selects k from the calibrated threshold
    j_max: int = 4


class SchemeSpec(StrictModel):
    kind: Literal["implicit", "explicit"] = "implicit"
    tolerance: float = 1e-10
    max_iterations: int = 100_000
    cfl_safety: float = 0.9

    def build(self) -> Implicit | Explicit:
        if self.kind == "implicit":
            return Implicit(tolerance=self.tolerance, max_iterations=self.max_iterations)
        return Explicit(cfl_safety=self.cfl_safety)


class ExperimentConfig(StrictModel):
    schema_version: int = SCHEMA_VERSION
    params: ParamsSpec
    grid: GridSpec
    data: DataSpec
    cylinder: CylinderSpec
    ladder: LadderSpec = PydField(default_factory=LadderSpec)
    scheme: SchemeSpec = PydField(default_factory=SchemeSpec)
    c_fit: float = 1.0
    seed: int = 0

    @model_validator(mode="after")
    def _check_version(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(Path(path).read_text())


def refine_config(config: ExperimentConfig) -> ExperimentConfig:
    """Halve the space step and quarter the time step (parabolic scaling)."""
    cfg = config.model_copy(deep=True)
    cfg.grid.h = config.grid.h / 2.0
    cfg.grid.tau = config.grid.tau / 4.0
    cfg.grid.num_steps = config.grid.num_steps * 4
    return cfg


# ---------------------------------------------------------------------------
# report rows
# ---------------------------------------------------------------------------


class StepRow(StrictModel):
    step: int
    iterations: int
    residual: float
    objective: float
    u_min: float
    u_max: float


class EnergyRow(StrictModel):
    k: float
    sup_term: float
    grad_term: float
    time_term: float
    space_term: float
    fitted_C: float


class TraceRow(StrictModel):
    j: int
    rho_j: float
    theta_j: float
    k_j: float
    Y_j: float
    A_meas: float
    Z_j: float
    predicted_Y_next: float


class RecursionRow(StrictModel):
    c_tilde: float
    ratios: list[float]
    slacks: list[Optional[float]]


class LinftyRow(StrictModel):
    ess_sup_inner: float
    bound: float
    ratio: float
    passed: bool


class RunReport(StrictModel):
    artifact_version: str
    config_hash: str
    config: ExperimentConfig
    k_used: float
    k_source: Literal["config", "auto", "clamped"]
    solver: list[StepRow]
    energy: list[EnergyRow]
    trace: list[TraceRow]
    recursion: RecursionRow
    linfty: LinftyRow
    weak_residual: float
    measure_ratios_ok: bool
    superlevel_ok: bool
    passed: bool
    timings: dict[str, float] = PydField(default_factory=dict)

    def body_json(self) -> str:
        """Deterministic report body (timings excluded)."""
        body = self.model_dump(exclude={"timings"})
        return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=True)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def build_problem(config: ExperimentConfig) -> Problem:
    grid = config.grid.build()
    params = config.params.build(grid.n)
    data = build_data(config.data.name, grid, params, config.data.options, config.seed)
    return Problem(
        grid=grid,
        params=params,
        initial=data.initial,
        boundary=data.boundary,
        source=data.source,
        scheme=config.scheme.build(),
    )


def exact_solution(config: ExperimentConfig):
    grid = config.grid.build()
    params = config.params.build(grid.n)
    data = build_data(config.data.name, grid, params, config.data.options, config.seed)
    return data.exact


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunReport:
    """Full pipeline: solve, energy reports over the ladder, iteration trace,
    recursion fit, local boundedness verdict, weak-form residual."""
    t_start = time.monotonic()
    problem = build_problem(config)
    grid = problem.grid
    cyl = config.cylinder.build()
    if not cylinder_inside_grid(cyl, grid):
        raise ConfigError("cylinder does not fit inside the grid domain")
    sigma = config.cylinder.sigma
    if not 0.0 < sigma < 1.0:
        raise ConfigError("cylinder.sigma must lie in (0, 1)")

    u = solve(problem)
    t_solved = time.monotonic()

    family = make_shrinking_family(sigma, cyl.theta, cyl.rho, (cyl.vertex_x, cyl.vertex_t))

    if config.ladder.k is not None:
        k_used = config.ladder.k
        k_source = "config"
        if k_used < cyl.rho:
            k_used = cyl.rho
            k_source = "clamped"
    else:
        k_used = select_k_threshold(u, cyl, sigma, problem.params, config.c_fit)
        k_source = "auto"
    ladder = LevelLadder(k_used)

    zeta0 = cutoff_zeta(family, 0, grid)
    energy_rows = []
    for j in (1, 2, 3):
        rep = energy_estimate_report(u, ladder.level(j), cyl, zeta0, problem.params)
        energy_rows.append(
            EnergyRow(
                k=rep.k,
                sup_term=rep.sup_term,
                grad_term=rep.degenerate_grad_term,
                time_term=rep.time_cutoff_term,
                space_term=rep.space_cutoff_term,
                fitted_C=rep.fitted_C,
            )
        )

    trace = compute_trace(u, family, ladder, problem.params, config.ladder.j_max)
    fit = verify_recursion(trace, trace.consts, sigma)
    ratios_report = measure_ratio_check(family, grid.n, config.ladder.j_max)
    verdict = verify_linfty(u, cyl, sigma, problem.params, config.c_fit)
    residual = weak_residual_for(u, problem.params)
    t_end = time.monotonic()

    superlevel_ok = all(e.superlevel_ok for e in trace.entries)
    report = RunReport(
        artifact_version=_VERSION,
        config_hash=config.hash(),
        config=config,
        k_used=k_used,
        k_source=k_source,
        solver=[StepRow(**vars(d)) for d in u.diagnostics],
        energy=energy_rows,
        trace=[
            TraceRow(
                j=e.j,
                rho_j=e.rho_j,
                theta_j=e.theta_j,
                k_j=e.k_j,
                Y_j=e.Y_j,
                A_meas=e.A_next_measure,
                Z_j=e.Z_j,
                predicted_Y_next=e.predicted_Y_next,
            )
            for e in trace.entries
        ],
        recursion=RecursionRow(
            c_tilde=fit.c_tilde,
            ratios=fit.ratios,
            slacks=[None if not np.isfinite(s) else s for s in fit.slacks],
        ),
        linfty=LinftyRow(
            ess_sup_inner=verdict.ess_sup_inner,
            bound=verdict.bound,
            ratio=verdict.ratio,
            passed=verdict.passed,
        ),
        weak_residual=residual,
        measure_ratios_ok=ratios_report.ok,
        superlevel_ok=superlevel_ok,
        passed=verdict.passed and ratios_report.ok and superlevel_ok,
        timings={"solve_s": t_solved - t_start, "verify_s": t_end - t_solved},
    )
    if out_dir is not None:
        write_report_files(report, out_dir)
    return report


def weak_residual_for(u: Field, params: DegeneracyParams) -> float:
    return weak_form_residual_default(u, params)


def weak_form_residual_default(u: Field, params: DegeneracyParams) -> float:
    from .degiorgi import weak_form_residual

    return weak_form_residual(u, params, default_test_functions(u.grid))


# ---------------------------------------------------------------------------
# file outputs
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ["j", "rho_j", "theta_j", "k_j", "Y_j", "A_meas", "Z_j", "predicted_Y_next"]
ENERGY_COLUMNS = ["k", "sup_term", "grad_term", "time_term", "space_term", "fitted_C"]


def trace_to_csv(rows: list[TraceRow]) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                [repr(getattr(r, c)) if c != "j" else str(r.j) for c in TRACE_COLUMNS]
            )
        )
    return "\n".join(lines) + "\n"


def trace_from_csv(text: str) -> list[TraceRow]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    if header != TRACE_COLUMNS:
        raise ConfigError(f"unexpected trace CSV header {header}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(
            TraceRow(
                j=int(parts[0]),
                **{c: float(v) for c, v in zip(TRACE_COLUMNS[1:], parts[1:])},
            )
        )
    return rows


def energy_to_csv(rows: list[EnergyRow]) -> str:
    lines = [",".join(ENERGY_COLUMNS)]
    for r in rows:
        lines.append(",".join(repr(getattr(r, c)) for c in ENERGY_COLUMNS))
    return "\n".join(lines) + "\n"


def write_report_files(report: RunReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.model_dump_json(indent=2))
    (out / "trace.csv").write_text(trace_to_csv(report.trace))
    (out / "energy.csv").write_text(energy_to_csv(report.energy))


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------


class ConvergenceRow(StrictModel):
    level: int
    h: float
    tau: float
    err_linf: float
    err_l2: float


class ConvergenceReport(StrictModel):
    rows: list[ConvergenceRow]
    orders_linf: list[float]
    orders_l2: list[float]
    passed: bool


def convergence_study(
    base_config: ExperimentConfig, levels: int, min_order: float = 1.8
) -> ConvergenceReport:
    """Refine h -> h/2 (tau -> tau/4) per level and measure final-time errors
    against the registry's exact solution."""
    if levels < 2:
        raise ConfigError("convergence study needs at least 2 levels")
    rows: list[ConvergenceRow] = []
    cfg = base_config
    for level in range(levels):
        exact = exact_solution(cfg)
        if exact is None:
            raise ConfigError(
                f"data preset {cfg.data.name!r} has no exact solution for these parameters"
            )
        problem = build_problem(cfg)
        u = solve(problem)
        grid = problem.grid
        diff = u.values[-1] - exact(grid.final_time)
        err_linf = float(np.max(np.abs(diff)))
        err_l2 = float(np.sqrt(np.sum(diff ** 2) * grid.cell_volume))
        rows.append(
            ConvergenceRow(
                level=level, h=grid.h, tau=grid.tau, err_linf=err_linf, err_l2=err_l2
            )
        )
        cfg = refine_config(cfg)

    def orders(errs):
        out = []
        for a, b in zip(errs, errs[1:]):
            out.append(float(np.log2(a / b)) if b > 0 and a > 0 else float("inf"))
        return out

    o_inf = orders([r.err_linf for r in rows])
    o_l2 = orders([r.err_l2 for r in rows])
    tiny = all(r.err_linf <= 1e-12 for r in rows)
    passed = tiny or (min(o_inf) >= min_order or min(o_l2) >= min_order)
    return ConvergenceReport(rows=rows, orders_linf=o_inf, orders_l2=o_l2, passed=passed)


# ---------------------------------------------------------------------------
# auxiliary checks exposed by the service
# ---------------------------------------------------------------------------


class SteklovReport(StrictModel):
    h_values: list[float]
    errors: list[float]
    orders: list[float]
    passed: bool


def steklov_study(config: ExperimentConfig, h0: float | None = None, levels: int = 3) -> SteklovReport:
    """L2 convergence order of the forward time average on a Lipschitz-in-time
    field built from the preset's initial profile."""
    problem = build_problem(config)
    grid = problem.grid
    prof = problem.initial
    modulation = np.sin(2.0 * grid.times)
    v = Field(grid, modulation.reshape((-1,) + (1,) * grid.n) * prof[None, ...])
    h = h0 if h0 is not None else grid.num_steps // 2 * grid.tau
    hs, errs = [], []
    # compare on the valid window of the coarsest h so levels are commensurable
    m0 = max(1, int(np.floor(h / grid.tau + 1e-9)))
    valid = grid.num_levels - m0
    for _ in range(levels):
        res = steklov_average(v, h)
        diff = res.field.values[:valid] - v.values[:valid]
        errs.append(float(np.sqrt(np.sum(diff ** 2) * grid.cell_volume * grid.tau)))
        hs.append(res.h_used)
        h = h / 2.0
        if h < grid.tau:
            break
    orders = [float(np.log2(a / b)) for a, b in zip(errs, errs[1:]) if b > 0]
    passed = bool(orders) and min(orders) >= 0.9
    return SteklovReport(h_values=hs, errors=errs, orders=orders, passed=passed)


class InterpReport(StrictModel):
    q: float
    fitted_C: float
    fitted_C_scaled: float
    fitted_C_refined: float
    scale_invariant: bool
    stable: bool
    passed: bool


def interp_study(config: ExperimentConfig, r: float = 2.0, s: float = 2.0) -> InterpReport:
    """Interpolation-inequality constant on a preset field: scale invariance
    of the fitted constant plus stability under one grid refinement."""
    def build_field(cfg: ExperimentConfig) -> Field:
        problem = build_problem(cfg)
        grid = problem.grid
        modulation = 1.0 + 0.5 * np.sin(3.0 * grid.times)
        return Field(grid, modulation.reshape((-1,) + (1,) * grid.n) * problem.initial[None, ...])

    v = build_field(config)
    base = interpolation_check(v, r, s)
    scaled = interpolation_check(Field(v.grid, 2.0 * v.values), r, s)
    refined = interpolation_check(build_field(refine_config(config)), r, s)
    scale_ok = (
        base.degenerate
        or abs(scaled.fitted_C - base.fitted_C) <= 1e-10 * max(1.0, base.fitted_C)
    )
    lo, hi = sorted([base.fitted_C, refined.fitted_C])
    stable = base.degenerate or (lo > 0 and hi / lo <= 2.0)
    return InterpReport(
        q=base.q,
        fitted_C=base.fitted_C,
        fitted_C_scaled=scaled.fitted_C,
        fitted_C_refined=refined.fitted_C,
        scale_invariant=scale_ok,
        stable=stable,
        passed=scale_ok and stable,
    )


class CalibrationRow(StrictModel):
    config_hash: str
    energy_C: float
    c_tilde: float
    linfty_C: float


class CalibrationReport(StrictModel):
    rows: list[CalibrationRow]
    energy_C: float
    c_tilde: float
    linfty_C: float
    degenerate: bool
    stable: bool
    passed: bool


def calibrate_constants(configs: list[ExperimentConfig]) -> CalibrationReport:
    """Fit the three unknown constants over a sweep: the energy-estimate
    constant, the recursion constant, and the final-bound constant.  The
    sweep is flagged unstable when any constant moves by more than 4x."""
    if not configs:
        raise ConfigError("calibration sweep must be nonempty")
    rows: list[CalibrationRow] = []
    for cfg in configs:
        problem = build_problem(cfg)
        u = solve(problem)
        cyl = cfg.cylinder.build()
        sigma = cfg.cylinder.sigma
        family = make_shrinking_family(sigma, cyl.theta, cyl.rho, (cyl.vertex_x, cyl.vertex_t))
        k = max(cyl.rho, select_k_threshold(u, cyl, sigma, problem.params, 1.0))
        ladder = LevelLadder(k)
        zeta0 = cutoff_zeta(family, 0, problem.grid)
        energy_c = 0.0
        for j in (1, 2, 3):
            rep = energy_estimate_report(u, ladder.level(j), cyl, zeta0, problem.params)
            if rep.rhs_with_unit_constant > 1e-30:
                energy_c = max(energy_c, rep.fitted_C)
        trace = compute_trace(u, family, ladder, problem.params, cfg.ladder.j_max)
        fit = verify_recursion(trace, trace.consts, sigma)
        lin_c = required_linfty_constant(u, cyl, sigma, problem.params)
        rows.append(
            CalibrationRow(
                config_hash=cfg.hash(), energy_C=energy_c, c_tilde=fit.c_tilde, linfty_C=lin_c
            )
        )

    def summarize(vals):
        pos = [v for v in vals if v > 0 and np.isfinite(v)]
        if not pos:
            return 0.0, True, True
        return max(pos), False, max(pos) / min(pos) <= 4.0

    e_max, e_deg, e_st = summarize([r.energy_C for r in rows])
    t_max, t_deg, t_st = summarize([r.c_tilde for r in rows])
    l_max, l_deg, l_st = summarize([r.linfty_C for r in rows])
    degenerate = e_deg and t_deg and l_deg
    stable = e_st and t_st and l_st
    return CalibrationReport(
        rows=rows,
        energy_C=e_max,
        c_tilde=t_max,
        linfty_C=l_max,
        degenerate=degenerate,
        stable=stable,
        passed=stable,
    )


class LemmaReport(StrictModel):
    threshold: float
    satisfied: bool
    diverged_at: Optional[int]
    final_value: float
    passed: bool


def lemma_study(C: float, b: float, alpha: float, Y0: float, j_max: int) -> LemmaReport:
    res = giusti_check(C, b, alpha, Y0, j_max)
    above = Y0 > res.threshold
    final = float(res.sequence[-1])
    return LemmaReport(
        threshold=res.threshold,
        satisfied=res.satisfied,
        diverged_at=res.diverged_at,
        final_value=final,
        # above the threshold the lemma claims nothing, so nothing can fail
        passed=above or res.satisfied,
    )
