"""Discrete solutions of the degenerate parabolic equation on a uniform grid.

The implicit scheme realizes one backward-Euler step as a convex
minimization: forward-difference gradients feed the (convex) energy density,
and the divergence is its exact discrete adjoint, so summation by parts holds
by construction and the step objective is minimized by monotone gradient
descent with backtracking.  An explicit scheme with a CFL guard is kept for
cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CflViolation, ConfigError, NonConvergence
from .flux import DegeneracyParams, energy, flux
from .geometry import Grid


@dataclass(frozen=True)
class Implicit:
    tolerance: float = 1e-10
    max_iterations: int = 100_000

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")


@dataclass(frozen=True)
class Explicit:
    cfl_safety: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigError("cfl_safety must lie in (0, 1]")


BoundaryData = Optional[Callable[[float], np.ndarray]]
SourceData = Optional[Callable[[float], np.ndarray]]


@dataclass
class Problem:
    """One initial-boundary value problem on a grid.

    ``boundary`` and ``source`` are callables of time returning full-grid
    slices; only boundary entries of ``boundary(t)`` are read.  ``boundary``
    is ignored on periodic grids; ``None`` on a Dirichlet grid freezes the
    initial trace.
    """

    grid: Grid
    params: DegeneracyParams
    initial: np.ndarray
    boundary: BoundaryData = None
    source: SourceData = None
    scheme: Implicit | Explicit = field(default_factory=Implicit)

    def __post_init__(self):
        self.initial = np.asarray(self.initial, dtype=float)
        if self.initial.shape != self.grid.shape:
            raise ConfigError("initial data shape does not match the grid")
        if not np.all(np.isfinite(self.initial)):
            raise ConfigError("initial data must be finite")


@dataclass
class StepDiagnostics:
    step: int
    iterations: int
    residual: float
    objective: float
    u_min: float
    u_max: float


@dataclass
class Field:
    """A space-time sampled scalar function: one slice per time level."""

    grid: Grid
    values: np.ndarray
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.num_levels,) + self.grid.shape
        if self.values.shape != expected:
            raise ConfigError(f"field shape {self.values.shape} != {expected}")

    def slice(self, m: int) -> np.ndarray:
        return self.values[m]


def discrete_gradient(a: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward differences per axis on the cell lattice, shape (*cells, n).

    Dirichlet: cells are nodes with every index below the last one.
    Periodic: cells coincide with nodes (wrap-around differences).
    """
    a = np.asarray(a, dtype=float)
    n = grid.n
    comps = []
    if grid.bc == "periodic":
        for i in range(n):
            comps.append((np.roll(a, -1, axis=i) - a) / grid.h)
    else:
        cells = tuple(m - 1 for m in grid.shape)
        for i in range(n):
            d = np.diff(a, axis=i) / grid.h
            comps.append(d[tuple(slice(0, c) for c in cells)])
    return np.stack(comps, axis=-1)


def discrete_divergence(F: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact negative adjoint of :func:`discrete_gradient` (backward differences
    with zero padding), so that sum_cells <F, grad u> = -sum_nodes u div F."""
    F = np.asarray(F, dtype=float)
    out = np.zeros(grid.shape)
    for i in range(grid.n):
        comp = F[..., i]
        if grid.bc == "periodic":
            out += (comp - np.roll(comp, 1, axis=i)) / grid.h
        else:
            z = np.zeros(grid.shape)
            z[tuple(slice(0, c) for c in comp.shape)] = comp
            zm = np.zeros_like(z)
            sl_to = [slice(None)] * grid.n
            sl_from = [slice(None)] * grid.n
            sl_to[i] = slice(1, None)
            sl_from[i] = slice(0, -1)
            zm[tuple(sl_to)] = z[tuple(sl_from)]
            out += (z - zm) / grid.h
    return out


def _apply_bc(v: np.ndarray, problem: Problem, t: float | None) -> np.ndarray:
    if problem.grid.bc == "periodic":
        return v
    mask = problem.grid.boundary_mask()
    out = v.copy()
    if problem.boundary is not None and t is not None:
        out[mask] = problem.boundary(t)[mask]
    else:
        out[mask] = problem.initial[mask]
    return out


def _source_slice(problem: Problem, t: float | None) -> np.ndarray | None:
    if problem.source is None or t is None:
        return None if problem.source is None else problem.source(problem.grid.t_start)
    return problem.source(t)


def step_objective(
    v: np.ndarray, prev: np.ndarray, tau: float, problem: Problem, t: float | None = None
) -> float:
    """Backward-Euler step objective; boundary values of ``v`` are pinned first."""
    grid = problem.grid
    hn = grid.cell_volume
    v = _apply_bc(np.asarray(v, dtype=float), problem, t)
    quad = 0.5 / tau * np.sum((v - prev) ** 2) * hn
    en = np.sum(energy(discrete_gradient(v, grid), problem.params)) * hn
    f = _source_slice(problem, t)
    src = 0.0 if f is None else np.sum(f * v) * hn
    return quad + en - src


def _objective_residual(
    v: np.ndarray, prev: np.ndarray, tau: float, problem: Problem, f: np.ndarray | None
) -> np.ndarray:
    """Gradient of the step objective per unit cell volume, zeroed on pinned nodes."""
    grid = problem.grid
    r = (v - prev) / tau - discrete_divergence(flux(discrete_gradient(v, grid), problem.params), grid)
    if f is not None:
        r = r - f
    if grid.bc == "dirichlet":
        r[grid.boundary_mask()] = 0.0
    return r


def step_implicit(
    prev: np.ndarray, tau: float, problem: Problem, t: float | None = None
) -> tuple[np.ndarray, int, float]:
    """One implicit step: minimize the step objective by monotone gradient
    descent (Barzilai-Borwein steps with Armijo backtracking).

    Returns (slice, iterations, residual).  Raises :class:`NonConvergence`
    if the iteration budget is exhausted.
    """
    scheme = problem.scheme
    if not isinstance(scheme, Implicit):
        raise ConfigError("step_implicit requires an Implicit scheme")
    grid = problem.grid
    hn = grid.cell_volume
    f = _source_slice(problem, t)
    v = _apply_bc(np.asarray(prev, dtype=float), problem, t)
    tol = scheme.tolerance * max(1.0, float(np.max(np.abs(prev))))

    def J(w):
        quad = 0.5 / tau * np.sum((w - prev) ** 2) * hn
        en = np.sum(energy(discrete_gradient(w, grid), problem.params)) * hn
        src = 0.0 if f is None else np.sum(f * w) * hn
        return quad + en - src

    g = _objective_residual(v, prev, tau, problem, f)
    res = float(np.max(np.abs(g)))
    if res <= tol:
        return v, 0, res

    j_cur = J(v)
    step = tau  # Hessian >= I/tau, so tau never overshoots the quadratic part
    prev_v = None
    prev_g = None
    for it in range(1, scheme.max_iterations + 1):
        gg = np.sum(g * g)
        s = step
        while True:
            v_new = v - s * g
            j_new = J(v_new)
            decrease = 1e-4 * s * gg * hn
            # near the minimum the required decrease falls below the float
            # resolution of J; accept within the rounding noise band there
            noise = 1e-14 * (abs(j_cur) + abs(j_new))
            if j_new <= j_cur - decrease or (decrease <= noise and j_new <= j_cur + noise):
                break
            s *= 0.5
            if s < 1e-18 * tau:
                # objective cannot decrease further; accept if already accurate
                if res <= tol:
                    return v, it, res
                raise NonConvergence(it, res)
        prev_v, prev_g = v, g
        v, j_cur = v_new, j_new
        g = _objective_residual(v, prev, tau, problem, f)
        res = float(np.max(np.abs(g)))
        if res <= tol:
            return v, it, res
        dv = v - prev_v
        dg = g - prev_g
        denom = np.sum(dg * dg)
        num = np.sum(dv * dg)
        step = num / denom if denom > 0 and num > 0 and np.isfinite(num / denom) else tau
    raise NonConvergence(scheme.max_iterations, res)


def explicit_tau_max(prev: np.ndarray, problem: Problem) -> float:
    """CFL limit: cfl_safety * h^2 / (2 n (p-1) M^(p-2)) with M the largest
    per-axis difference quotient of ``prev`` (M^(p-2) := 1 for p = 2)."""
    grid = problem.grid
    p = problem.params.p
    grad = discrete_gradient(prev, grid)
    M = float(np.max(np.abs(grad))) if grad.size else 0.0
    mp = 1.0 if p == 2.0 else M ** (p - 2.0)
    denom = 2.0 * grid.n * (p - 1.0) * mp
    if denom == 0.0:
        return np.inf
    return problem.scheme.cfl_safety * grid.h ** 2 / denom


def step_explicit(
    prev: np.ndarray, tau: float, problem: Problem, t: float | None = None
) -> np.ndarray:
    """One forward-Euler step in conservative flux form."""
    if not isinstance(problem.scheme, Explicit):
        raise ConfigError("step_explicit requires an Explicit scheme")
    grid = problem.grid
    tau_max = explicit_tau_max(prev, problem)
    if tau > tau_max:
        raise CflViolation(tau_max)
    rhs = discrete_divergence(flux(discrete_gradient(prev, grid), problem.params), grid)
    f = _source_slice(problem, t)
    if f is not None:
        rhs = rhs + f
    return _apply_bc(prev + tau * rhs, problem, t)


def solve(problem: Problem) -> Field:
    """March the chosen stepper over all time levels; per-step diagnostics are
    attached to the returned field."""
    grid = problem.grid
    values = np.empty((grid.num_levels,) + grid.shape)
    values[0] = problem.initial
    diagnostics: list[StepDiagnostics] = []
    times = grid.times
    for m in range(grid.num_steps):
        t_next = float(times[m + 1])
        prev = values[m]
        try:
            if isinstance(problem.scheme, Implicit):
                v, iters, res = step_implicit(prev, grid.tau, problem, t_next)
            else:
                v = step_explicit(prev, grid.tau, problem, t_next)
                iters, res = 0, 0.0
        except (NonConvergence, CflViolation) as exc:
            exc.failing_step = m + 1
            exc.args = (f"time step {m + 1}: {exc}",)
            raise
        values[m + 1] = v
        diagnostics.append(
            StepDiagnostics(
                step=m + 1,
                iterations=iters,
                residual=res,
                objective=step_objective(v, prev, grid.tau, problem, t_next),
                u_min=float(np.min(v)),
                u_max=float(np.max(v)),
            )
        )
    return Field(grid, values, diagnostics)


def weak_energy(field: Field, params: DegeneracyParams, window: slice | None = None) -> np.ndarray:
    """Per-level values of sum_cells F(D_h u) h^n over the given level window."""
    sl = window or slice(None)
    hn = field.grid.cell_volume
    return np.array(
        [np.sum(energy(discrete_gradient(u, field.grid), params)) * hn for u in field.values[sl]]
    )
