"""Quantitative reconstruction of the local-boundedness machinery on a field.

Every object of the iteration argument is rebuilt numerically: truncations,
linear-ramp cut-offs, the local energy estimate, the superlevel iteration
trace with its recursion constants, the fast-convergence lemma, Steklov
averages, the parabolic interpolation inequality, and the final local L-infty
bound with fitted constants.

Discrete conventions: ess sup is the max over snapped grid nodes; space-time
measures are node counts times h^n*tau; indicator sets use strict
inequalities, matching the open superlevel sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError, GridTooCoarse
from .flux import DegeneracyParams, _pow
from .geometry import (
    Cylinder,
    Grid,
    ShrinkFamily,
    cylinder_measure,
    snap_cylinder,
    snap_cylinder_cells,
)
from .solver import Field, discrete_gradient

_TINY = 1e-30


# ---------------------------------------------------------------------------
# levels and truncations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelLadder:
    """Increasing truncation levels k_j = k - k/2^j, climbing from 0 to k."""

    k: float

    def __post_init__(self):
        if self.k <= 0:
            raise ConfigError("ladder height k must be positive")

    def level(self, j: int) -> float:
        return self.k - self.k / 2.0 ** j

    def levels(self, j_max: int) -> np.ndarray:
        return np.array([self.level(j) for j in range(j_max + 1)])


def truncate_plus(field: Field, k: float) -> Field:
    """Pointwise positive part (u - k)_+."""
    return Field(field.grid, np.maximum(field.values - k, 0.0))


# ---------------------------------------------------------------------------
# Steklov averages
# ---------------------------------------------------------------------------


@dataclass
class SteklovResult:
    field: Field
    h_used: float
    h_requested: float


def steklov_average(field: Field, h_time: float) -> SteklovResult:
    """Forward-in-time running mean over windows of length ``h_time``.

    The window is snapped down to a whole number of time steps (reported in
    ``h_used``); the trapezoid rule integrates over grid levels.  Levels whose
    window would leave the domain are set to zero, per the definition.
    """
    grid = field.grid
    total = grid.num_steps * grid.tau
    if not 0.0 < h_time < total:
        raise ConfigError("averaging window must lie in (0, time extent)")
    m = max(1, int(np.floor(h_time / grid.tau + 1e-9)))
    h_used = m * grid.tau
    out = np.zeros_like(field.values)
    v = field.values
    # trapezoid over levels i..i+m, normalized by the window length
    for i in range(grid.num_levels - m):
        acc = 0.5 * (v[i] + v[i + m])
        for r in range(1, m):
            acc = acc + v[i + r]
        out[i] = acc / m
    return SteklovResult(Field(grid, out), h_used, h_time)


# ---------------------------------------------------------------------------
# cut-off functions
# ---------------------------------------------------------------------------


def _max_norm_dist(grid: Grid, center: tuple[float, ...]) -> np.ndarray:
    mesh = grid.meshgrid()
    dist = np.abs(mesh[0] - center[0])
    for i in range(1, grid.n):
        dist = np.maximum(dist, np.abs(mesh[i] - center[i]))
    return dist


def cutoff_zeta(f: ShrinkFamily, j: int, grid: Grid) -> Field:
    """Space-time cut-off: 1 on the tilde box, 0 on the parabolic boundary of
    Q_j, with linear ramps attaining the slope bounds 2^(j+2)/((1-sigma)*rho)
    and 2^(j+2)/((1-sigma)*theta) exactly."""
    rho_j, rho_t = f.rho_j(j), f.rho_tilde(j)
    theta_j, theta_t = f.theta_j(j), f.theta_tilde(j)
    dist = _max_norm_dist(grid, f.vertex_x)
    zs = np.clip((rho_j - dist) / (rho_j - rho_t), 0.0, 1.0)
    t = grid.times
    zt = np.clip((t - (f.vertex_t - theta_j)) / (theta_j - theta_t), 0.0, 1.0)
    values = zt.reshape((-1,) + (1,) * grid.n) * zs[None, ...]
    return Field(grid, values)


def cutoff_zeta_tilde(f: ShrinkFamily, j: int, grid: Grid) -> np.ndarray:
    """Spatial-only ramp: 1 on the cube of half-width rho_{j+1}, 0 at the
    lateral boundary of the tilde cube."""
    rho_t, rho_next = f.rho_tilde(j), f.rho_j(j + 1)
    dist = _max_norm_dist(grid, f.vertex_x)
    return np.clip((rho_t - dist) / (rho_t - rho_next), 0.0, 1.0)


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------


def _cell_average(a: np.ndarray, grid: Grid) -> np.ndarray:
    """Average node values to the cell lattice (mean of the 2^n corners)."""
    out = a
    if grid.bc == "periodic":
        for i in range(grid.n):
            out = 0.5 * (out + np.roll(out, -1, axis=i))
        return out
    for i in range(grid.n):
        sl_lo = [slice(None)] * grid.n
        sl_hi = [slice(None)] * grid.n
        sl_lo[i] = slice(0, -1)
        sl_hi[i] = slice(1, None)
        out = 0.5 * (out[tuple(sl_lo)] + out[tuple(sl_hi)])
    return out


# ---------------------------------------------------------------------------
# local energy estimate
# ---------------------------------------------------------------------------


@dataclass
class EnergyReport:
    """The four terms of the local energy estimate plus a fitted constant
    (left-hand side over the right-hand side evaluated with constant 1)."""

    k: float
    sup_term: float
    degenerate_grad_term: float
    time_cutoff_term: float
    space_cutoff_term: float
    fitted_C: float

    @property
    def lhs(self) -> float:
        return self.sup_term + self.degenerate_grad_term

    @property
    def rhs_with_unit_constant(self) -> float:
        return self.time_cutoff_term + self.space_cutoff_term


def energy_estimate_report(
    u: Field, k: float, cyl: Cylinder, zeta: Field, params: DegeneracyParams
) -> EnergyReport:
    """Evaluate both sides of the truncation energy estimate at level ``k``.

    Node quadrature for the sup and time terms, cell quadrature (with
    corner-averaged u and zeta) for the gradient terms.  The isotropic
    variant replaces the per-axis degenerate gradient by (|Du|-lam)_+^p.
    """
    if k <= 0:
        raise ConfigError("energy estimate requires a positive level k")
    grid = u.grid
    p = params.p
    hn = grid.cell_volume
    snap_n = snap_cylinder(cyl, grid)
    snap_c = snap_cylinder_cells(cyl, grid)
    if snap_n.empty:
        raise GridTooCoarse("cylinder contains no grid nodes")

    sup_term = 0.0
    time_term = 0.0
    grad_term = 0.0
    space_term = 0.0
    zvals = zeta.values
    for m in range(snap_n.time.start, snap_n.time.stop):
        un = u.values[m][snap_n.space]
        zn = zvals[m][snap_n.space]
        trunc2 = np.maximum(un - k, 0.0) ** 2
        sup_term = max(sup_term, float(np.sum(trunc2 * _pow(zn, p))) * hn)
        if m + 1 < grid.num_levels:
            dzt = (zvals[m + 1][snap_n.space] - zvals[m][snap_n.space]) / grid.tau
            time_term += p * float(np.sum(trunc2 * _pow(zn, p - 1.0) * dzt)) * hn * grid.tau

        # cell-lattice quantities
        uc_full = _cell_average(u.values[m], grid)
        zc_full = _cell_average(zvals[m], grid)
        guz = discrete_gradient(zvals[m], grid)
        gu = discrete_gradient(u.values[m], grid)
        uc = uc_full[snap_c.space]
        zc = zc_full[snap_c.space]
        gz = guz[snap_c.space]
        g = gu[snap_c.space]
        ind = uc > k
        if params.is_isotropic:
            r = np.sqrt(np.sum(g * g, axis=-1))
            dens = _pow(np.maximum(r - params.lam, 0.0), p)
        else:
            delta = params.delta_for(grid.n)
            dens = np.sum(_pow(np.maximum(np.abs(g) - delta, 0.0), p), axis=-1)
        grad_term += float(np.sum(dens * _pow(zc, p) * ind)) * hn * grid.tau
        dz_norm = np.sqrt(np.sum(gz * gz, axis=-1))
        space_term += float(
            np.sum(_pow(np.maximum(uc - k, 0.0), p) * _pow(dz_norm, p))
        ) * hn * grid.tau

    lhs = sup_term + grad_term
    rhs = time_term + space_term
    return EnergyReport(
        k=k,
        sup_term=sup_term,
        degenerate_grad_term=grad_term,
        time_cutoff_term=time_term,
        space_cutoff_term=space_term,
        fitted_C=lhs / max(rhs, _TINY),
    )


# ---------------------------------------------------------------------------
# recursion constants and the iteration trace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecursionConstants:
    """Constants of the superlevel recursion Y_{j+1} <= C~ b^j (...) Y_j^(1+alpha)."""

    n: int
    p: float
    b: float
    alpha: float
    A_k: float
    q: float
    k: float
    theta: float
    rho: float
    sigma: float
    C_tilde: float | None = None


def recursion_constants(
    n: int, params: DegeneracyParams, theta: float, rho: float, sigma: float, k: float
) -> RecursionConstants:
    """Evaluate b, alpha, q and the scale factor A_k for the recursion; the
    standing assumption k >= rho is enforced."""
    if k < rho:
        raise ConfigError("recursion constants require k >= rho")
    return _recursion_constants_unchecked(n, params, theta, rho, sigma, k)


def _recursion_constants_unchecked(n, params, theta, rho, sigma, k) -> RecursionConstants:
    p = params.p
    b = 2.0 ** (p * (p + 2.0 * n + 2.0) / (n + 2.0))
    alpha = p / (n + 2.0)
    q = p * (n + 2.0) / n
    a_k = (rho ** p / theta) ** (n / p) * k ** ((2.0 - p) * (n + p) / p) + theta / rho ** p
    return RecursionConstants(
        n=n, p=p, b=b, alpha=alpha, A_k=a_k, q=q, k=k, theta=theta, rho=rho, sigma=sigma
    )


def recursion_rhs_factor(consts: RecursionConstants, sigma: float, j: int, y_j: float) -> float:
    """Right-hand side of the recursion at index j with unit constant."""
    n, p, k = consts.n, consts.p, consts.k
    pref = (
        consts.b ** j
        * (1.0 - sigma) ** (-p * (n + p) / (n + 2.0))
        * k ** (-2.0 * p / (n + 2.0))
        * consts.A_k ** (p / (n + 2.0))
    )
    return pref * y_j ** (1.0 + consts.alpha)


@dataclass
class TraceEntry:
    j: int
    rho_j: float
    theta_j: float
    k_j: float
    Y_j: float
    A_next_measure: float
    Z_j: float
    predicted_Y_next: float
    superlevel_ok: bool


@dataclass
class IterationTrace:
    sigma: float
    k: float
    entries: list[TraceEntry]
    consts: RecursionConstants | None

    @property
    def Y(self) -> np.ndarray:
        return np.array([e.Y_j for e in self.entries])


def compute_trace(
    u: Field,
    f: ShrinkFamily,
    ladder: LevelLadder,
    params: DegeneracyParams,
    j_max: int,
) -> IterationTrace:
    """Per-index superlevel quantities on the shrinking cylinders.

    Y_j is the average of (u - k_j)_+^p over snapped Q_j; |A_{j+1}| counts
    nodes above k_{j+1}; Z_j combines the gradient integral over the tilde
    box with the scaled Y_j.  The superlevel measure bound is checked for
    s in {2, p} at every index.
    """
    grid = u.grid
    p = params.p
    hn_tau = grid.cell_volume * grid.tau
    k = ladder.k
    consts = (
        _recursion_constants_unchecked(grid.n, params, f.theta, f.rho, f.sigma, k)
        if k >= f.rho
        else None
    )
    entries: list[TraceEntry] = []
    for j in range(j_max + 1):
        q_j = f.cylinder(j)
        q_tilde = f.cylinder_tilde(j)
        snap = snap_cylinder(q_j, grid)
        if snap.empty:
            raise GridTooCoarse(f"snapped cylinder Q_{j} is empty; grid too coarse for j_max")
        k_j = ladder.level(j)
        k_next = ladder.level(j + 1)
        vals = u.values[(snap.time,) + snap.space]
        trunc = np.maximum(vals - k_j, 0.0)
        y_j = float(np.mean(_pow(trunc, p)))
        above = vals > k_next
        a_next = float(np.sum(above)) * hn_tau

        # superlevel bound for s in {2, p}: integral of (u-k_j)_+^s dominates
        # (k/2^(j+1))^s |A_{j+1}|
        ok = True
        for s in (2.0, p):
            integral = float(np.sum(_pow(trunc, s))) * hn_tau
            bound = (k / 2.0 ** (j + 1)) ** s * a_next
            if integral + 1e-12 * max(1.0, abs(integral)) < bound:
                ok = False

        # gradient integral of (u - k_{j+1})_+ over the tilde box cells
        snap_tc = snap_cylinder_cells(q_tilde, grid)
        grad_int = 0.0
        for m in range(snap_tc.time.start, snap_tc.time.stop):
            g = discrete_gradient(np.maximum(u.values[m] - k_next, 0.0), grid)[snap_tc.space]
            gnorm = np.sqrt(np.sum(g * g, axis=-1))
            grad_int += float(np.sum(_pow(gnorm, p))) * hn_tau
        q_over = consts.q if consts is not None else p * (grid.n + 2.0) / grid.n
        z_j = (
            grad_int
            + cylinder_measure(q_j) / ((1.0 - f.sigma) ** p * f.rho ** p) * y_j
        ) ** (p / q_over)

        predicted = (
            recursion_rhs_factor(consts, f.sigma, j, y_j) if consts is not None else float("nan")
        )
        entries.append(
            TraceEntry(
                j=j,
                rho_j=f.rho_j(j),
                theta_j=f.theta_j(j),
                k_j=k_j,
                Y_j=y_j,
                A_next_measure=a_next,
                Z_j=z_j,
                predicted_Y_next=predicted,
                superlevel_ok=ok,
            )
        )
    return IterationTrace(sigma=f.sigma, k=k, entries=entries, consts=consts)


@dataclass
class RecursionFit:
    """Smallest constant making the recursion hold on a trace, with per-index
    slack (rhs/lhs at unit constant; infinite where the step is vacuous)."""

    c_tilde: float
    ratios: list[float]
    slacks: list[float]


def verify_recursion(trace: IterationTrace, consts: RecursionConstants, sigma: float) -> RecursionFit:
    ratios: list[float] = []
    slacks: list[float] = []
    c_tilde = 0.0
    for j in range(len(trace.entries) - 1):
        y_j = trace.entries[j].Y_j
        y_next = trace.entries[j + 1].Y_j
        rhs = recursion_rhs_factor(consts, sigma, j, y_j)
        if rhs <= 0.0:
            ratios.append(0.0)
            slacks.append(float("inf"))
            continue
        ratio = y_next / rhs
        ratios.append(ratio)
        slacks.append(float("inf") if y_next == 0.0 else rhs / y_next)
        c_tilde = max(c_tilde, ratio)
    return RecursionFit(c_tilde=c_tilde, ratios=ratios, slacks=slacks)


def synthetic_equality_trace(
    consts: RecursionConstants, sigma: float, y0: float, j_max: int
) -> IterationTrace:
    """Trace satisfying the recursion with equality at unit constant; the
    fitting oracle must recover exactly 1 on it."""
    entries: list[TraceEntry] = []
    y = y0
    ladder = LevelLadder(consts.k)
    for j in range(j_max + 1):
        entries.append(
            TraceEntry(
                j=j,
                rho_j=float("nan"),
                theta_j=float("nan"),
                k_j=ladder.level(j),
                Y_j=y,
                A_next_measure=0.0,
                Z_j=0.0,
                predicted_Y_next=recursion_rhs_factor(consts, sigma, j, y),
                superlevel_ok=True,
            )
        )
        y = recursion_rhs_factor(consts, sigma, j, y)
    return IterationTrace(sigma=sigma, k=consts.k, entries=entries, consts=consts)


# ---------------------------------------------------------------------------
# fast-convergence lemma
# ---------------------------------------------------------------------------


@dataclass
class GiustiResult:
    threshold: float
    satisfied: bool
    sequence: np.ndarray
    envelope: np.ndarray
    diverged_at: int | None


def giusti_check(C: float, b: float, alpha: float, Y0: float, j_max: int) -> GiustiResult:
    """Iterate the equality recursion Y_{j+1} = C b^j Y_j^(1+alpha) and compare
    against the geometric envelope Y0 b^(-j/alpha) below the smallness
    threshold C^(-1/alpha) b^(-1/alpha^2)."""
    if C <= 0 or alpha <= 0 or Y0 < 0 or b <= 1.0:
        raise ConfigError("giusti_check requires C, alpha > 0, Y0 >= 0, b > 1")
    threshold = C ** (-1.0 / alpha) * b ** (-1.0 / alpha ** 2)
    seq = np.zeros(j_max + 1)
    env = np.zeros(j_max + 1)
    seq[0] = Y0
    env[0] = Y0
    diverged_at = None
    with np.errstate(over="ignore"):
        for j in range(j_max):
            y = C * b ** j * seq[j] ** (1.0 + alpha)
            if not np.isfinite(y):
                diverged_at = j + 1
                seq[j + 1 :] = np.inf
                break
            seq[j + 1] = y
        env[1:] = Y0 * b ** (-np.arange(1, j_max + 1) / alpha)
    below = Y0 <= threshold
    satisfied = below and diverged_at is None and bool(np.all(seq <= env * (1.0 + 1e-12) + _TINY))
    return GiustiResult(
        threshold=threshold,
        satisfied=satisfied,
        sequence=seq,
        envelope=env,
        diverged_at=diverged_at,
    )


# ---------------------------------------------------------------------------
# L-infty bound
# ---------------------------------------------------------------------------


def _mean_abs_power(u: Field, cyl: Cylinder, power: float) -> float:
    snap = snap_cylinder(cyl, u.grid)
    if snap.empty:
        raise GridTooCoarse("cylinder contains no grid nodes")
    vals = u.values[(snap.time,) + snap.space]
    return float(np.mean(_pow(np.abs(vals), power)))


def _linfty_third_branch(
    mean_pow: float, n: int, p: float, theta: float, rho: float, sigma: float, c_fit: float
) -> float:
    if p > 2.0:
        return (
            c_fit
            * (1.0 - sigma) ** (-(n + p) / 2.0)
            * np.sqrt(theta / rho ** p)
            * np.sqrt(mean_pow)
        )
    geom = (rho ** 2 / theta) ** (n / 2.0) + theta / rho ** 2
    return c_fit * (1.0 - sigma) ** (-(n + 2.0) / 2.0) * np.sqrt(geom) * np.sqrt(mean_pow)


def linfty_bound(
    u: Field, cyl: Cylinder, sigma: float, params: DegeneracyParams, c_fit: float
) -> float:
    """Right-hand side of the local boundedness estimate with constant c_fit.

    For p > 2 the bound is max{rho, (rho^p/theta)^(1/(p-2)), third branch};
    for p = 2 the middle branch disappears and the geometric factor moves
    inside the square root.
    """
    p = params.p
    n = u.grid.n
    mean_pow = _mean_abs_power(u, cyl, p if p > 2.0 else 2.0)
    branches = [cyl.rho]
    if p > 2.0:
        branches.append((cyl.rho ** p / cyl.theta) ** (1.0 / (p - 2.0)))
    branches.append(_linfty_third_branch(mean_pow, n, p, cyl.theta, cyl.rho, sigma, c_fit))
    return float(max(branches))


def select_k_threshold(
    u: Field, cyl: Cylinder, sigma: float, params: DegeneracyParams, C_fit: float
) -> float:
    """Truncation height above which the iteration closes: the same maximum
    of branches as the final bound (it dominates rho by construction)."""
    return linfty_bound(u, cyl, sigma, params, C_fit)


@dataclass
class LinftyVerdict:
    ess_sup_inner: float
    bound: float
    ratio: float
    passed: bool


def verify_linfty(
    u: Field, cyl: Cylinder, sigma: float, params: DegeneracyParams, C_fit: float
) -> LinftyVerdict:
    """Check ess sup |u| over the inner cylinder Q(sigma*theta, sigma*rho)
    against the fitted bound.  Working with |u| realizes the two-sided
    argument (u and -u at once), so the verdict is symmetric under u -> -u."""
    inner = cyl.scaled(sigma)
    snap = snap_cylinder(inner, u.grid)
    if snap.empty:
        raise GridTooCoarse("inner cylinder contains no grid nodes")
    ess_sup = float(np.max(np.abs(u.values[(snap.time,) + snap.space])))
    bound = linfty_bound(u, cyl, sigma, params, C_fit)
    return LinftyVerdict(
        ess_sup_inner=ess_sup,
        bound=bound,
        ratio=ess_sup / max(bound, _TINY),
        passed=ess_sup <= bound,
    )


def required_linfty_constant(
    u: Field, cyl: Cylinder, sigma: float, params: DegeneracyParams
) -> float:
    """Smallest c_fit for which :func:`verify_linfty` passes (0 when the
    geometric branches already dominate)."""
    inner = cyl.scaled(sigma)
    snap = snap_cylinder(inner, u.grid)
    if snap.empty:
        raise GridTooCoarse("inner cylinder contains no grid nodes")
    ess_sup = float(np.max(np.abs(u.values[(snap.time,) + snap.space])))
    p = params.p
    geom_branches = [cyl.rho]
    if p > 2.0:
        geom_branches.append((cyl.rho ** p / cyl.theta) ** (1.0 / (p - 2.0)))
    if ess_sup <= max(geom_branches):
        return 0.0
    mean_pow = _mean_abs_power(u, cyl, p if p > 2.0 else 2.0)
    unit = _linfty_third_branch(mean_pow, u.grid.n, p, cyl.theta, cyl.rho, sigma, 1.0)
    if unit <= 0.0:
        return float("inf")
    return ess_sup / unit


# ---------------------------------------------------------------------------
# interpolation inequality
# ---------------------------------------------------------------------------


@dataclass
class InterpolationReport:
    lhs: float
    rhs_without_C: float
    fitted_C: float
    q: float
    degenerate: bool


def interpolation_check(v: Field, r: float, s: float) -> InterpolationReport:
    """Parabolic interpolation with q = s (n + r) / n for fields vanishing on
    the lateral boundary; the fitted constant is scale invariant in v."""
    if r < 1 or s < 1:
        raise ConfigError("interpolation exponents must satisfy r, s >= 1")
    grid = v.grid
    if grid.bc == "dirichlet":
        mask = grid.boundary_mask()
        if float(np.max(np.abs(v.values[:, mask]))) > 1e-12:
            raise ConfigError("field must vanish on the lateral boundary")
    n = grid.n
    q = s * (n + r) / n
    hn = grid.cell_volume
    tau = grid.tau
    # left rule in time over all steps
    lhs = 0.0
    grad_int = 0.0
    sup_r = 0.0
    for m in range(grid.num_levels - 1):
        vm = v.values[m]
        lhs += float(np.sum(_pow(np.abs(vm), q))) * hn * tau
        g = discrete_gradient(vm, grid)
        gnorm = np.sqrt(np.sum(g * g, axis=-1))
        grad_int += float(np.sum(_pow(gnorm, s))) * hn * tau
    for m in range(grid.num_levels):
        sup_r = max(sup_r, float(np.sum(_pow(np.abs(v.values[m]), r))) * hn)
    rhs = grad_int * sup_r ** (s / n)
    degenerate = rhs <= _TINY or lhs <= _TINY
    fitted = 0.0 if degenerate else (lhs / rhs) ** (1.0 / q)
    return InterpolationReport(lhs=lhs, rhs_without_C=rhs, fitted_C=fitted, q=q, degenerate=degenerate)


# ---------------------------------------------------------------------------
# weak-form residual
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeTestFunction:
    """Smooth compactly supported test function phi(x, t)."""

    name: str
    center: tuple[float, ...]
    radius: float
    t_center: float
    t_radius: float

    def sample(self, grid: Grid) -> np.ndarray:
        mesh = grid.meshgrid()
        prof = np.ones(grid.shape)
        for i in range(grid.n):
            z = (mesh[i] - self.center[i]) / self.radius
            prof = prof * _pow(np.maximum(1.0 - z * z, 0.0), 3.0)
        tz = (grid.times - self.t_center) / self.t_radius
        tprof = _pow(np.maximum(1.0 - tz * tz, 0.0), 3.0)
        return tprof.reshape((-1,) + (1,) * grid.n) * prof[None, ...]

    def supported_inside(self, grid: Grid) -> bool:
        for i in range(grid.n):
            if self.center[i] - self.radius < grid.lo[i] or self.center[i] + self.radius > grid.hi[i]:
                return False
        return (
            self.t_center - self.t_radius >= grid.t_start
            and self.t_center + self.t_radius <= grid.final_time
        )


def default_test_functions(grid: Grid, count: int = 3) -> list[SpaceTimeTestFunction]:
    """A small registry of bumps centered in the domain at staggered scales."""
    mid = tuple(0.5 * (a + b) for a, b in zip(grid.lo, grid.hi))
    half = min(0.5 * (b - a) for a, b in zip(grid.lo, grid.hi))
    t_mid = grid.t_start + 0.5 * grid.num_steps * grid.tau
    t_half = 0.5 * grid.num_steps * grid.tau
    fns = []
    for i in range(count):
        frac = 0.9 / (i + 1.0)
        fns.append(
            SpaceTimeTestFunction(
                name=f"bump-{i}",
                center=mid,
                radius=frac * half,
                t_center=t_mid,
                t_radius=frac * t_half,
            )
        )
    return fns


def weak_form_residual(
    u: Field,
    params: DegeneracyParams,
    test_set: list[SpaceTimeTestFunction],
    steklov_h: float | None = None,
) -> float:
    """Maximal quadrature residual of the weak formulation over the test set.

    Uses a forward difference in time on the test function paired with the
    cell-lattice flux; constants drop out exactly because the time sum
    telescopes for compactly supported test functions.
    """
    from .flux import flux as flux_dispatch

    grid = u.grid
    if steklov_h is not None:
        u = steklov_average(u, steklov_h).field
    hn = grid.cell_volume
    worst = 0.0
    for phi in test_set:
        if not phi.supported_inside(grid):
            raise ConfigError(f"test function {phi.name} support exceeds the domain")
        ph = phi.sample(grid)
        res = 0.0
        for m in range(grid.num_levels - 1):
            res += float(np.sum(u.values[m] * (ph[m + 1] - ph[m]))) * hn
            a = flux_dispatch(discrete_gradient(u.values[m], grid), params)
            gphi = discrete_gradient(ph[m], grid)
            res -= float(np.sum(a * gphi)) * hn * grid.tau
        worst = max(worst, abs(res))
    return worst
