"""Cubes, parabolic cylinders, uniform space-time grids and shrinking-cylinder families.

Conventions: cubes are open in the max-norm, cylinders are open in time
(bottom and top excluded), and snapping to a grid is inward, so discrete
measures never overestimate the continuum ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError

# Strictness slack for open-set membership on floating-point coordinates.
_EPS = 1e-12


@dataclass(frozen=True)
class Cube:
    """Open n-dimensional cube of half-width ``rho`` centered at ``center``."""

    center: tuple[float, ...]
    rho: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ConfigError("cube half-width must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def contains(self, x: Sequence[float]) -> bool:
        return all(abs(xi - ci) < self.rho for xi, ci in zip(x, self.center))


@dataclass(frozen=True)
class Cylinder:
    """Open parabolic cylinder: cube of half-width ``rho`` times ``(t0 - theta, t0)``."""

    vertex_x: tuple[float, ...]
    vertex_t: float
    theta: float
    rho: float

    def __post_init__(self):
        if self.theta <= 0 or self.rho <= 0:
            raise ConfigError("cylinder extents must be positive")

    @property
    def n(self) -> int:
        return len(self.vertex_x)

    @property
    def cube(self) -> Cube:
        return Cube(self.vertex_x, self.rho)

    def contains(self, x: Sequence[float], t: float) -> bool:
        return (
            self.vertex_t - self.theta < t < self.vertex_t
            and self.cube.contains(x)
        )

    def scaled(self, factor: float) -> "Cylinder":
        """Cylinder with the same vertex and extents scaled by ``factor``."""
        return Cylinder(self.vertex_x, self.vertex_t, factor * self.theta, factor * self.rho)


def cylinder_measure(c: Cylinder) -> float:
    """Lebesgue measure ``(2 rho)^n * theta``."""
    return (2.0 * c.rho) ** c.n * c.theta


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product space-time grid.

    Spatial nodes along axis i are ``lo[i] + k*h``; extents must be integer
    multiples of ``h``.  Time levels are ``t_start + m*tau`` for
    ``m = 0..num_steps``.  For periodic boundaries the duplicate endpoint
    node is dropped.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    h: float
    tau: float
    num_steps: int
    bc: str = "dirichlet"
    t_start: float = 0.0

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ConfigError("lo/hi dimension mismatch")
        if self.h <= 0 or self.tau <= 0:
            raise ConfigError("grid steps must be positive")
        if self.num_steps < 1:
            raise ConfigError("need at least one time step")
        if self.bc not in ("dirichlet", "periodic"):
            raise ConfigError(f"unknown boundary kind {self.bc!r}")
        for a, b in zip(self.lo, self.hi):
            r = (b - a) / self.h
            if b <= a or abs(r - round(r)) > 1e-9 * max(1.0, r):
                raise ConfigError("extents must be positive integer multiples of h")

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        counts = []
        for a, b in zip(self.lo, self.hi):
            m = int(round((b - a) / self.h))
            counts.append(m + 1 if self.bc == "dirichlet" else m)
        return tuple(counts)

    @property
    def num_levels(self) -> int:
        return self.num_steps + 1

    @property
    def final_time(self) -> float:
        return self.t_start + self.num_steps * self.tau

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    def axis(self, i: int) -> np.ndarray:
        return self.lo[i] + self.h * np.arange(self.shape[i])

    @property
    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.n)]

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.tau * np.arange(self.num_levels)

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes, indexing="ij"))

    def boundary_mask(self) -> np.ndarray:
        """Boolean mask of boundary nodes (all False on periodic grids)."""
        mask = np.zeros(self.shape, dtype=bool)
        if self.bc == "dirichlet":
            for i in range(self.n):
                sl_lo = [slice(None)] * self.n
                sl_hi = [slice(None)] * self.n
                sl_lo[i] = 0
                sl_hi[i] = -1
                mask[tuple(sl_lo)] = True
                mask[tuple(sl_hi)] = True
        return mask


@dataclass(frozen=True)
class ShrinkFamily:
    """The shrinking-cylinder geometry: nested boxes interpolating between
    ``Q(theta, rho)`` at j=0 and ``Q(sigma*theta, sigma*rho)`` as j grows."""

    sigma: float
    theta: float
    rho: float
    vertex_x: tuple[float, ...]
    vertex_t: float

    def rho_j(self, j: int) -> float:
        return self.sigma * self.rho + (1.0 - self.sigma) * self.rho / 2.0 ** j

    def theta_j(self, j: int) -> float:
        return self.sigma * self.theta + (1.0 - self.sigma) * self.theta / 2.0 ** j

    def rho_tilde(self, j: int) -> float:
        return 0.5 * (self.rho_j(j) + self.rho_j(j + 1))

    def theta_tilde(self, j: int) -> float:
        return 0.5 * (self.theta_j(j) + self.theta_j(j + 1))

    def cylinder(self, j: int) -> Cylinder:
        return Cylinder(self.vertex_x, self.vertex_t, self.theta_j(j), self.rho_j(j))

    def cylinder_tilde(self, j: int) -> Cylinder:
        return Cylinder(self.vertex_x, self.vertex_t, self.theta_tilde(j), self.rho_tilde(j))

    @property
    def limit_cylinder(self) -> Cylinder:
        return Cylinder(
            self.vertex_x, self.vertex_t, self.sigma * self.theta, self.sigma * self.rho
        )


def make_shrinking_family(
    sigma: float,
    theta: float,
    rho: float,
    vertex: tuple[Sequence[float], float],
) -> ShrinkFamily:
    """Build the shrinking-cylinder family with vertex ``(x0, t0)``."""
    if not 0.0 < sigma < 1.0:
        raise ConfigError("sigma must lie in (0, 1)")
    if theta <= 0 or rho <= 0:
        raise ConfigError("theta and rho must be positive")
    x0, t0 = vertex
    return ShrinkFamily(sigma, theta, rho, tuple(float(x) for x in x0), float(t0))


@dataclass(frozen=True)
class MeasureRatioReport:
    """Per-index measure ratios of the nested boxes against their bounds."""

    tilde_over_next: tuple[float, ...]
    outer_over_tilde: tuple[float, ...]
    bound_tilde_over_next: float
    bound_outer_over_tilde: float
    first_violation: int | None

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def measure_ratio_check(f: ShrinkFamily, n: int, j_max: int) -> MeasureRatioReport:
    """Check ``|Q~_j|/|Q_{j+1}| < (3/2)^{n+1}`` and ``|Q_j|/|Q~_j| < 4^{n+1}``."""
    if j_max < 0:
        raise ConfigError("j_max must be nonnegative")
    bound1 = 1.5 ** (n + 1)
    bound2 = 4.0 ** (n + 1)
    r1, r2 = [], []
    violation = None
    for j in range(j_max + 1):
        m = lambda rho, theta: (2.0 * rho) ** n * theta  # noqa: E731
        q_j = m(f.rho_j(j), f.theta_j(j))
        q_next = m(f.rho_j(j + 1), f.theta_j(j + 1))
        q_tilde = m(f.rho_tilde(j), f.theta_tilde(j))
        a = q_tilde / q_next
        b = q_j / q_tilde
        r1.append(a)
        r2.append(b)
        if violation is None and not (a < bound1 and b < bound2):
            violation = j
    return MeasureRatioReport(tuple(r1), tuple(r2), bound1, bound2, violation)


@dataclass(frozen=True)
class SnappedCylinder:
    """Index ranges of grid nodes strictly inside a cylinder."""

    space: tuple[slice, ...]
    time: slice

    @property
    def empty(self) -> bool:
        if self.time.stop <= self.time.start:
            return True
        return any(s.stop <= s.start for s in self.space)

    @property
    def num_space_nodes(self) -> int:
        if self.empty:
            return 0
        count = 1
        for s in self.space:
            count *= s.stop - s.start
        return count

    @property
    def num_levels(self) -> int:
        return max(0, self.time.stop - self.time.start)

    def discrete_measure(self, grid: Grid) -> float:
        return self.num_space_nodes * self.num_levels * grid.cell_volume * grid.tau


def _interval_slice(coords: np.ndarray, lo: float, hi: float) -> slice:
    scale = max(1.0, abs(lo), abs(hi))
    inside = (coords > lo + _EPS * scale) & (coords < hi - _EPS * scale)
    idx = np.nonzero(inside)[0]
    if idx.size == 0:
        return slice(0, 0)
    return slice(int(idx[0]), int(idx[-1]) + 1)


def snap_cylinder(c: Cylinder, g: Grid) -> SnappedCylinder:
    """Maximal set of grid nodes strictly inside ``c`` (inward snapping)."""
    if c.n != g.n:
        raise ConfigError("cylinder/grid dimension mismatch")
    space = tuple(
        _interval_slice(g.axis(i), c.vertex_x[i] - c.rho, c.vertex_x[i] + c.rho)
        for i in range(g.n)
    )
    time = _interval_slice(g.times, c.vertex_t - c.theta, c.vertex_t)
    return SnappedCylinder(space, time)


def snap_cylinder_cells(c: Cylinder, g: Grid) -> SnappedCylinder:
    """Cells (indexed by their low corner) whose center lies strictly inside ``c``.

    The time window is the same node-level window as :func:`snap_cylinder`.
    """
    if c.n != g.n:
        raise ConfigError("cylinder/grid dimension mismatch")
    space = []
    for i in range(g.n):
        m = g.shape[i] - 1 if g.bc == "dirichlet" else g.shape[i]
        centers = g.axis(i)[:m] + 0.5 * g.h
        space.append(_interval_slice(centers, c.vertex_x[i] - c.rho, c.vertex_x[i] + c.rho))
    time = _interval_slice(g.times, c.vertex_t - c.theta, c.vertex_t)
    return SnappedCylinder(tuple(space), time)


def cylinder_inside_grid(c: Cylinder, g: Grid) -> bool:
    """Whether the closed cylinder fits inside the grid's space-time domain."""
    for i in range(g.n):
        if c.vertex_x[i] - c.rho < g.lo[i] - _EPS or c.vertex_x[i] + c.rho > g.hi[i] + _EPS:
            return False
    return (
        c.vertex_t - c.theta >= g.t_start - _EPS
        and c.vertex_t <= g.final_time + _EPS
    )
