"""Named registry of initial/boundary/manufactured data.

Sources for manufactured-solution runs are supplied analytically here; the
solver never differentiates user expressions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .flux import DegeneracyParams
from .geometry import Grid


@dataclass
class ProblemData:
    """Callables assembled for one preset on one grid."""

    initial: np.ndarray
    boundary: Optional[Callable[[float], np.ndarray]]
    source: Optional[Callable[[float], np.ndarray]]
    exact: Optional[Callable[[float], np.ndarray]]


def _sin_product(grid: Grid, params: DegeneracyParams, options, rng) -> ProblemData:
    """Product of sines with zero boundary data.  On (0, pi)^n with p = 2 and
    zero thresholds this is the separated heat solution exp(-n t) * prod sin."""
    mesh = grid.meshgrid()
    prof = np.ones(grid.shape)
    for x in mesh:
        prof = prof * np.sin(x)
    zero = np.zeros(grid.shape)

    exact = None
    if params.p == 2.0 and params.max_threshold == 0.0:
        def exact(t, prof=prof, n=grid.n):  # noqa: F811
            return np.exp(-n * t) * prof

    return ProblemData(
        initial=prof,
        boundary=lambda t: zero,
        source=None,
        exact=exact,
    )


def _affine_slope(grid: Grid, params: DegeneracyParams, options, rng) -> ProblemData:
    """u0 = a * sum_i x_i with its own trace as constant-in-time boundary data.
    Degenerate steady state whenever the slope sits inside the threshold set."""
    a = float(options.get("slope", 0.5))
    mesh = grid.meshgrid()
    prof = a * sum(mesh)

    if params.is_isotropic:
        steady = a * np.sqrt(grid.n) <= params.lam
    else:
        steady = all(a <= d for d in params.delta_for(grid.n))
    exact = (lambda t, prof=prof: prof) if steady else None
    return ProblemData(
        initial=prof,
        boundary=lambda t, prof=prof: prof,
        source=None,
        exact=exact,
    )


def _random_bump(grid: Grid, params: DegeneracyParams, options, rng) -> ProblemData:
    """Sum of a few random smooth bumps, zero on the boundary."""
    count = int(options.get("count", 3))
    amplitude = float(options.get("amplitude", 1.0))
    mesh = grid.meshgrid()
    prof = np.zeros(grid.shape)
    for _ in range(count):
        center = [rng.uniform(a + 0.3 * (b - a), b - 0.3 * (b - a)) for a, b in zip(grid.lo, grid.hi)]
        width = rng.uniform(0.15, 0.35) * min(b - a for a, b in zip(grid.lo, grid.hi))
        amp = amplitude * rng.uniform(0.3, 1.0)
        bump = np.ones(grid.shape)
        for i, x in enumerate(mesh):
            z = (x - center[i]) / width
            bump = bump * np.maximum(1.0 - z * z, 0.0) ** 2
        prof += amp * bump
    zero = np.zeros(grid.shape)
    return ProblemData(initial=prof, boundary=lambda t: zero, source=None, exact=None)


def _quadratic_decay(grid: Grid, params: DegeneracyParams, options, rng) -> ProblemData:
    """Manufactured solution u = exp(-t) * x_1^2 with its analytic source.

    With w = 2 exp(-t) x_1 the flux is (|w| - d)_+^(p-1) sign(x_1) along axis 1
    (d = delta_1, or lam in the isotropic variant, which coincides because the
    gradient has a single component), so
    f = -exp(-t) x_1^2 - (p-1) * 2 exp(-t) * (2 exp(-t)|x_1| - d)_+^(p-2).
    """
    mesh = grid.meshgrid()
    x1 = mesh[0]
    p = params.p
    d = params.lam if params.is_isotropic else params.delta_for(grid.n)[0]

    def exact(t):
        return np.exp(-t) * x1 ** 2

    def source(t):
        c = 2.0 * np.exp(-t)
        core = np.maximum(c * np.abs(x1) - d, 0.0)
        lead = core ** (p - 2.0) if p != 2.0 else np.where(core > 0.0, 1.0, 0.0)
        return -np.exp(-t) * x1 ** 2 - (p - 1.0) * c * lead

    return ProblemData(initial=exact(grid.t_start), boundary=exact, source=source, exact=exact)


_REGISTRY = {
    "sin-product": _sin_product,
    "affine-slope": _affine_slope,
    "random-bump": _random_bump,
    "quadratic-decay": _quadratic_decay,
}


def preset_names() -> list[str]:
    return sorted(_REGISTRY)


def build_data(
    name: str,
    grid: Grid,
    params: DegeneracyParams,
    options: dict | None = None,
    seed: int = 0,
) -> ProblemData:
    if name not in _REGISTRY:
        raise ConfigError(f"unknown data preset {name!r}; known: {preset_names()}")
    rng = np.random.default_rng(seed)
    return _REGISTRY[name](grid, params, options or {}, rng)
