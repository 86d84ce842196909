"""Degenerate energy densities and their flux (gradient) fields.

The orthotropic density acts on each partial derivative separately with a
per-axis threshold; the isotropic one acts on the Euclidean norm of the
gradient with a single threshold.  Both fluxes vanish identically on their
degeneracy set, which removes the 0/0 singularity of the formal expression:
the positive part is zero exactly where the direction factor is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def _pow(x: np.ndarray, e: float) -> np.ndarray:
    """Power with exact fast paths for small integer exponents (x >= 0)."""
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 3.0:
        return x * x * x
    return x ** e


@dataclass(frozen=True)
class DegeneracyParams:
    """Exponent p >= 2 plus either per-axis thresholds delta or a radial
    threshold lam."""

    p: float
    delta: tuple[float, ...] | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.p < 2.0:
            raise ConfigError("p must be >= 2")
        if (self.delta is None) == (self.lam is None):
            raise ConfigError("exactly one of delta (orthotropic) or lam (isotropic) required")
        if self.delta is not None and any(d < 0 for d in self.delta):
            raise ConfigError("thresholds delta_i must be nonnegative")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lam must be nonnegative")

    @classmethod
    def orthotropic(cls, p: float, delta) -> "DegeneracyParams":
        return cls(p=float(p), delta=tuple(float(d) for d in delta))

    @classmethod
    def isotropic(cls, p: float, lam: float, allow_zero_lambda: bool = False) -> "DegeneracyParams":
        # lam = 0 recovers the classical p-Laplacian; allowed only as a test oracle.
        if lam <= 0 and not allow_zero_lambda:
            raise ConfigError("lam must be positive")
        return cls(p=float(p), lam=float(lam))

    @property
    def is_isotropic(self) -> bool:
        return self.lam is not None

    @property
    def max_threshold(self) -> float:
        if self.is_isotropic:
            return self.lam
        return max(self.delta) if self.delta else 0.0

    def delta_for(self, n: int) -> np.ndarray:
        if self.is_isotropic:
            raise ConfigError("orthotropic thresholds requested from isotropic params")
        if len(self.delta) != n:
            raise ConfigError(f"delta has length {len(self.delta)}, expected {n}")
        return np.asarray(self.delta)


def scalar_flux(s, delta: float, p: float):
    """sign(s) * (|s| - delta)_+^(p-1); identically zero for |s| <= delta."""
    s = np.asarray(s, dtype=float)
    return np.sign(s) * _pow(np.maximum(np.abs(s) - delta, 0.0), p - 1.0)


def energy_F(xi, params: DegeneracyParams):
    """Orthotropic density: sum_i (1/p) (|xi_i| - delta_i)_+^p over the last axis."""
    xi = np.asarray(xi, dtype=float)
    delta = params.delta_for(xi.shape[-1])
    core = np.maximum(np.abs(xi) - delta, 0.0)
    return np.sum(_pow(core, params.p), axis=-1) / params.p


def flux_A(xi, params: DegeneracyParams):
    """Gradient of :func:`energy_F`: componentwise scalar flux."""
    xi = np.asarray(xi, dtype=float)
    delta = params.delta_for(xi.shape[-1])
    return np.sign(xi) * _pow(np.maximum(np.abs(xi) - delta, 0.0), params.p - 1.0)


def energy_G(xi, params: DegeneracyParams):
    """Isotropic density (1/p) (|xi| - lam)_+^p over the last axis."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] == 1:
        # abs instead of sqrt(x^2) keeps 1D bitwise identical to the orthotropic path
        r = np.abs(xi[..., 0])
    else:
        r = np.sqrt(np.sum(xi * xi, axis=-1))
    return _pow(np.maximum(r - params.lam, 0.0), params.p) / params.p


def flux_G(xi, params: DegeneracyParams):
    """Gradient of :func:`energy_G`; zero whenever |xi| <= lam (no division)."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] == 1:
        return scalar_flux(xi[..., 0], params.lam, params.p)[..., None]
    r = np.sqrt(np.sum(xi * xi, axis=-1))
    core = _pow(np.maximum(r - params.lam, 0.0), params.p - 1.0)
    safe_r = np.where(r > 0.0, r, 1.0)
    return (core / safe_r)[..., None] * xi


def energy(xi, params: DegeneracyParams):
    """Variant dispatch for the energy density."""
    return energy_G(xi, params) if params.is_isotropic else energy_F(xi, params)


def flux(xi, params: DegeneracyParams):
    """Variant dispatch for the flux field."""
    return flux_G(xi, params) if params.is_isotropic else flux_A(xi, params)
