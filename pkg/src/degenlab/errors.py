"""Exception types shared across the package."""

from __future__ import annotations


class DegenLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DegenLabError):
    """Invalid configuration or inconsistent inputs."""


class NonConvergence(DegenLabError):
    """The implicit inner solver exhausted its iteration budget."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"inner solver did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class CflViolation(DegenLabError):
    """Explicit time step exceeds the stability limit."""

    def __init__(self, tau_max: float):
        self.tau_max = tau_max
        super().__init__(f"explicit step violates the CFL limit tau_max={tau_max:.6e}")


class GridTooCoarse(DegenLabError):
    """A snapped cylinder contains no grid nodes."""
