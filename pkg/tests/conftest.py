"""Shared builders for the test suite."""

from __future__ import annotations

import math

from degenlab.harness import ExperimentConfig

PI = math.pi


def heat_config(**overrides) -> ExperimentConfig:
    """Baseline experiment: n=2, p=2, zero thresholds, product-of-sines data
    on (0, pi)^2, a centered cylinder ending at t = 0.4."""
    body = {
        "params": {"p": 2.0, "variant": "orthotropic", "delta": [0.0, 0.0]},
        "grid": {
            "lo": [0.0, 0.0],
            "hi": [PI, PI],
            "h": PI / 16,
            "tau": 0.01,
            "num_steps": 40,
        },
        "data": {"name": "sin-product"},
        "cylinder": {
            "vertex_x": [PI / 2, PI / 2],
            "vertex_t": 0.4,
            "theta": 0.35,
            "rho": 1.2,
            "sigma": 0.5,
        },
        "ladder": {"j_max": 4},
    }
    body.update(overrides)
    return ExperimentConfig.model_validate(body)


def small_config(**overrides) -> ExperimentConfig:
    """Coarser and shorter variant for cheap smoke runs."""
    base = heat_config(
        grid={
            "lo": [0.0, 0.0],
            "hi": [PI, PI],
            "h": PI / 8,
            "tau": 0.02,
            "num_steps": 20,
        },
        **overrides,
    )
    return base
