"""Solver and verification laboratory for strongly degenerate orthotropic
parabolic equations and their isotropic counterpart."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CflViolation,
    ConfigError,
    DegenLabError,
    GridTooCoarse,
    NonConvergence,
)
from .flux import DegeneracyParams  # noqa: F401
from .geometry import Cube, Cylinder, Grid, ShrinkFamily, make_shrinking_family  # noqa: F401
from .solver import Explicit, Field, Implicit, Problem, solve  # noqa: F401
