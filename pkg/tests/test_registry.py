import math

import numpy as np
import pytest

from degenlab.errors import ConfigError
from degenlab.flux import DegeneracyParams
from degenlab.geometry import Grid
from degenlab.registry import build_data, preset_names

PI = math.pi


def _grid(n=2, h=PI / 8):
    return Grid(lo=(0.0,) * n, hi=(PI,) * n, h=h, tau=0.01, num_steps=10)


def test_preset_names_and_unknown():
    assert set(preset_names()) >= {"sin-product", "affine-slope", "random-bump", "quadratic-decay"}
    with pytest.raises(ConfigError):
        build_data("nope", _grid(), DegeneracyParams.orthotropic(2.0, [0.0, 0.0]))


def test_sin_product_exact_only_in_heat_regime():
    g = _grid()
    heat = build_data("sin-product", g, DegeneracyParams.orthotropic(2.0, [0.0, 0.0]))
    assert heat.exact is not None
    x, y = g.meshgrid()
    assert np.allclose(heat.exact(0.0), np.sin(x) * np.sin(y))
    assert np.allclose(heat.exact(0.5), math.exp(-1.0) * np.sin(x) * np.sin(y))
    degen = build_data("sin-product", g, DegeneracyParams.orthotropic(2.0, [0.1, 0.1]))
    assert degen.exact is None
    p3 = build_data("sin-product", g, DegeneracyParams.orthotropic(3.0, [0.0, 0.0]))
    assert p3.exact is None


def test_affine_slope_steady_detection():
    g = _grid()
    steady = build_data(
        "affine-slope", g, DegeneracyParams.orthotropic(2.0, [0.6, 0.6]), {"slope": 0.5}
    )
    assert steady.exact is not None
    assert np.array_equal(steady.exact(3.0), steady.initial)
    moving = build_data(
        "affine-slope", g, DegeneracyParams.orthotropic(2.0, [0.1, 0.1]), {"slope": 0.5}
    )
    assert moving.exact is None
    # isotropic steadiness uses the Euclidean norm of the constant gradient
    iso = build_data(
        "affine-slope", g, DegeneracyParams.isotropic(2.0, 0.8), {"slope": 0.5}
    )
    assert iso.exact is not None  # 0.5*sqrt(2) = 0.707 <= 0.8


def test_random_bump_is_seeded_and_zero_on_boundary():
    g = _grid()
    params = DegeneracyParams.orthotropic(2.0, [0.0, 0.0])
    a = build_data("random-bump", g, params, seed=3)
    b = build_data("random-bump", g, params, seed=3)
    c = build_data("random-bump", g, params, seed=4)
    assert np.array_equal(a.initial, b.initial)
    assert not np.array_equal(a.initial, c.initial)
    assert np.all(a.initial[g.boundary_mask()] == 0.0)
    assert a.initial.max() > 0.0


def test_quadratic_decay_manufactured_source():
    g = _grid()
    params = DegeneracyParams.orthotropic(2.0, [0.3, 0.3])
    data = build_data("quadratic-decay", g, params)
    x, _ = g.meshgrid()
    assert np.allclose(data.exact(0.7), math.exp(-0.7) * x ** 2)
    assert np.array_equal(data.initial, data.exact(0.0))
    # source = u_t - div A(Du): at x1 with 2 e^{-t} x1 > delta the flux is
    # (2 e^{-t} x1 - d)^{p-1} so its divergence is (p-1) 2 e^{-t} (...)^{p-2}
    f = data.source(0.0)
    mask = 2.0 * x > 0.3
    expected = -x ** 2 - 2.0 * np.where(mask, 1.0, 0.0)
    assert np.allclose(f, expected)
