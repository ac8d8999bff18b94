import numpy as np
import pytest

from gaugeelastic.expressions import (ExpressionError, parse_expression,
                                      prestate_from_expressions, sample, sample_components)
from gaugeelastic.fields import MaterialModel


def test_sample_matches_numpy(grid2d):
    x, y = grid2d.coords()
    val = sample(parse_expression("sin(x)*cos(2*y) + exp(-t)", 2), grid2d, t=1.0)
    assert np.allclose(val, np.sin(x) * np.cos(2 * y) + np.exp(-1.0))


def test_constants_broadcast(grid1d):
    assert np.array_equal(sample_components([2, 1.5], grid1d)[1], np.full(grid1d.shape, 1.5))


@pytest.mark.parametrize("bad", ["sin(z)", "foo(x)", "x +", "y"])
def test_rejects_unknown_names(bad):
    with pytest.raises(ExpressionError):
        parse_expression(bad, 1)


def test_non_finite_rejected(grid1d):
    with pytest.raises(ExpressionError, match="not finite"):
        sample(parse_expression("1/sin(x)", 1), grid1d)


def test_prestate_derivatives_are_analytic(grid1d):
    x = grid1d.coords()[0]
    mat = MaterialModel.uniform(2.0, 1.0, grid1d)
    ps = prestate_from_expressions(["0.1*sin(x - 0.5*t)"], mat, grid1d, t0=0.0)
    assert np.allclose(ps.G0[0, 0], 0.1 * np.cos(x))
    assert np.allclose(ps.Gamma[0, 0, 0], -0.1 * np.sin(x))
    assert np.allclose(ps.v0[0], -0.05 * np.cos(x))
    assert np.allclose(ps.sigma0[0, 0], 0.2 * np.cos(x))


def test_component_count_checked(grid2d):
    mat = MaterialModel.isotropic(1.0, 1.0, 1.0, grid2d)
    with pytest.raises(ExpressionError, match="2 components"):
        prestate_from_expressions(["x"], mat, grid2d)
