import numpy as np
import pytest

from gaugeelastic.checks import _periodic_grid, _random_variant, smooth_field
from gaugeelastic.fields import MaterialModel, PreState, WaveState, div, gradient
from gaugeelastic.lagrangian import (VARIANTS, LagrangianVariant, MissingPreStateError, action,
                                     canonical_fields, coupling_tensor, el_residual,
                                     eval_density, fd_functional_derivative)


@pytest.mark.parametrize("tag", VARIANTS)
@pytest.mark.parametrize("dim,n", [(1, 64), (2, 16)])
def test_canonical_fields_match_finite_differences(tag, dim, n, rng):
    grid = _periodic_grid(dim, n)
    var = _random_variant(tag, grid, rng)
    state = WaveState(smooth_field(rng, (dim,), grid), smooth_field(rng, (dim,), grid))
    cf = canonical_fields(var, state)
    for which, ref, sign in (("u", cf.fbar, -1), ("G", cf.sbar, 1), ("V", cf.pbar, -1)):
        fd = sign * fd_functional_derivative(var, state, which)
        assert np.max(np.abs(fd - ref)) <= 1e-6 * max(np.max(np.abs(ref)), 1e-12)


def test_density_sign_convention(grid1d):
    mat = MaterialModel.uniform(2.0, 3.0, grid1d)
    var = LagrangianVariant("L0", mat, PreState.zero(grid1d), grid1d)
    x = grid1d.coords()[0]
    d = eval_density(var, WaveState(np.zeros((1,) + x.shape), np.ones((1,) + x.shape)))
    assert np.allclose(d.T, 1.5)
    assert np.allclose(d.L, -1.5)


def test_symmetric_coupling_is_symmetric(rng):
    rho = np.eye(2)[..., None] * np.ones(5)
    v0 = rng.standard_normal((2, 5))
    B = coupling_tensor(rho, v0, True)
    assert np.allclose(B, np.swapaxes(B, 1, 2))
    raw = coupling_tensor(rho, v0, False)
    assert not np.allclose(raw, np.swapaxes(raw, 1, 2))


def test_missing_prestate_is_rejected(grid1d):
    mat = MaterialModel.uniform(1.0, 1.0, grid1d)
    ps = PreState.from_stress(np.zeros((1, 1) + grid1d.shape), np.zeros((1,) + grid1d.shape),
                              grid1d)
    with pytest.raises(MissingPreStateError):
        LagrangianVariant("wfe", mat, ps, grid1d)
    with pytest.raises(ValueError):
        LagrangianVariant("L1", mat, ps, grid1d)


def test_wfe_one_dimensional_coefficient_is_stress_curvature():
    grid = _periodic_grid(1, 128)
    x = grid.coords()[0]
    mat = MaterialModel((2 + 0.5 * np.cos(x))[None, None, None, None], np.ones((1, 1, 128)))
    ps = PreState.from_displacement(0.1 * np.sin(x)[None], mat, grid)
    var = LagrangianVariant("wfe", mat, ps, grid)
    ref = gradient(div(ps.sigma0, grid), grid)[:, 0]
    assert np.max(np.abs(var.wfe.K - ref)) < 1e-12 * np.max(np.abs(ref)) + 1e-15


def test_el_residual_vanishes_on_exact_wave():
    grid = _periodic_grid(1, 256)
    mat = MaterialModel.uniform(1.0, 1.0, grid)
    var = LagrangianVariant("L0", mat, PreState.zero(grid), grid)
    x = grid.coords()[0]
    dt = 1e-3
    states = [WaveState(np.cos(x - t)[None], -np.sin(x - t)[None], t) for t in (0, dt, 2 * dt)]
    r = el_residual(var, states)
    assert np.max(np.abs(r)) < 1e-3
    with pytest.raises(ValueError):
        el_residual(var, states[:2])


def test_action_window_validation(grid1d):
    var = LagrangianVariant("L0", MaterialModel.uniform(1.0, 1.0, grid1d), PreState.zero(grid1d),
                            grid1d)
    z = np.zeros((1,) + grid1d.shape)
    snaps = [WaveState(z, z, k * 0.1) for k in range(5)]
    assert action(var, snaps, 0.1) == 0.0
    with pytest.raises(ValueError):
        action(var, snaps, 0.1, window=(0, 3))
