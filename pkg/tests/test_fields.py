import numpy as np
import pytest

from gaugeelastic.fields import (GridError, GridSpec, MaterialModel, PreState, WaveState,
                                 BodyForceModel, div, div_c_grad, grad, gradient,
                                 hooke_pre_stress, isotropic_stiffness, mixed_partial_defect,
                                 spatial_connection, tensor_from_voigt, torsion,
                                 validate_material, voigt_matrix)


def test_grid_rejects_bad_input():
    with pytest.raises(GridError):
        GridSpec(dim=3, n=(8, 8, 8), dx=(1, 1, 1))
    with pytest.raises(GridError):
        GridSpec(dim=1, n=(4,), dx=(1.0,))
    with pytest.raises(GridError):
        GridSpec(dim=1, n=(16,), dx=(1.0,), bc="sticky")
    with pytest.raises(GridError, match="memory budget"):
        GridSpec(dim=2, n=(4000, 4000), dx=(1.0, 1.0))


def test_uniform_grid_spacing():
    g = GridSpec.uniform(1, 10, 1.0, bc="fixed-displacement")
    assert g.dx[0] == pytest.approx(1.0 / 9)
    assert g.lengths[0] == pytest.approx(1.0)
    assert GridSpec.uniform(2, 16, 2.0).dx == (0.125, 0.125)


def test_trapezoid_weights_integrate_constant():
    g = GridSpec.uniform(2, 17, 1.0, bc="traction-free")
    assert g.integrate(np.ones(g.shape)) == pytest.approx(1.0)


@pytest.mark.parametrize("bc", ["periodic", "fixed-displacement"])
def test_grad_second_order(bc):
    errs = []
    for n in (32, 64):
        g = GridSpec.uniform(1, n, 2 * np.pi if bc == "periodic" else 1.0, bc=bc)
        x = g.coords()[0]
        errs.append(np.max(np.abs(grad(np.sin(3 * x), 0, g) - 3 * np.cos(3 * x))))
    assert np.log2(errs[0] / errs[1]) > 1.9


def test_gradient_layout(grid2d):
    x, y = grid2d.coords()
    u = np.stack([np.sin(x), np.cos(y)])
    G = gradient(u, grid2d)
    assert G.shape == (2, 2) + grid2d.shape
    assert np.max(np.abs(G[0, 1])) < 1e-12
    assert np.max(np.abs(G[1, 0])) < 1e-12


def test_voigt_round_trip():
    C = isotropic_stiffness(1.3, 0.7, 2)
    V = voigt_matrix(C[..., None])[0]
    assert np.allclose(tensor_from_voigt(V, 2), C)


def test_validate_material_reports_without_raising(grid2d):
    m = MaterialModel.isotropic(2.0, 1.0, 1.0, grid2d)
    assert validate_material(m).passed
    m.C[0, 1, 0, 0, 3, 3] += 0.5
    rep = validate_material(m)
    assert not rep.passed
    assert rep.worst_node == (3, 3)
    assert rep.symmetry_defect[3, 3] > 0.1


def test_hooke_and_equilibrium(grid1d):
    x = grid1d.coords()[0]
    m = MaterialModel.uniform(2.0, 1.0, grid1d)
    ps = PreState.from_displacement(0.1 * np.sin(x)[None], m, grid1d)
    assert np.allclose(ps.sigma0, hooke_pre_stress(m.C, ps.G0))
    assert np.max(np.abs(ps.equilibrium_residual(grid1d))) == 0.0
    assert ps.has_connection


def test_connection_is_torsion_free(grid2d):
    x, y = grid2d.coords()
    u0 = np.stack([np.sin(x) * np.cos(y), np.cos(2 * x) + np.sin(y)])
    Gam = spatial_connection(u0, grid2d)
    assert np.max(np.abs(mixed_partial_defect(Gam))) < 1e-12
    assert torsion(Gam).shape == Gam.shape


def test_div_c_grad_matches_uniform_laplacian(grid1d):
    x = grid1d.coords()[0]
    m = MaterialModel.uniform(3.0, 1.0, grid1d)
    u = np.sin(x)[None]
    h = grid1d.dx[0]
    exact_symbol = -3.0 * (2 * np.sin(h / 2) / h) ** 2
    assert np.allclose(div_c_grad(m.C, u, grid1d), exact_symbol * u, atol=1e-12)


def test_div_of_symmetric_stress(grid2d):
    x, y = grid2d.coords()
    s = np.zeros((2, 2) + grid2d.shape)
    s[0, 0] = np.sin(x)
    assert np.allclose(div(s, grid2d)[0], grad(np.sin(x), 0, grid2d))


def test_point_source_and_wave_state(grid1d):
    src = BodyForceModel.point_source(grid1d, (10,), amplitude=2.0, f_peak=1.0)
    f = src.at(1.2, (1,) + grid1d.shape)
    assert f[0, 10] == pytest.approx(2.0 / grid1d.dx[0])
    assert np.count_nonzero(f) == 1
    with pytest.raises(FloatingPointError):
        WaveState(np.array([np.nan]), np.array([0.0]))
