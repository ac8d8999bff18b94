import numpy as np
import pytest

from gaugeelastic.checks import _periodic_grid
from gaugeelastic.fields import BodyForceModel, GridSpec, MaterialModel, PreState
from gaugeelastic.solver import (CFLError, ElastodynamicModel, InstabilityError, SolverConfig,
                                 max_wavespeed, run_levels, simulate, stability_estimate)


def _classical(n=128, cfl=0.5, C=1.0, rho=1.0, bc="periodic", length=2 * np.pi):
    grid = GridSpec.uniform(1, n, length, bc=bc)
    mat = MaterialModel.uniform(C, rho, grid)
    grid = grid.with_dt(stability_estimate(mat, grid, cfl))
    return ElastodynamicModel("classical", mat, PreState.zero(grid), grid)


def test_wavespeed_of_isotropic_2d(grid2d):
    mat = MaterialModel.isotropic(2.0, 1.0, 0.5, grid2d)
    assert max_wavespeed(mat) == pytest.approx(np.sqrt(4.0 / 0.5))


def test_cfl_bounds():
    with pytest.raises(CFLError):
        SolverConfig(cfl=1.2)
    m = _classical()
    m.grid = m.grid.with_dt(2 * m.grid.dt)
    with pytest.raises(CFLError, match="stability limit"):
        simulate(m, np.zeros((1, 128)), np.zeros((1, 128)), SolverConfig(0.5), 1)


def test_plane_wave_converges_second_order():
    errs = []
    for n in (64, 128):
        m = _classical(n, cfl=0.25)
        x = m.grid.coords()[0]
        steps = int(np.ceil(1.0 / m.grid.dt))
        m.grid = m.grid.with_dt(1.0 / steps)
        tr = simulate(m, np.sin(x)[None], -np.cos(x)[None], SolverConfig(0.25, monitors=()), steps)
        errs.append(np.max(np.abs(tr.snapshots[-1].u[0] - np.sin(x - 1.0))))
    assert np.log2(errs[0] / errs[1]) > 1.9


def test_staggered_energy_is_conserved():
    m = _classical(64)
    x = m.grid.coords()[0]
    tr = simulate(m, np.exp(-4 * (x - 3) ** 2)[None], np.zeros((1, 64)), SolverConfig(), 500)
    E = tr.monitors["energy"]
    assert np.max(np.abs(E - E[0])) / E[0] < 1e-12


def test_fixed_boundary_nodes_stay_zero():
    m = _classical(65, bc="fixed-displacement", length=1.0)
    x = m.grid.coords()[0]
    u0 = np.sin(np.pi * x)[None]
    tr = simulate(m, u0, np.zeros_like(u0), SolverConfig(monitors=()), 50)
    for s in tr.snapshots[1:]:
        assert s.u[0, 0] == 0.0 and s.u[0, -1] == 0.0


def test_restart_from_recorded_levels_is_exact():
    m = _classical(64)
    x = m.grid.coords()[0]
    u0, v0 = np.sin(x)[None], np.zeros((1, 64))
    full = simulate(m, u0, v0, SolverConfig(monitors=()), 20)
    half = simulate(m, u0, v0, SolverConfig(monitors=()), 10)
    rest = simulate(m, half.snapshots[-1].u, None, SolverConfig(monitors=()), 10,
                    t0=half.snapshots[-1].t, u_prev=half.snapshots[-2].u)
    assert np.array_equal(rest.snapshots[-1].u, full.snapshots[-1].u)


def test_instability_is_detected():
    grid = _periodic_grid(1, 32, dt=0.05)
    mat = MaterialModel.uniform(1.0, 1.0, grid)
    x = grid.coords()[0]
    ps = PreState.zero(grid)
    ps.v0 = np.full((1, 32), 5.0)
    m = ElastodynamicModel("willis_temporal_raw", mat, ps, grid)
    with pytest.raises(InstabilityError):
        simulate(m, np.sin(x)[None] + 1e-3 * np.cos(7 * x)[None], np.zeros((1, 32)),
                 SolverConfig(monitors=()), 20000)


def test_point_source_radiates_symmetrically():
    m = _classical(129, bc="fixed-displacement", length=1.0)
    src = BodyForceModel.point_source(m.grid, (64,), f_peak=8.0)
    z = np.zeros((1, 129))
    lv = run_levels(m, z, z, 120, src)
    u = lv[0, -1]
    assert np.max(np.abs(u)) > 0
    assert np.allclose(u, u[::-1], atol=1e-14)


def test_unknown_variant_rejected(grid1d):
    with pytest.raises(ValueError):
        ElastodynamicModel("willis_spatial", MaterialModel.uniform(1.0, 1.0, grid1d),
                           PreState.zero(grid1d), grid1d)
