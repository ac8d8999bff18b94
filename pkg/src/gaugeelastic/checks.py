"""
Numerical checks shared by the acceptance tests and the ``verify`` command.

Each check builds its own small experiment, measures one number and compares
it with a tolerance.  They return :class:`CheckResult` records and never raise
on a failed comparison.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .fields import (BodyForceModel, GridSpec, MaterialModel, PreState, WaveState, div,
                     gradient)
from .gauge import (SpaceTimeOps, build_transform, conservation_spatial, conservation_temporal,
                    defect_slope, noether_current, noether_divergence)
from .homogenizer import (BlochPoint, LaminateSpec, Phase, direct_cell_response,
                          effective_dispersion, effective_operators, solve_polarizations,
                          static_limit)
from .lagrangian import (VARIANTS, LagrangianVariant, canonical_fields, fd_functional_derivative)
from .solver import (ElastodynamicModel, SolverConfig, run_levels, simulate,
                     stability_estimate)


@dataclass
class CheckResult:
    name: str
    relation: str
    measured: float
    tolerance: str
    passed: bool
    seconds: float = 0.0
    details: Dict[str, object] = field(default_factory=dict)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.name}: measured {self.measured:.6g} (target {self.tolerance}) "
                f"-- {self.relation} [{self.seconds:.1f}s]")


def _timed(fn: Callable[..., CheckResult]):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def convergence_order(h, err):
    """Least-squares slope of log(err) against log(h)."""
    h = np.asarray(h, float)
    err = np.maximum(np.asarray(err, float), np.finfo(float).tiny)
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def smooth_field(rng, shape_components, grid: GridSpec, modes=3, scale=1.0):
    """Random trigonometric field (components..., *n), periodic on the grid box."""
    X = grid.coords()
    out = np.zeros(tuple(shape_components) + grid.shape)
    for comp in np.ndindex(*shape_components):
        acc = np.zeros(grid.shape)
        for _ in range(modes):
            phase = rng.uniform(0, 2 * np.pi)
            arg = phase
            for j in range(grid.dim):
                arg = arg + 2 * np.pi * rng.integers(0, 3) * X[j] / grid.lengths[j]
            acc += rng.normal() * np.cos(arg)
        out[comp] = scale * acc / modes
    return out


def _periodic_grid(dim, n, length=2 * np.pi, **kw):
    return GridSpec.uniform(dim, n, length, bc="periodic", **kw)


# ---------------------------------------------------------------------------
# 1. homogeneous limit


@_timed
def check_homogeneous_limit(n=256, n_steps=2000, tol=1e-12):
    """Classical, velocity-coupled (v0 = 0) and WFE (uniform sigma0) wavefields coincide."""
    grid = GridSpec.uniform(1, n, 1.0, bc="fixed-displacement", dt=1.0)
    mat = MaterialModel.uniform(np.array([[[[2.0]]]]), np.array([[1.5]]), grid)
    grid = grid.with_dt(stability_estimate(mat, grid, 0.5))
    f_peak = 5.0 / (1.0 * 1.0)
    src = BodyForceModel.point_source(grid, (n // 3,), f_peak=f_peak)
    u0 = np.zeros((1, n))
    cfg = SolverConfig(source=src, monitors=(), record_every=n_steps)
    ref = simulate(ElastodynamicModel("classical", mat, PreState.zero(grid), grid), u0, u0, cfg,
                   n_steps).snapshots[-1].u
    ps_v = PreState.from_stress(np.zeros((1, 1, n)), np.zeros((1, n)), grid)
    sigma = np.full((1, 1, n), 0.37)
    ps_s = PreState.from_stress(sigma, np.zeros((1, n)), grid)
    diffs = {}
    for name, variant, ps in (("willis_temporal", "willis_temporal", ps_v), ("wfe", "wfe", ps_s)):
        u = simulate(ElastodynamicModel(variant, mat, ps, grid), u0, u0, cfg,
                     n_steps).snapshots[-1].u
        diffs[name] = float(np.max(np.abs(u - ref)) / np.max(np.abs(ref)))
    worst = max(diffs.values())
    return CheckResult("homogeneous limit", "uniform pre-state reduces every model to the "
                       "classical equation", worst, f"<= {tol:g}", worst <= tol, details=diffs)


# ---------------------------------------------------------------------------
# 2. canonical fields


def _random_variant(tag, grid, rng):
    d = grid.dim
    if d == 1:
        C = np.array([[[[1.0]]]]) * (2.0 + 0.5 * np.cos(grid.coords()[0]))[None, None, None, None]
        mat = MaterialModel(C, np.array([[1.0]])[..., None] * (1.0 + 0.3 * np.sin(grid.coords()[0])))
    else:
        lam = 1.0 + 0.2 * smooth_field(rng, (), grid) ** 2
        mu = 1.0 + 0.2 * smooth_field(rng, (), grid) ** 2
        rho = 1.0 + 0.1 * smooth_field(rng, (), grid) ** 2
        mat = MaterialModel.isotropic(lam, mu, rho, grid)
    u0 = smooth_field(rng, (d,), grid, scale=0.1)
    v0 = smooth_field(rng, (d,), grid, scale=0.2)
    ps = PreState.from_displacement(u0, mat, grid, v0=v0)
    return LagrangianVariant(tag, mat, ps, grid)


def _rel(a, b):
    scale = max(np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


@_timed
def check_canonical_fields(draws=20, tol=1e-6, seed=7):
    """Closed-form canonical fields against finite differences of the density."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    per = {}
    for dim, n in ((1, 128), (2, 32)):
        grid = _periodic_grid(dim, n)
        for tag in VARIANTS:
            w = 0.0
            for _ in range(draws):
                var = _random_variant(tag, grid, rng)
                u = smooth_field(rng, (dim,), grid)
                V = smooth_field(rng, (dim,), grid)
                state = WaveState(u, V)
                cf = canonical_fields(var, state)
                w = max(w,
                        _rel(-fd_functional_derivative(var, state, "u"), cf.fbar),
                        _rel(fd_functional_derivative(var, state, "G"), cf.sbar),
                        _rel(-fd_functional_derivative(var, state, "V"), cf.pbar))
            per[f"{tag}/{dim}d"] = w
            worst = max(worst, w)
    return CheckResult("canonical fields", "closed-form dL/du, dL/du_,j, dL/du_,t against "
                       "finite differences", worst, f"<= {tol:g}", worst <= tol, details=per)


# ---------------------------------------------------------------------------
# 3. invariance order under local transformations


def plane_wave_torus(C=1.0, rho=1.0, v0=0.3, k=1, n=32, nt=32, amplitude=1.0):
    """Exact plane wave of the velocity-coupled 1D model on a space-time torus.

    Returns (grid, ops, U, omega) with U of shape (1, nt, n); the frequency is
    the positive root of rho w^2 + 2 rho v0 k w - C k^2 = 0.
    """
    omega = (-2 * rho * v0 * k + np.sqrt((2 * rho * v0 * k) ** 2 + 4 * rho * C * k * k)) / (2 * rho)
    period = 2 * np.pi / omega
    dt = period / nt
    grid = _periodic_grid(1, n, dt=dt)
    x = grid.coords()[0]
    t = dt * np.arange(nt)
    U = amplitude * np.cos(k * x[None, :] - omega * t[:, None])[None]
    ops = SpaceTimeOps(grid, dt, nt, spectral=True)
    return grid, ops, U, omega


def _mixed_profile(x, t, omega):
    """Transformation profile that depends on x and t separately, not only on the phase."""
    th = x[None, :] - omega * t[:, None]
    xs = x[None, :]
    return (1.0 + 0.3 * np.sin(2 * th) + 0.3 * np.sin(xs) * np.cos(omega * t)[:, None]
            + 0.3 * np.sin(xs) + 0.2 * np.cos(2 * xs))


@_timed
def check_invariance_order(target=2.0, band=0.1, eps_values=(1e-2, 1e-3, 1e-4, 1e-5)):
    """Action defect order under matched local transformations, with L0 as control.

    Each density is tested on one of its own exact solutions on a space-time
    torus.  A profile that depends on the phase alone is avoided: it keeps the
    perturbed plane wave a plane wave and the defect vanishes identically.
    """
    C, rho, v0c = 1.0, 1.0, 0.3
    grid, ops, U, omega = plane_wave_torus(C, rho, v0c)
    x = grid.coords()[0]
    profile = _mixed_profile(x, ops.dt * np.arange(ops.nt), omega)
    mat = MaterialModel.uniform(np.array([[[[C]]]]), np.array([[rho]]), grid)
    ps = PreState.from_stress(np.zeros((1, 1, grid.n[0])), np.full((1, grid.n[0]), v0c), grid)
    tr = build_transform("temporal", profile, U, ops, ps)
    slopes = {}
    for tag in ("temporal_raw", "temporal_symmetric", "L0"):
        slopes[tag] = defect_slope(LagrangianVariant(tag, mat, ps, grid), U, ops, tr,
                                   eps_values)[0]
    # in 1D the pre-stress-gradient equation reduces to (C u')' = rho u_tt, so a
    # classical plane wave is an exact solution for any smooth pre-strain
    grid_w, ops_w, U_w, omega_w = plane_wave_torus(C, rho, 0.0)
    xw = grid_w.coords()[0]
    mat_w = MaterialModel.uniform(np.array([[[[C]]]]), np.array([[rho]]), grid_w)
    ps_w = PreState.from_displacement(0.05 * np.sin(xw)[None], mat_w, grid_w)
    tr_w = build_transform("spatial", _mixed_profile(xw, ops_w.dt * np.arange(ops_w.nt), omega_w),
                           U_w, ops_w, ps_w, direction=0)
    slopes["wfe"] = defect_slope(LagrangianVariant("wfe", mat_w, ps_w, grid_w), U_w, ops_w,
                                 tr_w, eps_values)[0]
    l1 = [slopes["temporal_raw"], slopes["temporal_symmetric"], slopes["wfe"]]
    ok_l1 = all(abs(s - target) <= band for s in l1)
    ok_ctrl = abs(slopes["L0"] - 1.0) <= 0.2
    worst = max(abs(s - target) for s in l1)
    return CheckResult("local invariance order",
                       "action defect of gauge-invariant densities is second order in eps",
                       worst, f"max |slope - {target}| <= {band}, L0 control near 1",
                       ok_l1 and ok_ctrl, details=slopes)


# ---------------------------------------------------------------------------
# 4. Noether divergence


@_timed
def check_noether_order(levels=(32, 64, 128), target=1.8):
    """Divergence of the energy current on a classical plane-wave trajectory."""
    errs, hs = [], []
    for n in levels:
        grid = _periodic_grid(1, n, dt=1.0)
        mat = MaterialModel.uniform(np.array([[[[1.0]]]]), np.array([[1.0]]), grid)
        grid = grid.with_dt(stability_estimate(mat, grid, 0.5))
        x = grid.coords()[0]
        T_end = 2.0
        n_steps = int(round(T_end / grid.dt))
        model = ElastodynamicModel("classical", mat, PreState.zero(grid), grid)
        U = run_levels(model, np.sin(x)[None], -np.cos(x)[None], n_steps)
        ops = SpaceTimeOps(grid, grid.dt, U.shape[1])
        var = LagrangianVariant("L0", mat, PreState.zero(grid), grid)
        tr = build_transform("translation", [0.0, 1.0], U, ops)
        _, rms = noether_divergence(noether_current(var, U, ops, tr), ops)
        errs.append(rms)
        hs.append(grid.dx[0])
    order = convergence_order(hs, errs)
    return CheckResult("Noether divergence order",
                       "energy current of a global time translation is divergence free on shell",
                       order, f">= {target}", order >= target, details={"rms": errs})


# ---------------------------------------------------------------------------
# 5-6. integrated balances


def _balance_run(n, variant_solver, tag, prestate_fn, T_end=1.0, direction=0):
    grid = _periodic_grid(1, n, dt=1.0)
    x = grid.coords()[0]
    mat = MaterialModel.uniform(np.array([[[[1.0]]]]), np.array([[1.0]]), grid)
    ps = prestate_fn(x, mat, grid)
    grid = grid.with_dt(stability_estimate(mat, grid, 0.25))
    mat = MaterialModel.uniform(np.array([[[[1.0]]]]), np.array([[1.0]]), grid)
    ps = prestate_fn(x, mat, grid)
    n_steps = int(round(T_end / grid.dt))
    model = ElastodynamicModel(variant_solver, mat, ps, grid)
    U = run_levels(model, np.sin(x)[None] + 0.3 * np.cos(2 * x)[None], np.zeros((1, n)), n_steps)
    var = LagrangianVariant(tag, mat, ps, grid)
    if tag == "wfe":
        bal = conservation_spatial(var, U, grid.dt, direction)
    else:
        bal = conservation_temporal(var, U, grid.dt)
    return grid.dx[0], bal


def _balance_check(name, relation, solver_variant, tag, prestate_fn, levels, target):
    hs, errs, scales = [], [], []
    for n in levels:
        h, bal = _balance_run(n, solver_variant, tag, prestate_fn)
        hs.append(h)
        errs.append(bal.rms_residual)
        scales.append(float(np.sqrt(np.mean(bal.lhs_rate ** 2))))
    order = convergence_order(hs, errs)
    return CheckResult(name, relation, order, f">= {target}", order >= target,
                       details={"rms_residual": errs, "rms_rate": scales})


@_timed
def check_temporal_balance(levels=(64, 128, 256), target=1.8):
    """Balance of L + p.grad(u).v0 for the velocity-coupled model with smooth v0."""
    def ps(x, mat, grid):
        return PreState.from_stress(np.zeros((1, 1, x.size)), (0.2 + 0.1 * np.sin(x))[None], grid)

    return _balance_check("temporal-gauge balance",
                          "rate of int(L + p_i u_i,j v0_j) equals the boundary flux",
                          "willis_temporal", "temporal_symmetric", ps, levels, target)


@_timed
def check_spatial_balance(levels=(64, 128, 256), target=1.8):
    """Balance of p.Gamma.u for the pre-stress-gradient model."""
    def ps(x, mat, grid):
        return PreState.from_displacement(0.05 * np.sin(x)[None], mat, grid)

    return _balance_check("spatial-gauge balance",
                          "rate of int p_i Gamma_ijr u_r equals the boundary flux of "
                          "L d_kj + sbar_ik Gamma_ijr u_r",
                          "wfe", "wfe", ps, levels, target)


# ---------------------------------------------------------------------------
# 7-8. WFE coefficients and gauge freedoms


@_timed
def check_wfe_identities(draws=10, tol=1e-8, seed=3):
    """Lagrangian-derived coupling coefficients against sigma0_ij,k and sigma0_ij,jk (1D)."""
    rng = np.random.default_rng(seed)
    grid = _periodic_grid(1, 128)
    worst_k, worst_kk = 0.0, 0.0
    for _ in range(draws):
        C = (2.0 + 0.5 * np.cos(grid.coords()[0] + rng.uniform(0, 6)))[None, None, None, None]
        mat = MaterialModel(C, np.ones((1, 1, 128)))
        ps = PreState.from_displacement(smooth_field(rng, (1,), grid, scale=0.2), mat, grid)
        var = LagrangianVariant("wfe", mat, ps, grid)
        z = np.zeros((1, 128))
        e = np.ones((1, 128))
        s0 = canonical_fields(var, WaveState(z, z)).sbar
        s1 = canonical_fields(var, WaveState(e, z)).sbar
        # u_k coefficient of the stress, and of the force read off fbar
        coef_k = s1 - s0
        f0 = canonical_fields(var, WaveState(z, z)).fbar
        f1 = canonical_fields(var, WaveState(e, z)).fbar
        # fbar carries -(W0_rs - f0_(r,s)) u
        coef_kk = -(f1 - f0)
        ref_k = gradient(ps.sigma0, grid)[:, :, 0]
        ref_kk = gradient(div(ps.sigma0, grid), grid)[:, 0]
        worst_k = max(worst_k, _rel(coef_k, ref_k))
        worst_kk = max(worst_kk, _rel(coef_kk, ref_kk))
    worst = max(worst_k, worst_kk)
    return CheckResult("WFE coefficient identities",
                       "stress coupling = sigma0_ij,k and force coupling = sigma0_ij,jk",
                       worst, f"<= {tol:g}", worst <= tol,
                       details={"sigma0_ij,k": worst_k, "sigma0_ij,jk": worst_kk})


@_timed
def check_gauge_freedoms(tol_b=1e-12):
    """Rigid translation of u0 and stress-free shifts of the pre-strain."""
    from .expressions import prestate_from_expressions

    grid = _periodic_grid(1, 64)
    mat = MaterialModel.uniform(np.array([[[[1.7]]]]), np.array([[1.2]]), grid)
    base = prestate_from_expressions(["0.1*sin(x - 0.4*t) + 0.02*cos(2*x)"], mat, grid)
    moved = prestate_from_expressions(["0.1*sin(x - 0.4*t) + 0.02*cos(2*x) + 3.25"], mat, grid)
    S_a = ElastodynamicModel("willis_temporal", mat, base, grid).S
    S_b = ElastodynamicModel("willis_temporal", mat, moved, grid).S
    identical = bool(np.array_equal(S_a, S_b))

    # (b) heterogeneous C with C Delta constant
    x = grid.coords()[0]
    Cx = 1.5 + 0.4 * np.sin(x)
    mat_h = MaterialModel(Cx[None, None, None, None], np.ones((1, 1, x.size)))
    ps = PreState.from_displacement(0.05 * np.sin(x)[None], mat_h, grid)
    delta = (0.8 / Cx)[None, None]
    ps_shift = PreState(sigma0=ps.sigma0 + np.einsum("ijkl...,kl...->ij...", mat_h.C, delta),
                        v0=ps.v0, fbar0=ps.fbar0, u0=ps.u0, G0=ps.G0 + delta, Gamma=ps.Gamma)
    m1 = ElastodynamicModel("wfe", mat_h, ps, grid)
    m2 = ElastodynamicModel("wfe", mat_h, ps_shift, grid)
    scale = max(np.max(np.abs(m1.dsig)), np.max(np.abs(m1.K)))
    diff = max(np.max(np.abs(m1.dsig - m2.dsig)), np.max(np.abs(m1.K - m2.K))) / scale
    ok = identical and diff <= tol_b
    return CheckResult("gauge freedoms",
                       "rigid shift of u0 and (C Delta)_,r = 0 shifts of the pre-strain leave the "
                       "coefficients unchanged", diff,
                       f"(a) bit-identical, (b) <= {tol_b:g}", ok,
                       details={"translation_bit_identical": identical, "shift_rel_diff": diff})


# ---------------------------------------------------------------------------
# 9-12. homogenizer


def reference_laminate():
    """Three layers, no mirror symmetry."""
    return LaminateSpec(1.0, [Phase(1.0, 1.0, 0.3), Phase(4.0, 2.0, 0.45), Phase(2.0, 0.5, 0.25)])


def symmetric_laminate():
    return LaminateSpec(1.0, [Phase(1.0, 1.0, 0.25), Phase(3.0, 2.0, 0.5), Phase(1.0, 1.0, 0.25)])


@_timed
def check_zero_frequency(n_omega=9, target_power=0.9, sym_tol=1e-10):
    """|Seff| ~ K omega^p with p >= 0.9 at q = 0; symmetric cell gives Seff = 0."""
    lam = reference_laminate()
    ws = np.logspace(-3, -1, n_omega)
    S = np.array([abs(effective_operators(lam, BlochPoint(w, 0.0)).Seff) for w in ws])
    power, logK = np.polyfit(np.log(ws), np.log(S), 1)
    sym = max(abs(effective_operators(symmetric_laminate(), BlochPoint(w, 0.0)).Seff)
              for w in (0.01, 0.1, 1.0))
    ok = power >= target_power and sym <= sym_tol
    return CheckResult("Willis coupling at low frequency",
                       "Seff vanishes linearly as omega -> 0; zero for a mirror-symmetric cell",
                       float(power), f"power >= {target_power}, symmetric |Seff| <= {sym_tol:g}",
                       ok, details={"K": float(np.exp(logK)), "symmetric_Seff": float(sym)})


@_timed
def check_static_limit(tol=1e-3):
    """Static Ceff against the series-spring (harmonic mean) value."""
    worst = 0.0
    cases = {}
    for lam in (LaminateSpec(1.0, [Phase(1.0, 1.0, 0.5), Phase(3.0, 1.0, 0.5)]),
                reference_laminate()):
        c = static_limit(lam)
        ref = lam.harmonic_mean()
        rel = abs(c - ref) / ref
        cases[f"{ref:.6g}"] = float(rel)
        worst = max(worst, rel)
    return CheckResult("static limit", "Ceff(omega, q -> 0) equals the harmonic mean modulus",
                       float(worst), f"<= {tol:g}", worst <= tol, details=cases)


@_timed
def check_direct_oracle(tol=1e-4, n_grid=4096, points=((0.5, 0.3), (2.0, 1.0), (1e-2, 0.0))):
    """Cell averages from the polarization solve against a real-space Bloch solve."""
    lam = reference_laminate()
    worst = 0.0
    for w, q in points:
        b = BlochPoint(w, q, 32)
        for eb, vb in ((1.0, 0.0), (0.0, 1.0)):
            s = solve_polarizations(lam, b, eb, vb)
            me, mv, ms, mp = direct_cell_response(lam, b, eb, vb, n_grid)
            # compare in the common normalization of the measured mean fields
            for got, ref in ((s.mean_stress, ms), (s.mean_momentum, mp)):
                worst = max(worst, abs(got - ref) / max(abs(ms), abs(mp)))
    return CheckResult("direct cell solve", "polarization averages <sigma>, <p> agree with a "
                       "fine-grid heterogeneous solve", float(worst), f"<= {tol:g}", worst <= tol)


def measure_fdtd_velocity(lam: LaminateSpec, n_cells=16, per_cell=32, periods=20):
    """Phase velocity of the longest standing wave on the laminate, from the leapfrog solver."""
    n = n_cells * per_cell
    grid = GridSpec.uniform(1, n, float(n_cells * lam.cell_length), bc="periodic", dt=1.0)
    x = grid.coords()[0]
    mid = x + 0.5 * grid.dx[0]
    Cx = lam.profile(mid, [p.C for p in lam.phases])
    rx = lam.profile(mid, [p.rho for p in lam.phases])
    mat = MaterialModel(Cx[None, None, None, None], rx[None, None])
    grid = grid.with_dt(stability_estimate(mat, grid, 0.5))
    q = 2 * np.pi / grid.lengths[0]
    c_guess = np.sqrt(lam.harmonic_mean() / lam.mean_density())
    n_steps = int(periods * 2 * np.pi / (q * c_guess) / grid.dt)
    model = ElastodynamicModel("classical", mat, PreState.zero(grid), grid)
    U = run_levels(model, np.sin(q * x)[None], np.zeros((1, n)), n_steps)
    a = U[0, 1:] @ np.sin(q * x)
    s = np.sign(a)
    idx = np.where(s[:-1] * s[1:] < 0)[0]
    tz = grid.dt * (idx - a[idx] / (a[idx + 1] - a[idx]))
    omega = np.pi / np.mean(np.diff(tz))
    return omega, q


@_timed
def check_dispersion(tol=0.02):
    """Low-frequency phase velocity from the effective operators against FDTD."""
    lam = reference_laminate()
    omega, q = measure_fdtd_velocity(lam)
    v_fdtd = omega / q
    row = effective_dispersion(lam, [omega])[0]
    rel = abs(row.v_phase - v_fdtd) / v_fdtd if not row.gap else float("inf")
    return CheckResult("effective dispersion", "homogenized phase velocity matches the "
                       "time-domain laminate", float(rel), f"<= {tol:g}", rel <= tol,
                       details={"v_fdtd": v_fdtd, "v_eff": row.v_phase, "omega": omega})


# ---------------------------------------------------------------------------
# 13. energy


@_timed
def check_energy(n=256, n_steps=10_000, tol=1e-3):
    """Energy drift of the classical leapfrog over 1e4 steps, periodic, no force."""
    grid = _periodic_grid(1, n, dt=1.0)
    x = grid.coords()[0]
    Cx = 1.0 + 0.5 * np.sin(x) ** 2
    mat = MaterialModel(Cx[None, None, None, None], np.ones((1, 1, n)))
    grid = grid.with_dt(stability_estimate(mat, grid, 0.5))
    model = ElastodynamicModel("classical", mat, PreState.zero(grid), grid)
    u0 = np.exp(-4 * (x - np.pi) ** 2)[None]
    cfg = SolverConfig(monitors=("energy",), record_every=n_steps)
    traj = simulate(model, u0, np.zeros_like(u0), cfg, n_steps)
    E = np.asarray(traj.monitors["energy"])
    stag = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    # collocated energy (central velocity, the scheme's stiffness) at start and end
    U = run_levels(model, u0, np.zeros_like(u0), n_steps)

    def collocated(k):
        V = (U[:, k + 1] - U[:, k - 1]) / (2 * grid.dt)
        return model.strain_energy(U[:, k]) + model.kinetic_energy(V)

    e0, e1 = collocated(1), collocated(U.shape[1] - 2)
    coll = abs(e1 - e0) / abs(e0)
    worst = max(stag, coll)
    return CheckResult("energy conservation", "classical energy is conserved without forcing",
                       float(worst), f"<= {tol:g}", worst <= tol,
                       details={"staggered_drift": stag, "collocated_drift": float(coll)})


ACCEPTANCE = [
    ("1 homogeneous limit", check_homogeneous_limit),
    ("2 canonical fields", check_canonical_fields),
    ("3 invariance order", check_invariance_order),
    ("4 Noether divergence", check_noether_order),
    ("5 temporal balance", check_temporal_balance),
    ("6 spatial balance", check_spatial_balance),
    ("7 WFE identities", check_wfe_identities),
    ("8 gauge freedoms", check_gauge_freedoms),
    ("9 zero-frequency coupling", check_zero_frequency),
    ("10 static limit", check_static_limit),
    ("11 direct oracle", check_direct_oracle),
    ("12 dispersion", check_dispersion),
    ("13 energy", check_energy),
]

SUITES: Dict[str, List[Callable[[], CheckResult]]] = {
    "euler-lagrange": [check_canonical_fields, check_wfe_identities],
    "invariance": [check_invariance_order, check_noether_order, check_gauge_freedoms],
    "conservation": [check_temporal_balance, check_spatial_balance, check_energy],
    "homogenizer": [check_zero_frequency, check_static_limit, check_direct_oracle,
                    check_dispersion],
    "limits": [check_homogeneous_limit, check_static_limit],
}
