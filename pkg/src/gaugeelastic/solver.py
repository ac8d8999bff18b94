"""
Explicit displacement-form leapfrog for the four equation families.

    rho u^{n+1} = rho (2 u^n - u^{n-1}) + dt^2 [ (C:grad u)_{,j} + f + coupling(u, u_t) ]

Coupling terms per variant (rates evaluated from known levels only):

``classical``            none
``willis_temporal``      stress  += S_kij u_{k,t},           S_kij = 1/2(rho_ki v0_j + rho_kj v0_i)
                         inertia -= S_ijs e_{js,t}
``willis_temporal_raw``  stress  += rho_ki v0_j u_{k,t}
                         inertia -= rho_ij v0_s u_{j,st}
``wfe``                  stress  += sigma0_{ij,k} u_k
                         force   -= sigma0_{kl,i} u_{k,l} + sigma0_{ij,jk} u_k

The velocity u_t^n is the second-order backward (BDF2) difference of the
three newest levels, which keeps the scheme explicit and second order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fields import (BodyForceModel, GridSpec, MaterialModel, PreState, WaveState, div,
                     div_c_grad, grad, gradient, voigt_matrix)
from .gauge import balance_terms, boundary_flux
from .lagrangian import LagrangianVariant, coupling_tensor

MODEL_VARIANTS = ("classical", "willis_temporal", "willis_temporal_raw", "wfe")
MONITORS = ("energy", "conservation_temporal", "conservation_spatial")
#: density used by the conservation monitors for each equation family
MONITOR_DENSITY = {"classical": "L0", "willis_temporal": "temporal_symmetric",
                   "willis_temporal_raw": "temporal_raw", "wfe": "wfe"}

#: abort when the field norm exceeds this multiple of its running reference
GROWTH_LIMIT = 1e6


class CFLError(ValueError):
    pass


class InstabilityError(FloatingPointError):
    pass


@dataclass
class SolverConfig:
    cfl: float = 0.5
    source: BodyForceModel = field(default_factory=BodyForceModel)
    monitors: tuple = ("energy",)
    record_every: int = 1

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise CFLError(f"cfl must lie in (0, 1), got {self.cfl}")
        unknown = set(self.monitors) - set(MONITORS)
        if unknown:
            raise ValueError(f"unknown monitors {sorted(unknown)}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    snapshots: list
    monitors: dict
    dt: float
    steps: list

    def displacement_array(self):
        """Recorded displacements as a space-time array (d, nt, *n)."""
        return np.stack([s.u for s in self.snapshots], axis=1)


def max_wavespeed(material: MaterialModel):
    """Largest eigen-wavespeed of the principal (C, rho) part over all nodes.

    Per node: ``c^2 = max eig( rho^{-1/2} A(n) rho^{-1/2} )`` over unit
    directions n with acoustic tensor ``A_ik = C_ijkl n_j n_l``; in 2D the
    direction is sampled at 2 degree spacing.
    """
    C, rho = material.C, material.rho
    d = rho.shape[0]
    R = np.moveaxis(rho, (0, 1), (-2, -1))
    ev_r, vec_r = np.linalg.eigh(R)
    if np.any(ev_r <= 0):
        raise ValueError("density tensor is not positive definite")
    Rm12 = vec_r @ (np.eye(d) * (1.0 / np.sqrt(ev_r))[..., None, :]) @ np.swapaxes(vec_r, -1, -2)
    if np.any(np.linalg.eigvalsh(voigt_matrix(C)) <= 0):
        raise ValueError("elasticity tensor is not positive definite")
    if d == 1:
        dirs = np.array([[1.0]])
    else:
        th = np.deg2rad(np.arange(0, 180, 2.0))
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    cmax = 0.0
    for nvec in dirs:
        A = np.einsum("ijkl...,j,l->...ik", C, nvec, nvec)
        M = Rm12 @ A @ Rm12
        cmax = max(cmax, float(np.max(np.linalg.eigvalsh(M))))
    return float(np.sqrt(cmax))


def stability_estimate(material: MaterialModel, grid: GridSpec, cfl=0.5):
    """dt_max = cfl * min(dx) / c_max; coupling terms are excluded."""
    return cfl * min(grid.dx) / max_wavespeed(material)


class ElastodynamicModel:
    """Right-hand side of one equation family on a grid."""

    def __init__(self, variant, material: MaterialModel, prestate: PreState, grid: GridSpec):
        if variant not in MODEL_VARIANTS:
            raise ValueError(f"unknown model variant {variant!r}; expected one of {MODEL_VARIANTS}")
        self.variant = variant
        self.material = material
        self.prestate = prestate
        self.grid = grid
        d = grid.dim
        self.rho_inv = np.moveaxis(
            np.linalg.inv(np.moveaxis(material.rho, (0, 1), (-2, -1))), (-2, -1), (0, 1))
        self.S = None
        if variant in ("willis_temporal", "willis_temporal_raw"):
            if prestate.v0 is None:
                raise ValueError(f"{variant} needs v0")
            self.S = coupling_tensor(material.rho, prestate.v0, variant == "willis_temporal")
        if variant == "wfe":
            self.dsig = gradient(prestate.sigma0, grid)
            # K[i, k] = sigma0_{ij,jk}
            self.K = gradient(div(prestate.sigma0, grid), grid)
            self.dsig_perm = np.einsum("kli...->ikl...", self.dsig)

    @property
    def coupled(self):
        return self.variant != "classical"

    def stress_coupling(self, u, V):
        if self.variant == "wfe":
            return np.einsum("ijk...,k...->ij...", self.dsig, u)
        if self.S is not None:
            return np.einsum("kij...,k...->ij...", self.S, V)
        return 0.0

    def body_coupling(self, u, G, V, Gdot):
        """Terms moved to the force side of rho u_tt = div sigma + f + (this)."""
        if self.variant == "wfe":
            return -(np.einsum("ikl...,kl...->i...", self.dsig_perm, G)
                     + np.einsum("ik...,k...->i...", self.K, u))
        if self.S is not None:
            return np.einsum("ijs...,js...->i...", self.S, Gdot)
        return 0.0

    def rhs(self, u, V, f):
        """div sigma + f + coupling (force per volume)."""
        out = div_c_grad(self.material.C, u, self.grid) + f
        if self.coupled:
            sc = self.stress_coupling(u, V)
            out = out + div(sc, self.grid)
            G = gradient(u, self.grid) if self.variant == "wfe" else None
            Gdot = gradient(V, self.grid) if self.S is not None else None
            out = out + self.body_coupling(u, G, V, Gdot)
        return out

    def apply_bc(self, u):
        if self.grid.bc == "fixed-displacement":
            d = self.grid.dim
            for ax in range(d):
                sl = [slice(None)] * (d + 1)
                for edge in (0, -1):
                    sl[ax + 1] = edge
                    u[tuple(sl)] = 0.0
        return u

    def step(self, u_prev, u_now, f_now, u_prev2=None):
        """Advance one leapfrog step; ``u_prev2`` enables the BDF2 velocity."""
        dt = self.grid.dt
        if u_prev2 is None:
            V = (u_now - u_prev) / dt
        else:
            V = (3.0 * u_now - 4.0 * u_prev + u_prev2) / (2.0 * dt)
        acc = np.einsum("ij...,j...->i...", self.rho_inv, self.rhs(u_now, V, f_now))
        u_next = 2.0 * u_now - u_prev + dt * dt * acc
        return self.apply_bc(u_next)

    # -- energy --------------------------------------------------------------

    def strain_energy(self, u):
        """1/2 u . K u with K the (symmetric) discrete stiffness operator."""
        return -0.5 * self.grid.integrate(
            np.einsum("i...,i...->...", u, div_c_grad(self.material.C, u, self.grid)))

    def kinetic_energy(self, V):
        return 0.5 * self.grid.integrate(np.einsum("i...,ij...,j...->...", V, self.material.rho, V))

    def staggered_energy(self, u_now, u_next):
        """Energy at the half step, exactly conserved by the classical leapfrog.

        E^{n+1/2} = 1/2 v.rho.v + 1/2 u^{n+1}.K u^n with v = (u^{n+1} - u^n)/dt.
        """
        dt = self.grid.dt
        V = (u_next - u_now) / dt
        Ku = div_c_grad(self.material.C, u_now, self.grid)
        return self.kinetic_energy(V) - 0.5 * self.grid.integrate(
            np.einsum("i...,i...->...", u_next, Ku))


def energy_total(state: WaveState, material: MaterialModel, grid: GridSpec):
    """int (T + W) dV for a collocated state (W from the central-difference strain)."""
    G = gradient(state.u, grid)
    W = 0.5 * np.einsum("ij...,ijkl...,kl...->...", G, material.C, G)
    T = 0.5 * np.einsum("i...,ij...,j...->...", state.udot, material.rho, state.udot)
    return float(grid.integrate(W + T))


def initial_levels(model: ElastodynamicModel, u0, v0, f0=None):
    """Second-order start: u^{-1} from a Taylor step backwards with the initial acceleration."""
    dt = model.grid.dt
    f0 = np.zeros_like(u0) if f0 is None else f0
    acc = np.einsum("ij...,j...->i...", model.rho_inv, model.rhs(u0, v0, f0))
    u_m1 = u0 - dt * v0 + 0.5 * dt * dt * acc
    return model.apply_bc(u_m1), u0


def simulate(model: ElastodynamicModel, u_init, v_init, config: Optional[SolverConfig] = None,
             n_steps=None, t0=0.0, u_prev=None, u_prev2=None):
    """Run ``n_steps`` leapfrog steps from an initial state.

    Passing ``u_prev`` (and ``u_prev2``) restarts exactly from recorded levels
    instead of the Taylor start.
    """
    config = config or SolverConfig()
    grid = model.grid
    n_steps = grid.n_steps if n_steps is None else n_steps
    dt_max = stability_estimate(model.material, grid, config.cfl)
    if grid.dt > dt_max * (1 + 1e-12):
        raise CFLError(f"dt={grid.dt:.4g} exceeds the stability limit {dt_max:.4g} "
                       f"at cfl={config.cfl}")
    dt = grid.dt
    u_now = np.array(u_init, float)
    if u_prev is None:
        f_start = config.source.at(t0, u_now.shape)
        u_prev, u_now = initial_levels(model, u_now, np.asarray(v_init, float), f_start)
    u_prev = np.array(u_prev, float)
    ref_norm = max(np.linalg.norm(u_now), np.linalg.norm(u_now - u_prev), 1e-300)
    snapshots = [WaveState(u_now.copy(), (u_now - u_prev) / dt, t0)]
    steps = [0]
    monitors = {name: [] for name in config.monitors}
    balances = [m for m in config.monitors if m.startswith("conservation_")]
    if balances:
        density = LagrangianVariant(MONITOR_DENSITY[model.variant], model.material,
                                    model.prestate, grid)
        for m in balances:
            monitors[m + "_flux"] = []
    for n in range(1, n_steps + 1):
        t = t0 + (n - 1) * dt
        f = config.source.at(t, u_now.shape)
        u_next = model.step(u_prev, u_now, f, u_prev2)
        if not np.all(np.isfinite(u_next)):
            raise InstabilityError(f"non-finite field at step {n}")
        nrm = np.linalg.norm(u_next)
        if nrm > GROWTH_LIMIT * ref_norm:
            raise InstabilityError(f"field grew by more than {GROWTH_LIMIT:g}x at step {n}")
        if np.linalg.norm(f) > 0:
            ref_norm = max(ref_norm, nrm)
        if n % config.record_every == 0:
            if "energy" in monitors:
                monitors["energy"].append(model.staggered_energy(u_now, u_next))
            if balances:
                # balance quantities live on level n - 1 (central velocity)
                V_c = (u_next - u_prev) / (2 * dt)
                G_c = gradient(u_now, grid)
                for m in balances:
                    q, F = balance_terms(density, u_now, G_c, V_c, m.split("_", 1)[1])
                    monitors[m].append(float(grid.integrate(q)))
                    monitors[m + "_flux"].append(float(boundary_flux(F, grid)))
            snapshots.append(WaveState(u_next.copy(), (u_next - u_now) / dt, t0 + n * dt))
            steps.append(n)
        u_prev2, u_prev, u_now = u_prev, u_now, u_next
    return Trajectory(snapshots, {k: np.asarray(v) for k, v in monitors.items()}, dt, steps)


def run_levels(model, u_init, v_init, n_steps, source=None):
    """All time levels u^{-1}, u^0, ..., u^{n_steps} as an array (d, n_steps + 2, *n).

    Used by the verification code, which needs the start-up level as well.
    """
    source = source or BodyForceModel()
    dt = model.grid.dt
    u_prev, u_now = initial_levels(model, np.asarray(u_init, float), np.asarray(v_init, float),
                                   source.at(0.0, np.shape(u_init)))
    levels = [u_prev, u_now]
    u_prev2 = None
    for n in range(n_steps):
        f = source.at(n * dt, u_now.shape)
        u_next = model.step(u_prev, u_now, f, u_prev2)
        if not np.all(np.isfinite(u_next)):
            raise InstabilityError(f"non-finite field at step {n + 1}")
        levels.append(u_next)
        u_prev2, u_prev, u_now = u_prev, u_now, u_next
    return np.stack(levels, axis=1)
