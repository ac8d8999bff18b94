"""
Incremental Lagrangian densities for the homogeneous and gauge-fixed models.

A density is evaluated pointwise from the local arguments ``(u, G, V)`` with
``G[i, j] = u_{i,j}`` and ``V[i] = u_{i,t}``.  Sign convention: ``L = W + Phi - T``,
so the canonical fields are

    fbar = -dL/du,   sbar = dL/dG,   pbar = -dL/dV.

Variants
--------
``L0``
    homogeneous medium with (constant) pre-stress.
``temporal_raw`` / ``temporal_symmetric``
    velocity-coupled models from the local temporal gauge.  Both share the
    kinetic form ``T = 1/2 rho V V - V_i B_ijs G_js`` and differ only in the
    coupling tensor ``B``: ``rho_ij v0_s`` (raw) or its (j, s)-symmetrized
    gauge-fixed form.  The term quadratic in the connection is dropped.
``wfe``
    pre-stress-gradient model from the local spatial gauge: strain energy and
    external potential expanded about the pre-stressed reference.  The
    reference-energy derivatives come from the connection
    ``Gamma[i, j, k] = u0_{i,jk}``: ``W0_{,r} = sigma0_ij Gamma_ijr``, ``W0_{,rs}`` is
    the symmetrized grid derivative of that field, and the static force is
    ``f0 = W0_{,i} - sigma0_{ij,j}``.

The velocity field ``v0`` must be time independent (its time derivative is
neglected in the motion equations).  Second Piola-Kirchhoff and Cauchy
stresses are not distinguished.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .fields import (BodyForceModel, GridSpec, MaterialModel, PreState, WaveState,
                     div, grad, gradient)

VARIANTS = ("L0", "temporal_raw", "temporal_symmetric", "wfe")
TEMPORAL = ("temporal_raw", "temporal_symmetric")


class MissingPreStateError(ValueError):
    pass


def coupling_tensor(rho, v0, symmetric):
    """Velocity coupling B[i, j, s] (per node)."""
    raw = np.einsum("ij...,s...->ijs...", rho, v0)
    if not symmetric:
        return raw
    return 0.5 * (raw + np.einsum("is...,j...->ijs...", rho, v0))


@dataclass
class DensityBreakdown:
    W: np.ndarray
    Phi: np.ndarray
    T: np.ndarray

    @property
    def L(self):
        return self.W + self.Phi - self.T


@dataclass
class CanonicalFields:
    fbar: np.ndarray
    sbar: np.ndarray
    pbar: np.ndarray
    sigma_inc: np.ndarray


@dataclass
class LagrangianVariant:
    """A tagged density bound to its material, reference state and grid."""

    tag: str
    material: MaterialModel
    prestate: PreState
    grid: GridSpec
    force: BodyForceModel = field(default_factory=BodyForceModel)

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise ValueError(f"unknown Lagrangian variant {self.tag!r}; expected one of {VARIANTS}")
        if self.tag in TEMPORAL and self.prestate.v0 is None:
            raise MissingPreStateError(f"{self.tag} needs the background velocity v0")
        if self.tag == "wfe" and not self.prestate.has_connection:
            raise MissingPreStateError("wfe needs u0 (and hence the connection) in the pre-state")

    @property
    def dim(self):
        return self.grid.dim

    @cached_property
    def B(self):
        if self.tag not in TEMPORAL:
            return None
        return coupling_tensor(self.material.rho, self.prestate.v0,
                               self.tag == "temporal_symmetric")

    @cached_property
    def wfe(self):
        """Coefficient fields of the pre-stress-gradient density."""
        if self.tag != "wfe":
            return None
        return wfe_coefficients(self.material, self.prestate, self.grid)

    def with_tag(self, tag):
        return LagrangianVariant(tag, self.material, self.prestate, self.grid, self.force)


@dataclass
class WFECoefficients:
    dsig: np.ndarray       # sigma0_{ij,k}
    K: np.ndarray          # u_k coefficient of the motion equation (Lagrangian-derived)
    W0r: np.ndarray        # W0_{,r}
    W0rs: np.ndarray       # W0_{,rs}
    f0: np.ndarray
    df0: np.ndarray        # f0_{i,j}


def wfe_coefficients(material: MaterialModel, prestate: PreState, grid: GridSpec):
    sig = prestate.sigma0
    dsig = gradient(sig, grid)
    W0r = np.einsum("ij...,ijr...->r...", sig, prestate.Gamma)
    dW = gradient(W0r, grid)
    W0rs = 0.5 * (dW + np.swapaxes(dW, 0, 1))
    f0 = prestate.f0 if prestate.f0 is not None else W0r - div(sig, grid)
    df0 = gradient(f0, grid)
    K = W0rs - 0.5 * (df0 + np.swapaxes(df0, 0, 1))
    return WFECoefficients(dsig, K, W0r, W0rs, f0, df0)


# ---------------------------------------------------------------------------
# pointwise density and its derivatives


def density_terms(variant: LagrangianVariant, u, G, V, f=None) -> DensityBreakdown:
    """Pointwise W, Phi, T from local arguments (arrays with the grid trailing)."""
    m, ps = variant.material, variant.prestate
    if f is None:
        f = np.zeros_like(u)
    CG = np.einsum("ijkl...,kl...->ij...", m.C, G)
    quad = 0.5 * np.einsum("ij...,ij...->...", G, CG)
    T = 0.5 * np.einsum("i...,ij...,j...->...", V, m.rho, V)
    if variant.tag == "wfe":
        c = variant.wfe
        W = (np.einsum("ij...,ij...->...", ps.sigma0, G)
             + np.einsum("i...,i...->...", c.W0r, u)
             + quad
             + np.einsum("ijk...,ij...,k...->...", c.dsig, G, u)
             + 0.5 * np.einsum("ij...,i...,j...->...", c.W0rs, u, u))
        Phi = -np.einsum("i...,i...->...",
                         c.f0 + 0.5 * np.einsum("ij...,j...->i...", c.df0, u) + f, u)
        return DensityBreakdown(W, Phi, T)
    W = np.einsum("ij...,ij...->...", ps.sigma0, G) + quad
    Phi = -np.einsum("i...,i...->...", ps.fbar0 + f, u)
    if variant.tag in TEMPORAL:
        T = T - np.einsum("i...,ijs...,js...->...", V, variant.B, G)
    return DensityBreakdown(W, Phi, T)


def canonical_terms(variant: LagrangianVariant, u, G, V, f=None) -> CanonicalFields:
    """Closed-form derivatives of :func:`density_terms`."""
    m, ps = variant.material, variant.prestate
    if f is None:
        f = np.zeros_like(u)
    CG = np.einsum("ijkl...,kl...->ij...", m.C, G)
    rhoV = np.einsum("ij...,j...->i...", m.rho, V)
    if variant.tag == "wfe":
        c = variant.wfe
        dLdu = (c.W0r + np.einsum("jki...,jk...->i...", c.dsig, G)
                + np.einsum("ik...,k...->i...", c.W0rs, u)
                - c.f0 - 0.5 * np.einsum("ik...,k...->i...", c.df0 + np.swapaxes(c.df0, 0, 1), u)
                - f)
        sbar = ps.sigma0 + CG + np.einsum("ijk...,k...->ij...", c.dsig, u)
        return CanonicalFields(-dLdu, sbar, rhoV, sbar - ps.sigma0)
    fbar = ps.fbar0 + f
    sbar = ps.sigma0 + CG
    pbar = rhoV
    if variant.tag in TEMPORAL:
        sbar = sbar + np.einsum("kij...,k...->ij...", variant.B, V)
        pbar = pbar - np.einsum("ijs...,js...->i...", variant.B, G)
    return CanonicalFields(fbar, sbar, pbar, sbar - ps.sigma0)


def fd_derivative_terms(variant: LagrangianVariant, u, G, V, which, f=None):
    """Central finite-difference derivative of the density w.r.t. one argument.

    ``which`` is ``"u"``, ``"G"`` or ``"V"``.  Each component is perturbed at
    all nodes at once (the density is pointwise), step
    ``h = 1e-5 (1 + |argument|)``.
    """
    args = {"u": u, "G": G, "V": V}
    if which not in args:
        raise ValueError(f"which must be one of {tuple(args)}")
    x = args[which]
    comp_shape = x.shape[: x.ndim - variant.dim]
    out = np.zeros_like(x, dtype=float)
    for comp in np.ndindex(*comp_shape):
        h = 1e-5 * (1.0 + np.abs(x[comp]))
        plus = {k: v.copy() for k, v in args.items()}
        minus = {k: v.copy() for k, v in args.items()}
        plus[which][comp] += h
        minus[which][comp] -= h
        # the perturbation actually represented in floating point
        step = plus[which][comp] - minus[which][comp]
        Lp = density_terms(variant, plus["u"], plus["G"], plus["V"], f).L
        Lm = density_terms(variant, minus["u"], minus["G"], minus["V"], f).L
        out[comp] = (Lp - Lm) / step
    return out


# ---------------------------------------------------------------------------
# state-level API


def local_arguments(variant: LagrangianVariant, state: WaveState):
    return state.u, gradient(state.u, variant.grid), state.udot


def eval_density(variant: LagrangianVariant, state: WaveState, node=None) -> DensityBreakdown:
    """Density on the whole grid (or at one ``node`` index tuple)."""
    u, G, V = local_arguments(variant, state)
    f = variant.force.at(state.t, u.shape)
    dens = density_terms(variant, u, G, V, f)
    if node is None:
        return dens
    node = tuple(node)
    return DensityBreakdown(dens.W[node], dens.Phi[node], dens.T[node])


def canonical_fields(variant: LagrangianVariant, state: WaveState) -> CanonicalFields:
    u, G, V = local_arguments(variant, state)
    return canonical_terms(variant, u, G, V, variant.force.at(state.t, u.shape))


def fd_functional_derivative(variant: LagrangianVariant, state: WaveState, which):
    """FD oracle for dL/du, dL/du_{,j} or dL/du_{,t} (``which`` in u, G, V)."""
    u, G, V = local_arguments(variant, state)
    return fd_derivative_terms(variant, u, G, V, which, variant.force.at(state.t, u.shape))


def el_residual(variant: LagrangianVariant, states, dt=None):
    """Discrete Euler-Lagrange residual at the middle of three time levels.

    r_i = dL/du_i - (dL/du_{i,j})_{,j} - (dL/du_{i,t})_{,t}
        = -fbar_i - sbar_{ij,j} + pbar_{i,t}
    """
    if len(states) != 3:
        raise ValueError("need exactly three consecutive time levels")
    s0, s1, s2 = states
    t_steps = (s1.t - s0.t, s2.t - s1.t)
    if dt is None:
        dt = t_steps[0]
    if not np.allclose(t_steps, dt, rtol=1e-9, atol=0):
        raise ValueError(f"inconsistent time levels {t_steps} for dt={dt}")
    grid = variant.grid
    V = (s2.u - s0.u) / (2 * dt)
    A = (s2.u - 2 * s1.u + s0.u) / dt ** 2
    u = s1.u
    G = gradient(u, grid)
    f = variant.force.at(s1.t, u.shape)
    cf = canonical_terms(variant, u, G, V, f)
    # pbar is affine in (u, G, V) with time-independent coefficients
    zero = np.zeros_like(u)
    Gdot = gradient(V, grid)
    pdot = (canonical_terms(variant, V, Gdot, A, zero).pbar
            - canonical_terms(variant, zero, np.zeros_like(G), zero, zero).pbar)
    return -cf.fbar - div(cf.sbar, grid) + pdot


def action(variant: LagrangianVariant, snapshots, dt, window=None):
    """Space-time quadrature of the density over a run of snapshots.

    Velocities come from central differences, so the first and last snapshots
    only serve as stencil support.  ``window`` is an optional ``(start, stop)``
    slice of interior time indices.
    """
    us = [s.u for s in snapshots]
    n = len(us)
    lo, hi = (1, n - 1) if window is None else window
    if lo < 1 or hi > n - 1 or lo >= hi:
        raise ValueError(f"window {window} not inside the trajectory interior (1, {n - 1})")
    grid = variant.grid
    total = 0.0
    for k in range(lo, hi):
        V = (us[k + 1] - us[k - 1]) / (2 * dt)
        G = gradient(us[k], grid)
        f = variant.force.at(snapshots[k].t, us[k].shape)
        total += grid.integrate(density_terms(variant, us[k], G, V, f).L) * dt
    return float(total)
