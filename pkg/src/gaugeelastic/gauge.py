"""
Local temporal/spatial transformations, Noether currents and conservation balances.

Space-time fields use the layout ``(components..., nt, *n)``: tensor indices
first, then time, then the spatial grid.  Material coefficient arrays
(``(..., *n)``) broadcast against them inside ``einsum``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import GridSpec, grad, spectral_grad
from .lagrangian import LagrangianVariant, canonical_terms, density_terms

TRANSFORM_KINDS = ("temporal", "spatial", "translation", "custom")


class JacobianError(ValueError):
    pass


class SpaceTimeOps:
    """Derivatives of space-time fields.

    ``spectral=True`` treats the box as a space-time torus (periodic in x and
    t) and differentiates with FFTs; otherwise second-order central
    differences are used and the first/last time levels are unreliable.
    """

    def __init__(self, grid: GridSpec, dt, nt, spectral=False):
        self.grid = grid
        self.dt = dt
        self.nt = nt
        self.spectral = spectral
        if spectral and not grid.periodic:
            raise ValueError("spectral space-time derivatives need a periodic grid")

    def d_space(self, f, j):
        if self.spectral:
            ax = f.ndim - self.grid.dim + j
            return spectral_grad(f, ax, self.grid.lengths[j])
        return grad(f, j, self.grid)

    def d_time(self, f):
        ax = f.ndim - self.grid.dim - 1
        if self.spectral:
            return spectral_grad(f, ax, self.nt * self.dt)
        return np.gradient(f, self.dt, axis=ax, edge_order=2)

    def gradient(self, u):
        """(d, nt, *n) -> G[i, j, nt, *n]."""
        return np.stack([self.d_space(u, j) for j in range(self.grid.dim)], axis=1)

    def velocity(self, u):
        return self.d_time(u)


# ---------------------------------------------------------------------------
# covariant derivatives


def cov_dt(V, G, v0):
    """u_{i;t} = u_{i,t} - u_{i,j} v0_j."""
    if V.shape != v0.shape[:1] + V.shape[1:] and V.shape[0] != v0.shape[0]:
        raise ValueError("shape mismatch between velocity and v0")
    return V - np.einsum("ij...,j...->i...", G, v0)


def cov_dx(u, G, Gamma):
    """u_{i;j} = u_{i,j} + Gamma_ijk u_k."""
    if G.shape[0] != Gamma.shape[0]:
        raise ValueError("shape mismatch between gradient and connection")
    return G + np.einsum("ijk...,k...->ij...", Gamma, u)


# ---------------------------------------------------------------------------
# transformations


@dataclass
class LocalTransform:
    """Coordinate perturbation ``dx[alpha]`` (spatial axes, then time) and field perturbation ``du``.

    Both arrays are space-time fields; ``eps`` scales both.
    """

    kind: str
    dx: np.ndarray
    du: np.ndarray
    eps: float = 1.0
    verified: bool = True

    @property
    def note(self):
        return "" if self.verified else "unverified physical meaning"

    def scaled(self, eps):
        return LocalTransform(self.kind, self.dx, self.du, eps, self.verified)


def build_transform(kind, amplitude, U, ops: SpaceTimeOps, prestate=None, direction=0):
    """Construct a transformation over a space-time trajectory ``U`` (d, nt, *n).

    ``temporal``     dx_t = a(x, t), du_i = (u_{i,t} - u_{i,j} v0_j) a
    ``spatial``      dx_j = a(x, t) along ``direction``, du_i = (u_{i,j} + Gamma_ijk u_k) a
    ``translation``  constant shift ``amplitude`` (length d + 1 sequence), du = 0
    """
    d = ops.grid.dim
    st_shape = U.shape[1:]
    dx = np.zeros((d + 1,) + st_shape)
    if kind == "translation":
        shift = np.broadcast_to(np.asarray(amplitude, float), (d + 1,))
        for a in range(d + 1):
            dx[a] = shift[a]
        return LocalTransform(kind, dx, np.zeros_like(U))
    a = np.broadcast_to(np.asarray(amplitude, float), st_shape)
    G = ops.gradient(U)
    if kind == "temporal":
        if prestate is None or prestate.v0 is None:
            raise ValueError("temporal transform needs the background velocity v0")
        V = ops.velocity(U)
        dx[d] = a
        return LocalTransform(kind, dx, cov_dt(V, G, prestate.v0) * a)
    if kind == "spatial":
        if prestate is None or not prestate.has_connection:
            raise ValueError("spatial transform needs the connection (u0) in the pre-state")
        dx[direction] = a
        du = cov_dx(U, G, prestate.Gamma)[:, direction] * a
        return LocalTransform(kind, dx, du)
    raise ValueError(f"unknown transform kind {kind!r}; use custom_transform for arbitrary fields")


def custom_transform(dx, du):
    return LocalTransform("custom", np.asarray(dx, float), np.asarray(du, float), verified=False)


# ---------------------------------------------------------------------------
# action invariance


def _st_args(U, ops):
    return U, ops.gradient(U), ops.velocity(U)


def _st_action(variant, u, G, V, ops, jac=None, sl=None):
    L = density_terms(variant, u, G, V).L
    if jac is not None:
        L = L * jac
    if sl is not None:
        L = L[sl]
    return float(np.sum(L) * ops.grid.cell_volume * ops.dt)


def action_defect(variant: LagrangianVariant, U, ops: SpaceTimeOps, transform: LocalTransform,
                  eps=None):
    """|A[u] - A'[u']| with the first-order Jacobian and transformed gradients.

    Fields are perturbed in place on the same nodes and the quadrature is
    re-weighted by ``1 + eps (dx_alpha)_{,alpha}``.  On a non-spectral box the
    first and last two time levels are excluded.
    """
    eps = transform.eps if eps is None else eps
    d = ops.grid.dim
    u, G, V = _st_args(U, ops)
    du = transform.du
    dxf = transform.dx
    # derivative of every coordinate perturbation along every coordinate
    ddx = np.empty((d + 1, d + 1) + dxf.shape[1:])
    for b in range(d + 1):
        for a in range(d):
            ddx[b, a] = ops.d_space(dxf[b], a)
        ddx[b, d] = ops.d_time(dxf[b])
    u_beta = np.concatenate([G, V[:, None]], axis=1)       # u_{i,beta}
    jac = 1.0 + eps * sum(ddx[a, a] for a in range(d + 1))
    if np.any(jac <= 0):
        raise JacobianError("transformation Jacobian is not positive; reduce eps")
    dG = ops.gradient(du) - np.einsum("ib...,bj...->ij...", u_beta, ddx[:, :d])
    dV = ops.velocity(du) - np.einsum("ib...,b...->i...", u_beta, ddx[:, d])
    sl = None if ops.spectral else (slice(2, -2),)
    base = _st_action(variant, u, G, V, ops, sl=sl)
    pert = _st_action(variant, u + eps * du, G + eps * dG, V + eps * dV, ops, jac=jac, sl=sl)
    return abs(pert - base)


def defect_slope(variant, U, ops, transform, eps_values=(1e-2, 1e-3, 1e-4, 1e-5)):
    """Least-squares log-log slope of the action defect against eps."""
    eps_values = np.asarray(eps_values, float)
    defects = np.array([action_defect(variant, U, ops, transform, e) for e in eps_values])
    tiny = np.finfo(float).tiny
    slope = np.polyfit(np.log(eps_values), np.log(np.maximum(defects, tiny)), 1)[0]
    return float(slope), defects


# ---------------------------------------------------------------------------
# Noether currents


def noether_current(variant: LagrangianVariant, U, ops: SpaceTimeOps, transform: LocalTransform):
    """P_alpha = (L d_ab - dL/du_{i,a} u_{i,b}) dx_b + dL/du_{i,a} du_i, shape (d + 1, nt, *n)."""
    d = ops.grid.dim
    u, G, V = _st_args(U, ops)
    L = density_terms(variant, u, G, V).L
    cf = canonical_terms(variant, u, G, V)
    dxf, du = transform.dx * transform.eps, transform.du * transform.eps
    u_beta = np.concatenate([G, V[:, None]], axis=1)
    transport = np.einsum("ib...,b...->i...", u_beta, dxf)  # u_{i,b} dx_b
    P = np.empty((d + 1,) + U.shape[1:])
    for j in range(d):
        P[j] = (L * dxf[j] - np.einsum("i...,i...->...", cf.sbar[:, j], transport)
                + np.einsum("i...,i...->...", cf.sbar[:, j], du))
    # dL/du_{i,t} = -pbar_i
    P[d] = (L * dxf[d] + np.einsum("i...,i...->...", cf.pbar, transport)
            - np.einsum("i...,i...->...", cf.pbar, du))
    if not np.all(np.isfinite(P)):
        raise FloatingPointError("Noether current is not finite")
    return P


def noether_divergence(P, ops: SpaceTimeOps):
    """Discrete P_{alpha,alpha}; returns (field, RMS over the reliable interior)."""
    d = ops.grid.dim
    if P.shape[1] < 3:
        raise ValueError("need at least three time levels")
    div = ops.d_time(P[d])
    for j in range(d):
        div = div + ops.d_space(P[j], j)
    interior = div if ops.spectral else div[2:-2]
    return div, float(np.sqrt(np.mean(interior ** 2)))


def augment_divergence_free(P, q, ops: SpaceTimeOps):
    """Add a divergence-free space-time field built from ``q``.

    Two space-time dimensions: scalar ``q``, added field (q_{,t}, -q_{,x}).
    Three: vector ``q`` (3, nt, nx, ny), added field eps_abc q_{b,c}.
    """
    d = ops.grid.dim

    def D(f, c):
        return ops.d_time(f) if c == d else ops.d_space(f, c)

    out = P.copy()
    if d == 1:
        out[0] += D(q, 1)
        out[1] -= D(q, 0)
        return out
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        out[a] += D(q[b], c) - D(q[c], b)
    return out


# ---------------------------------------------------------------------------
# integrated balances


def _boundary_flux(F, grid: GridSpec):
    """Outward flux of a spatial vector field F[k] (..., *n) through the box boundary."""
    if grid.periodic:
        return np.zeros(F.shape[1:F.ndim - grid.dim])
    d = grid.dim
    total = 0.0
    for k in range(d):
        ax = F.ndim - d + k - 1  # axis inside F[k]
        Fk = F[k]
        hi = np.take(Fk, -1, axis=ax)
        lo = np.take(Fk, 0, axis=ax)
        face = hi - lo
        others = [a for a in range(d) if a != k]
        for o in reversed(others):
            w = np.full(grid.n[o], grid.dx[o])
            w[0] *= 0.5
            w[-1] *= 0.5
            face = np.tensordot(face, w, axes=([face.ndim - 1], [0]))
        total = total + face
    return total


@dataclass
class Balance:
    times: np.ndarray
    lhs_rate: np.ndarray
    rhs_flux: np.ndarray
    precondition_residual: Optional[float] = None

    @property
    def residual(self):
        return self.lhs_rate - self.rhs_flux

    @property
    def rms_residual(self):
        return float(np.sqrt(np.mean(self.residual ** 2)))


def _interior_fields(variant, U, dt):
    """Central-difference velocity and gradient on interior time levels."""
    grid = variant.grid
    V = (U[:, 2:] - U[:, :-2]) / (2 * dt)
    u = U[:, 1:-1]
    G = np.stack([grad(u, j, grid) for j in range(grid.dim)], axis=1)
    return u, G, V


def balance_terms(variant: LagrangianVariant, u, G, V, kind, momentum_sign=+1.0, direction=0):
    """Density q and spatial flux F[k] of one balance law at a single time level.

    ``kind="temporal"``:  q = L + s p_i u_{i,j} v0_j,  F_k = sbar_ik u_{i,j} v0_j
    ``kind="spatial"``:   q = p_i Gamma_ijr u_r,  F_k = L d_kj + sbar_ik Gamma_ijr u_r
    """
    L = density_terms(variant, u, G, V).L
    cf = canonical_terms(variant, u, G, V)
    if kind == "temporal":
        w = np.einsum("ij...,j...->i...", G, variant.prestate.v0)
        q = L + momentum_sign * np.einsum("i...,i...->...", cf.pbar, w)
        F = np.einsum("ik...,i...->k...", cf.sbar, w)
    elif kind == "spatial":
        if not variant.prestate.has_connection:
            raise ValueError("the spatial balance needs the connection (u0) in the pre-state")
        Gam = variant.prestate.Gamma[:, direction]
        w = np.einsum("ir...,r...->i...", Gam, u)
        q = np.einsum("i...,i...->...", cf.pbar, w)
        F = np.einsum("ik...,i...->k...", cf.sbar, w)
        F[direction] = F[direction] + L
    else:
        raise ValueError(f"unknown balance {kind!r}")
    return q, F


def _balance(variant, U, dt, kind, t0, **kw):
    grid = variant.grid
    u, G, V = _interior_fields(variant, U, dt)
    q, F = balance_terms(variant, u, G, V, kind, **kw)
    Q = grid.integrate(q)
    flux = _boundary_flux(F, grid)
    rate = (Q[2:] - Q[:-2]) / (2 * dt)
    times = t0 + dt * np.arange(2, U.shape[1] - 2)
    return Balance(times, rate, np.broadcast_to(flux, Q.shape)[1:-1].copy())


def conservation_temporal(variant: LagrangianVariant, U, dt, momentum_sign=+1.0, t0=0.0):
    """Balance for the temporal gauge on a box V with the background velocity v0.

    Q(t) = int (L + s p_i u_{i,j} v0_j) dV,  flux = oint sbar_ik u_{i,j} v0_j dS_k,
    with ``s = momentum_sign``.  Returns the central time derivative of Q and
    the flux on the interior levels.
    """
    return _balance(variant, U, dt, "temporal", t0, momentum_sign=momentum_sign)


def conservation_spatial(variant: LagrangianVariant, U, dt, direction=0, t0=0.0):
    """Balance for the spatial gauge along ``direction`` j.

    Q(t) = int p_i Gamma_ijr u_r dV,  flux = oint (L d_kj + sbar_ik Gamma_ijr u_r) dS_k.
    """
    return _balance(variant, U, dt, "spatial", t0, direction=direction)


def boundary_flux(F, grid: GridSpec):
    return _boundary_flux(F, grid)
