"""
Grids, material tensors, pre-stressed reference states and discrete operators.

Array layout
------------
Every field stores its tensor indices first and the spatial grid last:

* scalar field      ``(*n)``
* vector field      ``(d, *n)``          ``u[i]``
* 2-tensor field    ``(d, d, *n)``       ``G[i, j] = u_{i,j}``
* 3-tensor field    ``(d, d, d, *n)``    ``Gamma[i, j, k] = u0_{i,jk}``
* 4-tensor field    ``(d, d, d, d, *n)`` ``C[i, j, k, l]``

so that ``np.einsum`` contractions read like index notation with a trailing
``...`` for the grid.  All operators are pure functions returning new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

BOUNDARY_CONDITIONS = ("periodic", "fixed-displacement", "traction-free")

#: cells x stored fields allowed before GridSpec refuses to build
DEFAULT_MEMORY_BUDGET = 50_000_000


class GridError(ValueError):
    """Raised for invalid grids or operator/grid mismatches."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid in one or two dimensions."""

    dim: int
    n: tuple
    dx: tuple
    dt: float = 1.0
    n_steps: int = 0
    bc: str = "periodic"
    n_fields: int = 64
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        dx = tuple(float(v) for v in np.atleast_1d(self.dx))
        if len(n) == 1 and self.dim > 1:
            n = n * self.dim
        if len(dx) == 1 and self.dim > 1:
            dx = dx * self.dim
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dx", dx)
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if len(n) != self.dim or len(dx) != self.dim:
            raise GridError("n and dx need one entry per axis")
        if min(n) < 8:
            raise GridError(f"need at least 8 points per axis, got {n}")
        if min(dx) <= 0 or self.dt <= 0:
            raise GridError("dx and dt must be positive")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise GridError(f"unknown boundary condition {self.bc!r}")
        cells = int(np.prod(n)) * self.n_fields * self.dim ** 2
        if cells > self.memory_budget:
            raise GridError(
                f"grid {n} needs ~{cells} values, above the memory budget {self.memory_budget}"
            )

    @classmethod
    def uniform(cls, dim, n, length, **kw):
        """Grid of ``n`` points per axis covering ``length`` (periodic spacing L/n)."""
        length = np.broadcast_to(np.asarray(length, float), (dim,))
        n_arr = np.broadcast_to(np.asarray(n, int), (dim,))
        bc = kw.get("bc", "periodic")
        if bc == "periodic":
            dx = length / n_arr
        else:
            dx = length / (n_arr - 1)
        return cls(dim=dim, n=tuple(n_arr), dx=tuple(dx), **kw)

    @property
    def shape(self):
        return self.n

    @property
    def periodic(self):
        return self.bc == "periodic"

    @property
    def lengths(self):
        if self.periodic:
            return tuple(n * h for n, h in zip(self.n, self.dx))
        return tuple((n - 1) * h for n, h in zip(self.n, self.dx))

    @property
    def cell_volume(self):
        return float(np.prod(self.dx))

    def axes(self):
        return [np.arange(n) * h for n, h in zip(self.n, self.dx)]

    def coords(self):
        """Coordinate arrays, one per axis, each of grid shape."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def quadrature_weights(self):
        """Trapezoid weights (uniform for periodic grids)."""
        w = np.full(self.n, self.cell_volume)
        if not self.periodic:
            for ax in range(self.dim):
                sl = [slice(None)] * self.dim
                for edge in (0, -1):
                    sl[ax] = edge
                    w[tuple(sl)] *= 0.5
        return w

    def integrate(self, f):
        """Integrate a field over the domain, summing over trailing grid axes."""
        f = np.asarray(f)
        w = self.quadrature_weights()
        return np.sum(f * w, axis=tuple(range(f.ndim - self.dim, f.ndim)))

    def with_dt(self, dt, n_steps=None):
        return GridSpec(self.dim, self.n, self.dx, dt,
                        self.n_steps if n_steps is None else n_steps, self.bc,
                        self.n_fields, self.memory_budget)


# ---------------------------------------------------------------------------
# material and reference state


def isotropic_stiffness(lam, mu, dim):
    """C_ijkl = lam d_ij d_kl + mu (d_ik d_jl + d_il d_jk) as a (d,d,d,d) array."""
    eye = np.eye(dim)
    return (lam * np.einsum("ij,kl->ijkl", eye, eye)
            + mu * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye)))


def broadcast_tensor(t, rank_dims, shape):
    """Broadcast a per-node or uniform tensor to ``(*rank_dims, *shape)``."""
    t = np.asarray(t, dtype=float)
    target = tuple(rank_dims) + tuple(shape)
    if t.shape == target:
        return t.copy()
    if t.shape == tuple(rank_dims):
        return np.broadcast_to(t.reshape(t.shape + (1,) * len(shape)), target).copy()
    if t.ndim == 0:
        return np.broadcast_to(t, target).copy()
    raise GridError(f"cannot broadcast tensor of shape {t.shape} to {target}")


@dataclass
class MaterialModel:
    """Elasticity tensor and (possibly anisotropic) density sampled per node."""

    C: np.ndarray
    rho: np.ndarray

    @property
    def dim(self):
        return self.rho.shape[0]

    @classmethod
    def uniform(cls, C, rho, grid: GridSpec):
        d = grid.dim
        C = np.asarray(C, float)
        if C.ndim == 0:
            C = C.reshape((1, 1, 1, 1))
        rho = np.asarray(rho, float)
        if rho.ndim == 0:
            rho = rho * np.eye(d)
        return cls(broadcast_tensor(C, (d,) * 4, grid.shape),
                   broadcast_tensor(rho, (d, d), grid.shape))

    @classmethod
    def isotropic(cls, lam, mu, rho, grid: GridSpec):
        """Isotropic material; ``lam``, ``mu``, ``rho`` may be scalars or grid fields.

        In 1D the longitudinal modulus lam + 2 mu is used.
        """
        d = grid.dim
        lam = np.broadcast_to(np.asarray(lam, float), grid.shape)
        mu = np.broadcast_to(np.asarray(mu, float), grid.shape)
        eye = np.eye(d)
        C = (np.einsum("ij,kl->ijkl", eye, eye)[..., None] * lam.reshape(1, -1)
             + (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye))[..., None]
             * mu.reshape(1, -1))
        C = C.reshape((d,) * 4 + grid.shape)
        r = np.broadcast_to(np.asarray(rho, float), grid.shape)
        rho_t = eye.reshape(d, d, *([1] * d)) * r
        return cls(C, np.ascontiguousarray(rho_t))


def voigt_pairs(dim):
    if dim == 1:
        return [(0, 0)]
    return [(0, 0), (1, 1), (0, 1)]


def voigt_matrix(C):
    """Voigt matrices of a per-node stiffness, shape ``(*n, m, m)``."""
    d = C.shape[0]
    pairs = voigt_pairs(d)
    m = len(pairs)
    grid_shape = C.shape[4:]
    V = np.empty(grid_shape + (m, m))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            V[..., a, b] = C[i, j, k, l]
    return V


def tensor_from_voigt(V, dim):
    """Inverse of :func:`voigt_matrix` for a single symmetric Voigt matrix."""
    pairs = voigt_pairs(dim)
    C = np.zeros((dim,) * 4)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            for (p, q) in {(i, j), (j, i)}:
                for (r, s) in {(k, l), (l, k)}:
                    C[p, q, r, s] = V[a, b]
    return C


@dataclass
class ValidationReport:
    symmetry_defect: np.ndarray
    min_eig_C: np.ndarray
    min_eig_rho: np.ndarray
    tol: float = 1e-12

    @property
    def worst_defect(self):
        return float(np.max(self.symmetry_defect))

    @property
    def worst_node(self):
        return np.unravel_index(int(np.argmax(self.symmetry_defect)), self.symmetry_defect.shape)

    @property
    def passed(self):
        return (self.worst_defect <= self.tol
                and float(np.min(self.min_eig_C)) > 0
                and float(np.min(self.min_eig_rho)) > 0)

    def summary(self):
        return (f"max symmetry defect {self.worst_defect:.3e} at node {self.worst_node}, "
                f"min eig(C) {np.min(self.min_eig_C):.3e}, min eig(rho) {np.min(self.min_eig_rho):.3e}")


def validate_material(m: MaterialModel, tol=1e-12) -> ValidationReport:
    """Check major/minor symmetries and positive definiteness node by node.

    Violations are reported, never raised.
    """
    C, rho = m.C, m.rho
    scale = np.max(np.abs(C), axis=(0, 1, 2, 3))
    scale = np.where(scale > 0, scale, 1.0)
    perms = [C.transpose(2, 3, 0, 1, *range(4, C.ndim)),
             C.transpose(1, 0, 2, 3, *range(4, C.ndim)),
             C.transpose(0, 1, 3, 2, *range(4, C.ndim))]
    defect = np.zeros(C.shape[4:])
    for p in perms:
        defect = np.maximum(defect, np.max(np.abs(C - p), axis=(0, 1, 2, 3)) / scale)
    rscale = np.max(np.abs(rho), axis=(0, 1))
    rscale = np.where(rscale > 0, rscale, 1.0)
    rho_t = np.swapaxes(rho, 0, 1)
    defect = np.maximum(defect, np.max(np.abs(rho - rho_t), axis=(0, 1)) / rscale)
    V = voigt_matrix(C)
    min_c = np.linalg.eigvalsh(0.5 * (V + np.swapaxes(V, -1, -2)))[..., 0]
    R = np.moveaxis(rho, (0, 1), (-2, -1))
    min_r = np.linalg.eigvalsh(0.5 * (R + np.swapaxes(R, -1, -2)))[..., 0]
    return ValidationReport(defect, min_c, min_r, tol)


# ---------------------------------------------------------------------------
# discrete operators


def _grid_axis(f, axis, grid):
    if not 0 <= axis < grid.dim:
        raise GridError(f"axis {axis} out of range for a {grid.dim}D grid")
    ax = f.ndim - grid.dim + axis
    if f.shape[ax] < 3:
        raise GridError("need at least 3 points along the differentiated axis")
    return ax


def grad(f, axis, grid: GridSpec):
    """Second-order central derivative along a spatial axis.

    Periodic grids wrap; other boundaries use second-order one-sided stencils.
    """
    f = np.asarray(f, dtype=float)
    ax = _grid_axis(f, axis, grid)
    h = grid.dx[axis]
    if grid.periodic:
        return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * h)
    return np.gradient(f, h, axis=ax, edge_order=2)


def spectral_grad(f, axis, length, ndim_grid=None):
    """Fourier derivative of a periodic field along ``axis`` (an absolute axis index).

    Used where discrete product rules must hold to rounding (band-limited fields).
    """
    f = np.asarray(f)
    n = f.shape[axis]
    k = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)
    return out.real if np.isrealobj(f) else out


def gradient(u, grid: GridSpec):
    """G[i, j] = u_{i,j} for a vector field (or G[j] = f_{,j} for a scalar)."""
    return np.stack([grad(u, j, grid) for j in range(grid.dim)], axis=u.ndim - grid.dim)


def div(T, grid: GridSpec):
    """Row divergence: out_i = T_{ij,j}."""
    lead = T.ndim - grid.dim - 1
    out = 0.0
    for j in range(grid.dim):
        out = out + grad(np.take(T, j, axis=lead), j, grid)
    return out


def strain(u, grid: GridSpec):
    G = gradient(u, grid)
    return 0.5 * (G + np.swapaxes(G, 0, 1))


def hooke_pre_stress(C, G0):
    """sigma0_ij = C_ijkl G0_kl at every node."""
    C = np.asarray(C)
    G0 = np.asarray(G0)
    if C.shape[:2] != G0.shape[:2] or C.shape[4:] != G0.shape[2:]:
        raise GridError(f"shape mismatch C{C.shape} vs G0{G0.shape}")
    return np.einsum("ijkl...,kl...->ij...", C, G0)


def spatial_connection(u0, grid: GridSpec):
    """Gamma[i, j, k] = u0_{i,jk} by nested second-order central differences."""
    G0 = gradient(u0, grid)
    return gradient(G0, grid)


def torsion(Gamma):
    """T[i, j, k] = Gamma[i, j, k] - Gamma[j, i, k]."""
    return Gamma - np.swapaxes(Gamma, 0, 1)


def mixed_partial_defect(Gamma):
    """Gamma[i, j, k] - Gamma[i, k, j]; zero for a connection built from one displacement."""
    return Gamma - np.swapaxes(Gamma, 1, 2)


def div_c_grad(C, u, grid: GridSpec):
    """out_i = (C_ijkl u_{k,l})_{,j} with compact stencils on the diagonal (j == l) terms.

    The diagonal terms use midpoint-averaged coefficients,
    ``D-( C_{m+1/2} D+ u )``, which keeps the operator symmetric and free of
    odd/even decoupling for discontinuous media.  Off-diagonal terms use nested
    central differences.  Non-periodic grids get zero flux through the outer
    half cells (the traction-free closure); fixed boundaries are imposed by
    the caller.
    """
    d = grid.dim
    out = np.zeros_like(u, dtype=float)
    for j in range(d):
        h = grid.dx[j]
        ax = 1 + j  # axis inside a (d, *n) array after selecting i
        for l in range(d):
            if j == l:
                for i in range(d):
                    for k in range(d):
                        c = C[i, j, k, l]
                        if not np.any(c):
                            continue
                        w = u[k]
                        cax = j
                        if grid.periodic:
                            c_half = 0.5 * (c + np.roll(c, -1, axis=cax))
                            flux = c_half * (np.roll(w, -1, axis=cax) - w) / h
                            out[i] += (flux - np.roll(flux, 1, axis=cax)) / h
                        else:
                            n_ax = w.shape[cax]
                            lo = [slice(None)] * d
                            hi = [slice(None)] * d
                            lo[cax] = slice(0, n_ax - 1)
                            hi[cax] = slice(1, n_ax)
                            c_half = 0.5 * (c[tuple(lo)] + c[tuple(hi)])
                            flux = c_half * (w[tuple(hi)] - w[tuple(lo)]) / h
                            pad = [(0, 0)] * d
                            pad[cax] = (1, 1)
                            fp = np.pad(flux, pad)
                            lo2 = [slice(None)] * d
                            hi2 = [slice(None)] * d
                            lo2[cax] = slice(0, n_ax)
                            hi2[cax] = slice(1, n_ax + 1)
                            out[i] += (fp[tuple(hi2)] - fp[tuple(lo2)]) / h
            else:
                du = grad(u, l, grid)
                for i in range(d):
                    s = np.einsum("k...,k...->...", C[i, j, :, l], du)
                    out[i] += grad(s, j, grid)
    return out


# ---------------------------------------------------------------------------
# reference (pre-stressed) state


@dataclass
class PreState:
    """Initial configuration data: u0 and everything derived from it.

    Build with :meth:`from_displacement` (u0 known; all derived members
    filled) or :meth:`from_stress` (sigma0 and v0 measured directly;
    connection-dependent members stay ``None``).
    """

    sigma0: np.ndarray
    v0: np.ndarray
    fbar0: np.ndarray
    u0: Optional[np.ndarray] = None
    G0: Optional[np.ndarray] = None
    Gamma: Optional[np.ndarray] = None
    f0: Optional[np.ndarray] = None
    derived: bool = field(default=False)

    @property
    def has_connection(self):
        return self.Gamma is not None

    @classmethod
    def from_displacement(cls, u0, material: MaterialModel, grid: GridSpec, v0=None):
        u0 = np.asarray(u0, float)
        G0 = gradient(u0, grid)
        sigma0 = hooke_pre_stress(material.C, G0)
        Gamma = gradient(G0, grid)
        fbar0 = -div(sigma0, grid)
        if v0 is None:
            v0 = np.zeros_like(u0)
        return cls(sigma0=sigma0, v0=np.asarray(v0, float), fbar0=fbar0, u0=u0, G0=G0,
                   Gamma=Gamma, derived=True)

    @classmethod
    def from_stress(cls, sigma0, v0, grid: GridSpec, fbar0=None):
        sigma0 = np.asarray(sigma0, float)
        if fbar0 is None:
            fbar0 = -div(sigma0, grid)
        return cls(sigma0=sigma0, v0=np.asarray(v0, float), fbar0=np.asarray(fbar0, float))

    @classmethod
    def zero(cls, grid: GridSpec):
        d = grid.dim
        z = np.zeros((d,) + grid.shape)
        return cls(sigma0=np.zeros((d, d) + grid.shape), v0=z.copy(), fbar0=z.copy())

    def equilibrium_residual(self, grid: GridSpec):
        """sigma0_{ij,j} + fbar0_i (zero by construction when fbar0 is derived)."""
        return div(self.sigma0, grid) + self.fbar0


@dataclass
class BodyForceModel:
    """Static force f0 plus an incremental force f(x, t).

    ``f`` is a callable ``f(t) -> (d, *n)`` array; :meth:`point_source` builds
    a Ricker-wavelet point force.
    """

    f0: Optional[np.ndarray] = None
    f: Optional[callable] = None

    def at(self, t, shape):
        if self.f is None:
            return np.zeros(shape)
        val = np.asarray(self.f(t), float)
        if not np.all(np.isfinite(val)):
            raise FloatingPointError(f"body force is not finite at t={t}")
        return val

    @staticmethod
    def ricker(t, f_peak, t0):
        a = (np.pi * f_peak * (t - t0)) ** 2
        return (1.0 - 2.0 * a) * np.exp(-a)

    @classmethod
    def point_source(cls, grid: GridSpec, node: Sequence[int], component=0,
                     amplitude=1.0, f_peak=1.0, t0=None):
        t0 = 1.2 / f_peak if t0 is None else t0
        d = grid.dim
        spatial = np.zeros((d,) + grid.shape)
        spatial[(component,) + tuple(node)] = amplitude / grid.cell_volume

        def f(t):
            return spatial * cls.ricker(t, f_peak, t0)

        return cls(f=f)


@dataclass
class WaveState:
    u: np.ndarray
    udot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.u.shape != self.udot.shape:
            raise GridError("u and udot shapes differ")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.udot))):
            raise FloatingPointError(f"non-finite wave state at t={self.t}")
