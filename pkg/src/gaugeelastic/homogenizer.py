"""
Frequency-domain effective operators of a 1D periodic laminate.

Fields carry the Bloch phase ``exp(i(q x - omega t))`` and are expanded in
harmonics ``k_n = q + 2 pi n / L``, ``n = -N..N``.  With the comparison medium
``(Cb, rhob)`` the Green symbol is ``G_n = 1 / (Cb k_n^2 - rhob omega^2)`` and the
four convolution operators act diagonally:

    S_x = k^2 G,   M_x = k omega G,   S_t = -omega k G,   M_t = -omega^2 G

so that ``e = ebar - S_x tau - M_x pi`` and ``v = vbar - S_t tau - M_t pi``.  The
polarizations solve

    tau + dC (S_x tau + M_x pi) = dC ebar,    pi + drho (S_t tau + M_t pi) = drho vbar

with ``dC``, ``drho`` acting as Toeplitz (convolution) matrices.  By default the
stress equation is multiplied through by ``Cb / C`` before truncation
(``rule="inverse"``); the continuous system is unchanged but the truncated one
converges much faster for discontinuous layers.  The ensemble average is the
unit-cell average (zeroth harmonic).

The effective operators are the 2x2 map
``(<sigma>, <p>) = [[Ceff, Seff], [Shat, rhoeff]] (<e>, <v>)``.  For lossless
phases the measured pairing is ``Shat = -conj(Seff)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularityError(ValueError):
    """The (omega, q) point sits on a comparison-medium resonance."""


class TruncationError(RuntimeError):
    pass


@dataclass
class Phase:
    C: float
    rho: float
    fraction: float


@dataclass
class LaminateSpec:
    """Layers placed consecutively from x = offset within a cell of length L."""

    cell_length: float
    phases: Sequence[Phase]
    comparison: Optional[tuple] = None
    offset: float = 0.0

    def __post_init__(self):
        self.phases = [p if isinstance(p, Phase) else Phase(*p) for p in self.phases]
        fr = np.array([p.fraction for p in self.phases])
        if self.cell_length <= 0:
            raise ValueError("cell length must be positive")
        if np.any(fr <= 0) or np.any(fr > 1) or abs(fr.sum() - 1) > 1e-12:
            raise ValueError(f"phase fractions must lie in (0, 1] and sum to 1, got {fr}")
        if any(p.C <= 0 or p.rho <= 0 for p in self.phases):
            raise ValueError("phase moduli and densities must be positive")
        if self.comparison is None:
            self.comparison = (float(np.dot(fr, [p.C for p in self.phases])),
                               float(np.dot(fr, [p.rho for p in self.phases])))

    @property
    def Cb(self):
        return self.comparison[0]

    @property
    def rhob(self):
        return self.comparison[1]

    def intervals(self):
        edges = self.offset + self.cell_length * np.concatenate([[0], np.cumsum(
            [p.fraction for p in self.phases])])
        return list(zip(edges[:-1], edges[1:]))

    def fourier(self, values, n_max):
        """Harmonics g_n, n = -n_max..n_max, of a piecewise-constant profile (exact)."""
        L = self.cell_length
        n = np.arange(-n_max, n_max + 1)
        out = np.zeros(n.shape, complex)
        kap = 2 * np.pi * n / L
        nz = n != 0
        for val, (a, b) in zip(values, self.intervals()):
            out[~nz] += val * (b - a) / L
            out[nz] += val * (np.exp(-1j * kap[nz] * a) - np.exp(-1j * kap[nz] * b)) / (
                1j * kap[nz] * L)
        return out

    def profile(self, x, values):
        """Evaluate a piecewise-constant profile at points x (periodic)."""
        xr = np.mod(np.asarray(x, float) - self.offset, self.cell_length) + self.offset
        out = np.empty_like(xr)
        ivs = self.intervals()
        for val, (a, b) in zip(values, ivs):
            out[(xr >= a) & (xr < b)] = val
        return out

    def mirrored(self):
        return LaminateSpec(self.cell_length, list(reversed(self.phases)), self.comparison,
                            self.offset)

    def harmonic_mean(self):
        fr = np.array([p.fraction for p in self.phases])
        return 1.0 / float(np.sum(fr / np.array([p.C for p in self.phases])))

    def mean_density(self):
        return float(np.dot([p.fraction for p in self.phases], [p.rho for p in self.phases]))


@dataclass
class BlochPoint:
    omega: float
    q: float
    n_harmonics: int = 32


@dataclass
class EffectiveOperators:
    Ceff: complex
    rhoeff: complex
    Seff: complex
    Shat: complex
    condition: float
    second_order: Optional[dict] = None

    def matrix(self):
        return np.array([[self.Ceff, self.Seff], [self.Shat, self.rhoeff]])

    def perturbation_gap(self):
        """|exact - second-order| per entry."""
        if not self.second_order:
            return None
        return {k: abs(getattr(self, k) - v) for k, v in self.second_order.items()}


@dataclass
class PolarizationSolution:
    tau: np.ndarray
    pi: np.ndarray
    e: np.ndarray
    v: np.ndarray
    condition: float
    Cb: float
    rhob: float

    @property
    def mean_strain(self):
        return self.e[len(self.e) // 2]

    @property
    def mean_velocity(self):
        return self.v[len(self.v) // 2]

    @property
    def mean_stress(self):
        return self.Cb * self.mean_strain + self.tau[len(self.tau) // 2]

    @property
    def mean_momentum(self):
        return self.rhob * self.mean_velocity + self.pi[len(self.pi) // 2]


# ---------------------------------------------------------------------------


def wavenumbers(lam: LaminateSpec, bloch: BlochPoint):
    n = np.arange(-bloch.n_harmonics, bloch.n_harmonics + 1)
    return bloch.q + 2 * np.pi * n / lam.cell_length


def green_symbol(lam: LaminateSpec, bloch: BlochPoint, n=None):
    """G_n = 1 / (Cb k_n^2 - rhob omega^2) for one harmonic or all of them."""
    k = wavenumbers(lam, bloch)
    if n is not None:
        k = np.atleast_1d(bloch.q + 2 * np.pi * n / lam.cell_length)
    denom = lam.Cb * k ** 2 - lam.rhob * bloch.omega ** 2
    guard = 1e-8 * lam.Cb * (np.pi / lam.cell_length) ** 2
    bad = np.abs(denom) < guard
    if np.any(bad):
        raise SingularityError(
            f"omega={bloch.omega:.6g}, q={bloch.q:.6g} is within {guard:.2e} of the comparison "
            f"medium resonance for k={k[bad]}; perturb omega")
    G = 1.0 / denom
    return G[0] if n is not None and np.ndim(n) == 0 else G


def operator_symbols(lam, bloch):
    """Diagonal symbols (S_x, M_x, S_t, M_t) of the four convolution operators."""
    k = wavenumbers(lam, bloch)
    w = bloch.omega
    G = green_symbol(lam, bloch)
    return k * k * G, k * w * G, -w * k * G, -w * w * G


def _toeplitz(coeffs):
    """Convolution matrix T[n, m] = g_{n-m} from harmonics g_{-2N..2N}."""
    size = (len(coeffs) + 1) // 2
    mid = len(coeffs) // 2
    idx = np.arange(size)
    return coeffs[mid + idx[:, None] - idx[None, :]]


def solve_polarizations(lam: LaminateSpec, bloch: BlochPoint, ebar=1.0, vbar=0.0,
                        rule="inverse"):
    """Solve the coupled polarization system for one mean loading."""
    N = bloch.n_harmonics
    if N < 8:
        raise TruncationError("need at least 8 harmonics")
    Cs = [p.C for p in lam.phases]
    rs = [p.rho for p in lam.phases]
    dC = _toeplitz(lam.fourier([c - lam.Cb for c in Cs], 2 * N))
    dR = _toeplitz(lam.fourier([r - lam.rhob for r in rs], 2 * N))
    Sx, Mx, St, Mt = operator_symbols(lam, bloch)
    m = 2 * N + 1
    e0 = np.zeros(m, complex)
    e0[N] = 1.0
    I = np.eye(m)
    if rule == "inverse":
        ratio = _toeplitz(lam.fourier([lam.Cb / c for c in Cs], 2 * N))
        dCr = _toeplitz(lam.fourier([(c - lam.Cb) / c for c in Cs], 2 * N))
        A11 = ratio + lam.Cb * dCr * Sx[None, :]
        A12 = lam.Cb * dCr * Mx[None, :]
        b1 = lam.Cb * dCr @ e0 * ebar
    elif rule == "direct":
        A11 = I + dC * Sx[None, :]
        A12 = dC * Mx[None, :]
        b1 = dC @ e0 * ebar
    else:
        raise ValueError(f"unknown truncation rule {rule!r}")
    A21 = dR * St[None, :]
    A22 = I + dR * Mt[None, :]
    b2 = dR @ e0 * vbar
    A = np.block([[A11, A12], [A21, A22]])
    b = np.concatenate([b1, b2])
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"polarization system is singular (condition {cond:.3e})")
    x = np.linalg.solve(A, b)
    tau, pi = x[:m], x[m:]
    e = ebar * e0 - Sx * tau - Mx * pi
    v = vbar * e0 - St * tau - Mt * pi
    return PolarizationSolution(tau, pi, e, v, cond, lam.Cb, lam.rhob)


def _second_order(lam, bloch):
    N = bloch.n_harmonics
    a = lam.fourier([p.C - lam.Cb for p in lam.phases], N)
    b = lam.fourier([p.rho - lam.rhob for p in lam.phases], N)
    mean_a, mean_b = a[N], b[N]
    a = a.copy()
    b = b.copy()
    a[N] = 0.0
    b[N] = 0.0
    Sx, Mx, St, Mt = operator_symbols(lam, bloch)
    ar, br = a[::-1], b[::-1]  # g_{-n}
    return {
        "Ceff": lam.Cb + mean_a - np.sum(ar * Sx * a),
        "rhoeff": lam.rhob + mean_b - np.sum(br * Mt * b),
        "Seff": -np.sum(ar * Mx * b),
        "Shat": -np.sum(br * St * a),
    }


def effective_operators(lam: LaminateSpec, bloch: BlochPoint, rule="inverse"):
    """Effective 2x2 map from the two independent mean loadings."""
    s1 = solve_polarizations(lam, bloch, 1.0, 0.0, rule)
    s2 = solve_polarizations(lam, bloch, 0.0, 1.0, rule)
    E = np.array([[s1.mean_strain, s2.mean_strain], [s1.mean_velocity, s2.mean_velocity]])
    F = np.array([[s1.mean_stress, s2.mean_stress], [s1.mean_momentum, s2.mean_momentum]])
    Z = F @ np.linalg.inv(E)
    return EffectiveOperators(Ceff=Z[0, 0], Seff=Z[0, 1], Shat=Z[1, 0], rhoeff=Z[1, 1],
                              condition=max(s1.condition, s2.condition),
                              second_order=_second_order(lam, bloch))


def static_limit(lam: LaminateSpec, n_harmonics=32, rule="inverse", rtol=1e-6):
    """Ceff as omega -> 0 at q = 0 (Richardson extrapolation in omega^2)."""
    c_bar = np.sqrt(lam.Cb / lam.rhob)
    w0 = 1e-3 * 2 * np.pi * c_bar / lam.cell_length
    vals = [effective_operators(lam, BlochPoint(w, 0.0, n_harmonics), rule).Ceff
            for w in (w0, w0 / 2, w0 / 4)]
    r1 = (4 * vals[1] - vals[0]) / 3
    r2 = (4 * vals[2] - vals[1]) / 3
    if abs(r1 - r2) > rtol * abs(r2):
        raise TruncationError(f"static extrapolation did not settle: {r1} vs {r2}")
    return complex(r2).real if abs(complex(r2).imag) < 1e-12 * abs(r2) else complex(r2)


@dataclass
class DispersionRow:
    omega: float
    q: float
    v_phase: float
    gap: bool
    iterations: int


def dispersion_function(lam: LaminateSpec, omega, q, n_harmonics=32):
    """D(q) = Ceff q^2 + (Shat - Seff) omega q - rhoeff omega^2 with operators taken at (omega, q)."""
    ops = effective_operators(lam, BlochPoint(omega, q, n_harmonics))
    return ops.Ceff * q * q + (ops.Shat - ops.Seff) * omega * q - ops.rhoeff * omega ** 2


def effective_dispersion(lam: LaminateSpec, omegas, n_harmonics=32, sign=+1, tol=1e-10,
                         max_iter=20, offset=1e-3):
    """Bloch wavenumber q(omega) from the homogenized relation

        Ceff q^2 + (Shat - Seff) omega q - rhoeff omega^2 = 0

    solved self-consistently, since the operators depend on q.  ``sign``
    selects the forward (+1) or backward (-1) branch.

    The polarization system is singular exactly on the dispersion curve of the
    heterogeneous medium (a free Bloch wave needs no mean loading), so D is
    sampled at ``q (1 + offset j)``, ``j = -2, -1, 1, 2`` and the root taken
    from the interpolating cubic.  Points without a real root are gaps.
    """
    rows = []
    q = None
    qmax = np.pi / lam.cell_length
    js = np.array([-2.0, -1.0, 1.0, 2.0])
    for w in np.atleast_1d(omegas):
        w = float(w)
        if q is None:
            q = sign * w * np.sqrt(lam.mean_density() / lam.harmonic_mean())
        gap = False
        it = 0
        for it in range(1, max_iter + 1):
            qs = q * (1 + offset * js)
            if np.any(np.abs(qs) >= qmax):
                gap = True
                break
            D = np.array([dispersion_function(lam, w, qq, n_harmonics) for qq in qs])
            if np.max(np.abs(D.imag)) > 1e-6 * max(np.max(np.abs(D)), lam.rhob * w * w):
                gap = True
                break
            coef = np.polyfit(qs - q, D.real, 3)
            roots = np.roots(coef)
            roots = roots[np.abs(roots.imag) < 1e-12 * abs(q) + 1e-300].real + q
            if roots.size == 0:
                gap = True
                break
            q_new = float(roots[np.argmin(np.abs(roots - q))])
            done = abs(q_new - q) <= tol * abs(q_new)
            q = q_new
            if done:
                break
        rows.append(DispersionRow(w, float(q) if not gap else float("nan"),
                                  w / q if not gap else float("nan"), gap, it))
        if gap:
            q = None
    return rows


# ---------------------------------------------------------------------------
# independent real-space oracle


def direct_cell_response(lam: LaminateSpec, bloch: BlochPoint, ebar=1.0, vbar=0.0, n_grid=4096):
    """Cell averages from a direct finite-difference Bloch solve of the heterogeneous problem.

    Solves for the Bloch-periodic scattered displacement ``w``

        sigma' + rho omega^2 w + (i omega vbar drho - i q Cb ebar) e^{iqx} = 0,
        sigma = C (w' + ebar e^{iqx})

    with cell-harmonic moduli at half nodes and cell-averaged densities at
    nodes (exact treatment of layer interfaces), then returns
    ``(<e>, <v>, <sigma>, <p>)``.
    """
    L = lam.cell_length
    M = n_grid
    h = L / M
    q, w = bloch.q, bloch.omega
    xs = np.arange(M) * h
    xm = xs + 0.5 * h
    Cs = [p.C for p in lam.phases]
    rs = [p.rho for p in lam.phases]

    # sub-sample each cell to average piecewise-constant coefficients exactly enough
    sub = 64
    frac = (np.arange(sub) + 0.5) / sub
    inv_c = np.mean(1.0 / lam.profile(xs[:, None] + h * frac[None, :], Cs), axis=1)
    C_half = 1.0 / inv_c
    rho_node = np.mean(lam.profile(xs[:, None] + h * (frac[None, :] - 0.5), rs), axis=1)
    drho_node = rho_node - lam.rhob
    phase_L = np.exp(1j * q * L)
    # average of e^{iqx} over each half-node cell
    if q == 0:
        ph_cell = np.ones(M, complex)
    else:
        ph_cell = (np.exp(1j * q * (xs + h)) - np.exp(1j * q * xs)) / (1j * q * h)

    # sigma_{m+1/2} = C_half[m] ((w_{m+1} - w_m)/h + ebar ph_cell[m])
    rows, cols, vals = [], [], []
    rhs = np.zeros(M, complex)
    idx = np.arange(M)
    nxt = (idx + 1) % M
    prv = (idx - 1) % M
    fac_n = np.where(idx == M - 1, phase_L, 1.0)     # w_{m+1} wraps with Bloch phase
    fac_p = np.where(idx == 0, 1.0 / phase_L, 1.0)
    c_p = C_half            # at m+1/2
    c_m = C_half[prv]       # at m-1/2
    diag = -(c_p + c_m) / h ** 2 + rho_node * w ** 2
    rows += [idx, idx, idx]
    cols += [idx, nxt, prv]
    vals += [diag, c_p * fac_n / h ** 2, c_m * fac_p / h ** 2]
    # flux F = sigma - Cb ebar e^{iqx}; its loading part lives on half nodes
    s = ebar * (C_half - lam.Cb) * ph_cell
    rhs = -((s - fac_p * s[prv]) / h + 1j * w * vbar * drho_node * np.exp(1j * q * xs))
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(M, M))
    wsol = spla.spsolve(A.tocsc(), rhs)
    w_next = np.where(idx == M - 1, phase_L, 1.0) * wsol[nxt]
    sigma = C_half * ((w_next - wsol) / h + ebar * ph_cell)
    mean_w = np.mean(wsol * np.exp(-1j * q * xs))
    mean_e = ebar + 1j * q * mean_w
    mean_v = vbar - 1j * w * mean_w
    mean_sigma = np.mean(sigma * np.exp(-1j * q * xm))
    v_node = vbar * np.exp(1j * q * xs) - 1j * w * wsol
    mean_p = np.mean(rho_node * v_node * np.exp(-1j * q * xs))
    return mean_e, mean_v, mean_sigma, mean_p
