import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from gaugeelastic.checks import reference_laminate, symmetric_laminate
from gaugeelastic.homogenizer import (BlochPoint, LaminateSpec, Phase, SingularityError,
                                      TruncationError, direct_cell_response,
                                      effective_dispersion, effective_operators, green_symbol,
                                      solve_polarizations, static_limit, wavenumbers)


def bloch_green(x, lam, omega, q):
    """Real-space Bloch-periodic Green's function of -Cb d2/dx2 - rhob omega^2 on (0, L)."""
    L, Cb = lam.cell_length, lam.Cb
    kap = omega * np.sqrt(lam.rhob / Cb)
    return ((np.sin(kap * (L - x)) + np.exp(1j * q * L) * np.sin(kap * x))
            / (2 * Cb * kap * (np.cos(kap * L) - np.cos(q * L))))


@pytest.mark.parametrize("omega,q", [(1.3, 0.7), (0.4, -1.1), (2.9, 2.5)])
def test_green_symbol_against_closed_form(omega, q):
    lam = reference_laminate()
    bloch = BlochPoint(omega, q, 8)
    G = green_symbol(lam, bloch)
    for n, kn in zip(range(-8, 9), wavenumbers(lam, bloch)):
        re = quad(lambda x: (bloch_green(x, lam, omega, q) * np.exp(-1j * kn * x)).real, 0, 1,
                  epsabs=1e-13, limit=200)[0]
        im = quad(lambda x: (bloch_green(x, lam, omega, q) * np.exp(-1j * kn * x)).imag, 0, 1,
                  epsabs=1e-13, limit=200)[0]
        assert abs(re + 1j * im - G[n + 8]) < 1e-8


def test_green_symbol_guards_comparison_resonance():
    lam = reference_laminate()
    c = np.sqrt(lam.Cb / lam.rhob)
    with pytest.raises(SingularityError, match="perturb omega"):
        green_symbol(lam, BlochPoint(c * 0.5, 0.5, 8))


def test_fourier_of_piecewise_profile_matches_quadrature():
    lam = reference_laminate()
    vals = [p.C for p in lam.phases]
    g = lam.fourier(vals, 3)
    x = (np.arange(200000) + 0.5) / 200000
    f = lam.profile(x, vals)
    for n in range(-3, 4):
        assert abs(np.mean(f * np.exp(-2j * np.pi * n * x)) - g[n + 3]) < 1e-5


def test_homogeneous_cell_is_exact():
    lam = LaminateSpec(1.0, [Phase(2.0, 3.0, 0.4), Phase(2.0, 3.0, 0.6)])
    op = effective_operators(lam, BlochPoint(0.7, 0.3, 8))
    assert np.allclose(op.matrix(), [[2.0, 0.0], [0.0, 3.0]], atol=1e-14)


def test_adjoint_coupling_relation():
    op = effective_operators(reference_laminate(), BlochPoint(1.2, 0.9, 32))
    assert abs(op.Shat + np.conj(op.Seff)) < 1e-12 * abs(op.Seff)
    assert abs(op.Seff) > 1e-3


def test_mirror_symmetric_cell_has_no_coupling():
    op = effective_operators(symmetric_laminate(), BlochPoint(1.2, 0.0, 32))
    assert abs(op.Seff) < 1e-14
    # away from q = 0 a symmetric cell still couples through spatial dispersion
    assert abs(effective_operators(symmetric_laminate(), BlochPoint(1.2, 0.4, 32)).Seff) > 1e-6


def test_mirrored_cell_flips_coupling_sign():
    lam = reference_laminate()
    a = effective_operators(lam, BlochPoint(1.2, 0.4, 32))
    b = effective_operators(lam.mirrored(), BlochPoint(1.2, -0.4, 32))
    assert abs(a.Ceff - b.Ceff) < 1e-10
    assert abs(a.Seff + b.Seff) < 1e-10


def test_static_limit_is_harmonic_mean():
    lam = reference_laminate()
    assert static_limit(lam) == pytest.approx(lam.harmonic_mean(), rel=1e-6)


def test_truncation_rules_agree_when_converged():
    lam = reference_laminate()
    a = effective_operators(lam, BlochPoint(0.8, 0.5, 64), "inverse")
    b = effective_operators(lam, BlochPoint(0.8, 0.5, 512), "direct")
    assert abs(a.Ceff - b.Ceff) < 1e-3 * abs(a.Ceff)
    with pytest.raises(ValueError):
        solve_polarizations(lam, BlochPoint(0.8, 0.5, 16), rule="laurent")
    with pytest.raises(TruncationError):
        solve_polarizations(lam, BlochPoint(0.8, 0.5, 4))


def test_second_order_gap_is_third_order_in_contrast():
    ds = np.array([0.02, 0.01, 0.005])
    gaps = []
    for d in ds:
        lam = LaminateSpec(1.0, [Phase(1 + d, 1 - d, 0.3), Phase(1 - d, 1 + 0.5 * d, 0.45),
                                 Phase(1 + 0.4 * d, 1.0, 0.25)])
        # the direct rule keeps the Born series of the truncated system
        gaps.append(effective_operators(lam, BlochPoint(1.1, 0.6, 32), "direct")
                    .perturbation_gap())
    for key in gaps[0]:
        slope = np.polyfit(np.log(ds), np.log([g[key] for g in gaps]), 1)[0]
        assert 2.7 < slope < 3.3, key


def test_polarization_solution_matches_direct_solve():
    lam = reference_laminate()
    b = BlochPoint(2.0, 1.0, 64)
    s = solve_polarizations(lam, b, 1.0, 0.0)
    e, v, sig, p = direct_cell_response(lam, b, 1.0, 0.0, n_grid=2048)
    assert abs(s.mean_stress / s.mean_strain - sig / e) < 1e-3


def test_long_wave_dispersion_speed():
    lam = reference_laminate()
    rows = effective_dispersion(lam, [0.05])
    assert not rows[0].gap
    assert rows[0].v_phase == pytest.approx(np.sqrt(lam.harmonic_mean() / lam.mean_density()),
                                            rel=1e-3)


def test_laminate_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        LaminateSpec(1.0, [Phase(1, 1, 0.5), Phase(2, 1, 0.4)])
    with pytest.raises(ValueError):
        LaminateSpec(1.0, [Phase(-1, 1, 0.5), Phase(2, 1, 0.5)])


@settings(max_examples=25, deadline=None)
@given(c2=st.floats(0.2, 5.0), r2=st.floats(0.2, 5.0), f=st.floats(0.1, 0.9),
       w=st.floats(0.05, 0.6))
def test_two_phase_cells_never_couple_at_zero_wavenumber(c2, r2, f, w):
    lam = LaminateSpec(1.0, [Phase(1.0, 1.0, f), Phase(c2, r2, 1 - f)])
    try:
        op = effective_operators(lam, BlochPoint(w, 0.0, 16))
    except (SingularityError, np.linalg.LinAlgError):
        return
    # every two-phase cell is mirror symmetric about some point
    assert abs(op.Seff) < 1e-8 * (1 + abs(op.Ceff))
