"""Acceptance criteria, one pass/fail line each in the terminal summary.

The two full-size master-equation runs (n_max=15, 201 frequencies) are
shared session fixtures; expect a few minutes in total.
"""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from cavity_opa.analytics import (
    analytic_spectrum,
    effective_coefficients,
    half_lambda_alpha,
    motion_spectrum,
    opa_photon_number,
    opa_quadrature_variance,
)
from cavity_opa.engine import (
    coherent_fidelity,
    output_squeezing_spectrum,
    reduced_field_state,
    steady_state,
    steady_stats,
)
from cavity_opa.model import SystemParams, build_liouvillian
from cavity_opa.secular import LinearLangevinModel, averaged_noise_correlation, langevin_output_spectrum

from conftest import FIG3, GAMMA_HALF

pytestmark = pytest.mark.slow


def test_criterion_1_fig3_spectrum(fig3_run, acceptance):
    spec = fig3_run.spectrum
    ana = analytic_spectrum(0.5, 1.0, 1.0, spec.omega)
    s0 = spec.at(0.0)
    acceptance.check(1, "S(0) vs 1/9", abs(s0 - 1 / 9) <= 0.05, f"S(0)={s0:.5f}, 1/9={1/9:.5f}")
    band = np.abs(spec.omega) <= 5.0
    worst = float(np.max(np.abs(spec.s[band] - ana.s[band])))
    acceptance.check(1, "pointwise |w|<=5", worst <= 0.05, f"max |numeric - analytic| = {worst:.4f}")
    acceptance.check(1, "runtime", fig3_run.seconds <= 300.0,
                     f"{fig3_run.seconds:.1f} s for {spec.omega.size} points at n_max=15")


def test_criterion_2_spontaneous_emission(fig3_run, fig3_emission_run, acceptance):
    eff = effective_coefficients(fig3_emission_run.params, gamma_prime_override=0.5)
    ana0 = analytic_spectrum(eff.alpha_bar, eff.kappa, eff.kappa_prime, [0.0]).s[0]
    acceptance.check(2, "analytic S(0)", abs(ana0 - 0.5) <= 1e-12, f"S(0)={ana0:.12f}")
    s0 = fig3_emission_run.spectrum.at(0.0)
    acceptance.check(2, "numeric S(0)", abs(s0 - 0.5) <= 0.07, f"S(0)={s0:.4f}")
    gap = fig3_emission_run.spectrum.s - fig3_run.spectrum.s
    acceptance.check(2, "above gamma=0 curve", np.all(gap >= 0.0), f"min gap {gap.min():.3e}")


def test_criterion_3_photon_number(fig3_run, acceptance):
    n0 = opa_photon_number(0.5, 1.0)
    n = fig3_run.stats.photon_number
    rel = abs(n - n0) / n0
    acceptance.check(3, "photon number", rel <= 0.10, f"<a^dag a>={n:.5f} vs n0={n0:.5f}, rel {rel:.3f}")


def test_criterion_3_variance(fig3_run, acceptance):
    v0 = opa_quadrature_variance(0.5, 1.0)
    v = fig3_run.stats.quadrature_variance
    rel = abs(v - v0) / v0
    acceptance.check(3, "variance", rel <= 0.05, f"var={v:.5f} vs 2/3, rel {rel:.4f}")


def test_criterion_3_variance_independent_of_split(fig3_run, acceptance):
    # kappa = gamma' = kappa'/2 against gamma' = 0, kappa = kappa'
    p = SystemParams(n_max=15, **dict(FIG3, kappa=0.5, gamma=GAMMA_HALF))
    L = build_liouvillian(p)
    v_split = steady_stats(L, steady_state(L)).quadrature_variance
    v_ref = fig3_run.stats.quadrature_variance
    rel = abs(v_split - v_ref) / v_ref
    acceptance.check(3, "split variance", rel <= 0.02, f"{v_split:.5f} vs {v_ref:.5f}, rel {rel:.4f}")


def test_criterion_4_langevin_oracle(acceptance):
    rng = np.random.default_rng(4)
    omega = np.linspace(-5, 5, 201)
    worst = 0.0
    for _ in range(20):
        kappa = rng.uniform(0.1, 3.0)
        gp = rng.uniform(0.0, 2.0)
        alpha = rng.uniform(0.0, 0.98) * (kappa + gp)
        theta = rng.uniform(-30, 30)
        model = LinearLangevinModel(alpha, theta, theta, kappa, gp)
        s_lang = langevin_output_spectrum(model, omega_grid=omega).s
        s_closed = analytic_spectrum(alpha, kappa, kappa + gp, omega).s
        worst = max(worst, float(np.max(np.abs(s_lang - s_closed))))
    acceptance.check(4, "20 random draws", worst <= 1e-8, f"max deviation {worst:.2e}")


def test_criterion_5_motion_correction(acceptance):
    omega = np.linspace(-5, 5, 201)
    for kq in (0.1, 0.2, 0.3):
        eps = kq**2 / 2
        first = motion_spectrum(0.5, 1.0, 1.0, kq, omega).s
        exact = analytic_spectrum(0.5 * (1 - eps), 1.0, 1.0, omega).s
        dev = float(np.max(np.abs(first - exact)))
        acceptance.check(5, f"k_qbar={kq}", dev <= 3 * eps**2, f"max dev {dev:.2e} <= {3 * eps**2:.2e}")
    s0 = motion_spectrum(0.5, 1.0, 1.0, 0.3, [0.0]).s[0]
    # closed form at w=0: 1 - (8/9)(1 - 0.75 * 0.045 / 2.25) = 1.12/9
    acceptance.check(5, "S(0) at k_qbar=0.3", abs(s0 - 1.12 / 9) <= 1e-6 and round(s0, 4) == 0.1244,
                     f"S(0)={s0:.7f}")


def test_criterion_6_coefficient_identities(acceptance):
    rng = np.random.default_rng(6)
    node_ok = True
    for _ in range(100):
        p = SystemParams(delta=-rng.uniform(1e4, 1e6), delta_c=0.0, g=rng.uniform(10, 1e4),
                         omega=rng.uniform(10, 1e4), gamma=0.0, kappa=1.0,
                         kx1=rng.uniform(0, 2 * math.pi),
                         kx2=math.pi / 2 + math.pi * int(rng.integers(-5, 6)), n_max=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            e = effective_coefficients(p)
        node_ok &= e.alpha_bar == 0.0 and e.chi_bar == 0.0
    acceptance.check(6, "node geometries", node_ok, "alpha_bar = chi_bar = 0 for 100 draws")
    worst = 0.0
    for _ in range(50):
        p = SystemParams(delta=rng.choice([-1, 1]) * rng.uniform(1e4, 1e6), delta_c=0.0,
                         g=rng.uniform(10, 1e3), omega=rng.uniform(10, 1e3), gamma=0.0,
                         kappa=1.0, n_max=1)
        e = effective_coefficients(p)
        worst = max(worst, abs(e.alpha_bar - half_lambda_alpha(p)) / abs(half_lambda_alpha(p)))
    acceptance.check(6, "lambda/2 alpha", worst <= 4 * np.finfo(float).eps, f"max rel dev {worst:.1e}")
    e3 = effective_coefficients(SystemParams(n_max=1, **FIG3))
    e4 = effective_coefficients(SystemParams(n_max=1, **dict(FIG3, kappa=100.0, g=1.25e4,
                                                              delta_c=-2400.0)))
    ratio3 = abs(e3.chi_bar / e3.alpha_bar)
    acceptance.check(6, "regimes", e3.regime == "opa" and e4.regime == "mixed"
                     and math.isclose(ratio3, (1.25e3 / 1.25e4) ** 2, rel_tol=1e-12),
                     f"fig3 {e3.regime} (|chi/alpha|={ratio3:.4g}), fig4 {e4.regime}")


def test_criterion_7_lambda_pattern(acceptance):
    # weak drive keeps the coherent field at ~2 photons; a small gamma removes
    # the dark antisymmetric Dicke state, which would make the steady state degenerate
    p = SystemParams(n_max=15, **dict(FIG3, omega=100.0, gamma=100.0, kx2=2 * math.pi))
    L = build_liouvillian(p)
    rho = steady_state(L)
    st = steady_stats(L, rho)
    acceptance.check(7, "excited population", st.excited_population <= 1e-3,
                     f"{st.excited_population:.2e}")
    fid, beta = coherent_fidelity(reduced_field_state(rho))
    acceptance.check(7, "coherent fidelity", fid >= 0.99, f"F={fid:.6f} at |beta|^2={abs(beta)**2:.3f}")


def test_criterion_8_structural_invariants(fig3_run, acceptance):
    L, rho, st = fig3_run.L, fig3_run.rho, fig3_run.stats
    rng = np.random.default_rng(8)
    d = L.space.dim
    worst_tr = worst_h = 0.0
    for _ in range(20):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        r = x @ x.conj().T
        r /= np.trace(r)
        out = L.apply(r)
        worst_tr = max(worst_tr, abs(np.trace(out)))
        worst_h = max(worst_h, np.max(np.abs(out - out.conj().T)))
    acceptance.check(8, "trace preservation", worst_tr <= 1e-10 * L.norm_inf(), f"{worst_tr:.1e}")
    acceptance.check(8, "hermiticity preservation", worst_h <= 1e-10 * L.norm_inf(), f"{worst_h:.1e}")
    acceptance.check(8, "steady residual", st.residual <= 1e-10, f"{st.residual:.1e} (relative)")
    acceptance.check(8, "truncation tail", st.top_sector_population <= 1e-6,
                     f"{st.top_sector_population:.2e}")
    acceptance.check(8, "S real", fig3_run.spectrum.imag_residue <= 1e-8,
                     f"imag residue {fig3_run.spectrum.imag_residue:.1e}")
    far = output_squeezing_spectrum(L, rho, 1.0, omega_grid=[-50.0, 50.0])
    dev = float(np.max(np.abs(far.s - 1)))
    acceptance.check(8, "S(50)->1", dev <= 0.02, f"|S(+-50) - 1| = {dev:.1e}")


def test_criterion_9_noise_normalization(acceptance):
    for T in (0.01, 0.1, 1.0):
        for kp in (0.7, 1.0, 2.5):
            f = lambda t: averaged_noise_correlation(t, 0.3, T, kp)  # noqa: E731
            # analytic area of the triangle: height 2 kp / T times half-base T
            area_exact = 0.5 * (2 * T) * (2 * kp / T)
            # the correlation is linear on each of these pieces and zero outside
            edges = (0.3 - 2 * T, 0.3 - T, 0.3, 0.3 + T, 0.3 + 2 * T)
            val = sum(quad(f, lo, hi)[0] for lo, hi in zip(edges[:-1], edges[1:]))
            ok = math.isclose(area_exact, 2 * kp, rel_tol=1e-15) and abs(val - 2 * kp) <= 1e-10
            acceptance.check(9, f"T={T}, kappa'={kp}", ok, f"numeric {val:.12f}")
