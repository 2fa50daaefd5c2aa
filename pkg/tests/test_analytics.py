import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cavity_opa.analytics import (
    MotionParams,
    analytic_spectrum,
    classify_regime,
    effective_coefficients,
    gamma_prime,
    half_lambda_alpha,
    motion_scaled,
    motion_spectrum,
    opa_photon_number,
    opa_quadrature_variance,
    validity_report,
)
from cavity_opa.errors import Unstable
from cavity_opa.model import SystemParams

from conftest import FIG3, GAMMA_HALF

FIG4 = dict(FIG3, kappa=100.0, g=1.25e4, delta_c=-2400.0)


def _params(**changes):
    return SystemParams(n_max=1, **dict(FIG3, **changes))


def _moment_oracle(alpha, kappa_prime):
    """Steady (n, m) = (<a^dag a>, <a a>) of H = alpha/2 (a^2 + a^dag^2) with loss 2 kappa'.

    dn/dt = -2k n - i alpha (m* - m),  dm/dt = -2k m - i alpha (2n + 1),
    solved as a real linear system in (n, Re m, Im m).
    """
    k, a = kappa_prime, alpha
    # m = x + i y:  m* - m = -2 i y
    A = np.array([[-2 * k, 0.0, -2 * a], [0.0, -2 * k, 0.0], [-2 * a, 0.0, -2 * k]])
    b = np.array([0.0, 0.0, a])
    n, x, y = np.linalg.solve(A, b)
    m = x + 1j * y
    # X at phase pi/4: <X^2> = -i m + i m* + 2n + 1, <X> = 0
    var = (-1j * m + 1j * np.conj(m)).real + 2 * n + 1
    return n, var


def test_fig3_coefficients():
    e = effective_coefficients(_params())
    assert e.alpha_bar == pytest.approx(0.5, rel=1e-14)
    assert e.chi_bar == pytest.approx(-0.005, rel=1e-14)
    assert e.theta_bar == pytest.approx(-25.0, rel=1e-14)
    assert e.beta_bar == 0.0 and math.copysign(1, e.beta_bar) == 1
    assert e.regime == "opa"
    assert e.stable


def test_fig4_is_mixed():
    e = effective_coefficients(SystemParams(n_max=1, **FIG4))
    assert abs(e.alpha_bar) == pytest.approx(50.0, rel=1e-14)
    assert abs(e.chi_bar) == pytest.approx(50.0, rel=1e-14)
    assert e.regime == "mixed"


def test_lambda_pattern_is_linear():
    # both atoms in phase: the coherent drive dominates the nonlinear terms
    e = effective_coefficients(_params(kx2=2 * math.pi))
    assert e.beta_bar == pytest.approx(-250.0, rel=1e-14)
    assert e.alpha_bar == pytest.approx(-0.5, rel=1e-14)
    assert e.regime == "linear"


def test_gamma_prime_examples():
    assert gamma_prime(_params(gamma=GAMMA_HALF)) == pytest.approx(0.5, rel=1e-14)
    assert gamma_prime(_params(gamma=GAMMA_HALF), prefactor=2.0) == pytest.approx(1.0, rel=1e-14)
    e = effective_coefficients(_params(gamma=GAMMA_HALF), gamma_prime_override=0.25)
    assert e.gamma_prime == 0.25 and e.kappa_prime == 1.25


def test_zero_detuning_rejected():
    with pytest.raises(ValueError):
        effective_coefficients(_params(delta=0.0))
    with pytest.raises(ValueError):
        gamma_prime(_params(delta=0.0))


def test_small_detuning_warns():
    with pytest.warns(UserWarning):
        effective_coefficients(_params(delta=-2e4))


@pytest.mark.parametrize(
    "args, regime",
    [((1.0, 0.0, 0.0), "linear"), ((0.0, 0.0, 0.0), "linear"), ((0.0, 1.0, 0.05), "kerr"),
     ((0.0, 0.01, 0.5), "opa"), ((0.0, 1.0, 1.0), "mixed"), ((1.0, 1.0, 0.0), "mixed")],
)
def test_classify_regime(args, regime):
    assert classify_regime(*args) == regime


@given(
    delta=st.floats(1e4, 1e6).flatmap(lambda d: st.sampled_from([-d, d])),
    g=st.floats(10, 1e3),
    omega=st.floats(10, 1e3),
)
@settings(max_examples=50, deadline=None)
def test_half_lambda_identity(delta, g, omega):
    e = effective_coefficients(_params(delta=delta, g=g, omega=omega))
    ref = half_lambda_alpha(_params(delta=delta, g=g, omega=omega))
    assert e.alpha_bar == pytest.approx(ref, rel=1e-13)


@given(kx1=st.floats(0, 2 * math.pi), kx2=st.floats(0, 2 * math.pi))
@settings(max_examples=50, deadline=None)
def test_coefficients_symmetric_under_atom_swap(kx1, kx2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = effective_coefficients(_params(kx1=kx1, kx2=kx2))
        b = effective_coefficients(_params(kx1=kx2, kx2=kx1))
    for name in ("theta_bar", "beta_bar", "chi_bar", "alpha_bar"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-12, abs=1e-15)


@given(alpha=st.floats(-0.95, 0.95), kappa_prime=st.floats(0.2, 5.0))
@settings(max_examples=60, deadline=None)
def test_opa_moments_against_moment_equations(alpha, kappa_prime):
    alpha *= kappa_prime
    n, var = _moment_oracle(alpha, kappa_prime)
    assert opa_photon_number(alpha, kappa_prime) == pytest.approx(n, rel=1e-10, abs=1e-14)
    assert opa_quadrature_variance(alpha, kappa_prime) == pytest.approx(var, rel=1e-10)


def test_fig3_moments():
    assert opa_photon_number(0.5, 1.0) == pytest.approx(1 / 6, rel=1e-14)
    assert opa_quadrature_variance(0.5, 1.0) == pytest.approx(2 / 3, rel=1e-14)


@pytest.mark.parametrize("fn", [opa_photon_number, opa_quadrature_variance])
def test_threshold_raises(fn):
    with pytest.raises(Unstable):
        fn(1.0, 1.0)
    with pytest.raises(Unstable):
        fn(-1.2, 1.0)


def test_spectrum_examples():
    s = analytic_spectrum(0.5, 1.0, 1.0, [0.0, 1.5])
    assert s.s[0] == pytest.approx(1 / 9, rel=1e-14)
    assert s.s[1] == pytest.approx(1 - 2 / (2.25 + 2.25), rel=1e-14)
    assert s.provenance == "analytic_opa"
    half = analytic_spectrum(0.5, 1.0, 1.5, [0.0])
    assert half.s[0] == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(ValueError):
        analytic_spectrum(0.1, 1.0, 0.5, [0.0])
    with pytest.raises(Unstable):
        analytic_spectrum(1.0, 1.0, 1.0, [0.0])


def test_threshold_limit_is_perfect_squeezing():
    vals = [analytic_spectrum(1 - eps, 1.0, 1.0, [0.0]).s[0] for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == pytest.approx(0.0, abs=1e-6)


@given(
    alpha=st.floats(0.0, 0.99),
    kappa=st.floats(0.1, 3.0),
    extra=st.floats(0.0, 2.0),
    w=st.floats(0.0, 20.0),
    dw=st.floats(1e-3, 5.0),
)
@settings(max_examples=80, deadline=None)
def test_spectrum_bounded_and_monotone(alpha, kappa, extra, w, dw):
    kp = kappa + extra
    alpha *= kp
    s = analytic_spectrum(alpha, kappa, kp, [w, w + dw]).s
    assert 0.0 <= s[0] <= 1.0
    assert s[1] >= s[0]
    assert analytic_spectrum(alpha, kappa, kp, [-w - dw]).s[0] == s[1]


@given(a1=st.floats(0.0, 0.98), a2=st.floats(0.0, 0.98))
@settings(max_examples=50, deadline=None)
def test_squeezing_grows_with_gain(a1, a2):
    assume(abs(a1 - a2) > 1e-6)
    lo, hi = sorted((a1, a2))
    s_lo = analytic_spectrum(lo, 1.0, 1.0, [0.0]).s[0]
    s_hi = analytic_spectrum(hi, 1.0, 1.0, [0.0]).s[0]
    assert s_hi < s_lo


def test_motion_scaling():
    assert motion_scaled(0.5, 0.3) == pytest.approx(0.4775, rel=1e-14)
    assert motion_scaled(0.5, 0.0) == 0.5


def test_motion_spectrum_reduces_to_static():
    w = np.linspace(-5, 5, 41)
    a = motion_spectrum(0.5, 1.0, 1.0, 0.0, w)
    b = analytic_spectrum(0.5, 1.0, 1.0, w)
    assert np.array_equal(a.s, b.s)
    assert a.provenance == "analytic_motion"


def test_motion_reduces_squeezing():
    w = np.linspace(-5, 5, 41)
    a = motion_spectrum(0.5, 1.0, 1.0, 0.3, w)
    b = analytic_spectrum(0.5, 1.0, 1.0, w)
    assert np.all(a.s >= b.s)
    with pytest.raises(ValueError):
        motion_spectrum(0.5, 1.0, 1.0, 1.2, w)


def test_motion_params_validation():
    with pytest.raises(ValueError):
        MotionParams(0.0, 0.1)
    with pytest.raises(ValueError):
        MotionParams(10.0, -0.1)


def test_validity_fig3_static():
    rep = validity_report(_params())
    assert rep["large_detuning"].flag == "pass"
    assert rep["below_threshold"].flag == "pass"
    assert rep["opa_dominance"].ratio == pytest.approx(100.0)
    with pytest.raises(KeyError):
        rep["secular_rates"]


def test_validity_slow_trap():
    rep = validity_report(_params(), MotionParams(50.0, 0.3))
    assert rep["secular_stark"].ratio == pytest.approx(4.0, rel=1e-12)
    assert rep["secular_stark"].flag == "marginal"
    assert rep["secular_drift"].ratio == pytest.approx(50 / (0.09 / 8 * 1250), rel=1e-12)
    assert rep["secular_drift"].flag == "marginal"
    assert rep["secular_drive"].ratio == pytest.approx(50 / (0.09 / 16 * 12500), rel=1e-12)
    assert rep["secular_drive"].flag == "fail"
    assert rep.worst == "fail"


def test_validity_fast_trap_passes_secular_checks():
    rep = validity_report(_params(), MotionParams(1250.0, 0.3))
    assert all(rep[n].flag == "pass" for n in
               ("secular_rates", "secular_stark", "secular_drift", "secular_drive"))


def test_validity_threshold_is_strict():
    rep = validity_report(_params(kappa=0.5))
    assert rep["below_threshold"].flag == "fail"
    rep = validity_report(_params(kappa=0.6))
    assert rep["below_threshold"].flag == "pass"


def test_validity_notes_prefactor():
    rep = validity_report(_params(gamma=GAMMA_HALF), prefactor=2.0)
    assert any("factor 2" in n for n in rep.notes)
    rep = validity_report(_params(gamma=GAMMA_HALF))
    assert len(rep.notes) == 1
