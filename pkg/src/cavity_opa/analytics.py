"""Closed-form results of the dispersive (large-detuning) theory.

Effective cavity Hamiltonian, to fourth order in g/|Delta| and Omega/|Delta|:

    H_eff = (theta - delta_c) a^dag a + beta (a + a^dag)
            + chi a^dag a^dag a a + (alpha / 2)(a^2 + a^dag^2)

plus the below-threshold statistics and output spectra of the resulting
degenerate parametric amplifier, with and without the first-order
correction from atomic vibration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .engine import DEFAULT_PHASE, SpectrumSeries, default_omega_grid
from .errors import Unstable
from .model import SystemParams, coupling_constants, mode_cosine

DOMINANCE_RATIO = 10.0
PASS_RATIO = 10.0
MARGINAL_RATIO = 3.0
VANISHING = 1e-12

REGIMES = ("linear", "kerr", "opa", "mixed")


@dataclass(frozen=True)
class EffectiveCoefficients:
    theta_bar: float
    beta_bar: float
    chi_bar: float
    alpha_bar: float
    gamma_prime: float
    kappa: float
    regime: str

    @property
    def kappa_prime(self) -> float:
        return self.kappa + self.gamma_prime

    @property
    def stable(self) -> bool:
        return abs(self.alpha_bar) < self.kappa_prime


@dataclass(frozen=True)
class MotionParams:
    """Classical vibration of both atoms with equal amplitude.

    nu     : trap frequency (units of kappa_0)
    k_qbar : k times the oscillation amplitude
    phi1/2 : oscillation phases
    """

    nu: float
    k_qbar: float
    phi1: float = 0.0
    phi2: float = math.pi / 7

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"trap frequency must be > 0, got {self.nu}")
        if not 0 <= self.k_qbar < 1:
            raise ValueError(f"k_qbar must lie in [0, 1), got {self.k_qbar}")


def classify_regime(beta: float, chi: float, alpha: float, ratio: float = DOMINANCE_RATIO) -> str:
    b, c, a = abs(beta), abs(chi), abs(alpha)
    if b > 0:
        return "linear" if b >= ratio * max(c, a) else "mixed"
    if c == 0 and a == 0:
        return "linear"
    if c >= ratio * a:
        return "kerr"
    if a >= ratio * c:
        return "opa"
    return "mixed"


def gamma_prime(p: SystemParams, prefactor: float = 1.0) -> float:
    """Cavity damping induced by spontaneous emission, prefactor * gamma g^2 / Delta^2."""
    if p.delta == 0:
        raise ValueError("gamma' is undefined at zero atom-laser detuning")
    return prefactor * p.gamma * p.g**2 / p.delta**2


def effective_coefficients(
    p: SystemParams,
    *,
    gamma_prime_override: float | None = None,
    prefactor: float = 1.0,
) -> EffectiveCoefficients:
    if p.delta == 0:
        raise ValueError("effective coefficients require a nonzero detuning Delta")
    if abs(p.delta) < DOMINANCE_RATIO * max(p.g, p.omega):
        warnings.warn(
            f"|Delta| = {abs(p.delta):g} is not much larger than g = {p.g:g}, "
            f"Omega = {p.omega:g}; the fourth-order expansion may be inaccurate",
            stacklevel=2,
        )
    gp, gm = coupling_constants(p.kx1, p.kx2, p.g)
    if abs(gp) <= VANISHING * max(p.g, 1.0):
        gp = 0.0
    c1, c2 = mode_cosine(p.kx1), mode_cosine(p.kx2)
    d = p.delta
    # g+^2 - g-^2 = 2 g^2 c1 c2, exactly zero with one atom at a node
    diff = 2 * p.g**2 * c1 * c2
    theta = (gp**2 + gm**2) / d
    beta = math.sqrt(2) * p.omega * gp / d + 0.0
    chi = diff**2 / d**3
    alpha = 2 * p.omega**2 * diff / d**3
    if gamma_prime_override is None:
        gprime = gamma_prime(p, prefactor)
    else:
        gprime = float(gamma_prime_override)
    return EffectiveCoefficients(
        theta_bar=theta,
        beta_bar=beta,
        chi_bar=chi,
        alpha_bar=alpha,
        gamma_prime=gprime,
        kappa=p.kappa,
        regime=classify_regime(beta, chi, alpha),
    )


def half_lambda_alpha(p: SystemParams) -> float:
    """Parametric strength at the lambda/2 pattern, -4 Omega^2 g^2 / Delta^3."""
    return -4 * p.omega**2 * p.g**2 / p.delta**3


def _check_below_threshold(alpha, kappa_prime):
    if not abs(alpha) < kappa_prime:
        raise Unstable(
            f"no steady state: |alpha| = {abs(alpha):g} >= kappa' = {kappa_prime:g} "
            "(cavity energy grows exponentially)"
        )


def opa_photon_number(alpha: float, kappa_prime: float) -> float:
    _check_below_threshold(alpha, kappa_prime)
    return alpha**2 / (2 * (kappa_prime**2 - alpha**2))


def opa_quadrature_variance(alpha: float, kappa_prime: float) -> float:
    """Stationary variance of the pi/4 quadrature; vacuum level is 1."""
    _check_below_threshold(alpha, kappa_prime)
    return kappa_prime / (kappa_prime + alpha)


def _grid(omega_grid):
    return default_omega_grid() if omega_grid is None else np.asarray(omega_grid, float)


def analytic_spectrum(alpha, kappa, kappa_prime, omega_grid=None, *, label="") -> SpectrumSeries:
    """S(w) = 1 - 4 kappa alpha / ((kappa' + alpha)^2 + w^2)."""
    if kappa_prime < kappa:
        raise ValueError(f"kappa' = {kappa_prime} must be >= kappa = {kappa}")
    _check_below_threshold(alpha, kappa_prime)
    w = _grid(omega_grid)
    s = 1 - 4 * kappa * alpha / ((kappa_prime + alpha) ** 2 + w**2)
    return SpectrumSeries(DEFAULT_PHASE, w, s, "analytic_opa", label)


def motion_scaled(value: float, k_qbar: float) -> float:
    """Period-averaged coefficient value * (1 - k^2 qbar^2 / 2)."""
    return value * (1 - k_qbar**2 / 2)


def motion_spectrum(alpha, kappa, kappa_prime, k_qbar, omega_grid=None, *, label="") -> SpectrumSeries:
    """Squeezing spectrum to first order in k^2 qbar^2 for vibrating atoms."""
    if not 0 <= k_qbar < 1:
        raise ValueError(f"k_qbar must lie in [0, 1), got {k_qbar}")
    if kappa_prime < kappa:
        raise ValueError(f"kappa' = {kappa_prime} must be >= kappa = {kappa}")
    _check_below_threshold(alpha, kappa_prime)
    w = _grid(omega_grid)
    D = (kappa_prime + alpha) ** 2 + w**2
    eps = k_qbar**2 / 2
    s = 1 - (4 * kappa * alpha / D) * (1 + (alpha**2 - kappa_prime**2 - w**2) / D * eps)
    return SpectrumSeries(DEFAULT_PHASE, w, s, "analytic_motion", label)


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    condition: str
    lhs: float
    rhs: float
    ratio: float
    flag: str


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple
    notes: tuple = ()

    def __getitem__(self, name) -> ValidityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def flags(self) -> dict:
        return {c.name: c.flag for c in self.checks}

    @property
    def worst(self) -> str:
        order = {"pass": 0, "marginal": 1, "fail": 2}
        return max((c.flag for c in self.checks), key=order.get, default="pass")


def _grade(ratio):
    if ratio >= PASS_RATIO:
        return "pass"
    if ratio >= MARGINAL_RATIO:
        return "marginal"
    return "fail"


def _check(name, condition, big, small, strict=False):
    # condition reads "big >> small" (or "big > small" when strict)
    ratio = math.inf if small == 0 else big / small
    if strict:
        flag = "pass" if ratio > 1 else "fail"
    else:
        flag = _grade(ratio)
    return ValidityCheck(name, condition, big, small, ratio, flag)


def validity_report(
    p: SystemParams,
    m: MotionParams | None = None,
    *,
    gamma_prime_override: float | None = None,
    prefactor: float = 1.0,
) -> ValidityReport:
    """Grade each premise of the effective model by its margin.

    Ratios >= 10 pass, >= 3 are marginal, anything smaller fails; strict
    inequalities (the stability condition) pass whenever the ratio exceeds 1.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eff = effective_coefficients(
            p, gamma_prime_override=gamma_prime_override, prefactor=prefactor
        )
    ad = abs(p.delta)
    disp = p.g**2 / ad
    checks = [
        _check("large_detuning", "|Delta| >> g, Omega, |delta_c|, gamma, kappa", ad,
               max(p.g, p.omega, abs(p.delta_c), p.gamma, p.kappa)),
        _check("dispersive_vs_kappa", "g^2/|Delta| > kappa", disp, p.kappa),
        _check("dispersive_vs_gamma", "g^2/|Delta| > gamma", disp, p.gamma),
        _check("spontaneous_emission", "gamma <~ Omega^2/|Delta|", p.omega**2 / ad, p.gamma),
        _check("below_threshold", "kappa' > |alpha|", eff.kappa_prime, abs(eff.alpha_bar),
               strict=True),
    ]
    if eff.beta_bar == 0:
        checks.append(_check("opa_dominance", "|alpha| >> |chi|", abs(eff.alpha_bar),
                             abs(eff.chi_bar)))
    if m is not None:
        kq2 = m.k_qbar**2
        checks += [
            _check("secular_rates", "nu >> |alpha|, kappa'", m.nu,
                   max(abs(eff.alpha_bar), eff.kappa_prime)),
            _check("secular_stark", "nu >> g^2/|Delta|", m.nu, disp),
            _check("secular_drift", "nu >> (k^2 q^2/8)|g^2 Delta/Omega^2|", m.nu,
                   kq2 / 8 * abs(p.g**2 * p.delta / p.omega**2) if p.omega else math.inf),
            _check("secular_drive", "nu >> (k^2 q^2/16)|g Delta/Omega|", m.nu,
                   kq2 / 16 * abs(p.g * p.delta / p.omega) if p.omega else math.inf),
        ]
    formula = gamma_prime(p, 1.0)
    notes = [f"gamma' from gamma g^2/Delta^2 = {formula:g}; used gamma' = {eff.gamma_prime:g}"]
    if p.gamma > 0 and not math.isclose(eff.gamma_prime, formula, rel_tol=1e-9):
        notes.append(
            f"gamma' differs from the prefactor-1 formula by a factor "
            f"{eff.gamma_prime / formula:g}"
        )
    return ValidityReport(tuple(checks), tuple(notes))
