"""Linear Heisenberg-Langevin model of the cavity field with vibrating atoms.

The field moments A = (a, a^dag) obey dA/dt = M A + N(t), plus a correction
periodic at twice the trap frequency when the atoms oscillate around the
antinodes.  Averaging over one trap period gives a secular model with
rescaled parametric gain and Stark shift.  The same linear model provides a
frequency-domain output spectrum that serves as an independent route to the
closed-form squeezing spectra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .analytics import EffectiveCoefficients, MotionParams, validity_report
from .engine import DEFAULT_PHASE, SpectrumSeries, default_omega_grid
from .errors import Unstable
from .model import PatternGeometry, SystemParams


def _drift(alpha, theta, delta_c, kappa_prime):
    det = theta - delta_c
    return np.array(
        [
            [-kappa_prime - 1j * det, -1j * alpha],
            [1j * alpha, -kappa_prime + 1j * det],
        ]
    )


@dataclass(frozen=True)
class LinearLangevinModel:
    """Drift of the (a, a^dag) first moments plus the rates feeding vacuum noise.

    The detected channel is the cavity mirror, rate kappa; spontaneous
    emission adds a second vacuum input at rate gamma_prime.
    """

    alpha: float
    theta: float
    delta_c: float
    kappa: float
    gamma_prime: float = 0.0

    def __post_init__(self):
        if self.kappa < 0 or self.gamma_prime < 0:
            raise ValueError("damping rates must be >= 0")

    @property
    def kappa_prime(self) -> float:
        return self.kappa + self.gamma_prime

    @property
    def detection_rate(self) -> float:
        return self.kappa

    @property
    def drift(self) -> np.ndarray:
        return _drift(self.alpha, self.theta, self.delta_c, self.kappa_prime)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    @property
    def stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))


@dataclass(frozen=True)
class PeriodicCorrection:
    """Terms driven by the atomic oscillation, cos^2(nu t + phi_j) (V A +/- B)."""

    V: np.ndarray
    B: np.ndarray
    nu: float
    k_qbar: float
    phi1: float = 0.0
    phi2: float = math.pi / 7

    @classmethod
    def from_model(cls, model: LinearLangevinModel, beta: float, m: MotionParams):
        th, al = model.theta, model.alpha
        V = 0.5j * np.array([[th, al], [-al, -th]])
        B = np.array([-1j * beta, 1j * beta])
        return cls(V, B, m.nu, m.k_qbar, m.phi1, m.phi2)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.nu

    def modulation(self, t) -> tuple[float, float]:
        kq2 = self.k_qbar**2
        return (kq2 * math.cos(self.nu * t + self.phi1) ** 2,
                kq2 * math.cos(self.nu * t + self.phi2) ** 2)


def build_drift(
    p: SystemParams, effective: EffectiveCoefficients, *, compensate: bool = False
) -> LinearLangevinModel:
    """Langevin model at the lambda/2 pattern, Stark shift theta = 2 g^2 / Delta.

    ``compensate`` tunes the cavity detuning onto theta instead of using
    ``p.delta_c``, i.e. assumes every Stark shift is cancelled.
    """
    if PatternGeometry.classify(p.kx1, p.kx2).label != "half_lambda":
        raise ValueError("the linear parametric model requires the lambda/2 pattern")
    theta = 2 * p.g**2 / p.delta
    return LinearLangevinModel(
        alpha=effective.alpha_bar,
        theta=theta,
        delta_c=theta if compensate else p.delta_c,
        kappa=p.kappa,
        gamma_prime=effective.gamma_prime,
    )


def drive_amplitude(p: SystemParams) -> float:
    """beta = g Omega / Delta, the single-atom scattering amplitude."""
    return p.g * p.omega / p.delta


def secular_average(
    model: LinearLangevinModel,
    corr: PeriodicCorrection,
    *,
    compensate: bool = True,
    params: SystemParams | None = None,
) -> LinearLangevinModel:
    """Average the periodic terms over one trap period.

    Equal oscillation amplitudes make the B terms cancel; V adds
    k^2 qbar^2 V, which rescales alpha and theta by (1 - k^2 qbar^2 / 2).
    With ``compensate`` the cavity detuning is retuned to the shifted theta.
    """
    if params is not None:
        m = MotionParams(corr.nu, corr.k_qbar, corr.phi1, corr.phi2)
        rep = validity_report(params, m, gamma_prime_override=model.gamma_prime)
        weak = [c.name for c in rep.checks if c.name.startswith("secular") and c.flag != "pass"]
        if weak:
            warnings.warn(f"secular averaging premises not well satisfied: {weak}", stacklevel=2)
    if corr.k_qbar == 0:
        return model
    s = 1 - corr.k_qbar**2 / 2
    theta = model.theta * s
    delta_c = theta if compensate else model.delta_c
    return replace(model, alpha=model.alpha * s, theta=theta, delta_c=delta_c)


def langevin_output_spectrum(
    model: LinearLangevinModel,
    phase: float = DEFAULT_PHASE,
    omega_grid=None,
    *,
    label: str = "",
) -> SpectrumSeries:
    """Output quadrature spectrum of the linear model driven by vacuum noise.

    In frequency domain A(w) = -(M + i w)^-1 N(w) with N fed by the mirror
    input (rate 2 kappa) and the atomic input (rate 2 gamma'); the output is
    a_out = sqrt(2 kappa) a - a_in.  For vacuum inputs only <b(w) b^dag(w')>
    survives, so S(w) = h(w) C h(-w)^T with h the transfer row of the
    quadrature and C the input correlation pattern.
    """
    if not model.stable:
        raise Unstable(f"drift is not Hurwitz, eigenvalues {model.eigenvalues}")
    w = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, float)
    rk, rg = math.sqrt(2 * model.kappa), math.sqrt(2 * model.gamma_prime)
    # inputs ordered (a_in, a_in^dag, b_in, b_in^dag)
    feed = np.array([[rk, 0, rg, 0], [0, rk, 0, rg]], dtype=complex)
    direct = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex)
    corr = np.zeros((4, 4))
    corr[0, 1] = corr[2, 3] = 1.0
    v = np.array([np.exp(-1j * phase), np.exp(1j * phase)])
    M = model.drift
    eye = np.eye(2)

    def transfer(x):
        T = -np.linalg.solve(M + 1j * x * eye, feed)
        return v @ (rk * T - direct)

    s = np.array([transfer(x) @ corr @ transfer(-x) for x in w])
    if np.max(np.abs(s.imag)) > 1e-8:
        raise ArithmeticError(f"spectrum has imaginary part {np.max(np.abs(s.imag)):.3g}")
    return SpectrumSeries(phase, w, s.real, "langevin_oracle", label,
                          imag_residue=float(np.max(np.abs(s.imag))))


def averaged_noise_correlation(t: float, t_prime: float, T: float, kappa_prime: float) -> float:
    """Correlation of period-averaged white noise: a triangle of width 2T and area 2 kappa'."""
    if not T > 0:
        raise ValueError(f"averaging window must be > 0, got {T}")
    overlap = T - abs(t - t_prime)
    if overlap <= 0:
        return 0.0
    return 2 * kappa_prime / T**2 * overlap


@dataclass(frozen=True)
class DroppedTermReport:
    """Sizes of the neglected averaging terms relative to |alpha|/2."""

    c_damping: float
    c_detuning: float
    d_second_order: float
    e_drive: float
    e_drive_worst: float

    @property
    def max_ratio(self) -> float:
        return max(self.c_damping, self.c_detuning, self.d_second_order, self.e_drive_worst)


def dropped_term_report(model: LinearLangevinModel, corr: PeriodicCorrection, beta: float) -> DroppedTermReport:
    """Magnitudes of the terms discarded by secular averaging.

    Each number compares the relevant term with the retained parametric
    correction, so values well below 1 justify the averaged model.  The
    residual detuning is evaluated at the compensated cavity tuning.
    """
    nu, kq2 = corr.nu, corr.k_qbar**2
    ref = abs(model.alpha) / 2
    if ref == 0:
        raise ValueError("dropped terms are measured against a nonzero alpha")
    theta = model.theta
    residual_det = theta * kq2 / 2
    v_norm = np.linalg.norm(corr.V, 2)
    beta = abs(beta)
    sin_e = abs(math.sin(2 * (corr.phi2 - corr.phi1)))
    return DroppedTermReport(
        c_damping=abs(theta) * model.kappa_prime / (8 * nu) / ref,
        c_detuning=abs(theta * residual_det) / (8 * nu) / ref,
        # the double sum over atoms has four terms, each bounded by 1 + 2
        d_second_order=kq2 * 12 * v_norm**2 / (8 * nu) / ref,
        e_drive=kq2 * abs(theta) * beta * sin_e / (16 * nu) / ref,
        e_drive_worst=kq2 * abs(theta) * beta / (16 * nu) / ref,
    )


def integrate_first_moments(
    model: LinearLangevinModel,
    corr: PeriodicCorrection,
    A0,
    t_end: float,
    steps_per_period: int = 200,
):
    """Noise-free mean (a, a^dag) with the full periodic coefficients, fixed-step RK4.

    Returns (times, A) with A of shape (len(times), 2).
    """
    if steps_per_period < 200:
        raise ValueError("need at least 200 steps per trap period")
    n = max(1, int(math.ceil(t_end / corr.period * steps_per_period)))
    h = t_end / n
    M, V, B = model.drift, corr.V, corr.B

    def f(t, y):
        w1, w2 = corr.modulation(t)
        return M @ y + (w1 + w2) * (V @ y) + (w2 - w1) * B

    y = np.asarray(A0, dtype=complex)
    times = np.linspace(0.0, t_end, n + 1)
    out = np.empty((n + 1, 2), dtype=complex)
    out[0] = y
    for i in range(n):
        t = times[i]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return times, out
