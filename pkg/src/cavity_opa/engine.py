"""Steady states, expectation values and output squeezing spectra from a Liouvillian."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .errors import DegenerateSteadyState, ResolventSingular, Unstable
from .quantum import (
    DensityMatrix,
    Operator,
    Sector,
    SuperOperator,
    build_operator_set,
    coherent_state,
    devectorize,
    partial_trace_atoms,
    photon_distribution,
    quadrature,
    vectorize,
)

PROVENANCES = ("numeric_full", "analytic_opa", "analytic_motion", "langevin_oracle")

STEADY_RESIDUAL_TOL = 1e-10  # relative to ||L||_inf
RCOND_SINGULAR = 1e-14
TRUNCATION_TOL = 1e-6
DEFAULT_PHASE = math.pi / 4


def default_omega_grid(points: int = 201, half_width: float = 5.0) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    """Ordered (omega, S(omega)) samples of one squeezing spectrum."""

    phase: float
    omega: np.ndarray
    s: np.ndarray
    provenance: str
    label: str = ""
    imag_residue: float = 0.0
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        omega = np.asarray(self.omega, dtype=float)
        s = np.asarray(self.s)
        if np.iscomplexobj(s):
            raise TypeError("spectrum values must be real")
        s = s.astype(float)
        if omega.shape != s.shape or omega.ndim != 1:
            raise ValueError("omega and s must be 1-d arrays of equal length")
        if omega.size > 1 and not np.all(np.diff(omega) > 0):
            raise ValueError("omega grid must be strictly increasing")
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(s))):
            raise ValueError("spectrum contains non-finite values")
        omega.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "s", s)

    @property
    def points(self):
        return list(zip(self.omega.tolist(), self.s.tolist()))

    def at(self, omega: float) -> float:
        return float(np.interp(omega, self.omega, self.s))


def _sector_for(L: SuperOperator, vec) -> Sector:
    """Smallest symmetry sector of ``L`` that contains ``vec`` exactly."""
    if L.symmetry is None:
        return Sector.full(L.space.dim)
    for parity in (1, -1):
        sector = Sector.from_symmetry(L.symmetry, parity)
        if sector.leakage(vec) <= 1e-12 * max(1.0, np.linalg.norm(vec)):
            return sector
    return Sector.full(L.space.dim)


def _lu_checked(A, singular_exc, what):
    anorm = np.linalg.norm(A, 1)
    lu, piv = sla.lu_factor(A, overwrite_a=True, check_finite=False)
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not rcond > RCOND_SINGULAR:
        raise singular_exc(f"{what}: reciprocal condition number {rcond:.3e}")
    return lu, piv, rcond


def steady_state(L: SuperOperator, *, use_symmetry: bool = True) -> DensityMatrix:
    """Unique stationary state of ``L``.

    The trace condition replaces one row of L (restricted to the invariant
    parity sector when ``L.symmetry`` is set).  A near-singular augmented
    system means the null space is not one-dimensional.
    """
    d = L.space.dim
    trace_vec = vectorize(np.eye(d))
    if use_symmetry and L.symmetry is not None:
        sector = Sector.from_symmetry(L.symmetry, +1)
    else:
        sector = Sector.full(d)
    A = L.block(sector)
    t = sector.restrict(trace_vec)
    row = int(np.argmax(np.abs(t)))
    A[row, :] = t
    rhs = np.zeros(sector.size, dtype=complex)
    rhs[row] = 1.0
    try:
        lu, piv, _ = _lu_checked(A, DegenerateSteadyState, "steady-state system is rank deficient")
    except DegenerateSteadyState:
        raise DegenerateSteadyState(
            "Liouvillian has more than one stationary state (zero eigenvalue not simple)"
        ) from None
    x = sla.lu_solve((lu, piv), rhs, check_finite=False)
    rho = devectorize(sector.lift(x), d)

    residual = np.max(np.abs(L.apply(rho)))
    scale = L.norm_inf()
    if not residual <= STEADY_RESIDUAL_TOL * scale:
        raise Unstable(
            f"no normalizable stationary state: residual {residual:.3e} "
            f"exceeds {STEADY_RESIDUAL_TOL:g} * ||L|| = {STEADY_RESIDUAL_TOL * scale:.3e}",
            residual=residual,
        )
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    try:
        return DensityMatrix.from_matrix(L.space, rho)
    except ValueError as exc:
        raise Unstable(f"stationary solution is not a valid state: {exc}", residual) from exc


def steady_state_residual(L: SuperOperator, rho) -> float:
    """||L vec(rho)||_inf / ||L||_inf."""
    return float(np.max(np.abs(L.apply(rho))) / L.norm_inf())


def expectation(rho, A) -> complex:
    rm = np.asarray(getattr(rho, "matrix", rho))
    am = np.asarray(getattr(A, "matrix", A))
    if rm.shape != am.shape:
        raise ValueError(f"dimension mismatch: state {rm.shape} vs operator {am.shape}")
    if hasattr(rho, "space") and hasattr(A, "space") and rho.space != A.space:
        raise ValueError("state and operator live on different spaces")
    return complex(np.einsum("ij,ji->", am, rm))


def variance(rho, A) -> float:
    """<A^2> - <A>^2 for Hermitian A."""
    am = np.asarray(getattr(A, "matrix", A))
    mean = expectation(rho, am)
    return float((expectation(rho, am @ am) - mean**2).real)


def photon_number(rho) -> float:
    ops = build_operator_set(rho.space)
    return expectation(rho, ops.number()).real


def quadrature_variance(rho, phase: float = DEFAULT_PHASE) -> float:
    ops = build_operator_set(rho.space)
    return variance(rho, quadrature(phase, ops))


def excited_population(rho) -> float:
    """Sum over atoms of the excited-state population."""
    ops = build_operator_set(rho.space)
    n_exc = ops.sigma_dag(1) @ ops.sigma(1) + ops.sigma_dag(2) @ ops.sigma(2)
    return expectation(rho, n_exc).real


def truncation_tail(rho) -> float:
    """Population of the highest retained photon-number sector."""
    return float(photon_distribution(rho)[-1])


def coherent_fidelity(rho_field) -> tuple[float, complex]:
    """max_beta <beta|rho_field|beta> and the maximizing amplitude.

    ``rho_field`` is a reduced cavity state (use :func:`partial_trace_atoms`).
    """
    m = np.asarray(getattr(rho_field, "matrix", rho_field))
    n_max = m.shape[0] - 1
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)
    b0 = np.trace(a @ m)

    def neg(x):
        psi = coherent_state(n_max, complex(x[0], x[1]))
        return -np.real(psi.conj() @ m @ psi)

    res = minimize(neg, [b0.real, b0.imag], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    return float(-res.fun), complex(res.x[0], res.x[1])


def propagate(L: SuperOperator, rho0, t: float) -> np.ndarray:
    """exp(L t) applied to ``rho0`` via the dense matrix exponential."""
    vec = sla.expm(L.matrix * t) @ vectorize(np.asarray(getattr(rho0, "matrix", rho0)))
    return devectorize(vec, L.space.dim)


def output_squeezing_spectrum(
    L: SuperOperator,
    rho_st,
    kappa: float,
    phase: float = DEFAULT_PHASE,
    omega_grid=None,
    *,
    workers: int | None = None,
    use_symmetry: bool = True,
    label: str = "",
) -> SpectrumSeries:
    """Squeezing spectrum of the cavity output quadrature at ``phase``.

    For each omega, solves (L - i omega) y = delta_a rho e^{-i phase} + h.c.
    with delta_a = a - <a>, and returns S = 1 - 4 kappa Re Tr[dX y].  The
    output field is a_out = sqrt(2 kappa) a - a_in.
    Mean subtraction removes the coherent delta(omega) part; the stationary
    mode is deflated by the rank-one term rho 1^T, which leaves solutions
    with zero-trace right-hand sides unchanged and makes omega = 0 regular.
    """
    if omega_grid is None:
        omega_grid = default_omega_grid()
    omega_grid = np.asarray(omega_grid, dtype=float)
    space = L.space
    d = space.dim
    ops = build_operator_set(space)
    rho = np.asarray(getattr(rho_st, "matrix", rho_st))

    a = ops.a.matrix
    da = a - expectation(rho, a) * np.eye(d)
    X = quadrature(phase, ops).matrix
    dX = X - expectation(rho, X).real * np.eye(d)
    src_m = da @ rho * np.exp(-1j * phase)
    src = vectorize(src_m + src_m.conj().T)

    sector = _sector_for(L, src) if use_symmetry else Sector.full(d)
    block = L.block(sector)
    rho_s = sector.restrict(vectorize(rho))
    t_s = sector.restrict(vectorize(np.eye(d)))
    if np.any(rho_s):
        block -= np.outer(rho_s, t_s)
    src_s = sector.restrict(src)
    # Tr[dX Y] = vec(dX^T) . vec(Y) and Tr[dX Y^dag] = conj(Tr[dX Y]) for Hermitian dX
    obs_s = sector.restrict(vectorize(dX.T))

    def one(w):
        A = block - 1j * w * np.eye(sector.size)
        lu, piv, _ = _lu_checked(A, ResolventSingular, f"L - i*omega singular at omega={w:g}")
        y = sla.lu_solve((lu, piv), src_s, check_finite=False)
        return obs_s @ y

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = np.array(list(pool.map(one, omega_grid)))
    else:
        traces = np.array([one(w) for w in omega_grid])
    s = 1.0 - 4.0 * kappa * traces.real
    imag, pairs = _two_sided_imag_residue(omega_grid, traces, kappa)
    return SpectrumSeries(
        phase, omega_grid, s, "numeric_full", label, imag_residue=imag,
        meta={"sector_size": sector.size, "n_max": space.n_max, "residue_pairs": pairs},
    )


def _two_sided_imag_residue(omega, traces, kappa):
    """Largest |Im| of the two-sided transform 1 - 2 kappa [T(w) + T(-w)].

    The one-sided resolvent trace T(w) is complex; the physical spectrum is
    the sum of the +w and -w contributions, which must be real.  Only grid
    points whose mirror image is also on the grid are checked.
    """
    worst, pairs = 0.0, 0
    scale = max(1.0, float(np.max(np.abs(omega)))) if omega.size else 1.0
    for i, w in enumerate(omega):
        j = int(np.argmin(np.abs(omega + w)))
        if abs(omega[j] + w) <= 1e-12 * scale:
            worst = max(worst, abs(2.0 * kappa * (traces[i] + traces[j]).imag))
            pairs += 1
    return worst, pairs


@dataclass(frozen=True)
class SteadyStats:
    photon_number: float
    quadrature_variance: float
    mean_field: complex
    excited_population: float
    top_sector_population: float
    residual: float
    n_max: int


def steady_stats(L: SuperOperator, rho: DensityMatrix, phase: float = DEFAULT_PHASE) -> SteadyStats:
    ops = build_operator_set(rho.space)
    return SteadyStats(
        photon_number=photon_number(rho),
        quadrature_variance=quadrature_variance(rho, phase),
        mean_field=expectation(rho, ops.a),
        excited_population=excited_population(rho),
        top_sector_population=truncation_tail(rho),
        residual=steady_state_residual(L, rho),
        n_max=rho.space.n_max,
    )


def reduced_field_state(rho) -> np.ndarray:
    return partial_trace_atoms(rho)

