"""Hamiltonian and Liouvillian of two driven two-level atoms in a lossy cavity.

All rates are in units of a reference cavity rate kappa_0 and the
Hamiltonian is stored as H/hbar, so no physical constants appear.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .quantum import (
    HilbertSpace,
    Operator,
    OperatorSet,
    SuperOperator,
    build_operator_set,
)

PATTERN_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters, rates in units of kappa_0.

    delta   : laser-atom detuning  omega_L - omega_0
    delta_c : laser-cavity detuning omega_L - omega_c
    g       : vacuum coupling at an antinode
    omega   : laser Rabi frequency
    gamma   : spontaneous-emission linewidth
    kappa   : cavity field decay rate
    kx1/kx2 : k x_j of the two atoms
    """

    delta: float
    delta_c: float
    g: float
    omega: float
    gamma: float
    kappa: float
    kx1: float = 0.0
    kx2: float = math.pi
    n_max: int = 15

    def __post_init__(self):
        for name in ("delta", "delta_c", "g", "omega", "gamma", "kappa", "kx1", "kx2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        for name in ("g", "omega", "gamma", "kappa"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        HilbertSpace(self.n_max)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_max)

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PatternGeometry:
    label: str
    kx1: float
    kx2: float

    @classmethod
    def classify(cls, kx1: float, kx2: float, tol: float = PATTERN_TOL) -> PatternGeometry:
        c1, c2 = math.cos(kx1), math.cos(kx2)
        if abs(abs(c1) - 1) <= tol and abs(abs(c2) - 1) <= tol:
            label = "lambda" if abs(c1 - c2) <= 2 * tol else "half_lambda"
        else:
            label = "custom"
        return cls(label, kx1, kx2)

    @classmethod
    def lambda_pattern(cls) -> PatternGeometry:
        return cls("lambda", 0.0, 2 * math.pi)

    @classmethod
    def half_lambda_pattern(cls) -> PatternGeometry:
        return cls("half_lambda", 0.0, math.pi)


def mode_cosine(kx: float) -> float:
    """cos(kx), snapped to exactly 0 at the nodes to absorb the rounding of pi/2."""
    c = math.cos(kx)
    return 0.0 if abs(c) <= PATTERN_TOL else c


def coupling_constants(kx1: float, kx2: float, g: float) -> tuple[float, float]:
    """Couplings of the cavity to the symmetric and antisymmetric Dicke channels."""
    c1, c2 = mode_cosine(kx1), mode_cosine(kx2)
    return g / math.sqrt(2) * (c1 + c2), g / math.sqrt(2) * (c1 - c2)


def build_hamiltonian(p: SystemParams, ops: OperatorSet | None = None) -> Operator:
    """H/hbar in the frame rotating at the laser frequency (atoms pinned)."""
    ops = ops or build_operator_set(p.space)
    a, ad = ops.a, ops.a_dag
    H = -p.delta_c * (ad @ a)
    for j, kx in ((1, p.kx1), (2, p.kx2)):
        s, sd = ops.sigma(j), ops.sigma_dag(j)
        gj = p.g * mode_cosine(kx)
        H = H - p.delta * (sd @ s) + p.omega * (sd + s) + gj * (ad @ s + sd @ a)
    # the sum above is Hermitian by construction; symmetrize rounding away
    return Operator(ops.space, 0.5 * (H.matrix + H.matrix.conj().T))


def lindblad_superoperator(
    H: Operator, jumps, symmetry: Operator | None = None
) -> SuperOperator:
    """rho -> -i[H, rho] + sum_k r_k (c rho c^dag - {c^dag c, rho}/2).

    ``jumps`` is an iterable of ``(rate, Operator)`` pairs.
    """
    space = H.space
    h_eff = H.matrix.astype(complex)
    terms = []
    for rate, c in jumps:
        if rate == 0:
            continue
        c = c.matrix
        h_eff = h_eff - 0.5j * rate * (c.conj().T @ c)
        terms.append((rate * c, c.conj().T))
    ident = np.eye(space.dim)
    terms = [(-1j * h_eff, ident), (ident, 1j * h_eff.conj().T)] + terms
    return SuperOperator(space, tuple(terms), symmetry)


def exchange_symmetry(p: SystemParams, ops: OperatorSet | None = None) -> Operator | None:
    """Atom-exchange unitary that leaves the Liouvillian invariant, if any.

    Swapping the atoms maps the model onto itself up to a field sign
    a -> s a when cos(k x_2) = s cos(k x_1), s = +/-1.  Returns
    SWAP (x) (+/-1)^(a^dag a), or None for a generic geometry.
    """
    c1, c2 = math.cos(p.kx1), math.cos(p.kx2)
    if abs(c1 - c2) <= PATTERN_TOL * max(1.0, abs(c1)):
        field_sign = 1
    elif abs(c1 + c2) <= PATTERN_TOL * max(1.0, abs(c1)):
        field_sign = -1
    else:
        return None
    space = ops.space if ops else p.space
    swap = np.zeros((4, 4))
    for x1 in (0, 1):
        for x2 in (0, 1):
            swap[x2 * 2 + x1, x1 * 2 + x2] = 1.0
    parity = np.diag(float(field_sign) ** np.arange(space.n_fock))
    return Operator(space, np.kron(swap, parity))


def build_liouvillian(p: SystemParams, ops: OperatorSet | None = None) -> SuperOperator:
    """Full master-equation generator: coherent part, cavity decay, spontaneous emission.

    Cavity decay kappa(2 a rho a^dag - ...) enters as a jump operator a with
    rate 2 kappa; each atom decays through sigma_j at rate gamma.  The recoil
    of spontaneously emitted photons is not modelled.
    """
    ops = ops or build_operator_set(p.space)
    H = build_hamiltonian(p, ops)
    jumps = [(2 * p.kappa, ops.a), (p.gamma, ops.sigma(1)), (p.gamma, ops.sigma(2))]
    return lindblad_superoperator(H, jumps, exchange_symmetry(p, ops))
