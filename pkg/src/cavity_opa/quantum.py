"""Operator algebra on the two-atom + cavity Hilbert space.

Tensor-factor order is fixed everywhere: atom 1 (x) atom 2 (x) field.
Each atom has basis (|g>, |e>) = indices (0, 1); the field has Fock states
|0>, ..., |n_max>.  Vectorization is column stacking, so that

    vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

ATOM_COUNT = 2
ATOM_DIM = 2
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class HilbertSpace:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def atom_count(self) -> int:
        return ATOM_COUNT

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return ATOM_DIM**ATOM_COUNT * self.n_fock

    def index(self, atom1: int, atom2: int, n: int) -> int:
        """Flat basis index of |atom1, atom2, n> (atoms given as 0=g, 1=e)."""
        if atom1 not in (0, 1) or atom2 not in (0, 1) or not 0 <= n <= self.n_max:
            raise ValueError(f"state ({atom1}, {atom2}, {n}) outside the space")
        return (atom1 * ATOM_DIM + atom2) * self.n_fock + n


def _frozen(m):
    m = np.array(m, dtype=complex)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense complex matrix living on a :class:`HilbertSpace`."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"operator shape {m.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)

    def _check(self, other):
        if other.space != self.space:
            raise ValueError("operators live on different spaces")

    def __add__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.space, self.matrix / scalar)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def dag(self) -> Operator:
        return Operator(self.space, self.matrix.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_defect() <= tol

    def assert_hermitian(self, tol: float = HERMITIAN_TOL) -> Operator:
        defect = self.hermiticity_defect()
        if defect > tol:
            raise ValueError(f"operator is not Hermitian: max|A - A^dag| = {defect:.3e}")
        return self

    def commutator(self, other) -> Operator:
        return self @ other - other @ self


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state: unit trace, Hermitian, positive up to noise."""

    op: Operator
    trace_tol: float = field(default=1e-10, repr=False)
    hermitian_tol: float = field(default=1e-10, repr=False)
    positivity_floor: float = field(default=-1e-8, repr=False)

    def __post_init__(self):
        m = self.op.matrix
        tr = np.trace(m)
        if abs(tr - 1.0) > self.trace_tol:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        defect = self.op.hermiticity_defect()
        if defect > self.hermitian_tol:
            raise ValueError(f"density matrix not Hermitian (defect {defect:.3e})")
        lam = self.min_eigenvalue
        if lam < self.positivity_floor:
            raise ValueError(f"density matrix has eigenvalue {lam:.3e} below floor")

    @classmethod
    def from_matrix(cls, space: HilbertSpace, matrix, **tols) -> DensityMatrix:
        return cls(Operator(space, matrix), **tols)

    @property
    def space(self) -> HilbertSpace:
        return self.op.space

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def min_eigenvalue(self) -> float:
        m = self.op.matrix
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


class OperatorSet(NamedTuple):
    space: HilbertSpace
    a: Operator
    a_dag: Operator
    sigmas: tuple
    s_plus: Operator
    s_minus: Operator
    identity: Operator

    def sigma(self, j: int) -> Operator:
        """Lowering operator |g><e| of atom ``j`` (1 or 2)."""
        if j not in (1, 2):
            raise ValueError(f"atom index must be 1 or 2, got {j}")
        return self.sigmas[j - 1]

    def sigma_dag(self, j: int) -> Operator:
        return self.sigma(j).dag()

    def number(self) -> Operator:
        return self.a_dag @ self.a


def _kron3(x, y, z):
    return np.kron(np.kron(x, y), z)


def build_operator_set(space: HilbertSpace) -> OperatorSet:
    """Cavity and atomic ladder operators on ``space``.

    ``s_plus`` and ``s_minus`` are the collective *lowering* operators of the
    symmetric and antisymmetric Dicke channels, (sigma_1 +/- sigma_2)/sqrt(2).
    """
    if not isinstance(space, HilbertSpace):
        space = HilbertSpace(space)
    nf = space.n_fock
    a_field = np.diag(np.sqrt(np.arange(1, nf)), 1)
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    i2, i_f = np.eye(ATOM_DIM), np.eye(nf)

    a = Operator(space, _kron3(i2, i2, a_field))
    s1 = Operator(space, _kron3(lower, i2, i_f))
    s2 = Operator(space, _kron3(i2, lower, i_f))
    return OperatorSet(
        space=space,
        a=a,
        a_dag=a.dag(),
        sigmas=(s1, s2),
        s_plus=(s1 + s2) / np.sqrt(2.0),
        s_minus=(s1 - s2) / np.sqrt(2.0),
        identity=Operator(space, np.eye(space.dim)),
    )


def quadrature(phase: float, ops: OperatorSet) -> Operator:
    """Field quadrature a e^{-i phase} + a^dag e^{i phase}."""
    return ops.a * np.exp(-1j * phase) + ops.a_dag * np.exp(1j * phase)


def basis_state(space: HilbertSpace, atom1: int, atom2: int, n: int) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.index(atom1, atom2, n)] = 1.0
    return psi


def projector(space: HilbertSpace, atom1: int, atom2: int, n: int) -> DensityMatrix:
    psi = basis_state(space, atom1, atom2, n)
    return DensityMatrix.from_matrix(space, np.outer(psi, psi.conj()))


def vectorize(rho) -> np.ndarray:
    """Column-stacked vector of a square matrix, DensityMatrix or Operator."""
    m = getattr(rho, "matrix", rho)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"cannot vectorize array of shape {m.shape}")
    return m.reshape(-1, order="F")


def devectorize(vec, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`; ``dim`` defaults to sqrt(len(vec))."""
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ValueError("devectorize expects a 1-d vector")
    if dim is None:
        dim = int(round(np.sqrt(vec.size)))
    if isinstance(dim, HilbertSpace):
        dim = dim.dim
    if vec.size != dim * dim:
        raise ValueError(f"vector of length {vec.size} cannot form a {dim}x{dim} matrix")
    return vec.reshape(dim, dim, order="F")


def sprepost(A, B) -> np.ndarray:
    """Superoperator matrix of rho -> A rho B."""
    return np.kron(np.asarray(B).T, np.asarray(A))


def partial_trace_atoms(rho) -> np.ndarray:
    """Reduced field density matrix, tracing out both atoms."""
    m = np.asarray(getattr(rho, "matrix", rho))
    na = ATOM_DIM**ATOM_COUNT
    nf = m.shape[0] // na
    return np.einsum("ajak->jk", m.reshape(na, nf, na, nf))


def partial_trace_field(rho) -> np.ndarray:
    """Reduced two-atom density matrix (4x4), tracing out the cavity."""
    m = np.asarray(getattr(rho, "matrix", rho))
    na = ATOM_DIM**ATOM_COUNT
    nf = m.shape[0] // na
    return np.einsum("ajbj->ab", m.reshape(na, nf, na, nf))


def photon_distribution(rho) -> np.ndarray:
    return np.real(np.diag(partial_trace_atoms(rho)))


def coherent_state(n_max: int, beta: complex) -> np.ndarray:
    """Fock-truncated coherent state, renormalized on {0..n_max}."""
    n = np.arange(n_max + 1)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amp = np.zeros(n_max + 1, dtype=complex)
    if beta == 0:
        amp[0] = 1.0
        return amp
    amp = np.exp(n * np.log(complex(beta)) - 0.5 * log_fact)
    return amp / np.linalg.norm(amp)


class Sector:
    """Symmetry-adapted orthonormal basis of one parity sector of Liouville space.

    Built from a unitary involution ``U`` that is a signed permutation matrix
    (as the atom-exchange symmetries are).  Superoperator rho -> U rho U^dag
    then permutes vec-indices with signs, and each orbit of size two
    contributes one vector per sector.  Columns of the isometry ``P`` are
    stored as at most two (index, coefficient) pairs.
    """

    def __init__(self, dim: int, idx1, coef1, idx2, coef2, parity: int):
        self.dim = dim
        self.parity = parity
        self.idx1 = np.asarray(idx1, dtype=np.intp)
        self.idx2 = np.asarray(idx2, dtype=np.intp)
        self.coef1 = np.asarray(coef1, dtype=float)
        self.coef2 = np.asarray(coef2, dtype=float)

    @property
    def size(self) -> int:
        return self.idx1.size

    @classmethod
    def full(cls, dim: int) -> Sector:
        k = np.arange(dim * dim)
        return cls(dim, k, np.ones(k.size), k, np.zeros(k.size), parity=0)

    @classmethod
    def from_symmetry(cls, U, parity: int) -> Sector:
        u = np.asarray(getattr(U, "matrix", U))
        d = u.shape[0]
        perm, sign = _signed_permutation(u)
        if parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        i, j = np.divmod(np.arange(d * d), d)[::-1]  # vec index k = j*d + i
        k = j * d + i
        k_img = perm[j] * d + perm[i]
        s = sign[i] * sign[j]
        idx1, idx2, c1, c2 = [], [], [], []
        fixed = k_img == k
        keep = fixed & (s == parity)
        idx1.append(k[keep])
        idx2.append(k[keep])
        c1.append(np.ones(keep.sum()))
        c2.append(np.zeros(keep.sum()))
        pair = (~fixed) & (k < k_img)
        r = 1.0 / np.sqrt(2.0)
        idx1.append(k[pair])
        idx2.append(k_img[pair])
        c1.append(np.full(pair.sum(), r))
        c2.append(parity * s[pair] * r)
        order = np.argsort(np.concatenate(idx1), kind="stable")
        return cls(
            d,
            np.concatenate(idx1)[order],
            np.concatenate(c1)[order],
            np.concatenate(idx2)[order],
            np.concatenate(c2)[order],
            parity=parity,
        )

    def restrict(self, vec) -> np.ndarray:
        """Coordinates P^T vec of a Liouville-space vector."""
        vec = np.asarray(vec)
        return self.coef1 * vec[self.idx1] + self.coef2 * vec[self.idx2]

    def lift(self, coords) -> np.ndarray:
        out = np.zeros(self.dim * self.dim, dtype=complex)
        np.add.at(out, self.idx1, self.coef1 * coords)
        np.add.at(out, self.idx2, self.coef2 * coords)
        return out

    def leakage(self, vec) -> float:
        """Norm of the part of ``vec`` outside this sector."""
        return float(np.linalg.norm(np.asarray(vec) - self.lift(self.restrict(vec))))


def _signed_permutation(u):
    d = u.shape[0]
    nz = np.abs(u) > 1e-12
    if not np.all(nz.sum(axis=0) == 1):
        raise ValueError("symmetry must be a signed permutation matrix")
    perm = np.argmax(nz, axis=0)
    sign = u[perm, np.arange(d)]
    if not np.allclose(np.abs(sign), 1.0) or not np.allclose(sign.imag, 0.0):
        raise ValueError("symmetry entries must be +1 or -1")
    sign = sign.real
    if not (np.array_equal(perm[perm], np.arange(d)) and np.allclose(sign * sign[perm], 1.0)):
        raise ValueError("symmetry must be an involution")
    return perm, sign


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map rho -> sum_k A_k rho B_k on a :class:`HilbertSpace`.

    Kept as its operator terms; the dense d^2 x d^2 matrix (column-stacking
    convention) is assembled on first access of :attr:`matrix`.  ``symmetry``
    optionally carries a signed-permutation unitary U with
    L(U rho U^dag) = U L(rho) U^dag, which the solvers use to work inside a
    single parity sector.
    """

    space: HilbertSpace
    terms: tuple
    symmetry: Operator | None = None

    def __post_init__(self):
        d = self.space.dim
        terms = tuple((_frozen(A), _frozen(B)) for A, B in self.terms)
        for A, B in terms:
            if A.shape != (d, d) or B.shape != (d, d):
                raise ValueError("superoperator term has wrong shape")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return self.space.dim**2

    @cached_property
    def matrix(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for A, B in self.terms:
            out += np.kron(B.T, A)
        out.flags.writeable = False
        return out

    def apply(self, rho) -> np.ndarray:
        m = np.asarray(getattr(rho, "matrix", rho))
        return sum(A @ m @ B for A, B in self.terms)

    def __add__(self, other):
        if other.space != self.space:
            raise ValueError("superoperators live on different spaces")
        sym = self.symmetry if self.symmetry is other.symmetry else None
        return SuperOperator(self.space, self.terms + other.terms, sym)

    def columns(self, ks) -> np.ndarray:
        """Rows of the result are the columns ``ks`` of :attr:`matrix`."""
        d = self.space.dim
        ks = np.asarray(ks, dtype=np.intp)
        i, j = ks % d, ks // d
        out = np.zeros((ks.size, d, d), dtype=complex)
        for A, B in self.terms:
            out += B[j, :][:, :, None] * A[:, i].T[:, None, :]
        return out.reshape(ks.size, d * d)

    def block(self, sector: Sector, chunk: int = 256) -> np.ndarray:
        """P^T L P for the isometry P of ``sector``."""
        m = sector.size
        out = np.empty((m, m), dtype=complex)
        for start in range(0, m, chunk):
            c = slice(start, min(start + chunk, m))
            cols = self.columns(sector.idx1[c]) * sector.coef1[c, None]
            if np.any(sector.coef2[c]):
                cols += self.columns(sector.idx2[c]) * sector.coef2[c, None]
            out[:, c] = (
                cols[:, sector.idx1] * sector.coef1 + cols[:, sector.idx2] * sector.coef2
            ).T
        return out

    def norm_inf(self, chunk: int = 256) -> float:
        """Maximum absolute row sum of :attr:`matrix`, without assembling it."""
        n = self.dim
        rows = np.zeros(n)
        for start in range(0, n, chunk):
            rows += np.abs(self.columns(np.arange(start, min(start + chunk, n)))).sum(axis=0)
        return float(rows.max())
