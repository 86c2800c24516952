"""Compact matrix Lie groups U(1), SU(2), SU(3) and their algebras.

All elements are complex n x n matrices (n = 1, 2, 3).  Algebra elements
are skew-Hermitian (traceless for the SU groups); group elements are
unitary (determinant one for the SU groups).  The scalar product on the
algebra is ``Re tr(g^H g')``; every group carries a fixed basis that is
orthonormal for it.

Exponentials and logarithms are evaluated through exact spectral
decompositions (eigh of the associated Hermitian matrix, complex Schur
form for the group side), which preserves unitarity to machine precision
at these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "BranchCutError",
    "LieGroup",
    "U1",
    "SU2",
    "SU3",
    "GROUPS",
    "AlgebraElement",
    "GroupElement",
    "scalar_product",
    "bracket",
    "exp",
    "log",
    "adjoint",
    "random_algebra",
    "random_group",
    "exp_matrices",
    "log_matrix",
    "unitarize",
    "product",
    "spectral_norm",
]

#: eigenphases must stay this far below pi for an unambiguous logarithm
LOG_MARGIN = 1e-6

#: re-unitarize after this many factors in a product chain
REPROJECT_CHUNK = 16

_STRUCT_TOL = 1e-12


class BranchCutError(ValueError):
    """A logarithm was requested too close to the principal branch cut."""


_PAULI = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]

_GELL_MANN = [
    np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex),
    np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex),
    np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]], dtype=complex),
    np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex),
    np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex),
    np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex),
    np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex),
    np.diag([1, 1, -2]).astype(complex) / np.sqrt(3),
]


@dataclass(frozen=True)
class LieGroup:
    """Group tag: matrix size, algebra dimension and an orthonormal basis."""

    name: str
    n: int
    special: bool              # determinant constrained to one
    basis: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def zero(self) -> np.ndarray:
        return np.zeros((self.n, self.n), dtype=complex)

    def coefficients(self, matrix: np.ndarray) -> np.ndarray:
        """Real coefficients of an algebra matrix in the orthonormal basis."""
        return np.einsum("dij,ij->d", self.basis.conj(), matrix).real

    def from_coefficients(self, coeffs) -> np.ndarray:
        return np.einsum("d,dij->ij", np.asarray(coeffs, dtype=float), self.basis)


def _make_group(name, n, special, raw):
    basis = np.stack([1j * b / np.sqrt(2.0) for b in raw]) if n > 1 else np.array(
        [[[1j]]], dtype=complex
    )
    basis.setflags(write=False)
    return LieGroup(name=name, n=n, special=special, basis=basis)


U1 = _make_group("u1", 1, False, None)
SU2 = _make_group("su2", 2, True, _PAULI)
SU3 = _make_group("su3", 3, True, _GELL_MANN)

GROUPS = {g.name: g for g in (U1, SU2, SU3)}


def _check_same_group(a, b):
    if a.group is not b.group:
        raise ValueError(f"group tag mismatch: {a.group.name} vs {b.group.name}")


@dataclass(frozen=True)
class AlgebraElement:
    """Skew-Hermitian matrix in the Lie algebra of ``group``."""

    matrix: np.ndarray
    group: LieGroup

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.group.n, self.group.n):
            raise ValueError(f"shape {m.shape} invalid for {self.group.name}")
        if np.linalg.norm(m + m.conj().T) > _STRUCT_TOL * (1 + np.linalg.norm(m)):
            raise ValueError("matrix is not skew-Hermitian")
        if self.group.special and abs(np.trace(m)) > _STRUCT_TOL * (1 + np.linalg.norm(m)):
            raise ValueError("matrix is not traceless")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __add__(self, other):
        _check_same_group(self, other)
        return AlgebraElement(self.matrix + other.matrix, self.group)

    def __sub__(self, other):
        _check_same_group(self, other)
        return AlgebraElement(self.matrix - other.matrix, self.group)

    def __neg__(self):
        return AlgebraElement(-self.matrix, self.group)

    def __rmul__(self, scalar):
        return AlgebraElement(float(scalar) * self.matrix, self.group)

    def spectral_norm(self) -> float:
        return spectral_norm(self.matrix)


@dataclass(frozen=True)
class GroupElement:
    """Unitary matrix in ``group`` (det = 1 for the SU groups)."""

    matrix: np.ndarray
    group: LieGroup

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.group.n, self.group.n):
            raise ValueError(f"shape {m.shape} invalid for {self.group.name}")
        if np.linalg.norm(m.conj().T @ m - np.eye(self.group.n)) > 1e-10:
            raise ValueError("matrix is not unitary")
        if self.group.special and abs(np.linalg.det(m) - 1.0) > 1e-10:
            raise ValueError("matrix does not have determinant one")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        _check_same_group(self, other)
        return GroupElement(unitarize(self.matrix @ other.matrix, self.group),
                            self.group)

    def inverse(self):
        return GroupElement(self.matrix.conj().T, self.group)


# -- scalar product, bracket, adjoint --------------------------------------


def scalar_product(a: AlgebraElement, b: AlgebraElement) -> float:
    """Re tr(a^H b); symmetric and positive definite on the algebra."""
    _check_same_group(a, b)
    return float(np.einsum("ij,ij->", a.matrix.conj(), b.matrix).real)


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Matrix commutator ab - ba."""
    _check_same_group(a, b)
    return AlgebraElement(a.matrix @ b.matrix - b.matrix @ a.matrix, a.group)


def adjoint(u: GroupElement, a: AlgebraElement) -> AlgebraElement:
    """Conjugation u a u^{-1}; an isometry of the algebra scalar product."""
    _check_same_group(u, a)
    return AlgebraElement(u.matrix @ a.matrix @ u.matrix.conj().T, a.group)


# -- exponential and logarithm ---------------------------------------------


def exp_matrices(g: np.ndarray) -> np.ndarray:
    """Matrix exponential of a stack (..., n, n) of skew-Hermitian matrices.

    Diagonalizes the Hermitian matrix i*g, so the result is exactly unitary
    up to roundoff.
    """
    g = np.asarray(g, dtype=complex)
    w, v = np.linalg.eigh(1j * g)
    phases = np.exp(-1j * w)
    return np.einsum("...ik,...k,...jk->...ij", v, phases, v.conj())


def log_matrix(u: np.ndarray, group: LieGroup, margin: float = LOG_MARGIN) -> np.ndarray:
    """Principal logarithm of one unitary matrix, as an algebra matrix.

    Raises BranchCutError when an eigenphase is within ``margin`` of the
    branch cut at +-pi, or when the principal phases of a determinant-one
    matrix do not sum to zero (the logarithm then falls outside the
    algebra).
    """
    u = np.asarray(u, dtype=complex)
    t, q = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diagonal(t))
    if np.any(np.abs(phases) >= np.pi - margin):
        raise BranchCutError(
            f"eigenphase {phases[np.argmax(np.abs(phases))]:+.6f} too close to the cut at pi"
        )
    if group.special and abs(phases.sum()) > 1e-8:
        raise BranchCutError("principal phases do not sum to zero")
    out = np.einsum("ik,k,jk->ij", q, 1j * phases, q.conj())
    out = 0.5 * (out - out.conj().T)
    return out


def exp(a: AlgebraElement) -> GroupElement:
    return GroupElement(exp_matrices(a.matrix), a.group)


def log(u: GroupElement, margin: float = LOG_MARGIN) -> AlgebraElement:
    return AlgebraElement(log_matrix(u.matrix, u.group, margin), u.group)


# -- structure maintenance --------------------------------------------------


def unitarize(m: np.ndarray, group: LieGroup) -> np.ndarray:
    """Nearest unitary matrix (polar projection), det corrected for SU."""
    w, _, vh = np.linalg.svd(m)
    p = w @ vh
    if group.special:
        alpha = np.angle(np.linalg.det(p))
        p = p * np.exp(-1j * alpha / group.n)
    return p


def product(factors, group: LieGroup, chunk: int = REPROJECT_CHUNK) -> np.ndarray:
    """Ordered product of group matrices, re-unitarized every ``chunk`` factors.

    Keeps unitarity drift bounded in long holonomy chains.
    """
    out = group.identity()
    since_projection = 0
    for f in factors:
        out = out @ f
        since_projection += 1
        if since_projection >= chunk:
            out = unitarize(out, group)
            since_projection = 0
    return out


def spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m), 2))


# -- deterministic test data ------------------------------------------------


def random_algebra(scale: float, seed: int, group: LieGroup) -> AlgebraElement:
    """Seeded random algebra element with spectral norm at most ``scale``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(seed)
    g = group.from_coefficients(rng.uniform(-1.0, 1.0, group.dim))
    nrm = spectral_norm(g)
    if nrm > scale:
        g = g * (scale / nrm)
    return AlgebraElement(g, group)


def random_group(scale: float, seed: int, group: LieGroup) -> GroupElement:
    """exp of a seeded random algebra element."""
    return exp(random_algebra(scale, seed, group))
