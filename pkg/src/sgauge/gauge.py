"""Lie-algebra-valued gauge fields on simplicial meshes.

A gauge field assigns an algebra element A_e to every canonical oriented
edge; its link field holds the parallel transports exp(-A_e).  Face
holonomies are ordered products of links around pointed oriented faces.
Discrete gauge transformations act on links by U -> G_j U G_i^{-1} and are
pulled back to the algebra level through the principal logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lie
from .lie import BranchCutError, LieGroup
from .mesh import PointedFace, SimplicialComplex
from .whitney import Cochain

__all__ = [
    "GaugeField",
    "LinkField",
    "DiscreteGaugeTransform",
    "ScalarField",
    "transports",
    "transform_links",
    "face_holonomy",
    "holonomies",
    "apply_gauge",
    "apply_gauge_scalar",
    "integrated_curvature",
    "integrated_curvatures",
    "face_edge_ids",
    "dump_field",
    "load_field",
]


def _conjT(m):
    return np.conjugate(np.swapaxes(m, -1, -2))


def _check_algebra_stack(values, group, log_safe=True):
    """Validate skew-Hermitian (traceless for SU) and principal-log safety."""
    scale = 1.0 + np.abs(values).max(initial=0.0)
    if np.abs(values + _conjT(values)).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("edge values are not skew-Hermitian")
    if group.special:
        traces = np.trace(values, axis1=-2, axis2=-1)
        if np.abs(traces).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("edge values are not traceless")
    if log_safe and len(values):
        bound = np.pi - lie.LOG_MARGIN
        fro = np.linalg.norm(values, axis=(-2, -1))
        suspect = np.nonzero(fro >= bound)[0]
        if suspect.size:
            norms = np.abs(np.linalg.eigvalsh(1j * values[suspect])).max(axis=-1)
            if norms.max() >= bound:
                raise BranchCutError(
                    f"edge value with spectral norm {norms.max():.6f} is outside "
                    "the principal-log-safe region"
                )


@dataclass(frozen=True)
class GaugeField:
    """Algebra-valued 1-cochain; values[e] is A oriented along canonical edge e."""

    complex: SimplicialComplex
    group: LieGroup
    values: np.ndarray      # (E, n, n) complex

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        ne = len(self.complex.simplices[1])
        if vals.shape != (ne, self.group.n, self.group.n):
            raise ValueError(f"values shape {vals.shape} invalid")
        _check_algebra_stack(vals, self.group)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, complex, group):
        ne = len(complex.simplices[1])
        return cls(complex, group, np.zeros((ne, group.n, group.n), dtype=complex))

    @classmethod
    def random(cls, complex, group, scale, seed):
        """Seeded random field; every edge value has spectral norm <= scale."""
        rng = np.random.default_rng(seed)
        ne = len(complex.simplices[1])
        coeffs = rng.uniform(-1.0, 1.0, (ne, group.dim))
        vals = np.einsum("ed,dij->eij", coeffs, group.basis)
        norms = np.abs(np.linalg.eigvalsh(1j * vals)).max(axis=-1)
        factor = np.minimum(1.0, scale / np.maximum(norms, 1e-300))
        return cls(complex, group, vals * factor[:, None, None])

    def cochain(self) -> Cochain:
        return Cochain(self.complex, 1, self.values)

    def shifted(self, direction: np.ndarray, eps: float) -> "GaugeField":
        """The field A + eps * direction (direction: raw (E, n, n) stack)."""
        return GaugeField(self.complex, self.group, self.values + eps * direction)


@dataclass(frozen=True)
class LinkField:
    """One group element per canonical edge: matrices[e] transports along e."""

    complex: SimplicialComplex
    group: LieGroup
    matrices: np.ndarray    # (E, n, n) complex, unitary

    def link(self, to: int, frm: int) -> np.ndarray:
        """Transport matrix from vertex ``frm`` to vertex ``to`` along their edge."""
        if to == frm:
            return self.group.identity()
        a, b = (frm, to) if frm < to else (to, frm)
        u = self.matrices[self.complex.index[1][(a, b)]]
        return u if frm < to else u.conj().T


@dataclass(frozen=True)
class DiscreteGaugeTransform:
    """One group element per vertex."""

    complex: SimplicialComplex
    group: LieGroup
    matrices: np.ndarray    # (V, n, n) complex, unitary

    @classmethod
    def identity(cls, complex, group):
        nv = len(complex.coords)
        mats = np.broadcast_to(group.identity(), (nv, group.n, group.n)).copy()
        return cls(complex, group, mats)

    @classmethod
    def random(cls, complex, group, scale, seed):
        rng = np.random.default_rng(seed)
        nv = len(complex.coords)
        coeffs = rng.uniform(-1.0, 1.0, (nv, group.dim))
        vals = np.einsum("vd,dij->vij", coeffs, group.basis)
        norms = np.abs(np.linalg.eigvalsh(1j * vals)).max(axis=-1)
        factor = np.minimum(1.0, scale / np.maximum(norms, 1e-300))
        return cls(complex, group, lie.exp_matrices(vals * factor[:, None, None]))


@dataclass(frozen=True)
class ScalarField:
    """One vector of C^n per vertex (fundamental representation)."""

    complex: SimplicialComplex
    group: LieGroup
    vectors: np.ndarray     # (V, n) complex

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=complex)
        if vec.shape != (len(self.complex.coords), self.group.n):
            raise ValueError(f"vectors shape {vec.shape} invalid")
        if not np.all(np.isfinite(vec)):
            raise ValueError("scalar field has non-finite entries")
        object.__setattr__(self, "vectors", vec)

    @classmethod
    def random(cls, complex, group, scale, seed):
        rng = np.random.default_rng(seed)
        shape = (len(complex.coords), group.n)
        vec = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        return cls(complex, group, vec)


# -- transports and holonomies ----------------------------------------------


def transports(field: GaugeField) -> LinkField:
    """Link field U_e = exp(-A_e) per canonical edge."""
    return LinkField(field.complex, field.group, lie.exp_matrices(-field.values))


def face_edge_ids(complex: SimplicialComplex) -> np.ndarray:
    """(F, 3) edge ids [(i,j), (j,k), (i,k)] for every face (i, j, k)."""

    def build():
        idx = complex.index[1]
        faces = complex.simplices[2]
        out = np.empty((len(faces), 3), dtype=np.int64)
        for f, (i, j, k) in enumerate(faces):
            out[f] = (idx[(i, j)], idx[(j, k)], idx[(i, k)])
        out.setflags(write=False)
        return out

    cache = complex._cache
    if "face_edges" not in cache:
        cache["face_edges"] = build()
    return cache["face_edges"]


def face_holonomy(links: LinkField, pf: PointedFace) -> np.ndarray:
    """Holonomy around a pointed face: product of links along its cycle.

    For cycle (i, j, k) this is U(i<-k) U(k<-j) U(j<-i), located at the
    origin i.  The product is re-unitarized per the group-product policy.
    """
    c0, c1, c2 = pf.cycle
    factors = [links.link(c0, c2), links.link(c2, c1), links.link(c1, c0)]
    return lie.product(factors, links.group)


def holonomies(links: LinkField, origin_shift: int = 0) -> np.ndarray:
    """Stacked holonomies of every canonical face, cycle rotated by origin_shift.

    Shift 0 gives F located at the lowest vertex of each face; shift 1 at
    the middle vertex (used to quantify origin dependence).
    """
    fe = face_edge_ids(links.complex)
    u_ij = links.matrices[fe[:, 0]]
    u_jk = links.matrices[fe[:, 1]]
    u_ik = links.matrices[fe[:, 2]]
    if origin_shift % 3 == 0:
        # U(i<-k) U(k<-j) U(j<-i)
        return _conjT(u_ik) @ u_jk @ u_ij
    if origin_shift % 3 == 1:
        # cycle (j, k, i): U(j<-i) U(i<-k) U(k<-j)
        return u_ij @ _conjT(u_ik) @ u_jk
    # cycle (k, i, j): U(k<-j) U(j<-i) U(i<-k)
    return u_jk @ u_ij @ _conjT(u_ik)


# -- gauge transformations ----------------------------------------------------


def transform_links(links: LinkField, g: DiscreteGaugeTransform) -> LinkField:
    """Transformed links U'_{ji} = G_j U_{ji} G_i^{-1} (no logarithm taken)."""
    edges = links.complex.simplices[1]
    gi = g.matrices[edges[:, 0]]
    gj = g.matrices[edges[:, 1]]
    return LinkField(links.complex, links.group,
                     gj @ links.matrices @ _conjT(gi))


def apply_gauge(field: GaugeField, g: DiscreteGaugeTransform) -> GaugeField:
    """Gauge-transformed field, obtained edgewise as -log of the new links.

    Raises BranchCutError when a transformed link leaves the principal-log
    domain (the transform is too large for this field).
    """
    new_links = transform_links(transports(field), g)
    vals = np.empty_like(field.values)
    for e in range(len(vals)):
        vals[e] = -lie.log_matrix(new_links.matrices[e], field.group)
    return GaugeField(field.complex, field.group, vals)


def apply_gauge_scalar(phi: ScalarField, g: DiscreteGaugeTransform) -> ScalarField:
    """Vertexwise rotation phi_i -> G_i phi_i."""
    if phi.group is not g.group:
        raise ValueError("group tag mismatch")
    return ScalarField(phi.complex, phi.group,
                       np.einsum("vij,vj->vi", g.matrices, phi.vectors))


# -- integrated curvature ------------------------------------------------------


def integrated_curvatures(field: GaugeField) -> np.ndarray:
    """Exact face integrals of the curvature of the Whitney field, stacked.

    For a face (i, j, k) with edge values a = A_(j<-i), b = A_(k<-j),
    c = A_(i<-k) this is the closed form

        a + b + c + ([a, b] + [b, c] + [c, a]) / 6,

    which equals the integral over the face of dA + [A, A]/2.
    """
    fe = face_edge_ids(field.complex)
    a = field.values[fe[:, 0]]
    b = field.values[fe[:, 1]]
    c = -field.values[fe[:, 2]]
    comm = (a @ b - b @ a) + (b @ c - c @ b) + (c @ a - a @ c)
    return a + b + c + comm / 6.0


def integrated_curvature(field: GaugeField, face) -> np.ndarray:
    """Exact curvature integral over one face (ascending vertex tuple)."""
    face = tuple(face)
    fid = field.complex.index[2][face]
    return integrated_curvatures(field)[fid]


# -- plain-text field serialization -------------------------------------------


def dump_field(field: GaugeField, stream) -> None:
    """Write per-edge basis coefficients, one line ``edge_id c1 ... cd``."""
    coeffs = np.einsum("dij,eij->ed", field.group.basis.conj(), field.values).real
    for e, row in enumerate(coeffs):
        stream.write(str(e) + " " + " ".join(f"{c:.17g}" for c in row) + "\n")


def load_field(complex: SimplicialComplex, group: LieGroup, stream) -> GaugeField:
    ne = len(complex.simplices[1])
    vals = np.zeros((ne, group.n, group.n), dtype=complex)
    seen = np.zeros(ne, dtype=bool)
    for line in stream:
        toks = line.split()
        if not toks:
            continue
        e = int(toks[0])
        coeffs = [float(t) for t in toks[1:]]
        if len(coeffs) != group.dim:
            raise ValueError(f"edge {e}: expected {group.dim} coefficients")
        vals[e] = group.from_coefficients(coeffs)
        seen[e] = True
    if not seen.all():
        raise ValueError(f"missing coefficients for {np.count_nonzero(~seen)} edges")
    return GaugeField(complex, group, vals)
