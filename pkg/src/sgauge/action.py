"""Local and global discrete Yang-Mills actions.

Five local actions are provided for a maximal simplex T:

* ``s``        exact integral over T of |dA + [A,A]/2|^2 for the Whitney
               field A (closed-form integration of the degree-4 integrand);
* ``s1``       the same with the curvature replaced by its Whitney
               interpolant, i.e. a mass-matrix quadratic form in the exact
               face integrals of the curvature;
* ``s2``       the quadratic form evaluated on 1 - F_f with F_f the face
               holonomies of the link field;
* ``sprime``   as ``s2`` with parallel transport between face origins
               inserted in every cross term, which makes the sum invariant
               under discrete gauge transformations;
* ``logvariant``  the transported quadratic form evaluated on log F_f.

Scalar-field companions ``scalar_c`` (exact continuum integrand
|grad(phi) + A phi|^2) and ``scalar_d`` (transported edge-difference form)
are included.  Global actions sum the per-simplex values in canonical
order with compensated summation.

All sums over face (or edge) pairs are ordered and include the diagonal,
so each action is a quadratic form with the symmetric mass matrix and the
total is real up to rounding; the accumulated imaginary part is reported
as a diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lie
from .gauge import (
    GaugeField,
    LinkField,
    ScalarField,
    holonomies,
    integrated_curvatures,
    transports,
)
from .mesh import SimplicialComplex
from .whitney import (
    _edge_coeffs,
    _moment2,
    _moment4,
    edge_positions,
    face_positions,
    gram_wedge,
    mass_matrices,
)

__all__ = [
    "ActionValue",
    "ACTION_KINDS",
    "action_continuum",
    "action_s1",
    "action_s2",
    "action_sprime",
    "action_log_variant",
    "lagrangian_uf",
    "scalar_action_continuum",
    "scalar_action_discrete",
    "global_action",
    "per_simplex_action",
]

ACTION_KINDS = ("s", "s1", "s2", "sprime", "logvariant", "scalar_c", "scalar_d")


@dataclass(frozen=True)
class ActionValue:
    """Global action: total, per-maximal-simplex values, imaginary residue."""

    total: float
    per_simplex: np.ndarray
    imaginary_residue: float


def _conjT(m):
    return np.conjugate(np.swapaxes(m, -1, -2))


# -- fixed combinatorics and cached per-complex tensors ----------------------


@lru_cache(maxsize=None)
def _quartic_fixed(m: int) -> np.ndarray:
    """K2[(a b c d), (w W z Z)]: geometry-free part of the |[A,A]|^2 tensor."""
    r = _edge_coeffs(m)
    ne, v = r.shape[0], m + 1
    ab = np.einsum("avw,bVW->abvVwW", r, r).reshape(ne * ne, v * v, v * v)
    n4 = _moment4(m).reshape(v * v, v * v)
    t1 = np.einsum("xpq,pr->xqr", ab, n4)
    k = np.einsum("xqr,yrs->xyqs", t1, ab)
    return k.reshape(ne * ne * ne * ne, v * v * v * v)


def _curvature_tensors(complex: SimplicialComplex):
    """Per-tet tensors making S_T(A) a quartic form in the edge values.

    Returns (T2, T3, T4) with
      S_T = sum T2[t,e,E] <A_e, A_E> + sum T3[t,e,(cd)] <A_e, [A_c, A_d]>
            + 1/4 sum T4[t,(ab),(cd)] <[A_a, A_b], [A_c, A_d]>,
    the algebra product being Re tr(x^H y).
    """
    cache = complex._cache
    if "curvature_tensors" in cache:
        return cache["curvature_tensors"]
    m = complex.dim
    v = m + 1
    pairs = edge_positions(m)
    ne = len(pairs)
    ae = np.array([p[0] for p in pairs])
    be = np.array([p[1] for p in pairs])
    g2 = gram_wedge(complex)                         # (T, v, v, v, v)
    vol = complex.volumes
    r = _edge_coeffs(m)
    n2 = _moment2(m)

    t2 = 4.0 * vol[:, None, None] * g2[:, ae[:, None], be[:, None], ae[None, :], be[None, :]]

    h = g2[:, ae, be]                                # (T, ne, v, v)
    t3 = 2.0 * np.einsum("cvw,dVW,vV,tewW->tecd", r, r, n2, h, optimize=True)
    t3 *= vol[:, None, None, None]
    t3 = t3.reshape(len(vol), ne, ne * ne)

    k2 = _quartic_fixed(m)                           # (ne^4, v^4)
    g2flat = g2.reshape(len(vol), v ** 4)
    t4 = (g2flat @ k2.T) * vol[:, None]
    t4 = t4.reshape(len(vol), ne * ne, ne * ne)

    cache["curvature_tensors"] = (t2, t3, t4)
    return cache["curvature_tensors"]


@lru_cache(maxsize=None)
def _face_origin_positions(m: int, origin_shift: int):
    """Local vertex position of each face's origin, per face slot."""
    return np.array([f[origin_shift % 3] for f in face_positions(m)])


@lru_cache(maxsize=None)
def _edge_slot_of_pair(m: int):
    """Map (local p, local q) -> local edge slot, -1 on the diagonal."""
    pairs = edge_positions(m)
    out = -np.ones((m + 1, m + 1), dtype=np.int64)
    for s, (p, q) in enumerate(pairs):
        out[p, q] = s
        out[q, p] = s
    return out


def _vertex_transports(links: LinkField, tets) -> np.ndarray:
    """V[t, p, q] = transport from local vertex q to local vertex p of tet t."""
    complex = links.complex
    m = complex.dim
    v = m + 1
    n = links.group.n
    edge_ids = complex.local_ids[1][tets]            # (T, ne)
    umats = links.matrices[edge_ids]                 # (T, ne, n, n)
    slot = _edge_slot_of_pair(m)
    out = np.empty((len(tets), v, v, n, n), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for p in range(v):
        for q in range(v):
            if p == q:
                out[:, p, q] = eye
            elif q < p:
                # canonical edge (q, p) stores the transport q -> p
                out[:, p, q] = umats[:, slot[q, p]]
            else:
                out[:, p, q] = _conjT(umats[:, slot[p, q]])
    return out


def _resolve_tets(complex, tets):
    if tets is None:
        return np.arange(len(complex.simplices[complex.dim]))
    return np.atleast_1d(np.asarray(tets, dtype=np.int64))


# -- per-simplex kernels -------------------------------------------------------


def _continuum_per_tet(field: GaugeField, tets) -> np.ndarray:
    complex = field.complex
    t2, t3, t4 = _curvature_tensors(complex)
    at = field.values[complex.local_ids[1][tets]]    # (T, ne, n, n)
    nt, ne = at.shape[0], at.shape[1]
    n2 = at.shape[-1] * at.shape[-2]
    atv = at.reshape(nt, ne, n2)

    prod = np.einsum("teij,tEjk->teEik", at, at)
    brk = (prod - prod.transpose(0, 2, 1, 3, 4)).reshape(nt, ne * ne, n2)

    y = np.einsum("teE,tEx->tex", t2[tets], atv)
    y += np.einsum("tec,tcx->tex", t3[tets], brk)
    out = np.einsum("tex,tex->t", atv.conj(), y)
    y4 = np.einsum("tcd,tdx->tcx", t4[tets], brk)
    out = out + 0.25 * np.einsum("tcx,tcx->t", brk.conj(), y4)
    return out.real


def _quadratic_face_form(complex, mats, tets, face_values):
    """sum over ordered face pairs of M[f0,f1] tr((X_f0)^H X_f1), complex."""
    m2 = mats[tets]
    return np.einsum("tfF,tfij,tFij->t", m2, face_values.conj(), face_values,
                     optimize=True)


def _transported_face_form(complex, tets, torg, m2, xf, yf):
    """sum M[f0,f1] tr(Torg[f1,f0] X_f0^H Torg[f0,f1] Y_f1), complex values."""
    a = np.einsum("tfji,tfFjk->tfFik", xf.conj(), torg, optimize=True)
    b = np.einsum("tfFik,tFkl->tfFil", a, yf, optimize=True)
    y = np.einsum("tFfli,tfFil->tfF", torg, b, optimize=True)
    return np.einsum("tfF,tfF->t", m2, y)


def _sprime_like_per_tet(links: LinkField, face_mats: np.ndarray, tets,
                         origin_shift: int = 0) -> np.ndarray:
    """Shared kernel of sprime and the decoupled (U, F) form; complex output."""
    complex = links.complex
    m = complex.dim
    tet_faces = complex.local_ids[2][tets]
    g = np.eye(links.group.n) - face_mats[tet_faces]
    m2 = mass_matrices(complex, 2)[tets]
    orgl = _face_origin_positions(m, origin_shift)
    vt = _vertex_transports(links, tets)
    torg = vt[:, orgl[:, None], orgl[None, :]]       # (T, F, F, n, n)
    return _transported_face_form(complex, tets, torg, m2, g, g)


def _log_variant_per_tet(field: GaugeField, tets, origin_shift: int = 0):
    complex = field.complex
    links = transports(field)
    fh = holonomies(links, origin_shift)
    logs = np.empty_like(fh)
    for f in range(len(fh)):
        logs[f] = lie.log_matrix(fh[f], field.group)
    tet_faces = complex.local_ids[2][tets]
    lf = logs[tet_faces]
    m2 = mass_matrices(complex, 2)[tets]
    orgl = _face_origin_positions(complex.dim, origin_shift)
    vt = _vertex_transports(links, tets)
    torg = vt[:, orgl[:, None], orgl[None, :]]
    # term(f0, f1) = <Ad(U_{o1<-o0}) log F_f0 , log F_f1>
    a = np.einsum("tFfij,tfkj->tFfik", torg, lf.conj(), optimize=True)
    b = np.einsum("tFfik,tFflk->tFfil", a, torg.conj(), optimize=True)
    y = np.einsum("tFfil,tFli->tfF", b, lf, optimize=True)
    return np.einsum("tfF,tfF->t", m2, y)


def _scalar_discrete_per_tet(field: GaugeField, phi: ScalarField, tets):
    complex = field.complex
    m = complex.dim
    pairs = edge_positions(m)
    srcs = np.array([p for p, _ in pairs])
    tgts = np.array([q for _, q in pairs])
    links = transports(field)
    tet_edges = complex.local_ids[1][tets]
    tet_verts = complex.simplices[m][tets]
    ue = links.matrices[tet_edges]                   # (T, ne, n, n)
    pv = phi.vectors[tet_verts]                      # (T, v, n)
    d = pv[:, tgts] - np.einsum("teij,tej->tei", ue, pv[:, srcs])
    vt = _vertex_transports(links, tets)
    tt = vt[:, tgts[:, None], tgts[None, :]]         # (T, e, E, n, n): U_{tgt_e <- tgt_E}
    m1 = mass_matrices(complex, 1)[tets]
    # term(e0, e1) = < U_{tgt1 <- tgt0} d_e0 , d_e1 >  (Hermitian product of C^n)
    x = np.einsum("tEeij,tej->teEi", tt, d, optimize=True)
    y = np.einsum("teEi,tEi->teE", x.conj(), d, optimize=True)
    return np.einsum("teE,teE->t", m1, y)


def _scalar_continuum_per_tet(field: GaugeField, phi: ScalarField, tets):
    """Exact integral of |grad(phi) + A phi|^2 per tet (degree-4 integrand)."""
    complex = field.complex
    m = complex.dim
    v = m + 1
    pairs = edge_positions(m)
    out = np.empty(len(tets))
    from .whitney import integrate_barycentric_monomial

    for row, t in enumerate(tets):
        verts = complex.simplices[m][t]
        grads = complex.bary_gradients[t]
        pv = phi.vectors[verts]                      # (v, n)
        ae = field.values[complex.local_ids[1][t]]   # (ne, n, n)
        terms = {}                                   # monomial -> (m, n) coeff

        def add(mono, coeff):
            if mono in terms:
                terms[mono] = terms[mono] + coeff
            else:
                terms[mono] = coeff

        zero = (0,) * v
        add(zero, np.einsum("vm,vn->mn", grads, pv).astype(complex))
        for e, (p, q) in enumerate(pairs):
            mat = ae[e]
            for lamv, gradw, sign in ((p, q, 1.0), (q, p, -1.0)):
                for u in range(v):
                    mono = [0] * v
                    mono[lamv] += 1
                    mono[u] += 1
                    coeff = sign * np.einsum("m,n->mn", grads[gradw],
                                             mat @ pv[u])
                    add(tuple(mono), coeff)

        coords = complex.coords[verts]
        total = 0.0
        keys = list(terms)
        for i1, k1 in enumerate(keys):
            for k2 in keys:
                mono = tuple(a + b for a, b in zip(k1, k2))
                w = integrate_barycentric_monomial(coords, mono)
                total += w * np.einsum("mn,mn->", terms[k1].conj(),
                                       terms[k2]).real
        out[row] = total
    return out


# -- public local operations ---------------------------------------------------


def action_continuum(field: GaugeField, tet: int) -> float:
    """Exact Yang-Mills action of the Whitney field on one maximal simplex."""
    return float(_continuum_per_tet(field, _resolve_tets(field.complex, tet))[0])


def action_s1(field: GaugeField, tet: int) -> float:
    """Mass-matrix form in the exact face integrals of the curvature."""
    tets = _resolve_tets(field.complex, tet)
    c = integrated_curvatures(field)[field.complex.local_ids[2][tets]]
    m2 = mass_matrices(field.complex, 2)
    return float(_quadratic_face_form(field.complex, m2, tets, c).real[0])


def action_s2(field: GaugeField, tet: int, origin_shift: int = 0) -> float:
    """Mass-matrix form in 1 - F_f, without transports between origins."""
    tets = _resolve_tets(field.complex, tet)
    links = transports(field)
    fh = holonomies(links, origin_shift)
    g = np.eye(field.group.n) - fh[field.complex.local_ids[2][tets]]
    m2 = mass_matrices(field.complex, 2)
    return float(_quadratic_face_form(field.complex, m2, tets, g).real[0])


def action_sprime(field: GaugeField, tet: int, origin_shift: int = 0) -> float:
    """The gauge-invariant action with transport between face origins."""
    tets = _resolve_tets(field.complex, tet)
    links = transports(field)
    fh = holonomies(links, origin_shift)
    return float(_sprime_like_per_tet(links, fh, tets, origin_shift).real[0])


def lagrangian_uf(links: LinkField, face_mats: np.ndarray, tet: int,
                  origin_shift: int = 0) -> float:
    """The sprime bilinear form with a decoupled group-valued face assignment.

    ``face_mats`` assigns a group matrix to every canonical pointed face;
    with the holonomies of ``links`` it reproduces action_sprime exactly.
    """
    tets = _resolve_tets(links.complex, tet)
    return float(_sprime_like_per_tet(links, face_mats, tets, origin_shift).real[0])


def action_log_variant(field: GaugeField, tet: int, origin_shift: int = 0) -> float:
    """Transported quadratic form in the principal logs of the holonomies."""
    tets = _resolve_tets(field.complex, tet)
    return float(_log_variant_per_tet(field, tets, origin_shift).real[0])


def scalar_action_continuum(field: GaugeField, phi: ScalarField, tet: int) -> float:
    """Exact integral of |grad(phi) + A phi|^2 on one maximal simplex."""
    tets = _resolve_tets(field.complex, tet)
    return float(_scalar_continuum_per_tet(field, phi, tets)[0])


def scalar_action_discrete(field: GaugeField, phi: ScalarField, tet: int) -> float:
    """Transported edge-difference form for the scalar field."""
    tets = _resolve_tets(field.complex, tet)
    return float(_scalar_discrete_per_tet(field, phi, tets).real[0])


# -- global sums ----------------------------------------------------------------


def per_simplex_action(kind: str, complex: SimplicialComplex, field: GaugeField,
                       phi: ScalarField = None, origin_shift: int = 0):
    """Complex-valued per-maximal-simplex action values for one kind."""
    kind = kind.lower()
    tets = _resolve_tets(complex, None)
    if kind == "s":
        return _continuum_per_tet(field, tets).astype(complex)
    if kind == "s1":
        c = integrated_curvatures(field)[complex.local_ids[2][tets]]
        return _quadratic_face_form(complex, mass_matrices(complex, 2), tets, c)
    if kind == "s2":
        links = transports(field)
        g = np.eye(field.group.n) - holonomies(links, origin_shift)[
            complex.local_ids[2][tets]]
        return _quadratic_face_form(complex, mass_matrices(complex, 2), tets, g)
    if kind == "sprime":
        links = transports(field)
        fh = holonomies(links, origin_shift)
        return _sprime_like_per_tet(links, fh, tets, origin_shift)
    if kind == "logvariant":
        return _log_variant_per_tet(field, tets, origin_shift)
    if kind == "scalar_c":
        return _scalar_continuum_per_tet(field, phi, tets).astype(complex)
    if kind == "scalar_d":
        return _scalar_discrete_per_tet(field, phi, tets)
    raise ValueError(f"unknown action kind {kind!r}; expected one of {ACTION_KINDS}")


def global_action(kind: str, complex: SimplicialComplex, field: GaugeField,
                  phi: ScalarField = None, origin_shift: int = 0) -> ActionValue:
    """Sum of the local action over all maximal simplexes, canonical order.

    Uses compensated summation for the total; the accumulated imaginary
    part of the ordered-pair sums is returned as a diagnostic.
    """
    vals = per_simplex_action(kind, complex, field, phi, origin_shift)
    per = vals.real.copy()
    total = math.fsum(per.tolist())
    residue = abs(math.fsum(vals.imag.tolist()))
    return ActionValue(total=total, per_simplex=per, imaginary_residue=residue)
