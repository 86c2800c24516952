"""Whitney 0/1/2-forms on embedded simplexes.

Provides the lowest-order finite element differential forms: pointwise
evaluation, exact integration of barycentric monomials, mass matrices
(assembled in closed form, never by quadrature), the integration map from
smooth forms to cochains, interpolation, the coboundary operator and L2
norms of cochains.

Conventions.  A k-cochain stores one value per canonical (ascending)
k-simplex; reading it with a permuted vertex order flips the sign with the
permutation parity.  Pointwise, 1-forms are covectors of shape (m,) and
2-forms are antisymmetric matrices B of shape (m, m) acting as
``omega(u, v) = u . B v``; the pointwise scalar products are the Euclidean
ones, ``u . v`` for covectors and ``tr(B^T B')/2`` for 2-forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .mesh import SimplicialComplex

__all__ = [
    "DegenerateSimplexError",
    "Cochain",
    "MassMatrix",
    "simplex_volume",
    "barycentric_gradients",
    "barycentric_coordinates",
    "whitney_eval",
    "integrate_barycentric_monomial",
    "mass_matrix",
    "mass_matrices",
    "de_rham",
    "interpolate",
    "coboundary",
    "l2_norm",
    "eval_cochain",
    "edge_quadrature",
    "TRIANGLE_POINTS",
    "TRIANGLE_WEIGHTS",
]

_DEGENERACY_TOL = 1e-14


class DegenerateSimplexError(ValueError):
    """An embedded simplex has (numerically) vanishing volume."""


# -- geometry ---------------------------------------------------------------


def simplex_volume(coords: np.ndarray) -> float:
    """Unsigned k-volume of an embedded k-simplex with k+1 coordinate rows."""
    coords = np.asarray(coords, dtype=float)
    e = coords[1:] - coords[:1]
    gram = e @ e.T
    det = np.linalg.det(gram)
    if det < 0.0:
        det = 0.0
    return float(np.sqrt(det) / factorial(len(coords) - 1))


def _require_nondegenerate(coords):
    d = len(coords) - 1
    vol = simplex_volume(coords)
    from .mesh import diameter

    h = diameter(coords)
    if vol <= _DEGENERACY_TOL * max(h, 1.0) ** d:
        raise DegenerateSimplexError(f"simplex volume {vol:.3e} below tolerance")
    return vol


def barycentric_gradients(coords: np.ndarray) -> np.ndarray:
    """Constant gradients of the barycentric coordinates, one row per vertex.

    Works for simplexes embedded with codimension (gradients are tangential
    to the affine hull); the rows sum to zero.
    """
    coords = np.asarray(coords, dtype=float)
    _require_nondegenerate(coords)
    e = coords[1:] - coords[:1]                    # (d, m)
    gram_inv = np.linalg.inv(e @ e.T)
    grads = np.empty((len(coords), coords.shape[1]))
    grads[1:] = gram_inv @ e
    grads[0] = -grads[1:].sum(axis=0)
    return grads


def barycentric_coordinates(coords: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of a point in the simplex's affine hull."""
    grads = barycentric_gradients(coords)
    lam = grads @ (np.asarray(x, dtype=float) - coords[0])
    lam[0] += 1.0
    return lam


def whitney_eval(coords: np.ndarray, subset, x) -> np.ndarray:
    """Value at x of the Whitney form of the subsimplex ``subset`` of T.

    ``coords`` holds the vertices of T; ``subset`` lists positions into
    those rows (ascending), of length k+1 for a k-form with k in {0, 1, 2}.
    """
    subset = tuple(subset)
    if sorted(subset) != list(subset) or len(set(subset)) != len(subset):
        raise ValueError("subset must be strictly ascending vertex positions")
    if not all(0 <= s < len(coords) for s in subset):
        raise ValueError("subset is not a subsimplex of the given simplex")
    lam = barycentric_coordinates(coords, x)
    g = barycentric_gradients(coords)
    if len(subset) == 1:
        return lam[subset[0]]
    if len(subset) == 2:
        a, b = subset
        return lam[a] * g[b] - lam[b] * g[a]
    if len(subset) == 3:
        a, b, c = subset
        return 2.0 * (
            lam[a] * _wedge(g[b], g[c])
            - lam[b] * _wedge(g[a], g[c])
            + lam[c] * _wedge(g[a], g[b])
        )
    raise ValueError("only 0-, 1- and 2-forms are provided")


def _wedge(u, v):
    return np.outer(u, v) - np.outer(v, u)


def integrate_barycentric_monomial(coords: np.ndarray, exponents) -> float:
    """Exact integral over the simplex of prod_i lambda_i**a_i.

    Uses d! |T| (prod a_i!) / (sum a_i + d)! for a d-simplex of volume |T|.
    """
    exponents = tuple(int(a) for a in exponents)
    if len(exponents) != len(coords):
        raise ValueError("need one exponent per vertex")
    if any(a < 0 for a in exponents):
        raise ValueError("exponents must be nonnegative")
    vol = _require_nondegenerate(coords)
    d = len(coords) - 1
    num = factorial(d) * vol
    for a in exponents:
        num *= factorial(a)
    return num / factorial(sum(exponents) + d)


# -- fixed combinatorial tensors --------------------------------------------


@lru_cache(maxsize=None)
def edge_positions(m: int):
    """Local vertex pairs of the edges of an m-simplex, combinations order."""
    return tuple(itertools.combinations(range(m + 1), 2))


@lru_cache(maxsize=None)
def face_positions(m: int):
    return tuple(itertools.combinations(range(m + 1), 3))


@lru_cache(maxsize=None)
def _edge_coeffs(m: int) -> np.ndarray:
    """R[e, v, w]: lambda_e = sum_{v,w} R[e,v,w] lambda_v d(lambda_w)."""
    pairs = edge_positions(m)
    r = np.zeros((len(pairs), m + 1, m + 1))
    for e, (a, b) in enumerate(pairs):
        r[e, a, b] = 1.0
        r[e, b, a] = -1.0
    return r


@lru_cache(maxsize=None)
def _face_coeffs(m: int) -> np.ndarray:
    """Rf[f, v, w, z]: lambda_f = sum Rf[f,v,w,z] lambda_v d(lambda_w)^d(lambda_z)."""
    triples = face_positions(m)
    r = np.zeros((len(triples), m + 1, m + 1, m + 1))
    for f, (a, b, c) in enumerate(triples):
        r[f, a, b, c] = 2.0
        r[f, b, a, c] = -2.0
        r[f, c, a, b] = 2.0
    return r


@lru_cache(maxsize=None)
def _moment2(m: int) -> np.ndarray:
    """N2[v, w] = integral of lambda_v lambda_w over a unit-volume m-simplex."""
    v = m + 1
    n2 = np.empty((v, v))
    for a in range(v):
        for b in range(v):
            n2[a, b] = factorial(m) * (2 if a == b else 1) / factorial(m + 2)
    return n2


@lru_cache(maxsize=None)
def _moment4(m: int) -> np.ndarray:
    """N4[v,w,u,z] = integral of the degree-4 monomial over a unit-volume simplex."""
    v = m + 1
    n4 = np.empty((v,) * 4)
    for combo in itertools.product(range(v), repeat=4):
        counts = np.bincount(combo, minlength=v)
        num = factorial(m)
        for c in counts:
            num *= factorial(int(c))
        n4[combo] = num / factorial(4 + m)
    return n4


# -- per-complex cached geometry tensors -------------------------------------


def _cached(complex: SimplicialComplex, key, builder):
    cache = complex._cache
    if key not in cache:
        cache[key] = builder()
    return cache[key]


def gram_matrices(complex: SimplicialComplex) -> np.ndarray:
    """Gram[t, a, b] = grad(lambda_a) . grad(lambda_b) per maximal simplex."""
    return _cached(
        complex,
        "gram",
        lambda: np.einsum("tam,tbm->tab", complex.bary_gradients, complex.bary_gradients),
    )


def gram_wedge(complex: SimplicialComplex) -> np.ndarray:
    """G2[t,p,q,r,s] = < dl_p ^ dl_q , dl_r ^ dl_s > per maximal simplex."""

    def build():
        g = gram_matrices(complex)
        return np.einsum("tpr,tqs->tpqrs", g, g) - np.einsum("tps,tqr->tpqrs", g, g)

    return _cached(complex, "gram_wedge", build)


def mass_matrices(complex: SimplicialComplex, k: int) -> np.ndarray:
    """Stacked L2 mass matrices of the Whitney k-forms of every maximal simplex.

    Entry [t, S0, S1] is the integral over maximal simplex t of
    ``lambda_S0 . lambda_S1``, with S0, S1 running over the local
    k-subsimplexes in combinations order.  Assembled exactly from the
    closed-form monomial integrals.
    """
    if k not in (1, 2):
        raise ValueError("mass matrices are provided for k in {1, 2}")

    def build():
        m = complex.dim
        n2 = _moment2(m)
        vols = complex.volumes
        if k == 1:
            r = _edge_coeffs(m)
            g = gram_matrices(complex)
            mat = np.einsum("avw,bVW,vV,twW->tab", r, r, n2, g, optimize=True)
        else:
            rf = _face_coeffs(m)
            g2 = gram_wedge(complex)
            mat = np.einsum("avwz,bVWZ,vV,twzWZ->tab", rf, rf, n2, g2, optimize=True)
        return mat * vols[:, None, None]

    return _cached(complex, ("mass", k), build)


@dataclass(frozen=True)
class MassMatrix:
    """Dense symmetric positive definite Gram matrix of one simplex's basis."""

    k: int
    index: tuple          # local subsimplex vertex-position tuples
    entries: np.ndarray


def mass_matrix(coords: np.ndarray, k: int) -> MassMatrix:
    """L2 mass matrix of the Whitney k-forms on one embedded simplex."""
    if k not in (1, 2):
        raise ValueError("mass matrices are provided for k in {1, 2}")
    coords = np.asarray(coords, dtype=float)
    vol = _require_nondegenerate(coords)
    m = len(coords) - 1
    grads = barycentric_gradients(coords)
    gram = grads @ grads.T
    n2 = _moment2(m)
    if k == 1:
        r = _edge_coeffs(m)
        mat = np.einsum("avw,bVW,vV,wW->ab", r, r, n2, gram, optimize=True) * vol
        index = edge_positions(m)
    else:
        rf = _face_coeffs(m)
        g2 = np.einsum("pr,qs->pqrs", gram, gram) - np.einsum("ps,qr->pqrs", gram, gram)
        mat = np.einsum("avwz,bVWZ,vV,wzWZ->ab", rf, rf, n2, g2, optimize=True) * vol
        index = face_positions(m)
    return MassMatrix(k=k, index=index, entries=mat)


# -- cochains ----------------------------------------------------------------


def _permutation_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class Cochain:
    """A value per canonical k-simplex of a complex.

    ``values`` has shape (N_k, ...); trailing axes hold vector or matrix
    values (algebra-valued cochains store (N_k, n, n) complex arrays).
    """

    def __init__(self, complex: SimplicialComplex, k: int, values: np.ndarray):
        values = np.asarray(values)
        if not 0 <= k <= complex.dim:
            raise ValueError(f"cochain degree {k} out of range")
        if values.shape[0] != len(complex.simplices[k]):
            raise ValueError(
                f"{values.shape[0]} values for {len(complex.simplices[k])} simplexes"
            )
        self.complex = complex
        self.k = k
        self.values = values

    @classmethod
    def zeros(cls, complex, k, value_shape=(), dtype=float):
        n = len(complex.simplices[k])
        return cls(complex, k, np.zeros((n, *value_shape), dtype=dtype))

    def value(self, simplex):
        """Value on a simplex given in any vertex order (sign rule applied)."""
        simplex = tuple(simplex)
        canon = tuple(sorted(simplex))
        sid = self.complex.index[self.k][canon]
        return _permutation_sign(simplex) * self.values[sid]

    def copy(self):
        return Cochain(self.complex, self.k, self.values.copy())

    def __add__(self, other):
        self._check_compatible(other)
        return Cochain(self.complex, self.k, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return Cochain(self.complex, self.k, self.values - other.values)

    def __rmul__(self, scalar):
        return Cochain(self.complex, self.k, scalar * self.values)

    def _check_compatible(self, other):
        if self.complex is not other.complex or self.k != other.k:
            raise ValueError("cochains live on different complexes or degrees")


def coboundary(u: Cochain) -> Cochain:
    """(delta u)_T = sum over facets T' of o(T, T') u_{T'}."""
    k = u.k
    complex = u.complex
    if k >= complex.dim:
        raise ValueError("coboundary requires k < dim")
    fac = complex.facets[k + 1]
    out = np.zeros((len(complex.simplices[k + 1]), *u.values.shape[1:]),
                   dtype=u.values.dtype)
    for p in range(k + 2):
        sign = -1.0 if p % 2 else 1.0
        out += sign * u.values[fac[:, p]]
    return Cochain(complex, k + 1, out)


# -- integration of smooth forms ---------------------------------------------

#: 12-point symmetric triangle rule, exact for polynomial degree 6.
#: Barycentric points and weights normalized so the integral over a
#: triangle of area |f| is |f| * sum_q w_q values_q.
_TRI_GROUPS = [
    (0.063089014491502228, 0.050844906370206817),
    (0.249286745170910421, 0.116786275726379366),
]
_TRI_PAIR = (0.053145049844816947, 0.310352451033784405, 0.082851075618373575)


def _triangle_rule():
    pts = []
    wts = []
    for a, w in _TRI_GROUPS:
        for lam in ((1 - 2 * a, a, a), (a, 1 - 2 * a, a), (a, a, 1 - 2 * a)):
            pts.append(lam)
            wts.append(w)
    a, b, w = _TRI_PAIR
    c = 1.0 - a - b
    for lam in itertools.permutations((a, b, c)):
        pts.append(lam)
        wts.append(w)
    return np.array(pts), np.array(wts)


TRIANGLE_POINTS, TRIANGLE_WEIGHTS = _triangle_rule()


@lru_cache(maxsize=None)
def edge_quadrature(npts: int = 7):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


def de_rham(complex: SimplicialComplex, k: int, form) -> Cochain:
    """Integrate a smooth k-form over every canonical k-simplex.

    ``form`` maps a point x of shape (m,) to: a value (k = 0); covector
    components of shape (m, ...) (k = 1); antisymmetric components of shape
    (m, m, ...) (k = 2).  Trailing axes are carried through, so matrix- and
    vector-valued forms integrate componentwise.  Quadrature: 7-point
    Gauss-Legendre on edges, 12-point degree-6 symmetric rule on faces.
    """
    coords = complex.coords
    if k == 0:
        vals = [np.asarray(form(x)) for x in coords]
        return Cochain(complex, 0, np.stack(vals))
    if k == 1:
        t, w = edge_quadrature()
        out = []
        for i, j in complex.simplices[1]:
            xi, xj = coords[i], coords[j]
            vec = xj - xi
            acc = 0.0
            for tq, wq in zip(t, w):
                val = np.asarray(form(xi + tq * vec))
                acc = acc + wq * np.tensordot(vec, val, axes=(0, 0))
            out.append(acc)
        return Cochain(complex, 1, np.stack(out))
    if k == 2:
        out = []
        for i, j, kk in complex.simplices[2]:
            xi, xj, xk = coords[i], coords[j], coords[kk]
            e1, e2 = xj - xi, xk - xi
            acc = 0.0
            for lam, wq in zip(TRIANGLE_POINTS, TRIANGLE_WEIGHTS):
                x = lam[0] * xi + lam[1] * xj + lam[2] * xk
                b = np.asarray(form(x))
                acc = acc + wq * np.einsum("mn...,m,n->...", b, e1, e2)
            out.append(0.5 * acc)
        return Cochain(complex, 2, np.stack(out))
    raise ValueError("only k in {0, 1, 2} is provided")


def interpolate(complex: SimplicialComplex, k: int, form) -> Cochain:
    """Coefficients of the Whitney interpolant of a smooth k-form.

    The interpolant is the Whitney form whose simplex integrals reproduce
    those of the input, so its cochain is exactly the integration map; the
    coefficients of its exterior derivative are the coboundary of these.
    """
    return de_rham(complex, k, form)


def eval_cochain(u: Cochain, tet: int, x) -> np.ndarray:
    """Pointwise value on maximal simplex ``tet`` of the Whitney form of u."""
    complex = u.complex
    verts = complex.simplices[complex.dim][tet]
    coords = complex.coords[verts]
    if u.k == 0:
        lam = barycentric_coordinates(coords, x)
        return np.tensordot(lam, u.values[verts], axes=(0, 0))
    pos = edge_positions(complex.dim) if u.k == 1 else face_positions(complex.dim)
    sids = complex.local_ids[u.k][tet]
    basis = np.stack([whitney_eval(coords, p, x) for p in pos])
    return np.tensordot(basis, u.values[sids], axes=(0, 0))


def l2_norm(complex: SimplicialComplex, u: Cochain) -> float:
    """Global L2 norm of the Whitney form represented by a 1- or 2-cochain.

    sqrt of sum over maximal simplexes of u^T M(T) u, with the algebra or
    vector inner product contracted inside for non-scalar values.
    """
    if u.k not in (1, 2):
        raise ValueError("l2_norm is provided for k in {1, 2}")
    mats = mass_matrices(complex, u.k)
    local = u.values[complex.local_ids[u.k]]          # (N, L, ...)
    flat = local.reshape(local.shape[0], local.shape[1], -1)
    total = np.einsum("tab,tax,tbx->", mats, flat.conj(), flat).real
    return float(np.sqrt(max(total, 0.0)))
