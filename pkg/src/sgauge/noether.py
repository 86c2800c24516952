"""Discrete conservation identities for fiber-wise invariant Lagrangians.

Fields attach a value (a "fiber") to some of the subsimplexes of each
maximal simplex; a Lagrangian per maximal simplex is a real function of
those values, and a one-parameter family of fiber automorphisms that
leaves every local Lagrangian invariant induces an exact combinatorial
conservation law: a weighted sum of Euler-Lagrange terms at a vertex
equals the signed sum of antisymmetric edge fluxes,

    (m+1) W(i) = sum_j V(i, j).

Euler-Lagrange contractions are evaluated by finite differences along the
flow, so the identity holds up to FD truncation; its exactness is
certified by the fourth-order scaling of the residual in the step.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lie
from .gauge import GaugeField, transports
from .mesh import SimplicialComplex
from .whitney import mass_matrices

__all__ = [
    "NotInvariantError",
    "IncompatibleFieldError",
    "OneParameterAction",
    "NoetherWeights",
    "uniform_weights",
    "min_vertex_weights",
    "euler_lagrange",
    "noether_local",
    "noether_global",
    "NoetherLocalReport",
    "NoetherGlobalReport",
    "gauge_fibers",
    "gauge_lagrangian",
    "vertex_gauge_flow",
    "noether_gauge_check",
]


class NotInvariantError(ValueError):
    """The flow does not leave the Lagrangian invariant."""


class IncompatibleFieldError(ValueError):
    """Fiber values attached to a shared subsimplex disagree."""


@dataclass(frozen=True)
class OneParameterAction:
    """Fiber-wise flow: ``flow(simplex, t, value) -> value``, identity at t=0."""

    flow: object

    def __call__(self, simplex, t, value):
        return self.flow(simplex, t, value)

    def flow_all(self, fibers: Mapping, t: float) -> dict:
        return {s: self.flow(s, t, v) for s, v in fibers.items()}

    def check_group_law(self, fibers: Mapping, samples=((0.1, 0.2), (-0.05, 0.15)),
                        tol: float = 1e-10) -> None:
        for s, v in fibers.items():
            v0 = np.asarray(self.flow(s, 0.0, v), dtype=complex)
            if np.abs(v0 - np.asarray(v, dtype=complex)).max() > tol:
                raise ValueError(f"flow at t=0 is not the identity on {s}")
            for a, b in samples:
                lhs = np.asarray(self.flow(s, a + b, v), dtype=complex)
                rhs = np.asarray(self.flow(s, a, self.flow(s, b, v)), dtype=complex)
                if np.abs(lhs - rhs).max() > tol * (1.0 + np.abs(lhs).max()):
                    raise ValueError(f"group law violated on fiber {s}")


class NoetherWeights:
    """Weights p(i, S), zero when S + i is not a simplex of the complex."""

    def __init__(self, complex: SimplicialComplex, fn):
        self.complex = complex
        self._fn = fn

    def __call__(self, i: int, s) -> float:
        s = tuple(sorted(s))
        joined = tuple(sorted((*s, i)))
        if i in s or not self.complex.contains_simplex(joined):
            return 0.0
        return float(self._fn(i, s))

    def exact(self, i: int, s):
        """Weight as given by the underlying rule (Fraction when available)."""
        return self._fn(i, tuple(sorted(s)))

    def validate(self) -> None:
        """Check sum over i in S' of p(i, S'-i) = 1 on every simplex, dim >= 1.

        Exact in rational arithmetic when the rule yields Fractions;
        otherwise within 1e-12.
        """
        for k in range(1, self.complex.dim + 1):
            for row in self.complex.simplices[k]:
                total = sum(self.exact(i, tuple(v for v in row if v != i))
                            for i in row)
                if isinstance(total, Fraction):
                    ok = total == 1
                else:
                    ok = abs(total - 1.0) <= 1e-12
                if not ok:
                    raise ValueError(
                        f"weights sum to {total} != 1 on simplex {tuple(row)}"
                    )


def uniform_weights(complex: SimplicialComplex) -> NoetherWeights:
    """p(i, S) = 1 / (#vertices of S + 1); exact partition of unity."""
    return NoetherWeights(complex, lambda i, s: Fraction(1, len(s) + 1))


def min_vertex_weights(complex: SimplicialComplex) -> NoetherWeights:
    """All weight on the lowest vertex: p(i, S) = 1 if i < min(S) else 0."""
    return NoetherWeights(complex, lambda i, s: Fraction(1 if i < min(s) else 0))


# -- Euler-Lagrange contractions by finite differences -----------------------


class _Override(Mapping):
    """Read-only view of a mapping with one key replaced."""

    def __init__(self, base, key, value):
        self._base = base
        self._key = key
        self._value = value

    def __getitem__(self, key):
        return self._value if key == self._key else self._base[key]

    def __iter__(self):
        return iter(self._base)

    def __len__(self):
        return len(self._base)


def _fd4(fn, step):
    vals = [fn(c * step) for c in (-2.0, -1.0, 1.0, 2.0)]
    if not all(np.isfinite(v) for v in vals):
        raise ValueError("Lagrangian evaluated to a non-finite value")
    return (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * step)


def euler_lagrange(lagrangian, flow: OneParameterAction, fibers: Mapping, s,
                   fd_step: float = 1e-4, richardson: bool = True) -> float:
    """d/dt at t=0 of the Lagrangian with only fiber ``s`` flowed.

    Fourth-order central differences in t; one Richardson level by default.
    """
    s = tuple(s)
    v0 = fibers[s]
    flowed = flow(s, fd_step, v0)
    if np.array_equal(np.asarray(flowed), np.asarray(v0)):
        return 0.0      # flow acts trivially on this fiber

    def at(t):
        return float(lagrangian(_Override(fibers, s, flow(s, t, v0))))

    d = _fd4(at, fd_step)
    if richardson:
        d_half = _fd4(at, fd_step / 2.0)
        d = (16.0 * d_half - d) / 15.0
    return d


def _subsimplices(simplex):
    simplex = tuple(simplex)
    for k in range(1, len(simplex) + 1):
        yield from itertools.combinations(simplex, k)


def _check_invariance(lagrangian, flow, fibers, tol):
    base = float(lagrangian(fibers))
    for t in (0.1, -0.1, 0.01, -0.01):
        moved = float(lagrangian(flow.flow_all(fibers, t)))
        if abs(moved - base) > tol * (1.0 + abs(base)):
            raise NotInvariantError(
                f"Lagrangian changes by {moved - base:.3e} under the flow at t={t}"
            )


@dataclass
class NoetherLocalReport:
    simplex: tuple
    w: dict
    v: dict
    residual: float


@dataclass
class NoetherGlobalReport:
    vertices: np.ndarray
    w: np.ndarray
    flux: np.ndarray          # sum_j V(i, j) per vertex
    residuals: np.ndarray     # |(m+1) W(i) - flux(i)|
    v: dict = field(repr=False)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0

    def rows(self):
        for i, w, fl, r in zip(self.vertices, self.w, self.flux, self.residuals):
            yield int(i), float(w), float(fl), float(r)


def _local_terms(simplex, lagrangian, flow, fibers, fd_step, richardson):
    """F_T(S) for every fibered subsimplex S of the maximal simplex."""
    terms = {}
    for s in _subsimplices(simplex):
        if s in fibers:
            terms[s] = euler_lagrange(lagrangian, flow, fibers, s,
                                      fd_step=fd_step, richardson=richardson)
    return terms


def _assemble_wv(simplex, terms, p):
    m = len(simplex) - 1
    w = {}
    v = {}
    for i in simplex:
        acc = terms.get((i,), 0.0)
        for s, fs in terms.items():
            if len(s) >= 2 and i in s:
                acc += p(i, tuple(x for x in s if x != i)) * fs
        w[i] = acc
    for i, j in itertools.permutations(simplex, 2):
        acc = terms.get((i,), 0.0) - terms.get((j,), 0.0)
        for s, fs in terms.items():
            if len(s) >= 2:
                if i in s and j not in s:
                    acc += p(i, tuple(x for x in s if x != i)) * fs
                if j in s and i not in s:
                    acc -= p(j, tuple(x for x in s if x != j)) * fs
        v[(i, j)] = acc
    return w, v


def noether_local(simplex, lagrangian, flow: OneParameterAction, fibers: Mapping,
                  weights: NoetherWeights, fd_step: float = 1e-4,
                  richardson: bool = True, check_invariance: bool = True,
                  invariance_tol: float = 1e-8) -> NoetherLocalReport:
    """Local conservation identity on one maximal simplex.

    Computes W(i) and the antisymmetric V(i, j) from the Euler-Lagrange
    contractions and returns max_i |(m+1) W(i) - sum_j V(i, j)|.
    """
    simplex = tuple(simplex)
    local_fibers = {s: fibers[s] for s in _subsimplices(simplex) if s in fibers}
    if check_invariance:
        _check_invariance(lagrangian, flow, local_fibers, invariance_tol)
    terms = _local_terms(simplex, lagrangian, flow, local_fibers,
                         fd_step, richardson)
    w, v = _assemble_wv(simplex, terms, weights)
    m = len(simplex) - 1
    residual = max(
        abs((m + 1) * w[i] - sum(v[(i, j)] for j in simplex if j != i))
        for i in simplex
    )
    return NoetherLocalReport(simplex=simplex, w=w, v=v, residual=residual)


def _merge_fibers(complex, fibers):
    """Accept a global mapping or per-maximal-simplex mappings; check agreement."""
    if not fibers or not isinstance(next(iter(fibers)), (int, np.integer)):
        return dict(fibers)
    merged = {}
    for tid, local in fibers.items():
        for s, val in local.items():
            s = tuple(s)
            if s in merged:
                if not np.allclose(np.asarray(merged[s]), np.asarray(val),
                                   rtol=0.0, atol=1e-13):
                    raise IncompatibleFieldError(
                        f"fiber {s} disagrees between maximal simplexes"
                    )
            else:
                merged[s] = val
    return merged


def noether_global(complex: SimplicialComplex, lagrangians, flow: OneParameterAction,
                   fibers, weights: NoetherWeights, fd_step: float = 1e-4,
                   richardson: bool = True, check_invariance: bool = False
                   ) -> NoetherGlobalReport:
    """Global conservation identity, assembled from all maximal simplexes.

    ``lagrangians`` maps a maximal-simplex id to its Lagrangian (a callable
    of the fiber mapping).  Fiber values may be given globally or per
    maximal simplex (checked for agreement on shared subsimplexes).
    """
    fibers = _merge_fibers(complex, fibers)
    m = complex.dim
    nv = len(complex.coords)
    w = np.zeros(nv)
    vglob: dict = {}
    for tid, row in enumerate(complex.simplices[m]):
        simplex = tuple(int(x) for x in row)
        lag = lagrangians[tid] if not callable(lagrangians) else lagrangians(tid)
        local_fibers = {s: fibers[s] for s in _subsimplices(simplex) if s in fibers}
        if check_invariance:
            _check_invariance(lag, flow, local_fibers, 1e-8)
        terms = _local_terms(simplex, lag, flow, local_fibers, fd_step, richardson)
        wt, vt = _assemble_wv(simplex, terms, weights)
        for i, val in wt.items():
            w[i] += val
        for key, val in vt.items():
            vglob[key] = vglob.get(key, 0.0) + val
    flux = np.zeros(nv)
    for (i, j), val in vglob.items():
        flux[i] += val
    residuals = np.abs((m + 1) * w - flux)
    return NoetherGlobalReport(
        vertices=np.arange(nv), w=w, flux=flux, residuals=residuals, v=vglob
    )


# -- gauge-theoretic instantiation --------------------------------------------


def gauge_fibers(field: GaugeField, phi=None) -> dict:
    """Edge fibers = link transports of the field; optional vertex fibers."""
    links = transports(field)
    fibers = {
        (int(i), int(j)): links.matrices[e]
        for e, (i, j) in enumerate(field.complex.simplices[1])
    }
    if phi is not None:
        for i in range(len(phi.vectors)):
            fibers[(i,)] = phi.vectors[i]
    return fibers


def gauge_lagrangian(complex: SimplicialComplex, group: lie.LieGroup, tet_id: int):
    """The local gauge action of one maximal simplex as a function of fibers.

    Edge fibers hold the link transports along canonical edges; when vertex
    fibers (C^n vectors) are present the transported scalar edge-difference
    form is added.  Both parts are invariant under vertex gauge flows.
    """
    m = complex.dim
    verts = tuple(int(x) for x in complex.simplices[m][tet_id])
    m2 = mass_matrices(complex, 2)[tet_id]
    m1 = mass_matrices(complex, 1)[tet_id]
    faces = [tuple(verts[p] for p in combo)
             for combo in itertools.combinations(range(m + 1), 3)]
    eye = group.identity()

    def link(fibers, to, frm):
        if to == frm:
            return eye
        if frm < to:
            return fibers[(frm, to)]
        return fibers[(to, frm)].conj().T

    def lagrangian(fibers) -> float:
        gmats = []
        for (i, j, k) in faces:
            f = link(fibers, i, k) @ link(fibers, k, j) @ link(fibers, j, i)
            gmats.append(eye - f)
        total = 0.0
        for a, fa in enumerate(faces):
            for b, fb in enumerate(faces):
                t_ab = link(fibers, fa[0], fb[0])
                term = t_ab.conj().T @ gmats[a].conj().T @ t_ab @ gmats[b]
                total += m2[a, b] * np.trace(term).real
        if any((v,) in fibers for v in verts):
            pairs = list(itertools.combinations(range(m + 1), 2))
            diffs = []
            for (p, q) in pairs:
                u = link(fibers, verts[q], verts[p])
                diffs.append(fibers[(verts[q],)] - u @ fibers[(verts[p],)])
            for a, (pa, qa) in enumerate(pairs):
                for b, (pb, qb) in enumerate(pairs):
                    u = link(fibers, verts[qb], verts[qa])
                    total += m1[a, b] * np.vdot(u @ diffs[a], diffs[b]).real
        return float(total)

    return lagrangian


def vertex_gauge_flow(group: lie.LieGroup, vertex: int, generator: np.ndarray
                      ) -> OneParameterAction:
    """One-parameter gauge rotation exp(t g) at a single vertex.

    Link fibers with the vertex at their target are left-multiplied by
    exp(t g); links with the vertex at their source are right-multiplied by
    exp(-t g); a vertex fiber at the vertex rotates by exp(t g); all other
    fibers are fixed.
    """
    generator = np.asarray(generator, dtype=complex)

    def flow(s, t, value):
        s = tuple(s)
        if vertex not in s:
            return value
        g = lie.exp_matrices(t * generator)
        if len(s) == 1:
            return g @ value
        if s[1] == vertex:          # canonical edge (i, j) transports i -> j
            return g @ value
        return value @ g.conj().T

    return OneParameterAction(flow)


def noether_gauge_check(complex: SimplicialComplex, field: GaugeField,
                        vertex: int, generator: np.ndarray,
                        weights: NoetherWeights = None, phi=None,
                        fd_step: float = 1e-4, richardson: bool = True
                        ) -> NoetherGlobalReport:
    """Global conservation check for the gauge action under a vertex rotation."""
    if weights is None:
        weights = uniform_weights(complex)
    fibers = gauge_fibers(field, phi)
    flow = vertex_gauge_flow(field.group, vertex, generator)
    lags = {tid: gauge_lagrangian(complex, field.group, tid)
            for tid in range(len(complex.simplices[complex.dim]))}
    return noether_global(complex, lags, flow, fibers, weights,
                          fd_step=fd_step, richardson=richardson)
