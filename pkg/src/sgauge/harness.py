"""Convergence and consistency experiments on refining mesh sequences.

Built-in smooth gauge fields (trigonometric or polynomial coefficient
functions times a fixed orthonormal algebra basis) are interpolated onto
the structured cube meshes; the studies then measure, level by level, the
differences between the exact action of the interpolated field and its
discrete counterparts, directional-derivative differences against a
Sobolev-type cochain norm, the face-holonomy expansion error, the
transported-curvature error, and the dependence of the transported action
on the choice of face origins.  Orders are estimated by least-squares fits
of log error against log mesh size.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import lie
from .action import _vertex_transports, global_action
from .gauge import (
    DiscreteGaugeTransform,
    GaugeField,
    apply_gauge,
    holonomies,
    integrated_curvatures,
    transports,
)
from .lie import GROUPS, LieGroup
from .mesh import SimplicialComplex, build_unit_cube_mesh, diameter
from .whitney import Cochain, coboundary, de_rham, face_positions, l2_norm

__all__ = [
    "SmoothGaugeField",
    "FIELD_IDS",
    "builtin_field",
    "interpolate_field",
    "interpolation_diagnostics",
    "directional_derivative",
    "ConvergenceReport",
    "fit_order",
    "consistency_action_study",
    "consistency_derivative_study",
    "holonomy_error_study",
    "transport_conjugation_study",
    "origin_dependence_study",
    "gauge_invariance_check",
]

# Wavevector (3 components) and phase of the built-in cosine coefficients.
# Chosen incommensurate with the mesh so no accidental parity survives.
_TRIG_TABLE = (
    (1.9, 0.8, -0.6, 0.4),
    (-0.7, 2.2, 1.1, 1.3),
    (1.2, -1.5, 2.0, 2.1),
    (2.4, 1.0, 0.5, 0.7),
    (-1.1, 1.8, -2.2, 1.9),
    (0.6, -2.3, 1.4, 0.2),
    (2.0, 1.6, -1.0, 2.6),
    (-1.8, 0.9, 2.3, 1.1),
    (1.4, 2.1, 0.8, 0.5),
    (0.9, -1.7, 1.2, 2.9),
    (-2.1, 0.4, 1.8, 0.8),
    (1.6, 1.1, -2.4, 1.5),
    (0.5, 2.0, 0.9, 2.3),
    (-1.3, -0.8, 2.1, 0.9),
    (2.2, -0.5, 1.3, 1.7),
    (1.0, 1.9, -1.6, 0.3),
    (-0.9, 1.4, 2.2, 2.5),
    (1.7, -2.0, 0.7, 1.2),
    (0.8, 0.6, 2.4, 0.6),
    (-2.3, 1.2, -0.9, 1.8),
    (1.1, -1.0, 1.9, 2.7),
    (2.1, 0.7, -1.4, 0.1),
    (-0.6, 2.4, 0.4, 1.4),
    (1.5, -1.9, -1.1, 2.2),
)

# Constant + linear coefficients a0 + a . x for the abelian linear field.
_LINEAR_TABLE = (
    (0.3, 0.7, -0.2, 0.5),
    (-0.4, 0.1, 0.8, 0.3),
    (0.2, -0.5, 0.4, -0.6),
)


def _trig_fn(row):
    a = np.array(row[:3])
    phase = row[3]

    def f(x):
        return np.cos(a[: len(x)] @ x + phase)

    def grad(x):
        return -np.sin(a[: len(x)] @ x + phase) * a[: len(x)]

    return f, grad


def _linear_fn(row):
    a0 = row[0]
    a = np.array(row[1:])

    def f(x):
        return a0 + a[: len(x)] @ x

    def grad(x):
        return a[: len(x)].copy()

    return f, grad


@dataclass(frozen=True)
class SmoothGaugeField:
    """A smooth algebra-valued 1-form with exact derivatives.

    ``coefficients[d][mu]`` is a (value, gradient) callable pair; the form
    is amplitude * sum_{d, mu} c_{d, mu}(x) basis_d dx^mu.
    """

    name: str
    group: LieGroup
    coefficients: tuple
    amplitude: float = 1.0

    def one_form(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = len(x)
        out = np.zeros((m, self.group.n, self.group.n), dtype=complex)
        for d, row in enumerate(self.coefficients):
            basis = self.group.basis[d]
            for mu in range(m):
                out[mu] += row[mu][0](x) * basis
        return self.amplitude * out

    def curvature(self, x) -> np.ndarray:
        """Antisymmetric components of dA + [A, A]/2 at x, shape (m, m, n, n)."""
        x = np.asarray(x, dtype=float)
        m = len(x)
        n = self.group.n
        a = self.one_form(x)
        grad = np.zeros((m, m, n, n), dtype=complex)   # grad[mu, nu] = d_mu A_nu
        for d, row in enumerate(self.coefficients):
            basis = self.group.basis[d]
            for nu in range(m):
                g = row[nu][1](x)
                for mu in range(m):
                    grad[mu, nu] += self.amplitude * g[mu] * basis
        comm = np.einsum("mij,njk->mnik", a, a)
        comm = comm - np.swapaxes(comm, 0, 1)
        return grad - np.swapaxes(grad, 0, 1) + comm


FIELD_IDS = ("u1-trig", "su2-trig", "su3-trig", "u1-linear")


def builtin_field(name: str, amplitude: float = None) -> SmoothGaugeField:
    """Look up a built-in smooth field; optionally override its amplitude."""
    group_name, _, kind = name.partition("-")
    if group_name not in GROUPS:
        raise KeyError(f"unknown group {group_name!r} in field id {name!r}")
    group = GROUPS[group_name]
    if kind == "trig":
        rows = [
            tuple(_trig_fn(_TRIG_TABLE[(3 * d + mu) % len(_TRIG_TABLE)])
                  for mu in range(3))
            for d in range(group.dim)
        ]
    elif kind == "linear":
        if group is not GROUPS["u1"]:
            raise KeyError("the linear built-in field is abelian only")
        rows = [tuple(_linear_fn(_LINEAR_TABLE[mu]) for mu in range(3))]
    else:
        raise KeyError(f"unknown field id {name!r}; built-ins: {FIELD_IDS}")
    return SmoothGaugeField(name=name, group=group, coefficients=tuple(rows),
                            amplitude=1.0 if amplitude is None else amplitude)


def interpolate_field(smooth: SmoothGaugeField, complex: SimplicialComplex
                      ) -> GaugeField:
    """Edge integrals of the smooth field as a gauge field on the complex.

    Raises BranchCutError when an edge value leaves the principal-log-safe
    region (the field is too rough for this mesh).
    """
    cochain = de_rham(complex, 1, smooth.one_form)
    return GaugeField(complex, smooth.group, cochain.values)


def interpolation_diagnostics(field: GaugeField) -> dict:
    """max_e |A_e|/h_e and max_f |(delta A)_f|/h_f**2 (Frobenius norms)."""
    complex = field.complex
    coords = complex.coords
    edges = complex.simplices[1]
    h_e = np.linalg.norm(coords[edges[:, 1]] - coords[edges[:, 0]], axis=1)
    edge_ratio = np.linalg.norm(field.values, axis=(1, 2)) / h_e
    d = coboundary(field.cochain())
    h_f = np.array([diameter(coords[f]) for f in complex.simplices[2]])
    face_ratio = np.linalg.norm(d.values, axis=(1, 2)) / h_f ** 2
    return {
        "max_edge_ratio": float(edge_ratio.max()),
        "max_face_ratio": float(face_ratio.max()),
    }


# -- directional derivatives --------------------------------------------------


def directional_derivative(kind: str, field: GaugeField, direction,
                           eps: float = 1e-3, richardson: bool = True,
                           phi=None, origin_shift: int = 0):
    """Gateaux derivative of a global action along a 1-cochain direction.

    Fourth-order central differences at step ``eps`` with one Richardson
    level; returns (derivative, truncation estimate).  The shifted fields
    A +- 2 eps A' must remain log-safe.
    """
    vals = direction.values if isinstance(direction, Cochain) else np.asarray(direction)

    def f(e):
        return global_action(kind, field.complex, field.shifted(vals, e),
                             phi=phi, origin_shift=origin_shift).total

    def d4(h):
        return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)

    d = d4(eps)
    if not richardson:
        return d, abs(eps) ** 4
    d_half = d4(eps / 2)
    combined = (16 * d_half - d) / 15
    return combined, abs(d_half - d) / 15


# -- order fitting and reports -------------------------------------------------


def fit_order(hs, errors):
    """Least-squares slope of log10(error) against log10(h).

    Returns (slope, residual) with residual the maximum absolute deviation
    of the fit in log10 units.  All-zero errors short-circuit to slope
    infinity; otherwise at least 3 positive errors are required.
    """
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors < 0.0):
        raise ValueError("errors must be nonnegative")
    usable = errors > 0.0
    if not usable.any():
        return float("inf"), 0.0
    if usable.sum() < 3:
        raise ValueError("fewer than 3 usable points")
    x = np.log10(hs[usable])
    y = np.log10(errors[usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())
    return float(slope), residual


@dataclass
class ConvergenceReport:
    """(h, error) series of one study with its fitted log-log slope."""

    study: str
    group: str
    field: str
    seed: int
    ns: tuple
    hs: np.ndarray
    errors: np.ndarray
    slope: float
    residual: float
    extras: dict = dataclass_field(default_factory=dict)

    def columns(self):
        cols = [("n", self.ns), ("h", self.hs), ("error", self.errors)]
        cols.extend(self.extras.items())
        return cols

    def summary(self) -> dict:
        return {
            "study": self.study,
            "group": self.group,
            "field": self.field,
            "seed": self.seed,
            "slope": self.slope,
            "residual": self.residual,
        }


def _make_report(study, smooth, seed, ns, hs, errors, extras=None):
    slope, residual = fit_order(hs, errors)
    return ConvergenceReport(
        study=study, group=smooth.group.name, field=smooth.name, seed=seed,
        ns=tuple(ns), hs=np.asarray(hs), errors=np.asarray(errors),
        slope=slope, residual=residual, extras=extras or {},
    )


# -- the studies ----------------------------------------------------------------


def consistency_action_study(smooth: SmoothGaugeField, n_list,
                             mesh_builder=build_unit_cube_mesh,
                             seed: int = 0) -> ConvergenceReport:
    """|S - S'| of the interpolated field per level, with intermediate splits."""
    hs, errs = [], []
    splits = {"s_minus_s1": [], "s1_minus_s2": [], "s2_minus_sprime": [],
              "value_s": [], "value_sprime": []}
    for n in n_list:
        complex = mesh_builder(n)
        a = interpolate_field(smooth, complex)
        vals = {k: global_action(k, complex, a).total
                for k in ("s", "s1", "s2", "sprime")}
        hs.append(complex.mesh_size())
        errs.append(abs(vals["s"] - vals["sprime"]))
        splits["s_minus_s1"].append(abs(vals["s"] - vals["s1"]))
        splits["s1_minus_s2"].append(abs(vals["s1"] - vals["s2"]))
        splits["s2_minus_sprime"].append(abs(vals["s2"] - vals["sprime"]))
        splits["value_s"].append(vals["s"])
        splits["value_sprime"].append(vals["sprime"])
    return _make_report("converge-action", smooth, seed, n_list, hs, errs, splits)


def _random_direction(complex, group, seed_key) -> np.ndarray:
    rng = np.random.default_rng(seed_key)
    ne = len(complex.simplices[1])
    coeffs = rng.uniform(-1.0, 1.0, (ne, group.dim))
    return np.einsum("ed,dij->eij", coeffs, group.basis)


def _direction_error(complex, a, dirvals, eps):
    ds, _ = directional_derivative("s", a, dirvals, eps=eps)
    dsp, _ = directional_derivative("sprime", a, dirvals, eps=eps)
    dc = Cochain(complex, 1, dirvals)
    denom = l2_norm(complex, coboundary(dc)) + l2_norm(complex, dc)
    return abs(ds - dsp) / denom


def consistency_derivative_study(smooth: SmoothGaugeField, n_list,
                                 directions_per_n: int = 32, seed: int = 0,
                                 include_coordinate_directions: bool = True,
                                 eps: float = 1e-3,
                                 mesh_builder=build_unit_cube_mesh
                                 ) -> ConvergenceReport:
    """Sampled sup of |DS A' - DS' A'| / (||dA'|| + ||A'||) per level.

    Directions are seeded random algebra-valued 1-cochains; on the coarsest
    level the single-edge coordinate directions are added, so the reported
    maximum is a lower bound of the true sup over directions.
    """
    group = smooth.group
    hs, errs, counts = [], [], []
    for level, n in enumerate(n_list):
        complex = mesh_builder(n)
        a = interpolate_field(smooth, complex)
        worst = 0.0
        count = 0
        for k in range(directions_per_n):
            dirvals = _random_direction(complex, group, [seed, n, k])
            worst = max(worst, _direction_error(complex, a, dirvals, eps))
            count += 1
        if include_coordinate_directions and level == 0:
            ne = len(complex.simplices[1])
            for e in range(ne):
                for d in range(group.dim):
                    dirvals = np.zeros((ne, group.n, group.n), dtype=complex)
                    dirvals[e] = group.basis[d]
                    worst = max(worst, _direction_error(complex, a, dirvals, eps))
                    count += 1
        hs.append(complex.mesh_size())
        errs.append(worst)
        counts.append(count)
    return _make_report("converge-derivative", smooth, seed, n_list, hs, errs,
                        {"directions": counts})


def holonomy_error_study(smooth: SmoothGaugeField, n_list,
                         mesh_builder=build_unit_cube_mesh,
                         seed: int = 0) -> ConvergenceReport:
    """max over faces of |(1 - F_f) - integral_f of the curvature| per level."""
    hs, errs = [], []
    for n in n_list:
        complex = mesh_builder(n)
        a = interpolate_field(smooth, complex)
        fh = holonomies(transports(a))
        c = integrated_curvatures(a)
        diff = (np.eye(a.group.n) - fh) - c
        hs.append(complex.mesh_size())
        errs.append(float(np.linalg.norm(diff, axis=(1, 2)).max()))
    return _make_report("converge-holonomy", smooth, seed, n_list, hs, errs)


def transport_conjugation_study(smooth: SmoothGaugeField, n_list,
                                mesh_builder=build_unit_cube_mesh,
                                seed: int = 0) -> ConvergenceReport:
    """max over (face, opposite vertex) of |U F U^{-1} - F| per level (3D)."""
    hs, errs = [], []
    for n in n_list:
        complex = mesh_builder(n)
        if complex.dim != 3:
            raise ValueError("transport conjugation requires a 3D mesh")
        a = interpolate_field(smooth, complex)
        links = transports(a)
        fh = holonomies(links)
        tets = np.arange(len(complex.simplices[3]))
        vt = _vertex_transports(links, tets)
        faces = complex.local_ids[2]
        worst = 0.0
        for slot, combo in enumerate(face_positions(3)):
            opposite = ({0, 1, 2, 3} - set(combo)).pop()
            origin = combo[0]
            u = vt[:, opposite, origin]
            f = fh[faces[:, slot]]
            diff = u @ f @ np.conjugate(np.swapaxes(u, -1, -2)) - f
            worst = max(worst, float(np.linalg.norm(diff, axis=(1, 2)).max()))
        hs.append(complex.mesh_size())
        errs.append(worst)
    return _make_report("converge-transport", smooth, seed, n_list, hs, errs)


def origin_dependence_study(smooth: SmoothGaugeField, n_list,
                            mesh_builder=build_unit_cube_mesh,
                            seed: int = 0) -> ConvergenceReport:
    """|S'(canonical origins) - S'(origins advanced one step)| per level."""
    hs, errs, vals0 = [], [], []
    for n in n_list:
        complex = mesh_builder(n)
        a = interpolate_field(smooth, complex)
        s0 = global_action("sprime", complex, a).total
        s1 = global_action("sprime", complex, a, origin_shift=1).total
        hs.append(complex.mesh_size())
        errs.append(abs(s0 - s1))
        vals0.append(s0)
    return _make_report("origin-dependence", smooth, seed, n_list, hs, errs,
                        {"value_sprime": vals0})


# -- gauge invariance spot check ------------------------------------------------


def gauge_invariance_check(group: LieGroup, n: int = 2, pairs: int = 20,
                           seed: int = 7, field_scale: float = 0.3,
                           transform_scale: float = 0.5, kind: str = "sprime",
                           mesh_builder=build_unit_cube_mesh) -> dict:
    """Relative change of the action under seeded random gauge transforms."""
    complex = mesh_builder(n)
    violations = []
    for p in range(pairs):
        a = GaugeField.random(complex, group, field_scale, seed=[seed, p, 0])
        g = DiscreteGaugeTransform.random(complex, group, transform_scale,
                                          seed=[seed, p, 1])
        s0 = global_action(kind, complex, a).total
        s1 = global_action(kind, complex, apply_gauge(a, g)).total
        violations.append(abs(s1 - s0) / max(abs(s0), 1e-300))
    return {
        "study": "gauge-check",
        "group": group.name,
        "kind": kind,
        "n": n,
        "pairs": pairs,
        "seed": seed,
        "max_violation": max(violations),
        "violations": violations,
    }
