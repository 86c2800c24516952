"""Independent numerical oracles for the test suite.

Everything here is deliberately built on a different route than the
package: simplex integrals use tensor-product Gauss-Legendre rules through
the Duffy transform (the package integrates barycentric monomials in
closed form and uses fixed symmetric rules), and pointwise field values
are assembled term by term from the basis definitions.
"""

import numpy as np

from sgauge.whitney import barycentric_gradients


def _gl01(npts):
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


def triangle_quadrature(degree):
    """Duffy-collapsed Gauss rule on the reference triangle x,y>=0, x+y<=1.

    Returns (points (Q, 2), weights (Q,)); exact for polynomials of total
    degree <= degree.
    """
    npts = degree // 2 + 2
    u, wu = _gl01(npts)
    pts, wts = [], []
    for ui, wui in zip(u, wu):
        for vi, wvi in zip(u, wu):
            x = ui
            y = vi * (1.0 - ui)
            pts.append((x, y))
            wts.append(wui * wvi * (1.0 - ui))
    return np.array(pts), np.array(wts)


def tetrahedron_quadrature(degree):
    """Duffy-collapsed Gauss rule on the reference tetrahedron."""
    npts = degree // 2 + 3
    u, wu = _gl01(npts)
    pts, wts = [], []
    for ui, wui in zip(u, wu):
        for vi, wvi in zip(u, wu):
            for zi, wzi in zip(u, wu):
                x = ui
                y = vi * (1.0 - ui)
                z = zi * (1.0 - ui) * (1.0 - vi)
                pts.append((x, y, z))
                wts.append(wui * wvi * wzi * (1.0 - ui) ** 2 * (1.0 - vi))
    return np.array(pts), np.array(wts)


def integrate_on_simplex(coords, fn, degree=8):
    """Quadrature of a scalar function over an embedded simplex.

    ``fn`` maps a physical point to a value; the simplex may be a triangle
    or a tetrahedron, possibly embedded with codimension.
    """
    coords = np.asarray(coords, dtype=float)
    d = len(coords) - 1
    if d == 2:
        pts, wts = triangle_quadrature(degree)
        scale = 2.0
    elif d == 3:
        pts, wts = tetrahedron_quadrature(degree)
        scale = 6.0
    else:
        raise ValueError("only triangles and tetrahedra")
    from sgauge.whitney import simplex_volume

    vol = simplex_volume(coords)
    total = 0.0
    for p, w in zip(pts, wts):
        lam = np.concatenate(([1.0 - p.sum()], p))
        x = lam @ coords
        total = total + w * fn(x)
    return total * scale * vol


def integrate_two_form_on_face(coords, form, degree=8):
    """Integral over an oriented embedded triangle of a 2-form.

    ``form(x)`` returns antisymmetric components of shape (m, m, ...); the
    orientation is the vertex order of ``coords``.
    """
    coords = np.asarray(coords, dtype=float)
    e1 = coords[1] - coords[0]
    e2 = coords[2] - coords[0]
    pts, wts = triangle_quadrature(degree)
    total = 0.0
    for p, w in zip(pts, wts):
        lam = np.concatenate(([1.0 - p.sum()], p))
        x = lam @ coords
        b = np.asarray(form(x))
        total = total + w * np.einsum("mn...,m,n->...", b, e1, e2)
    return total


def integrate_one_form_on_edge(coords, form, degree=12):
    """Integral of a 1-form along an oriented embedded segment."""
    coords = np.asarray(coords, dtype=float)
    vec = coords[1] - coords[0]
    t, w = _gl01(degree // 2 + 2)
    total = 0.0
    for ti, wi in zip(t, w):
        val = np.asarray(form(coords[0] + ti * vec))
        total = total + wi * np.tensordot(vec, val, axes=(0, 0))
    return total


def whitney_field_one_form(complex, values, tet):
    """Pointwise evaluator x -> (m, ...) of a 1-cochain's Whitney form on a tet.

    Assembled directly from lambda_a grad(lambda_b) - lambda_b grad(lambda_a)
    per edge, independent of the package's evaluation helpers.
    """
    m = complex.dim
    verts = complex.simplices[m][tet]
    coords = complex.coords[verts]
    grads = barycentric_gradients(coords)
    import itertools

    pairs = list(itertools.combinations(range(m + 1), 2))
    edge_ids = complex.local_ids[1][tet]

    def at(x):
        lam = grads @ (np.asarray(x) - coords[0])
        lam[0] += 1.0
        out = 0.0
        for (a, b), e in zip(pairs, edge_ids):
            basis = lam[a] * grads[b] - lam[b] * grads[a]
            out = out + np.einsum("m,...->m...", basis, values[e])
        return out

    return at


def curvature_of_whitney(complex, values, tet):
    """Pointwise x -> (m, m, n, n): dA + [A, A]/2 of a Whitney gauge field."""
    m = complex.dim
    verts = complex.simplices[m][tet]
    coords = complex.coords[verts]
    grads = barycentric_gradients(coords)
    import itertools

    pairs = list(itertools.combinations(range(m + 1), 2))
    edge_ids = complex.local_ids[1][tet]
    const = 0.0
    for (a, b), e in zip(pairs, edge_ids):
        wedge = np.outer(grads[a], grads[b]) - np.outer(grads[b], grads[a])
        const = const + 2.0 * np.einsum("mn,ij->mnij", wedge, values[e])

    field_at = whitney_field_one_form(complex, values, tet)

    def at(x):
        a = field_at(x)
        comm = np.einsum("mij,njk->mnik", a, a)
        return const + comm - np.swapaxes(comm, 0, 1)

    return at
