"""Simplicial complexes embedded in Euclidean space.

Simplexes are stored as tuples of global vertex indices in strictly
ascending order; the ascending order defines the positive orientation of
every simplex.  Structured meshes of the unit square / unit cube are built
by splitting each grid cell along its main diagonal (Kuhn subdivision),
which yields a conforming, self-similar family suitable for convergence
studies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MeshError",
    "PointedFace",
    "SimplicialComplex",
    "build_unit_cube_mesh",
    "build_unit_square_mesh",
    "relative_orientation",
    "pointed_faces",
    "diameter",
    "dump_mesh",
    "load_mesh",
]


class MeshError(Exception):
    """Invalid mesh topology or geometry."""


@dataclass(frozen=True)
class PointedFace:
    """A 2-simplex with a traversal cycle and a distinguished origin vertex."""

    face: tuple
    origin: int
    cycle: tuple

    def __post_init__(self):
        if self.origin not in self.face:
            raise ValueError(f"origin {self.origin} not a vertex of {self.face}")
        if self.cycle[0] != self.origin or sorted(self.cycle) != sorted(self.face):
            raise ValueError(f"cycle {self.cycle} is not a rotation of {self.face}")


class SimplicialComplex:
    """A pure, closed simplicial complex with explicit incidence tables.

    All tables are derived from the maximal simplexes at construction time
    and frozen afterwards; instances are safe for concurrent read access.

    Attributes:
        dim: ambient/topological dimension m (2 or 3).
        coords: (V, m) vertex coordinates.
        simplices: list over k = 0..m of (N_k, k+1) arrays of ascending
            vertex ids.
        index: list over k of dict mapping vertex tuple -> simplex id.
        facets: for k >= 1, (N_k, k+1) array; entry [t, p] is the id of the
            (k-1)-simplex obtained by omitting vertex p (boundary sign is
            (-1)**p).
        local_ids: list over k of (N_max, C(m+1, k+1)) arrays giving, for
            each maximal simplex, the global ids of its k-subsimplexes in
            itertools.combinations order.
        maximal_cofaces: list over k of lists; maximal simplex ids
            containing each k-simplex.
    """

    def __init__(self, coords: np.ndarray, maximal: np.ndarray):
        coords = np.asarray(coords, dtype=float)
        maximal = np.asarray(maximal, dtype=np.int64)
        m = maximal.shape[1] - 1
        if coords.shape[1] != m:
            raise MeshError(
                f"embedding dimension {coords.shape[1]} != simplex dimension {m}"
            )
        if m not in (2, 3):
            raise MeshError(f"unsupported dimension {m}")
        if np.any(np.diff(maximal, axis=1) <= 0):
            raise MeshError("maximal simplex rows must be strictly ascending")

        self.dim = m
        self.coords = coords

        self.simplices = []
        self.local_ids = []
        for k in range(m + 1):
            combos = list(itertools.combinations(range(m + 1), k + 1))
            stacked = np.concatenate([maximal[:, c] for c in combos], axis=0)
            uniq, inv = np.unique(stacked, axis=0, return_inverse=True)
            self.simplices.append(uniq)
            self.local_ids.append(
                inv.reshape(len(combos), len(maximal)).T.copy()
            )
        self.index = [
            {tuple(row): i for i, row in enumerate(table)}
            for table in self.simplices
        ]

        self.facets = [None]
        for k in range(1, m + 1):
            table = self.simplices[k]
            nk = len(table)
            fac = np.empty((nk, k + 1), dtype=np.int64)
            idx = self.index[k - 1]
            for p in range(k + 1):
                sub = np.delete(table, p, axis=1)
                fac[:, p] = [idx[tuple(row)] for row in sub]
            self.facets.append(fac)

        self.maximal_cofaces = []
        for k in range(m + 1):
            cof = [[] for _ in range(len(self.simplices[k]))]
            for t in range(len(maximal)):
                for sid in self.local_ids[k][t]:
                    cof[sid].append(t)
            self.maximal_cofaces.append(cof)

        verts = coords[self.simplices[m]]            # (N, m+1, m)
        edges = verts[:, 1:, :] - verts[:, :1, :]    # (N, m, m)
        det = np.linalg.det(edges)
        vol = np.abs(det) / np.prod(range(1, m + 1))
        if np.any(vol <= 0.0):
            raise MeshError("degenerate maximal simplex (zero volume)")
        self.volumes = vol
        # gradients of barycentric coordinates, (N, m+1, m)
        ginv = np.linalg.inv(edges)                  # columns are grad(lambda_j)
        grads = np.empty((len(maximal), m + 1, m))
        grads[:, 1:, :] = np.swapaxes(ginv, 1, 2)
        grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
        self.bary_gradients = grads

        for arr in (self.coords, self.volumes, self.bary_gradients,
                    *self.simplices, *self.local_ids, *self.facets[1:]):
            arr.setflags(write=False)
        self._cache = {}

    # -- basic queries ----------------------------------------------------

    def counts(self):
        return tuple(len(t) for t in self.simplices)

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** k * len(t) for k, t in enumerate(self.simplices)))

    def simplex_coords(self, simplex) -> np.ndarray:
        return self.coords[np.asarray(simplex)]

    def simplex_diameter(self, simplex) -> float:
        return diameter(self.simplex_coords(simplex))

    def mesh_size(self) -> float:
        """Largest diameter over the maximal simplexes."""
        return max(self.simplex_diameter(t) for t in self.simplices[self.dim])

    def contains_simplex(self, simplex) -> bool:
        s = tuple(sorted(simplex))
        k = len(s) - 1
        return 0 <= k <= self.dim and s in self.index[k]


def diameter(coords: np.ndarray) -> float:
    """Maximum pairwise vertex distance of an embedded simplex."""
    coords = np.asarray(coords, dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def relative_orientation(parent, facet) -> int:
    """Boundary sign o(T, T') between a (k+1)-simplex and a k-simplex.

    Returns 0 unless ``facet`` is obtained from ``parent`` by omitting one
    vertex; otherwise (-1)**p with p the position of the omitted vertex in
    the ascending order of ``parent``.
    """
    parent = tuple(parent)
    facet = tuple(facet)
    if len(facet) != len(parent) - 1:
        return 0
    extra = set(parent) - set(facet)
    if len(extra) != 1 or not set(facet) <= set(parent):
        return 0
    p = parent.index(extra.pop())
    return -1 if p % 2 else 1


def pointed_faces(simplex, origin_shift: int = 0):
    """The pointed oriented faces of a maximal simplex.

    Each 2-subsimplex is traversed along its ascending cycle; the origin is
    the lowest vertex id, advanced ``origin_shift`` steps along the cycle.
    """
    simplex = tuple(simplex)
    out = []
    for tri in itertools.combinations(simplex, 3):
        r = origin_shift % 3
        cycle = tri[r:] + tri[:r]
        out.append(PointedFace(face=tri, origin=cycle[0], cycle=cycle))
    return out


def _grid_ids(n: int, dim: int) -> np.ndarray:
    shape = (n + 1,) * dim
    return np.arange((n + 1) ** dim, dtype=np.int64).reshape(shape)


def build_unit_cube_mesh(n: int) -> SimplicialComplex:
    """Kuhn mesh of the unit cube: n**3 subcubes, 6 tetrahedra each.

    Every tetrahedron of a subcube contains the subcube's main diagonal;
    the resulting complex is conforming with (n+1)**3 vertices and 6*n**3
    tetrahedra, all affine copies of 6 congruent reference shapes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ids = _grid_ids(n, 3)
    coords = np.indices((n + 1,) * 3).reshape(3, -1).T / n
    tets = []
    steps = np.eye(3, dtype=np.int64)
    for cx, cy, cz in itertools.product(range(n), repeat=3):
        base = np.array([cx, cy, cz], dtype=np.int64)
        for perm in itertools.permutations(range(3)):
            p = base.copy()
            quad = [p.copy()]
            for ax in perm:
                p = p + steps[ax]
                quad.append(p.copy())
            vids = sorted(ids[q[0], q[1], q[2]] for q in quad)
            tets.append(vids)
    return SimplicialComplex(coords, np.array(tets, dtype=np.int64))


def build_unit_square_mesh(n: int) -> SimplicialComplex:
    """Unit square split into n**2 cells of 2 triangles sharing the diagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ids = _grid_ids(n, 2)
    coords = np.indices((n + 1,) * 2).reshape(2, -1).T / n
    tris = []
    for cx, cy in itertools.product(range(n), repeat=2):
        v00 = ids[cx, cy]
        v10 = ids[cx + 1, cy]
        v01 = ids[cx, cy + 1]
        v11 = ids[cx + 1, cy + 1]
        tris.append(sorted((v00, v10, v11)))
        tris.append(sorted((v00, v01, v11)))
    return SimplicialComplex(coords, np.array(tris, dtype=np.int64))


# -- plain-text mesh serialization ----------------------------------------


def dump_mesh(complex: SimplicialComplex, stream) -> None:
    """Write a complex as plain text; see load_mesh for the format."""
    counts = " ".join(str(len(t)) for t in complex.simplices)
    stream.write(f"dim {complex.dim} {len(complex.coords)} {counts}\n")
    for row in complex.coords:
        stream.write(" ".join(f"{x:.17g}" for x in row) + "\n")
    for table in complex.simplices:
        for row in table:
            stream.write(" ".join(str(int(v)) for v in row) + "\n")


def load_mesh(stream) -> SimplicialComplex:
    """Read a complex dumped by dump_mesh.

    Format: one header line ``dim m nv nk0 ... nkm``, then nv coordinate
    lines, then for each k one line of ascending vertex ids per simplex.
    The complex is rebuilt from the maximal simplexes; the lower-dimension
    tables in the file are checked against the reconstruction.
    """
    header = stream.readline().split()
    if not header or header[0] != "dim":
        raise MeshError("missing 'dim' header line")
    m = int(header[1])
    nv = int(header[2])
    nk = [int(tok) for tok in header[3:]]
    if len(nk) != m + 1 or nk[0] != nv:
        raise MeshError(f"inconsistent header counts {header}")
    coords = np.array(
        [[float(tok) for tok in stream.readline().split()] for _ in range(nv)]
    )
    tables = []
    for k in range(m + 1):
        tables.append(
            np.array(
                [[int(tok) for tok in stream.readline().split()] for _ in range(nk[k])],
                dtype=np.int64,
            ).reshape(nk[k], k + 1)
        )
    complex = SimplicialComplex(coords, tables[m])
    for k in range(m):
        if complex.simplices[k].shape != tables[k].shape or np.any(
            complex.simplices[k] != tables[k]
        ):
            raise MeshError(f"dimension-{k} table does not match the closure")
    return complex
