"""Box meshes on an integer lattice, face matching, and element mappings.

Elements are axis-aligned boxes with integer lower corners and sizes in
lattice units; physical coordinates before warping are
``origin + scale * lattice``.  Exact integer keys make face matching
(conforming, coarse mortar owner, fine) robust under periodic wrap.
"""

from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from ..errors import InvalidArgumentError, InvalidGeometryError
from ..reference_operators import lagrange_interp_matrix, lobatto_quadrature

CONFORMING, COARSE, FINE, BOUNDARY = 0, 1, 2, -1


def geo_nodes(n_geo: int) -> np.ndarray:
    return lobatto_quadrature(n_geo + 1).nodes


def tensor_points(r1d, dim):
    grids = np.meshgrid(*([r1d] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def tensor_interp(src_1d, ref_points) -> np.ndarray:
    """Matrix evaluating a tensor Lagrange polynomial on ``src_1d`` at ``ref_points`` (P, d)."""
    ref_points = np.atleast_2d(ref_points)
    P, dim = ref_points.shape
    n = len(src_1d)
    L = [lagrange_interp_matrix(src_1d, ref_points[:, a]) for a in range(dim)]
    V = L[0]
    for a in range(1, dim):
        V = (V[:, :, None] * L[a][:, None, :]).reshape(P, -1)
    assert V.shape[1] == n**dim
    return V


@dataclass
class FaceInfo:
    kind: np.ndarray                              # (K, 2d) in {CONFORMING, COARSE, FINE, BOUNDARY}
    neighbor: np.ndarray                          # (K, 2d, 2): conforming partner or fine-side parent
    sub: np.ndarray                               # (K, 2d): sub-face index on the parent (fine faces)
    children: dict = field(default_factory=dict)  # (e, f) -> [(e_c, f_c)] ordered by sub-face index


@dataclass
class Mesh:
    dim: int
    origin: np.ndarray
    scale: np.ndarray          # physical length of one lattice unit per axis
    period: np.ndarray         # lattice extent per axis
    periodic: tuple
    lo: np.ndarray             # (K, d) int
    size: np.ndarray           # (K, d) int
    n_geo: int
    X: np.ndarray              # (K, d, (n_geo+1)^d) mapping nodes
    faces: FaceInfo = None
    parent: np.ndarray = None  # parent index in the pre-refinement mesh, or -1

    @property
    def K(self) -> int:
        return len(self.lo)

    @property
    def n_faces(self) -> int:
        return 2 * self.dim

    def lattice_coords(self, e, ref_points):
        """Lattice coordinates of reference points of element ``e``."""
        ref_points = np.atleast_2d(ref_points)
        return self.lo[e] + self.size[e] * (ref_points + 1.0) / 2.0

    def affine_coords(self, e, ref_points):
        return self.origin + self.scale * self.lattice_coords(e, ref_points)

    def geo_ref_nodes(self):
        return tensor_points(geo_nodes(self.n_geo), self.dim)

    def map_points(self, e, ref_points):
        """Physical coordinates of reference points through the element mapping."""
        V = tensor_interp(geo_nodes(self.n_geo), ref_points)
        return (V @ self.X[e].T)

    @property
    def h_min(self) -> float:
        return float(np.min(self.size * self.scale))

    @property
    def nonconforming(self) -> bool:
        return bool(np.any(self.faces.kind == COARSE))

    def with_mapping(self, X, n_geo):
        return replace(self, X=np.asarray(X, dtype=float), n_geo=int(n_geo))


def _affine_mapping(origin, scale, lo, size, n_geo):
    dim = lo.shape[1]
    ref = tensor_points(geo_nodes(n_geo), dim)
    lat = lo[:, None, :] + size[:, None, :] * (ref[None] + 1.0) / 2.0
    phys = origin + scale * lat
    return np.transpose(phys, (0, 2, 1)).copy()


def face_key(mesh_period, periodic, lo, size, face):
    axis, side = divmod(face, 2)
    plane = int(lo[axis] + side * size[axis])
    if periodic[axis]:
        plane %= int(mesh_period[axis])
    tang = [a for a in range(len(lo)) if a != axis]
    return (axis, plane, tuple(int(lo[a]) for a in tang), tuple(int(size[a]) for a in tang))


def _child_keys(key):
    axis, plane, tlo, tsz = key
    if any(s % 2 for s in tsz):
        return None
    half = [s // 2 for s in tsz]
    out = []
    for offs in product(*[(0, 1)] * len(tsz)):
        out.append((axis, plane, tuple(l + o * h for l, o, h in zip(tlo, offs, half)), tuple(half)))
    return out


def connect(mesh: Mesh) -> FaceInfo:
    """Classify every face as conforming, coarse (mortar owner), fine, or boundary."""
    K, d = mesh.K, mesh.dim
    table = {}
    for e in range(K):
        for f in range(2 * d):
            k = face_key(mesh.period, mesh.periodic, mesh.lo[e], mesh.size[e], f)
            slot = table.setdefault(k, [None, None])
            side = f % 2
            if slot[side] is not None:
                raise InvalidGeometryError(f"overlapping elements at face {k}")
            slot[side] = (e, f)
    kind = np.full((K, 2 * d), BOUNDARY, dtype=int)
    nbr = np.full((K, 2 * d, 2), -1, dtype=int)
    sub = np.full((K, 2 * d), -1, dtype=int)
    children = {}
    for k, slot in table.items():
        for side in (0, 1):
            if slot[side] is None:
                continue
            e, f = slot[side]
            other = slot[1 - side]
            if other is not None:
                kind[e, f] = CONFORMING
                nbr[e, f] = other
                continue
            ck = _child_keys(k)
            if ck is not None and all(c in table and table[c][1 - side] is not None for c in ck):
                kind[e, f] = COARSE
                kids = [table[c][1 - side] for c in ck]
                children[(e, f)] = kids
                for s, (ec, fc) in enumerate(kids):
                    kind[ec, fc] = FINE
                    nbr[ec, fc] = (e, f)
                    sub[ec, fc] = s
    # faces only partially covered (not 2-to-1) are rejected
    for e in range(K):
        for f in range(2 * d):
            axis = f // 2
            if kind[e, f] == BOUNDARY and mesh.periodic[axis]:
                raise InvalidGeometryError(
                    f"face {f} of element {e} has no conforming or 2-to-1 neighbor")
    return FaceInfo(kind, nbr, sub, children)


def _build(dim, origin, scale, period, periodic, lo, size, n_geo=1, X=None, parent=None):
    lo = np.asarray(lo, dtype=int).reshape(-1, dim)
    size = np.asarray(size, dtype=int).reshape(-1, dim)
    origin = np.asarray(origin, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if X is None:
        X = _affine_mapping(origin, scale, lo, size, n_geo)
    m = Mesh(dim, origin, scale, np.asarray(period, dtype=int), tuple(bool(p) for p in periodic),
             lo, size, n_geo, X, None, parent)
    m.faces = connect(m)
    return m


def make_cartesian_mesh(dim, extents, cells, periodic=True, unit=2) -> Mesh:
    """Uniform box mesh; ``extents`` is a list of (lo, hi) per axis.

    Each cell spans ``unit`` lattice units so it can later be split.
    """
    if dim not in (2, 3):
        raise InvalidArgumentError("dim must be 2 or 3")
    cells = [int(c) for c in np.broadcast_to(cells, (dim,))]
    if any(c < 1 for c in cells):
        raise InvalidArgumentError("need at least one cell per axis")
    extents = np.asarray(extents, dtype=float).reshape(dim, 2)
    if isinstance(periodic, (bool, np.bool_)):
        periodic = (periodic,) * dim
    idx = np.stack(np.meshgrid(*[np.arange(c) for c in cells], indexing="ij"), -1).reshape(-1, dim)
    scale = (extents[:, 1] - extents[:, 0]) / (np.asarray(cells) * unit)
    return _build(dim, extents[:, 0], scale, np.asarray(cells) * unit, periodic,
                  idx * unit, np.full_like(idx, unit))


def _refine_mapping(mesh, e, n_geo):
    """Mapping nodes of the 2^d children of element ``e`` (child order: C order over halves)."""
    r = geo_nodes(n_geo)
    ref = tensor_points(r, mesh.dim)
    out = []
    for offs in product(*[(0, 1)] * mesh.dim):
        sub_ref = (ref + 1.0) / 2.0 + np.asarray(offs) - 1.0
        out.append(mesh.map_points(e, sub_ref).T)
    return out


def refine_elements(mesh: Mesh, flags) -> Mesh:
    """Split flagged elements into 2^d children that inherit the parent mapping."""
    flags = np.asarray(flags, dtype=bool)
    if np.any(mesh.size[flags] % 2):
        raise InvalidArgumentError("flagged elements must have even lattice size")
    lo, size, X, parent = [], [], [], []
    for e in range(mesh.K):
        if not flags[e]:
            lo.append(mesh.lo[e]); size.append(mesh.size[e]); X.append(mesh.X[e]); parent.append(e)
            continue
        half = mesh.size[e] // 2
        kids = _refine_mapping(mesh, e, mesh.n_geo)
        for c, offs in enumerate(product(*[(0, 1)] * mesh.dim)):
            lo.append(mesh.lo[e] + np.asarray(offs) * half)
            size.append(half)
            X.append(kids[c])
            parent.append(e)
    return _build(mesh.dim, mesh.origin, mesh.scale, mesh.period, mesh.periodic,
                  lo, size, mesh.n_geo, np.asarray(X), np.asarray(parent))


def checkerboard_refine_2d(mesh: Mesh, parity: int = 0, require_even: bool = False) -> Mesh:
    """Refine every other cell of a uniform 2D mesh.

    Cells with ``(i + j) % 2 == parity`` are split.  With odd periodic cell
    counts the pattern has a seam where two refined (or two unrefined) cells
    touch; those faces simply match conformingly.
    """
    if mesh.dim != 2:
        raise InvalidArgumentError("checkerboard refinement is 2D only")
    unit = mesh.size[0]
    if np.any(mesh.size != unit):
        raise InvalidArgumentError("checkerboard refinement needs a uniform mesh")
    cells = mesh.period // unit
    if require_even and np.any(cells % 2):
        raise InvalidArgumentError("checkerboard refinement needs even cell counts")
    ij = mesh.lo // unit
    flags = (ij.sum(axis=1) % 2) == parity
    return refine_elements(mesh, flags)


def two_block_mesh_3d(h, extents=((0.0, 15.0), (0.0, 20.0), (0.0, 1.0)), interface=8.0,
                      periodic=True) -> Mesh:
    """Two glued uniform hexahedral blocks: size h for x < interface, h/2 beyond.

    The interface plane x = ``interface`` is parallel to the y axis.
    """
    ext = np.asarray(extents, dtype=float)
    lens = ext[:, 1] - ext[:, 0]
    xl = interface - ext[0, 0]
    counts = np.concatenate([[xl], lens]) / h
    if np.any(np.abs(counts - np.round(counts)) > 1e-9) or xl <= 0 or xl >= lens[0]:
        raise InvalidArgumentError("block extents are not multiples of h")
    n_left = int(round(xl / h))
    n_right = int(round((lens[0] - xl) / h))
    ny, nz = int(round(lens[1] / h)), int(round(lens[2] / h))
    lo, size = [], []
    for i, j, k in product(range(n_left), range(ny), range(nz)):
        lo.append((2 * i, 2 * j, 2 * k)); size.append((2, 2, 2))
    for i, j, k in product(range(2 * n_right), range(2 * ny), range(2 * nz)):
        lo.append((2 * n_left + i, j, k)); size.append((1, 1, 1))
    period = (2 * (n_left + n_right), 2 * ny, 2 * nz)
    scale = np.full(3, h / 2.0)
    return _build(3, ext[:, 0], scale, period, (periodic,) * 3, lo, size)


def apply_warp(mesh: Mesh, func, n_geo: int) -> Mesh:
    """Evaluate ``func`` (phys -> phys, vectorized over rows) at degree-n_geo mapping nodes."""
    ref = tensor_points(geo_nodes(n_geo), mesh.dim)
    X = np.empty((mesh.K, mesh.dim, len(ref)))
    for e in range(mesh.K):
        X[e] = np.asarray(func(mesh.map_points(e, ref))).T
    out = mesh.with_mapping(X, n_geo)
    if out.nonconforming:
        out = snap_fine_faces(out)
    return out


def raise_degree(mesh: Mesh, n_geo: int) -> Mesh:
    return apply_warp(mesh, lambda p: p, n_geo)


def snap_fine_faces(mesh: Mesh) -> Mesh:
    """Replace fine-face mapping nodes by the coarse face polynomial (watertightness)."""
    X = mesh.X.copy()
    ref = mesh.geo_ref_nodes()
    r = geo_nodes(mesh.n_geo)
    for (e, f), kids in mesh.faces.children.items():
        for ec, fc in kids:
            axis, side = divmod(fc, 2)
            on = np.abs(ref[:, axis] - (2 * side - 1)) < 1e-14
            lat = mesh.lattice_coords(ec, ref[on])
            ref_c = 2.0 * (lat - mesh.lo[e]) / mesh.size[e] - 1.0
            # periodic wrap of the normal coordinate
            ref_c[:, axis] = 2 * (f % 2) - 1
            V = tensor_interp(r, ref_c)
            shift = np.zeros(mesh.dim)
            plane_c = mesh.lo[e, axis] + (f % 2) * mesh.size[e, axis]
            shift[axis] = (lat[0, axis] - plane_c) * mesh.scale[axis]
            X[ec][:, on] = (V @ mesh.X[e].T + shift).T
    return mesh.with_mapping(X, mesh.n_geo)


def warp_2d_func(alpha=1.0 / 16.0, Lx=15.0, Ly=10.0):
    def f(p):
        x, y = p[:, 0], p[:, 1]
        xt = x + Lx * alpha * np.cos(np.pi / Lx * (x - Lx / 2)) * np.cos(3 * np.pi * y / Ly)
        yt = y + Ly * alpha * np.sin(4 * np.pi / Lx * (xt - Lx / 2)) * np.cos(np.pi * y / Ly)
        return np.stack([xt, yt], axis=1)
    return f


def warp_2d(mesh: Mesh, alpha=1.0 / 16.0, Lx=15.0, Ly=10.0, n_geo=None) -> Mesh:
    """Two-stage warp on [0,Lx] x [-Ly/2,Ly/2]; boundaries stay fixed."""
    if mesh.dim != 2:
        raise InvalidArgumentError("warp_2d needs a 2D mesh")
    return apply_warp(mesh, warp_2d_func(alpha, Lx, Ly), mesh.n_geo if n_geo is None else n_geo)


def warp_3d_func(amp=0.25):
    def f(p):
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        return np.stack([x + amp * np.cos(x) * np.sin(y) * np.sin(z),
                         y + amp * np.sin(x) * np.cos(y) * np.sin(z),
                         z + amp * np.sin(x) * np.sin(y) * np.cos(z)], axis=1)
    return f


def warp_3d(mesh: Mesh, n_geo=None, amp=0.25) -> Mesh:
    if mesh.dim != 3:
        raise InvalidArgumentError("warp_3d needs a 3D mesh")
    return apply_warp(mesh, warp_3d_func(amp), mesh.n_geo if n_geo is None else n_geo)


def periodic_warp_func(extents, amp=0.05):
    """Smooth displacement that is periodic on the box and nonzero on interior planes."""
    ext = np.asarray(extents, dtype=float)
    L = ext[:, 1] - ext[:, 0]
    dim = len(L)

    def f(p):
        s = (p - ext[:, 0]) / L
        out = p.copy()
        for a in range(dim):
            prod = np.ones(len(p))
            for b in range(dim):
                k = 1 if b == a else 2
                prod *= np.sin(2 * np.pi * k * s[:, b] + 0.3 * (a + 1))
            out[:, a] += amp * L[a] * prod
        return out
    return f


def element_volumes(mesh: Mesh, J, weights):
    return np.sum(J * weights[None, :], axis=1)
