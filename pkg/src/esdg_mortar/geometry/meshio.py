"""Line-oriented text mesh format.

Layout (``#`` starts a comment, blank lines are ignored)::

    esdg-mesh 1
    dim <d>
    n_geo <n>
    origin <x_1 .. x_d>
    scale <s_1 .. s_d>
    period <p_1 .. p_d>            # lattice extent
    periodic <0|1 ...>
    vertices <V>
    <x_1 .. x_d>                   # V lines, lattice corners in physical space
    elements <K>
    <lo_1 .. lo_d> <size_1 .. size_d> <v_0 .. v_{2^d-1}>
    mapping <K> <(n_geo+1)^d>
    <x of all nodes> <y of all nodes> [<z ...>]   # one line per element
    faces <K * 2d>
    <e> <f> <kind> <e2> <f2> <sub>  # kind: 0 conforming, 1 coarse, 2 fine, -1 boundary
    mortars <M>
    <e> <f> <e_1> <f_1> ... <e_m> <f_m>   # coarse face and its 2 or 4 fine faces
    end

Lattice boxes define the topology; the reader rebuilds the adjacency from
them and refuses files whose face or mortar records disagree.
"""

from itertools import product

import numpy as np

from ..errors import InvalidGeometryError
from .mesh import Mesh, _build


def _corner_vertices(mesh: Mesh):
    table, verts, elems = {}, [], []
    for e in range(mesh.K):
        ids = []
        for offs in product(*[(0, 1)] * mesh.dim):
            lat = mesh.lo[e] + np.asarray(offs) * mesh.size[e]
            key = tuple(int(v) for v in lat)
            if key not in table:
                table[key] = len(verts)
                verts.append(mesh.map_points(e, 2.0 * np.asarray(offs, dtype=float) - 1.0)[0])
            ids.append(table[key])
        elems.append(ids)
    return np.asarray(verts), elems


def write_mesh(mesh: Mesh, path):
    d = mesh.dim
    verts, elems = _corner_vertices(mesh)
    fmt = lambda a: " ".join(repr(float(x)) for x in np.ravel(a))
    ifmt = lambda a: " ".join(str(int(x)) for x in np.ravel(a))
    lines = ["esdg-mesh 1", f"dim {d}", f"n_geo {mesh.n_geo}", f"origin {fmt(mesh.origin)}",
             f"scale {fmt(mesh.scale)}", f"period {ifmt(mesh.period)}",
             f"periodic {ifmt([int(p) for p in mesh.periodic])}", f"vertices {len(verts)}"]
    lines += [fmt(v) for v in verts]
    lines.append(f"elements {mesh.K}")
    lines += [f"{ifmt(mesh.lo[e])} {ifmt(mesh.size[e])} {ifmt(elems[e])}" for e in range(mesh.K)]
    lines.append(f"mapping {mesh.K} {mesh.X.shape[-1]}")
    lines += [fmt(mesh.X[e]) for e in range(mesh.K)]
    fi = mesh.faces
    lines.append(f"faces {mesh.K * 2 * d}")
    for e in range(mesh.K):
        for f in range(2 * d):
            lines.append(f"{e} {f} {fi.kind[e, f]} {fi.neighbor[e, f, 0]} {fi.neighbor[e, f, 1]} {fi.sub[e, f]}")
    lines.append(f"mortars {len(fi.children)}")
    for (e, f), kids in sorted(fi.children.items()):
        lines.append(f"{e} {f} " + " ".join(f"{a} {b}" for a, b in kids))
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _tokens(path):
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line.split()


def read_mesh(path) -> Mesh:
    it = _tokens(path)

    def expect(name):
        try:
            tok = next(it)
        except StopIteration:
            raise InvalidGeometryError(f"mesh file ended before '{name}'") from None
        if tok[0] != name:
            raise InvalidGeometryError(f"expected '{name}', found '{tok[0]}'")
        return tok[1:]

    if expect("esdg-mesh") != ["1"]:
        raise InvalidGeometryError("unsupported mesh file version")
    d = int(expect("dim")[0])
    n_geo = int(expect("n_geo")[0])
    origin = np.array(expect("origin"), dtype=float)
    scale = np.array(expect("scale"), dtype=float)
    period = np.array(expect("period"), dtype=int)
    periodic = tuple(bool(int(x)) for x in expect("periodic"))
    nv = int(expect("vertices")[0])
    for _ in range(nv):
        next(it)
    K = int(expect("elements")[0])
    lo, size = [], []
    for _ in range(K):
        row = [int(x) for x in next(it)]
        lo.append(row[:d])
        size.append(row[d:2 * d])
    K2, npts = (int(x) for x in expect("mapping"))
    if K2 != K or npts != (n_geo + 1) ** d:
        raise InvalidGeometryError("mapping block size mismatch")
    X = np.array([np.array(next(it), dtype=float) for _ in range(K)]).reshape(K, d, npts)
    mesh = _build(d, origin, scale, period, periodic, lo, size, n_geo, X)
    nfr = int(expect("faces")[0])
    fi = mesh.faces
    for _ in range(nfr):
        e, f, kind, e2, f2, sub = (int(x) for x in next(it))
        if kind != fi.kind[e, f] or (e2, f2) != tuple(fi.neighbor[e, f]) or sub != fi.sub[e, f]:
            raise InvalidGeometryError(f"face record ({e}, {f}) disagrees with the element boxes")
    nm = int(expect("mortars")[0])
    if nm != len(fi.children):
        raise InvalidGeometryError("mortar record count disagrees with the element boxes")
    for _ in range(nm):
        row = [int(x) for x in next(it)]
        kids = [tuple(row[i:i + 2]) for i in range(2, len(row), 2)]
        if [tuple(k) for k in fi.children.get((row[0], row[1]), [])] != kids:
            raise InvalidGeometryError(f"mortar record ({row[0]}, {row[1]}) disagrees with the element boxes")
    expect("end")
    return mesh
