"""Terminal points: the outermost node layer through which elements couple.

For conforming and fine faces these are the face quadrature nodes; for coarse
faces they are the mortar nodes.  Every terminal point has exactly one
exterior partner, and on a watertight mesh the scaled normals times weights
at partners are equal and opposite.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidGeometryError
from ..mortar import Split, build_mortar_layout, face_to_volume_points
from ..reference_operators import TensorOperators
from .mesh import COARSE, CONFORMING, FINE, Mesh
from .metrics import MetricData


@dataclass
class Terminals:
    elem: np.ndarray        # (T,)
    face: np.ndarray        # (T,)
    ref: np.ndarray         # (T, d) volume reference coordinates
    weight: np.ndarray      # (T,)
    nhat: np.ndarray        # (T, d) reference outward normal
    partner: np.ndarray     # (T,) exterior terminal index
    offsets: np.ndarray     # (K, 2d+1) start of each face block
    coarse: np.ndarray      # (K, 2d) bool: face carries a split mortar
    mortar_all: bool = False

    @property
    def T(self):
        return len(self.elem)

    def block(self, e, f):
        return slice(self.offsets[e, f], self.offsets[e, f + 1])


def build_terminals(mesh: Mesh, ops: TensorOperators, mortar_all=False) -> Terminals:
    d, N = mesh.dim, ops.N
    kind = ops.ops1d.quad.kind
    half = build_mortar_layout(d - 1, Split.HALF, kind, N)
    conf = build_mortar_layout(d - 1, Split.CONFORMING, kind, N)
    K, nF = mesh.K, 2 * d
    fk = mesh.faces.kind
    if np.any(fk < 0):
        raise InvalidGeometryError("non-periodic boundary faces are not supported by the solver")
    coarse = fk == COARSE
    sizes = np.where(coarse, half.n_nodes, conf.n_nodes)
    offsets = np.zeros((K, nF + 1), dtype=int)
    offsets[:, 1:] = np.cumsum(sizes, axis=1)
    starts = np.concatenate([[0], np.cumsum(offsets[:, -1])[:-1]])
    offsets += starts[:, None]
    T = int(offsets[-1, -1])
    elem = np.repeat(np.arange(K), offsets[:, -1] - offsets[:, 0])
    face = np.empty(T, dtype=int)
    ref = np.empty((T, d))
    weight = np.empty(T)
    nhat = np.zeros((T, d))
    pts_c = [face_to_volume_points(d, f, conf.nodes) for f in range(nF)]
    pts_h = [face_to_volume_points(d, f, half.nodes) for f in range(nF)]
    for e in range(K):
        for f in range(nF):
            sl = slice(offsets[e, f], offsets[e, f + 1])
            face[sl] = f
            lay, pts = (half, pts_h[f]) if coarse[e, f] else (conf, pts_c[f])
            ref[sl] = pts
            weight[sl] = lay.weights
            nhat[sl, f // 2] = 2 * (f % 2) - 1
    partner = np.full(T, -1, dtype=int)
    n1 = conf.n_nodes
    for e in range(K):
        for f in range(nF):
            sl = np.arange(offsets[e, f], offsets[e, f + 1])
            if fk[e, f] == CONFORMING:
                e2, f2 = mesh.faces.neighbor[e, f]
                partner[sl] = offsets[e2, f2] + _match(mesh, e, f, e2, f2, conf, conf)
            elif fk[e, f] == COARSE:
                kids = mesh.faces.children[(e, f)]
                for k, (ec, fc) in enumerate(kids):
                    sel = half.sub_index == k
                    partner[sl[sel]] = offsets[ec, fc] + half.sub_local[sel]
            elif fk[e, f] == FINE:
                ep, fp = mesh.faces.neighbor[e, f]
                s = mesh.faces.sub[e, f]
                idx = np.nonzero(half.sub_index == s)[0]
                order = np.empty(n1, dtype=int)
                order[half.sub_local[idx]] = idx
                partner[sl] = offsets[ep, fp] + order
    if np.any(partner < 0):
        raise InvalidGeometryError("unmatched terminal points")
    if np.any(partner[partner] != np.arange(T)):
        raise InvalidGeometryError("terminal partner map is not an involution")
    _verify_positions(mesh, elem, ref, partner)
    return Terminals(elem, face, ref, weight, nhat, partner, offsets, coarse, mortar_all)


def _match(mesh, e, f, e2, f2, lay1, lay2):
    """Permutation taking face nodes of (e, f) to matching nodes of (e2, f2)."""
    d = mesh.dim
    p1 = mesh.lattice_coords(e, face_to_volume_points(d, f, lay1.nodes))
    p2 = mesh.lattice_coords(e2, face_to_volume_points(d, f2, lay2.nodes))
    # one period shift per face pair: reducing node by node is ambiguous when a
    # face touches its own periodic image (one element across the period)
    shift = p1.mean(axis=0) - p2.mean(axis=0)
    per = mesh.period.astype(float)
    for a in range(d):
        shift[a] = per[a] * np.round(shift[a] / per[a]) if mesh.periodic[a] else 0.0
    diff = p1[:, None, :] - (p2 + shift)[None, :, :]
    dist = np.max(np.abs(diff), axis=-1)
    j = np.argmin(dist, axis=1)
    if np.any(dist[np.arange(len(j)), j] > 1e-9):
        raise InvalidGeometryError(f"face nodes of element {e} face {f} do not match neighbor")
    return j


def _verify_positions(mesh, elem, ref, partner):
    lat = np.empty_like(ref)
    for e in range(mesh.K):
        sel = elem == e
        lat[sel] = mesh.lattice_coords(e, ref[sel])
    diff = lat - lat[partner]
    per = mesh.period.astype(float)
    for a in range(mesh.dim):
        if mesh.periodic[a]:
            diff[:, a] -= per[a] * np.round(diff[:, a] / per[a])
    if np.max(np.abs(diff)) > 1e-9:
        raise InvalidGeometryError("terminal partners are not co-located")


def terminal_normals(md: MetricData, term: Terminals) -> np.ndarray:
    """Scaled normals n_i J_f at terminal points, (T, d)."""
    mesh = md.mesh
    out = np.empty((term.T, mesh.dim))
    from .mesh import geo_nodes, tensor_interp
    r = geo_nodes(mesh.n_geo)
    for e in range(mesh.K):
        sl = slice(term.offsets[e, 0], term.offsets[e, -1])
        V = tensor_interp(r, term.ref[sl])
        g = np.einsum("pn,ijn->pij", V, md.G[e])
        out[sl] = np.einsum("pij,pj->pi", g, term.nhat[sl])
    return out


def watertight_residual(md: MetricData, term: Terminals) -> float:
    B = terminal_normals(md, term) * term.weight[:, None]
    return float(np.max(np.abs(B + B[term.partner])))
