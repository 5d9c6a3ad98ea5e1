"""Physical (mapped) SBP and mortar-SBP operators on individual elements."""

import numpy as np

from ..errors import InvalidGeometryError, StabilityPreconditionError
from ..mortar import MortarLayout, MortarSBP, Split, layer1_points, mortar_points
from ..reference_operators import NodeKind, TensorOperators
from .mesh import COARSE
from .metrics import MetricData, gcl_residual


def hybrid_points(ops: TensorOperators) -> np.ndarray:
    return np.vstack([ops.volume_nodes, ops.face_nodes])


def _skew_combine(Qh_ref, g):
    """1/2 sum_j (diag(g_j) Qh_j + Qh_j diag(g_j)) for one coordinate i."""
    return 0.5 * sum(g[j][:, None] * Qh_ref[j] + Qh_ref[j] * g[j][None, :] for j in range(len(Qh_ref)))


def physical_sbp(ops: TensorOperators, md: MetricData, elems=None, gcl_tol=1e-10):
    """Q_ih for each requested element: array (len(elems), d, n_h, n_h)."""
    K = md.mesh.K
    elems = np.arange(K) if elems is None else np.atleast_1d(elems)
    res = gcl_residual(md, ops.ops1d.quad.nodes)
    scale = max(1.0, float(np.max(np.abs(md.G))))
    if res > gcl_tol * scale:
        raise InvalidGeometryError(f"metric terms violate the discrete GCL (residual {res:.3e})")
    g = md.g_at(hybrid_points(ops), elems)
    out = np.empty((len(elems), ops.dim) + ops.Qh[0].shape)
    for k in range(len(elems)):
        for i in range(ops.dim):
            out[k, i] = _skew_combine(ops.Qh, g[k, i])
    return out


def physical_boundary(ops: TensorOperators, md: MetricData, elems=None):
    """Diagonal entries of B_i = diag(n_i w_f) at face nodes: (len(elems), d, n_f)."""
    K = md.mesh.K
    elems = np.arange(K) if elems is None else np.atleast_1d(elems)
    g = md.g_at(ops.face_nodes, elems)
    n = np.einsum("kijp,pj->kip", g, ops.face_normals)
    return n * ops.face_weights[None, None, :]


def quadrature_degrees(kind, N):
    """(N_f, N_m): surface/mortar quadrature exact for Q^{N+N_f}, Q^{N+N_m}."""
    return (N + 1, N + 1) if NodeKind(kind) == NodeKind.GAUSS else (N - 1, N - 1)


def effective_geo_degree(md: MetricData, elem: int, tol=1e-12) -> int:
    """0 when the element metrics are constant (affine element), else N_geo."""
    G = md.G[elem]
    spread = np.max(np.abs(G - G[..., :1]))
    return 0 if spread <= tol * max(1.0, np.max(np.abs(G))) else md.mesh.n_geo


def mortar_degree_bound(dim, kind, N, approach):
    N_f, N_m = quadrature_degrees(kind, N)
    if dim == 3 and int(approach) == 1:
        return min(N, N_f, N_m), "N_geo <= min(N, N_f, N_m)"
    return min(N, N_f + 1, N_m + 1), "N_geo <= min(N, N_f+1, N_m+1)"


def check_mortar_preconditions(md: MetricData, kind, N, elems=None):
    """Raise if an element with a non-conforming face violates the degree bound."""
    mesh = md.mesh
    bound, text = mortar_degree_bound(mesh.dim, kind, N, md.approach)
    if elems is None:
        elems = np.nonzero(np.any(mesh.faces.kind == COARSE, axis=1))[0]
    if mesh.n_geo > N:
        raise StabilityPreconditionError(f"N_geo = {mesh.n_geo} exceeds N = {N}")
    for e in elems:
        ng = effective_geo_degree(md, e)
        if ng > bound:
            raise StabilityPreconditionError(
                f"element {e}: {text} violated (N_geo = {ng}, bound = {bound}, "
                f"{NodeKind(kind).value} nodes, approach {md.approach})")


def mortar_sbp_points(ops: TensorOperators, msbp: MortarSBP, layouts=None) -> np.ndarray:
    """Reference coordinates of every row of the mortar operator."""
    pts = [ops.volume_nodes, ops.face_nodes]
    if msbp.layers == 1:
        lays = layouts if layouts is not None else [it.layout for it in msbp.interps]
        pts.append(mortar_points(ops.dim, lays))
    else:
        quad = ops.ops1d.quad
        two = [d["E_m1f"].shape[0] != ops.nfp for d in msbp.interps2]
        pts.append(np.vstack([layer1_points(quad, f, two[f]) for f in range(ops.n_faces)]))
        from ..mortar import build_mortar_layout
        lays = [build_mortar_layout(2, Split.HALF if two[f] else Split.CONFORMING, quad.kind, ops.N)
                for f in range(ops.n_faces)]
        pts.append(mortar_points(3, lays))
    return np.vstack(pts)


def physical_mortar_sbp(ops: TensorOperators, msbp: MortarSBP, md: MetricData, elem: int,
                        kind=None, check=True):
    """Q_im = 1/2 sum_j (diag(g_ij) Qhat_jm + Qhat_jm diag(g_ij)) for one element."""
    kind = ops.ops1d.quad.kind if kind is None else kind
    if check:
        check_mortar_preconditions(md, kind, ops.N, [elem])
    pts = mortar_sbp_points(ops, msbp)
    g = md.g_at(pts, [elem])[0]
    return np.stack([_skew_combine(msbp.Q, g[i]) for i in range(ops.dim)])
