"""Scaled geometric terms g_ij = J d(xhat_j)/d(x_i) and Jacobians.

Metric terms are stored as nodal values on the degree-N_geo Lobatto grid of
each element; values anywhere else come from exact tensor Lagrange
evaluation of those polynomials.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ..errors import InvalidArgumentError, InvalidGeometryError
from ..reference_operators import differentiation_matrix, kron_all, lagrange_interp_matrix, lobatto_quadrature
from .mesh import COARSE, Mesh, geo_nodes, tensor_interp


class GeoApproach(IntEnum):
    CURL = 1            # potentials of degree N_geo
    REDUCED_CURL = 2    # potentials reduced by one degree along their direction


def _axis_op(A1, axis, dim):
    n = A1.shape[0]
    return kron_all([A1 if a == axis else np.eye(n) for a in range(dim)])


def geo_diff_ops(n_geo, dim):
    D1 = differentiation_matrix(geo_nodes(n_geo))
    return [_axis_op(D1, a, dim) for a in range(dim)]


def degree_reduction_1d(n_geo) -> np.ndarray:
    """Interpolate to degree n_geo-1 Lobatto nodes and back.

    For n_geo = 1 the lower grid is the single midpoint, so the operator
    replaces a linear function by its mean.
    """
    r = geo_nodes(n_geo)
    r_lo = np.array([0.0]) if n_geo == 1 else lobatto_quadrature(n_geo).nodes
    down = lagrange_interp_matrix(r, r_lo)
    up = np.ones((len(r), 1)) if n_geo == 1 else lagrange_interp_matrix(r_lo, r)
    return up @ down


@dataclass
class MetricData:
    """Nodal metric polynomials for all elements of a mesh.

    ``G[k, i, j]`` holds g_ij of element k at its mapping nodes and ``dX[k, c, j]``
    the reference derivatives of mapping coordinate c.
    """

    mesh: Mesh
    G: np.ndarray
    dX: np.ndarray
    approach: int = 0

    @property
    def dim(self):
        return self.mesh.dim

    def interp_matrix(self, ref_points):
        return tensor_interp(geo_nodes(self.mesh.n_geo), ref_points)

    def g_at(self, ref_points, elems=None):
        """g_ij at reference points: (K, d, d, P)."""
        V = self.interp_matrix(ref_points)
        G = self.G if elems is None else self.G[elems]
        return np.einsum("pn,kijn->kijp", V, G)

    def J_at(self, ref_points, elems=None):
        V = self.interp_matrix(ref_points)
        dX = self.dX if elems is None else self.dX[elems]
        A = np.einsum("pn,kcjn->kpcj", V, dX)
        return np.linalg.det(A)

    def normals_at(self, ref_points, ref_normal, elems=None):
        """Scaled normals n_i J_f = sum_j g_ij nhat_j: (K, d, P)."""
        g = self.g_at(ref_points, elems)
        return np.einsum("kijp,j->kip", g, np.asarray(ref_normal, dtype=float))


def mapping_derivatives(mesh: Mesh) -> np.ndarray:
    D = geo_diff_ops(mesh.n_geo, mesh.dim)
    return np.stack([np.einsum("mn,kcn->kcm", Dj, mesh.X) for Dj in D], axis=2)


def metric_terms_2d(mesh: Mesh) -> MetricData:
    if mesh.dim != 2:
        raise InvalidArgumentError("metric_terms_2d needs a 2D mesh")
    dX = mapping_derivatives(mesh)
    x1, x2 = dX[:, 0, 0], dX[:, 0, 1]
    y1, y2 = dX[:, 1, 0], dX[:, 1, 1]
    G = np.empty((mesh.K, 2, 2, dX.shape[-1]))
    G[:, 0, 0], G[:, 0, 1] = y2, -y1
    G[:, 1, 0], G[:, 1, 1] = -x2, x1
    md = MetricData(mesh, G, dX, 0)
    _check_positive(md)
    return md


def potentials_3d(mesh: Mesh, dX=None, X=None):
    """f[k, i, j] per the curl construction: (D_j y) z, (D_j x) z, (D_j y) x."""
    if dX is None:
        dX = mapping_derivatives(mesh)
    X = mesh.X if X is None else X
    x, y, z = X[:, 0], X[:, 1], X[:, 2]
    f = np.empty((X.shape[0], 3, 3, X.shape[-1]))
    for j in range(3):
        f[:, 0, j] = dX[:, 1, j] * z
        f[:, 1, j] = dX[:, 0, j] * z
        f[:, 2, j] = dX[:, 1, j] * x
    return f


def _reduce_potentials(f, n_geo):
    F1 = degree_reduction_1d(n_geo)
    f = f.copy()
    for j in range(3):
        Fj = _axis_op(F1, j, 3)
        f[:, :, j] = np.einsum("mn,kin->kim", Fj, f[:, :, j])
    return f


def element_potentials(mesh: Mesh, approach, dX=None, X=None):
    f = potentials_3d(mesh, dX, X)
    if GeoApproach(approach) == GeoApproach.REDUCED_CURL:
        f = _reduce_potentials(f, mesh.n_geo)
    return f


def curl_metrics(f, n_geo):
    D = geo_diff_ops(n_geo, 3)
    alpha = (1.0, -1.0, -1.0)

    def Dm(j, v):
        return np.einsum("mn,kn->km", D[j], v)

    G = np.empty_like(f)
    for i in range(3):
        a = alpha[i]
        G[:, i, 0] = a * (Dm(2, f[:, i, 1]) - Dm(1, f[:, i, 2]))
        G[:, i, 1] = a * (Dm(0, f[:, i, 2]) - Dm(2, f[:, i, 0]))
        G[:, i, 2] = a * (Dm(1, f[:, i, 0]) - Dm(0, f[:, i, 1]))
    return G


def enforce_potential_continuity(mesh: Mesh, f, approach=GeoApproach.CURL, dX=None):
    """Overwrite fine-side tangential potentials on non-conforming faces.

    Coarse values are interpolated to the fine face's mapping nodes and scaled
    by 1/2 because each tangential reference derivative on the child is half
    of the parent's.  Across a periodic seam the coarse potentials are
    recomputed from coordinates shifted onto the fine side.
    """
    f = f.copy()
    if dX is None:
        dX = mapping_derivatives(mesh)
    ref = mesh.geo_ref_nodes()
    r = geo_nodes(mesh.n_geo)
    for (e, fc_), kids in mesh.faces.children.items():
        axis = fc_ // 2
        plane_c = mesh.lo[e, axis] + (fc_ % 2) * mesh.size[e, axis]
        for ec, fc in kids:
            side = fc % 2
            plane_f = mesh.lo[ec, axis] + side * mesh.size[ec, axis]
            fe = f[e]
            if plane_f != plane_c:
                Xs = mesh.X[e:e + 1].copy()
                Xs[0, axis] += (plane_f - plane_c) * mesh.scale[axis]
                fe = element_potentials(mesh, approach, dX[e:e + 1], Xs)[0]
            on = np.abs(ref[:, axis] - (2 * side - 1)) < 1e-14
            lat = mesh.lattice_coords(ec, ref[on])
            ref_c = 2.0 * (lat - mesh.lo[e]) / mesh.size[e] - 1.0
            ref_c[:, axis] = 2 * (fc_ % 2) - 1
            V = tensor_interp(r, ref_c)
            ratio = mesh.size[ec] / mesh.size[e]
            for j in range(3):
                if j == axis:
                    continue
                # chain rule for the one reference derivative inside f_ij
                f[ec, :, j][:, on] = ratio[j] * np.einsum("pn,in->ip", V, fe[:, j])
    return f


def metric_terms_3d(mesh: Mesh, approach=GeoApproach.CURL) -> MetricData:
    if mesh.dim != 3:
        raise InvalidArgumentError("3D metric terms need a 3D mesh")
    approach = GeoApproach(approach)
    dX = mapping_derivatives(mesh)
    f = element_potentials(mesh, approach, dX)
    if mesh.nonconforming:
        f = enforce_potential_continuity(mesh, f, approach, dX)
    G = curl_metrics(f, mesh.n_geo)
    md = MetricData(mesh, G, dX, int(approach))
    _check_positive(md)
    return md


def metric_terms_3d_approach1(mesh: Mesh) -> MetricData:
    return metric_terms_3d(mesh, GeoApproach.CURL)


def metric_terms_3d_approach2(mesh: Mesh) -> MetricData:
    return metric_terms_3d(mesh, GeoApproach.REDUCED_CURL)


def metric_terms(mesh: Mesh, approach=GeoApproach.REDUCED_CURL) -> MetricData:
    return metric_terms_2d(mesh) if mesh.dim == 2 else metric_terms_3d(mesh, approach)


def _check_positive(md: MetricData):
    J = md.J_at(md.mesh.geo_ref_nodes())
    if np.any(J <= 0):
        k = int(np.argmin(J.min(axis=1)))
        raise InvalidGeometryError(f"non-positive Jacobian in element {k}")


def exact_cofactor(jac):
    """Cofactor matrix g_ij = J d(xhat_j)/d(x_i) from dX[c, j] = d x_c / d xhat_j."""
    jac = np.asarray(jac)
    if jac.shape[-1] == 2:
        g = np.empty_like(jac)
        g[..., 0, 0], g[..., 0, 1] = jac[..., 1, 1], -jac[..., 1, 0]
        g[..., 1, 0], g[..., 1, 1] = -jac[..., 0, 1], jac[..., 0, 0]
        return g
    # adj(A)^T = cof(A); g = J A^{-1} transposed appropriately: g_ij = cof(A)_ij
    a = jac
    c = np.empty_like(a)
    for i in range(3):
        for j in range(3):
            i1, i2 = [r for r in range(3) if r != i]
            j1, j2 = [s for s in range(3) if s != j]
            c[..., i, j] = ((-1) ** (i + j)) * (a[..., i1, j1] * a[..., i2, j2] - a[..., i1, j2] * a[..., i2, j1])
    return c


def gcl_residual(md: MetricData, ref_nodes_1d) -> float:
    """max |sum_j D_j g_ij| at the tensor grid on ``ref_nodes_1d`` (collocation D)."""
    from .mesh import tensor_points

    dim = md.dim
    pts = tensor_points(ref_nodes_1d, dim)
    g = md.g_at(pts)
    D1 = differentiation_matrix(ref_nodes_1d)
    D = [_axis_op(D1, a, dim) for a in range(dim)]
    res = sum(np.einsum("mn,kin->kim", D[j], g[:, :, j]) for j in range(dim))
    return float(np.max(np.abs(res)))
