"""Quadrature error norms of a nodal DG solution."""

from dataclasses import dataclass

import numpy as np

from ..geometry.mesh import tensor_points
from ..reference_operators import gauss_quadrature, kron_all, lagrange_interp_matrix


@dataclass
class ErrorEntry:
    l2: np.ndarray        # per field
    linf: np.ndarray      # per field

    @property
    def l2_total(self):
        return float(np.sqrt(np.sum(self.l2**2)))

    @property
    def linf_total(self):
        return float(np.max(self.linf))


def compute_errors(disc, u, exact, t, boost=2):
    """L2 and Linf errors at (N + boost)-point Gauss nodes of every element.

    ``exact(points (P, d), t) -> (P, nvar)``.
    """
    from ..solver.discretization import physical_nodes

    d = disc.dim
    q = gauss_quadrature(disc.N + boost)
    pts = tensor_points(q.nodes, d)
    w = kron_all([q.weights[None, :]] * d).ravel()
    V1 = lagrange_interp_matrix(disc.ops.ops1d.quad.nodes, q.nodes)
    V = kron_all([V1] * d)
    uq = np.einsum("pn,knq->kpq", V, u)
    xq = physical_nodes(disc, pts)
    J = disc.metric.J_at(pts)
    K, P, _ = xq.shape
    ue = np.asarray(exact(xq.reshape(-1, d), t)).reshape(K, P, -1)
    err = uq - ue
    l2 = np.sqrt(np.einsum("kp,kpq->q", J * w[None, :], err**2))
    linf = np.max(np.abs(err), axis=(0, 1))
    return ErrorEntry(l2, linf)
