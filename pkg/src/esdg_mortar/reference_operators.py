"""1D quadratures and reference-element SBP operators.

Node ordering convention (used everywhere in the package):

* Volume nodes of a d-dimensional element are stored in C order over the
  per-axis indices ``(i1, i2[, i3])``, so axis 1 varies slowest.  This matches
  Kronecker products written as ``kron(A_axis1, A_axis2, ...)``.
* Faces are numbered ``f = 2 * axis + side`` with ``side = 0`` for the
  ``x_axis = -1`` face and ``side = 1`` for ``x_axis = +1``.  In 2D this gives
  (x1=-1, x1=+1, x2=-1, x2=+1); 3D appends (x3=-1, x3=+1).
* Within a face, nodes are ordered in C order over the remaining axes taken in
  increasing order.  Face blocks are stored contiguously, face by face.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

import numpy as np

from .errors import DegenerateBasisError, InconsistentOperatorsError, InvalidArgumentError


class NodeKind(str, Enum):
    LOBATTO = "lobatto"
    GAUSS = "gauss"


@dataclass(frozen=True)
class Quadrature1D:
    kind: NodeKind
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.nodes)

    @property
    def degree(self) -> int:
        """Polynomial degree N of the collocated Lagrange basis."""
        return len(self.nodes) - 1

    @property
    def exactness(self) -> int:
        n = len(self.nodes)
        return 2 * n - 1 if self.kind == NodeKind.GAUSS else 2 * n - 3


def _legendre(n, x):
    """Return P_n(x), P_{n-1}(x) and P_n'(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x), np.zeros_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, p_prev, dp


def gauss_quadrature(n_points: int) -> Quadrature1D:
    """Gauss-Legendre rule with ``n_points`` nodes on [-1, 1]."""
    if n_points < 1:
        raise InvalidArgumentError(f"Gauss rule needs at least 1 point, got {n_points}")
    n = n_points
    k = np.arange(1, n + 1)
    # Tricomi initial guess, descending -> flip later
    x = np.cos(np.pi * (4 * k - 1) / (4 * n + 2)) * (1 - (n - 1) / (8.0 * n**3))
    for _ in range(100):
        p, _, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    _, _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x, w = x[::-1].copy(), w[::-1].copy()
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return Quadrature1D(NodeKind.GAUSS, x, w)


def lobatto_quadrature(n_points: int) -> Quadrature1D:
    """Gauss-Lobatto-Legendre rule with ``n_points`` nodes (endpoints included)."""
    if n_points < 2:
        raise InvalidArgumentError(f"Lobatto rule needs at least 2 points, got {n_points}")
    N = n_points - 1
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    for _ in range(100):
        p, p_prev, _ = _legendre(N, x)
        dx = (x * p - p_prev) / ((N + 1) * p)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    x[0], x[-1] = -1.0, 1.0
    p, _, _ = _legendre(N, x)
    w = 2.0 / (N * (N + 1) * p * p)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return Quadrature1D(NodeKind.LOBATTO, x, w)


def quadrature(kind, n_points: int) -> Quadrature1D:
    kind = NodeKind(kind)
    if kind == NodeKind.GAUSS:
        return gauss_quadrature(n_points)
    return lobatto_quadrature(n_points)


def _barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise DegenerateBasisError("source nodes must be distinct")
    return 1.0 / np.prod(diff, axis=1)


def lagrange_interp_matrix(source_nodes, targets) -> np.ndarray:
    """Matrix with entries ``l_j(targets[i])`` for the Lagrange basis on ``source_nodes``."""
    xs = np.asarray(source_nodes, dtype=float)
    xt = np.atleast_1d(np.asarray(targets, dtype=float))
    lam = _barycentric_weights(xs)
    diff = xt[:, None] - xs[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tmp = lam[None, :] / diff
        V = tmp / tmp.sum(axis=1, keepdims=True)
    # a target within overflow distance of a node is that node
    exact = ~np.isfinite(tmp)
    rows = np.any(exact, axis=1)
    V[rows] = exact[rows].astype(float)
    return V


def differentiation_matrix(nodes) -> np.ndarray:
    """Nodal differentiation matrix ``D_ij = l_j'(x_i)``."""
    x = np.asarray(nodes, dtype=float)
    lam = _barycentric_weights(x)
    n = len(x)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = lam[j] / lam[i] / (x[i] - x[j])
        D[i, i] = -D[i].sum()
    return D


def lagrange_deriv_matrix(source_nodes, targets) -> np.ndarray:
    """Entries ``l_j'(targets[i])``; exact for the degree of the source basis."""
    xs = np.asarray(source_nodes, dtype=float)
    return lagrange_interp_matrix(xs, targets) @ differentiation_matrix(xs)


@dataclass(frozen=True)
class Operators1D:
    quad: Quadrature1D
    M: np.ndarray
    Q: np.ndarray
    E: np.ndarray
    B: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return self.Q / self.quad.weights[:, None]


@dataclass(frozen=True)
class HybridizedSBP1D:
    Qh: np.ndarray
    Bh: np.ndarray


def build_operators_1d(quad: Quadrature1D) -> Operators1D:
    x, w = quad.nodes, quad.weights
    D = differentiation_matrix(x)
    M = np.diag(w)
    Q = M @ D
    E = lagrange_interp_matrix(x, [-1.0, 1.0])
    B = np.diag([-1.0, 1.0])
    return Operators1D(quad, M, Q, E, B)


def gsbp_residual(ops: Operators1D) -> float:
    return float(np.max(np.abs(ops.Q + ops.Q.T - ops.E.T @ ops.B @ ops.E)))


def hybridized_sbp_1d(ops: Operators1D) -> HybridizedSBP1D:
    if gsbp_residual(ops) > 1e-10:
        raise InconsistentOperatorsError("1D operators violate generalized SBP")
    Q, E, B = ops.Q, ops.E, ops.B
    Qh = 0.5 * np.block([[Q - Q.T, E.T @ B], [-B @ E, B]])
    n = Q.shape[0]
    Bh = np.zeros((n + 2, n + 2))
    Bh[n:, n:] = B
    return HybridizedSBP1D(Qh, Bh)


def kron_all(mats):
    return reduce(np.kron, mats)


def face_axes(dim: int, face: int):
    """Normal axis, side (0: -1, 1: +1) and tangential axes of a reference face."""
    axis, side = divmod(face, 2)
    return axis, side, [a for a in range(dim) if a != axis]


@dataclass(frozen=True)
class TensorOperators:
    dim: int
    ops1d: Operators1D
    Q: list                    # Qhat_i, volume
    M: np.ndarray              # diagonal of Mhat
    E: np.ndarray              # (n_faces * nfp) x nv, face-by-face
    B: list                    # diagonals of Bhat_i on all face nodes
    Qh: list                   # hybridized operators
    face_weights: np.ndarray   # w_f on all face nodes
    face_normals: np.ndarray   # reference normals (n_face_nodes, dim)
    volume_nodes: np.ndarray   # (nv, dim)
    face_nodes: np.ndarray     # (n_face_nodes, dim) reference coordinates
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def N(self) -> int:
        return self.ops1d.quad.degree

    @property
    def n1d(self) -> int:
        return self.ops1d.quad.n_points

    @property
    def nv(self) -> int:
        return self.n1d**self.dim

    @property
    def n_faces(self) -> int:
        return 2 * self.dim

    @property
    def nfp(self) -> int:
        return self.n1d ** (self.dim - 1)

    def face_slice(self, face: int) -> slice:
        return slice(face * self.nfp, (face + 1) * self.nfp)


def tensor_operators(ops1d: Operators1D, dim: int) -> TensorOperators:
    if dim not in (2, 3):
        raise InvalidArgumentError(f"dim must be 2 or 3, got {dim}")
    quad = ops1d.quad
    n = quad.n_points
    I = np.eye(n)
    M1 = ops1d.M
    Q = []
    for i in range(dim):
        Q.append(kron_all([ops1d.Q if a == i else M1 for a in range(dim)]))
    Mvec = kron_all([quad.weights] * dim)

    E_rows = []
    wf, nrm, fnodes = [], [], []
    for f in range(2 * dim):
        axis, side, tang = face_axes(dim, f)
        E_rows.append(kron_all([ops1d.E[side:side + 1] if a == axis else I for a in range(dim)]))
        w = kron_all([quad.weights] * (dim - 1))
        wf.append(w)
        sign = -1.0 if side == 0 else 1.0
        nf = np.zeros((len(w), dim))
        nf[:, axis] = sign
        nrm.append(nf)
        grids = np.meshgrid(*([quad.nodes] * (dim - 1)), indexing="ij")
        pts = np.zeros((len(w), dim))
        pts[:, axis] = sign
        for k, a in enumerate(tang):
            pts[:, a] = grids[k].ravel()
        fnodes.append(pts)
    E = np.vstack(E_rows)
    wf = np.concatenate(wf)
    nrm = np.vstack(nrm)
    fnodes = np.vstack(fnodes)
    Bd = [nrm[:, i] * wf for i in range(dim)]

    Qh = []
    for i in range(dim):
        Bi = np.diag(Bd[i])
        Qh.append(0.5 * np.block([[Q[i] - Q[i].T, E.T @ Bi], [-Bi @ E, Bi]]))

    grids = np.meshgrid(*([quad.nodes] * dim), indexing="ij")
    vnodes = np.stack([g.ravel() for g in grids], axis=1)
    return TensorOperators(dim, ops1d, Q, Mvec, E, Bd, Qh, wf, nrm, vnodes, fnodes)


def reference_operators(kind, N: int, dim: int) -> TensorOperators:
    """Convenience constructor: quadrature + 1D operators + tensor operators."""
    return tensor_operators(build_operators_1d(quadrature(kind, N + 1)), dim)
