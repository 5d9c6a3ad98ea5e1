"""Face-to-mortar interpolation and mortar-based hybridized SBP operators.

A mortar layout lives on one reference face.  Split layouts use 2-to-1
refinement: 1D faces split into [-1,0] and [0,1]; 2D faces split both face
coordinates.  Mortar node order on a 2D face is C order over the two split
coordinates (each of length 2(N+1)), which is the same order produced by
the two-layer chain ``E_{m2,m1} E_{m1,f}``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import IncompatibleQuadratureError, InvalidArgumentError
from .reference_operators import (
    Quadrature1D,
    TensorOperators,
    face_axes,
    kron_all,
    lagrange_interp_matrix,
)


class Split(str, Enum):
    CONFORMING = "conforming"
    HALF = "half_split"
    TWO_LAYER = "two_layer_isotropic"


def split_nodes_1d(quad: Quadrature1D):
    """Composite rule: the quadrature mapped to [-1,0] and [0,1]."""
    x, w = quad.nodes, quad.weights
    return np.concatenate([(x - 1) / 2, (x + 1) / 2]), np.concatenate([w / 2, w / 2])


def split_interp_1d(quad: Quadrature1D) -> np.ndarray:
    """Interpolation from the (N+1) face nodes to the composite split nodes."""
    xs, _ = split_nodes_1d(quad)
    return lagrange_interp_matrix(quad.nodes, xs)


@dataclass(frozen=True)
class MortarLayout:
    """Mortar nodes on a single reference face.

    ``sub_index[k]`` is the fine sub-face containing mortar node k (0 for
    conforming layouts) and ``sub_local[k]`` the node index within that
    sub-face's own tensor grid.
    """

    face_dim: int
    split: Split
    quad: Quadrature1D
    nodes: np.ndarray          # (n_m, face_dim) reference face coordinates
    weights: np.ndarray
    sub_index: np.ndarray
    sub_local: np.ndarray
    sub_boxes: list = field(default_factory=list)  # [(lo, hi) per face axis] for each sub-face

    @property
    def conforming(self) -> bool:
        return self.split == Split.CONFORMING

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def n_sub(self) -> int:
        return len(self.sub_boxes)


def _face_dim(face_kind) -> int:
    if face_kind in (1, "edge", "line", "1d"):
        return 1
    if face_kind in (2, "quad", "2d"):
        return 2
    raise InvalidArgumentError(f"unknown face kind {face_kind!r}")


def build_mortar_layout(face_kind, split, quad_kind, N) -> MortarLayout:
    from .reference_operators import quadrature

    fd = _face_dim(face_kind)
    split = Split(split)
    if N < 1:
        raise InvalidArgumentError("N must be >= 1")
    quad = quadrature(quad_kind, N + 1)
    n = N + 1
    if split == Split.TWO_LAYER and fd != 2:
        raise InvalidArgumentError("two-layer mortars need 2D faces (hexahedra)")
    if split == Split.CONFORMING:
        x1, w1 = quad.nodes, quad.weights
        sub = np.zeros(n**fd, dtype=int)
        loc = np.arange(n**fd)
        boxes = [[(-1.0, 1.0)] * fd]
    else:
        x1, w1 = split_nodes_1d(quad)
        idx = np.arange(2 * n)
        s1, a1 = idx // n, idx % n
        if fd == 1:
            sub, loc = s1, a1
        else:
            S1, S2 = np.meshgrid(s1, s1, indexing="ij")
            A1, A2 = np.meshgrid(a1, a1, indexing="ij")
            sub = (2 * S1 + S2).ravel()
            loc = (n * A1 + A2).ravel()
        halves = [(-1.0, 0.0), (0.0, 1.0)]
        boxes = [[halves[s]] for s in range(2)] if fd == 1 else \
            [[halves[s1_], halves[s2_]] for s1_ in range(2) for s2_ in range(2)]
    grids = np.meshgrid(*([x1] * fd), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = kron_all([w1] * fd)
    return MortarLayout(fd, split, quad, nodes, weights, np.asarray(sub), np.asarray(loc), boxes)


@dataclass(frozen=True)
class MortarInterp:
    """Interpolation/projection between one reference face and its mortar."""

    layout: MortarLayout
    E_mf: np.ndarray
    E_fm: np.ndarray
    M_f: np.ndarray     # diagonal entries
    M_m: np.ndarray
    B_f: np.ndarray     # (face_dim+1, nfp) signed boundary entries per coordinate
    B_m: np.ndarray     # (face_dim+1, n_m)

    def mhsbp_residual(self) -> float:
        r = self.B_f[:, :, None] * self.E_fm[None] - self.E_mf.T[None] * self.B_m[:, None, :]
        return float(np.max(np.abs(r)))


def _face_interp(quad: Quadrature1D, layout: MortarLayout) -> np.ndarray:
    n = quad.n_points
    if layout.conforming:
        return np.eye(n**layout.face_dim)
    E1 = split_interp_1d(quad)
    return kron_all([E1] * layout.face_dim)


def build_mortar_interp(face_quad: Quadrature1D, layout: MortarLayout, reference_normal) -> MortarInterp:
    """``reference_normal`` is the outward reference normal of the face (length d)."""
    nrm = np.asarray(reference_normal, dtype=float)
    E_mf = _face_interp(face_quad, layout)
    M_f = kron_all([face_quad.weights] * layout.face_dim)
    M_m = layout.weights
    E_fm = (E_mf.T * M_m[None, :]) / M_f[:, None]
    B_f = nrm[:, None] * M_f[None, :]
    B_m = nrm[:, None] * M_m[None, :]
    return MortarInterp(layout, E_mf, E_fm, M_f, M_m, B_f, B_m)


@dataclass(frozen=True)
class MortarSBP:
    """Mortar hybridized SBP operators on a reference element.

    Block order of ``Q[i]``: volume, all face nodes, layer-1 mortar nodes,
    and (two-layer only) layer-2 mortar nodes.  ``chain`` maps volume values to
    each block; ``B_terminal[i]`` is the diagonal terminal boundary matrix.
    """

    layers: int
    Q: list
    chain: list
    B_terminal: list
    blocks: list                  # sizes of the diagonal blocks
    interps: list = field(default_factory=list)
    interps2: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(sum(self.blocks))


def _blockdiag(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def _as_face_list(ops: TensorOperators, interp):
    if isinstance(interp, MortarInterp):
        return face_interps(ops, interp.layout)
    interp = list(interp)
    if len(interp) != ops.n_faces:
        raise InvalidArgumentError("need one mortar interp per face")
    return interp


def face_interps(ops: TensorOperators, layouts) -> list:
    """One :class:`MortarInterp` per face from a layout or a per-face list."""
    if isinstance(layouts, MortarLayout):
        layouts = [layouts] * ops.n_faces
    out = []
    for f, lay in enumerate(layouts):
        axis, side, _ = face_axes(ops.dim, f)
        nrm = np.zeros(ops.dim)
        nrm[axis] = -1.0 if side == 0 else 1.0
        out.append(build_mortar_interp(ops.ops1d.quad, lay, nrm))
    return out


def build_mortar_sbp(tensor_ops: TensorOperators, interp) -> MortarSBP:
    """One-layer operator; ``interp`` is one MortarInterp per face (or a list of them)."""
    ops = tensor_ops
    interps = _as_face_list(ops, interp)
    for it in interps:
        if it.layout.split == Split.TWO_LAYER:
            raise InvalidArgumentError("use build_two_layer_mortar_sbp for two-layer layouts")
        if it.mhsbp_residual() > 1e-10:
            raise IncompatibleQuadratureError("face and mortar boundary matrices are incompatible")
    E_mf = _blockdiag([it.E_mf for it in interps])
    E_fm = _blockdiag([it.E_fm for it in interps])
    nv, nf, nm = ops.nv, E_mf.shape[1], E_mf.shape[0]
    Q_list, Bt = [], []
    for i in range(ops.dim):
        Bf = np.diag(ops.B[i])
        Bm_d = np.concatenate([it.B_m[i] for it in interps])
        Bm = np.diag(Bm_d)
        Qi = ops.Q[i]
        Z = np.zeros
        Q = 0.5 * np.block([
            [Qi - Qi.T, ops.E.T @ Bf, Z((nv, nm))],
            [-Bf @ ops.E, Z((nf, nf)), Bf @ E_fm],
            [Z((nm, nv)), -Bm @ E_mf, Bm],
        ])
        Q_list.append(Q)
        Bt.append(Bm_d)
    chain = [np.eye(nv), ops.E, E_mf @ ops.E]
    return MortarSBP(1, Q_list, chain, Bt, [nv, nf, nm], interps)


def two_layer_interps(quad: Quadrature1D, reference_normal):
    """Layer interpolations for a 2D face: split axis 1 first, then axis 2."""
    nrm = np.asarray(reference_normal, dtype=float)
    n = quad.n_points
    E1 = split_interp_1d(quad)
    _, ws = split_nodes_1d(quad)
    w = quad.weights
    E_m1f = np.kron(E1, np.eye(n))
    M_f = np.kron(w, w)
    M_m1 = np.kron(ws, w)
    E_m2m1 = np.kron(np.eye(2 * n), E1)
    M_m2 = np.kron(ws, ws)
    E_fm1 = (E_m1f.T * M_m1) / M_f[:, None]
    E_m1m2 = (E_m2m1.T * M_m2) / M_m1[:, None]
    return dict(E_m1f=E_m1f, E_fm1=E_fm1, E_m2m1=E_m2m1, E_m1m2=E_m1m2,
                M_f=M_f, M_m1=M_m1, M_m2=M_m2,
                B_f=nrm[:, None] * M_f, B_m1=nrm[:, None] * M_m1, B_m2=nrm[:, None] * M_m2)


def build_two_layer_mortar_sbp(tensor_ops: TensorOperators, interp_m1=None, interp_m2=None,
                               two_layer_faces=None) -> MortarSBP:
    """Two-layer operator on a hexahedron.

    Faces listed in ``two_layer_faces`` (default: all) carry a two-layer
    mortar; remaining faces are conforming and pass through both layers with
    identity interpolation.  ``interp_m1``/``interp_m2`` may be given as the
    per-face dicts from :func:`two_layer_interps`; by default they are built.
    """
    ops = tensor_ops
    if ops.dim != 3:
        raise InvalidArgumentError("two-layer mortars require dim = 3")
    if two_layer_faces is None:
        two_layer_faces = range(ops.n_faces)
    two_layer_faces = set(two_layer_faces)
    quad = ops.ops1d.quad
    per_face = []
    for f in range(ops.n_faces):
        axis, side, _ = face_axes(3, f)
        nrm = np.zeros(3)
        nrm[axis] = -1.0 if side == 0 else 1.0
        if f in two_layer_faces:
            d = two_layer_interps(quad, nrm)
            if interp_m1 is not None:
                d.update({k: v for k, v in interp_m1[f].items()})
            if interp_m2 is not None:
                d.update({k: v for k, v in interp_m2[f].items()})
        else:
            n2 = ops.nfp
            I = np.eye(n2)
            wf = np.kron(quad.weights, quad.weights)
            d = dict(E_m1f=I, E_fm1=I, E_m2m1=I, E_m1m2=I, M_f=wf, M_m1=wf, M_m2=wf,
                     B_f=nrm[:, None] * wf, B_m1=nrm[:, None] * wf, B_m2=nrm[:, None] * wf)
        for a, b, Eab, Eba in (("f", "m1", "E_fm1", "E_m1f"), ("m1", "m2", "E_m1m2", "E_m2m1")):
            r = d["B_" + a][:, :, None] * d[Eab][None] - d[Eba].T[None] * d["B_" + b][:, None, :]
            if np.max(np.abs(r)) > 1e-10:
                raise IncompatibleQuadratureError("two-layer boundary matrices are incompatible")
        per_face.append(d)
    E_m1f = _blockdiag([d["E_m1f"] for d in per_face])
    E_fm1 = _blockdiag([d["E_fm1"] for d in per_face])
    E_m2m1 = _blockdiag([d["E_m2m1"] for d in per_face])
    E_m1m2 = _blockdiag([d["E_m1m2"] for d in per_face])
    nv, nf, n1, n2 = ops.nv, E_m1f.shape[1], E_m1f.shape[0], E_m2m1.shape[0]
    Z = np.zeros
    Q_list, Bt = [], []
    for i in range(3):
        Bf = np.diag(ops.B[i])
        B1 = np.diag(np.concatenate([d["B_m1"][i] for d in per_face]))
        B2d = np.concatenate([d["B_m2"][i] for d in per_face])
        B2 = np.diag(B2d)
        Qi = ops.Q[i]
        Q = 0.5 * np.block([
            [Qi - Qi.T, ops.E.T @ Bf, Z((nv, n1)), Z((nv, n2))],
            [-Bf @ ops.E, Z((nf, nf)), Bf @ E_fm1, Z((nf, n2))],
            [Z((n1, nv)), -B1 @ E_m1f, Z((n1, n1)), B1 @ E_m1m2],
            [Z((n2, nv)), Z((n2, nf)), -B2 @ E_m2m1, B2],
        ])
        Q_list.append(Q)
        Bt.append(B2d)
    chain = [np.eye(nv), ops.E, E_m1f @ ops.E, E_m2m1 @ E_m1f @ ops.E]
    return MortarSBP(2, Q_list, chain, Bt, [nv, nf, n1, n2], interps2=per_face)


def one_mortar_correction_pattern(N: int, face_dim: int = 2) -> np.ndarray:
    """Structural pattern of [[0, E_fm], [-E_mf, 0]] on one split face."""
    n = N + 1
    P1 = np.ones((2 * n, n), dtype=bool)
    Pmf = kron_all([P1] * face_dim) if face_dim > 1 else P1
    nf, nm = Pmf.shape[1], Pmf.shape[0]
    P = np.zeros((nf + nm, nf + nm), dtype=bool)
    P[:nf, nf:] = Pmf.T
    P[nf:, :nf] = Pmf
    return P


def two_mortar_correction_pattern(N: int) -> np.ndarray:
    """Structural pattern of the two-layer correction on one hexahedral face."""
    n = N + 1
    P1 = np.ones((2 * n, n), dtype=bool)
    Pm1f = np.kron(P1, np.eye(n, dtype=bool))
    Pm2m1 = np.kron(np.eye(2 * n, dtype=bool), P1)
    nf, n1, n2 = n * n, 2 * n * n, 4 * n * n
    size = nf + n1 + n2
    P = np.zeros((size, size), dtype=bool)
    P[:nf, nf:nf + n1] = Pm1f.T
    P[nf:nf + n1, :nf] = Pm1f
    P[nf:nf + n1, nf + n1:] = Pm2m1.T
    P[nf + n1:, nf:nf + n1] = Pm2m1
    return P


def correction_sparsity(N: int, layers: int = 1, face_dim: int = 2):
    """(size, structural nonzeros) of the per-face correction matrix."""
    P = one_mortar_correction_pattern(N, face_dim) if layers == 1 else two_mortar_correction_pattern(N)
    return P.shape[0], int(P.sum())


def face_to_volume_points(dim: int, face: int, face_pts) -> np.ndarray:
    """Embed reference face coordinates (P, d-1) into volume coordinates."""
    axis, side, tang = face_axes(dim, face)
    face_pts = np.atleast_2d(face_pts)
    out = np.zeros((len(face_pts), dim))
    out[:, axis] = 2 * side - 1
    for k, a in enumerate(tang):
        out[:, a] = face_pts[:, k]
    return out


def mortar_points(dim: int, layouts) -> np.ndarray:
    """Volume reference coordinates of all terminal mortar nodes, face by face."""
    return np.vstack([face_to_volume_points(dim, f, lay.nodes) for f, lay in enumerate(layouts)])


def layer1_points(quad: Quadrature1D, face: int, two_layer: bool) -> np.ndarray:
    """Layer-1 node coordinates on a hexahedral face (axis-1 split only)."""
    n = quad.n_points
    if two_layer:
        xs, _ = split_nodes_1d(quad)
    else:
        xs = quad.nodes
    grids = np.meshgrid(xs, quad.nodes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return face_to_volume_points(3, face, pts)
