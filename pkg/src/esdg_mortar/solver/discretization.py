"""Semidiscrete entropy-stable DG right-hand sides."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import AdmissibilityError, ConfigError, DomainError, InvalidArgumentError
from ..euler import GAMMA, conservative_from_entropy, entropy_variables
from ..geometry.mesh import COARSE, Mesh, geo_nodes, tensor_interp
from ..geometry.metrics import MetricData, metric_terms
from ..geometry.physical import check_mortar_preconditions
from ..geometry.terminals import Terminals, build_terminals, terminal_normals
from ..mortar import layer1_points, split_interp_1d, split_nodes_1d, two_layer_interps
from ..reference_operators import NodeKind, TensorOperators, face_axes, reference_operators
from . import kernels


class Formulation(str, Enum):
    CONFORMING = "conforming"
    MORTAR_DIRECT = "mortar-direct"
    MORTAR = "mortar"
    TWO_MORTAR = "two-mortar"


class Dissipation(str, Enum):
    NONE = "none"
    LF = "lf"


@dataclass
class Discretization:
    """Everything needed to evaluate du/dt on a fixed mesh."""

    mesh: Mesh
    ops: TensorOperators
    metric: MetricData
    terminals: Terminals
    formulation: Formulation
    dissipation: Dissipation = Dissipation.LF
    gamma: float = GAMMA
    gv: np.ndarray = None          # (K, d, d, nv)
    gf: np.ndarray = None          # (K, d, d, nft)
    nf: np.ndarray = None          # (K, nft, d) unweighted normals at face nodes
    J: np.ndarray = None           # (K, nv)
    nT: np.ndarray = None          # (T, d)
    extra: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.mesh.dim

    @property
    def nvar(self):
        return self.mesh.dim + 2

    @property
    def N(self):
        return self.ops.N

    @property
    def kind(self):
        return self.ops.ops1d.quad.kind

    def mass(self):
        """Diagonal of J * Mhat, (K, nv)."""
        return self.J * self.ops.M[None, :]


def _lines(ops: TensorOperators):
    """Volume indices along lines in each direction and the face nodes at line ends."""
    d, n = ops.dim, ops.n1d
    idx = np.arange(n**d).reshape((n,) * d)
    nl = n ** (d - 1)
    lines = np.empty((d, nl, n), dtype=np.int64)
    lface = np.empty((d, 2, nl), dtype=np.int64)
    for j in range(d):
        moved = np.moveaxis(idx, j, -1).reshape(nl, n)
        lines[j] = moved
        for side in range(2):
            lface[j, side] = (2 * j + side) * ops.nfp + np.arange(nl)
    return lines, lface


def build_discretization(mesh: Mesh, N: int, kind="gauss", formulation="mortar", dissipation="lf",
                         approach=2, metric=None, gamma=GAMMA, mortar_all=False,
                         check_preconditions=True) -> Discretization:
    formulation = Formulation(formulation)
    dissipation = Dissipation(dissipation)
    kind = NodeKind(kind)
    if mesh.n_geo > N:
        raise ConfigError(f"mapping degree {mesh.n_geo} exceeds N = {N}")
    if formulation == Formulation.TWO_MORTAR and mesh.dim != 3:
        raise ConfigError("the two-layer mortar formulation requires dim = 3")
    if formulation == Formulation.CONFORMING and mesh.nonconforming:
        raise ConfigError("conforming formulation on a non-conforming mesh")
    ops = reference_operators(kind, N, mesh.dim)
    md = metric if metric is not None else metric_terms(mesh, approach)
    if check_preconditions and mesh.nonconforming and formulation != Formulation.CONFORMING:
        check_mortar_preconditions(md, kind, N)
    term = build_terminals(mesh, ops, mortar_all=mortar_all)
    disc = Discretization(mesh, ops, md, term, formulation, dissipation, gamma)
    disc.gv = md.g_at(ops.volume_nodes)
    disc.gf = md.g_at(ops.face_nodes)
    disc.nf = np.ascontiguousarray(np.einsum("kijp,pj->kpi", disc.gf, ops.face_normals))
    disc.J = md.J_at(ops.volume_nodes)
    disc.nT = terminal_normals(md, term)
    _setup_fast(disc)
    return disc


def _setup_fast(disc: Discretization):
    ops, mesh, term = disc.ops, disc.mesh, disc.terminals
    lines, lface = _lines(ops)
    S = ops.ops1d.Q - ops.ops1d.Q.T
    W = np.prod(np.stack(np.meshgrid(*([ops.ops1d.quad.weights] * (ops.dim - 1)), indexing="ij")), axis=0).ravel()
    x = dict(lines=lines, lface=lface, S=S, W=W, E1=ops.ops1d.E.copy())
    coarse = np.argwhere(term.coarse)
    plain = np.argwhere(~term.coarse)
    x["plain"] = (plain[:, 0].astype(np.int64), (plain[:, 1] * ops.nfp).astype(np.int64),
                  term.offsets[plain[:, 0], plain[:, 1]].astype(np.int64))
    x["coarse"] = (coarse[:, 0].astype(np.int64), (coarse[:, 1] * ops.nfp).astype(np.int64),
                   term.offsets[coarse[:, 0], coarse[:, 1]].astype(np.int64))
    # gather maps between flat face-node storage (K * nft) and terminals
    nft, nfp = ops.E.shape[0], ops.nfp
    ar = np.arange(nfp)
    x["plain_src"] = (plain[:, 0:1] * nft + plain[:, 1:2] * nfp + ar).ravel()
    x["plain_dst"] = (x["plain"][2][:, None] + ar).ravel()
    x["coarse_src"] = coarse[:, 0:1] * nft + coarse[:, 1:2] * nfp + ar
    quad = ops.ops1d.quad
    E1s = split_interp_1d(quad)
    x["Emf"] = E1s if ops.dim == 2 else np.kron(E1s, E1s)
    nm = x["Emf"].shape[0]
    x["coarse_dst"] = (x["coarse"][2][:, None] + np.arange(nm)).ravel()
    if disc.formulation == Formulation.TWO_MORTAR and len(coarse):
        tl = two_layer_interps(quad, np.zeros(3))
        x["Em1f"], x["Em2m1"] = tl["E_m1f"], tl["E_m2m1"]
        n1 = tl["E_m1f"].shape[0]
        pts = np.stack([layer1_points(quad, f, True) for f in range(6)])  # (6, n1, 3)
        w1 = np.kron(split_nodes_1d(quad)[1], quad.weights)
        C = len(coarse)
        nm1 = np.empty((C * n1, 3))
        V = tensor_interp(geo_nodes(mesh.n_geo), pts.reshape(-1, 3)).reshape(6, n1, -1)
        for c, (e, f) in enumerate(coarse):
            g = np.einsum("pn,ijn->pij", V[f], disc.metric.G[e])
            nhat = np.zeros(3)
            nhat[f // 2] = 2 * (f % 2) - 1
            nm1[c * n1:(c + 1) * n1] = g @ nhat
        x["nm1"] = nm1
        x["w1"] = np.tile(w1, C)
        x["m1slice"] = (np.arange(C) * n1).astype(np.int64)
    disc.extra.update(x)


# ---------------------------------------------------------------- projection

@dataclass
class TraceData:
    v: np.ndarray        # (K, nv, nvar) entropy variables at volume nodes
    vf: np.ndarray       # (K, nft, nvar)
    uf: np.ndarray       # (K, nft, nvar) entropy-projected face states
    uT: np.ndarray       # (T, nvar) terminal states
    qf: np.ndarray = None
    qT: np.ndarray = None
    vm1: np.ndarray = None
    um1: np.ndarray = None
    qm1: np.ndarray = None


def _to_u(vv, gamma, where, stage, locate=None):
    """Conservative states and primitives from entropy variables (flat rows)."""
    flat = np.ascontiguousarray(vv).reshape(-1, vv.shape[-1])
    u = np.empty_like(flat)
    q = np.empty((flat.shape[0], flat.shape[1] + 3))
    bad = kernels.conservative_rows(flat, gamma, u, q)
    if bad >= 0:
        el = locate(bad) if locate is not None else None
        raise AdmissibilityError(f"entropy projection left the admissible set at {where} points",
                                 element=el, stage=stage)
    return u.reshape(vv.shape), q


def entropy_project(disc: Discretization, u, stage=None) -> TraceData:
    """v_f = E v(u), u_f = u(v_f), mortar states u(E_mf v_f) (or the two-layer chain)."""
    g = disc.gamma
    K, nv, nvar = u.shape
    v = np.empty_like(u)
    bad = kernels.entropy_rows(np.ascontiguousarray(u).reshape(-1, nvar), g, v.reshape(-1, nvar))
    if bad >= 0:
        raise AdmissibilityError("inadmissible nodal state (non-positive density or pressure)",
                                 element=bad // nv, stage=stage)
    vf = np.matmul(disc.ops.E, v)
    nft = vf.shape[1]
    uf, qf = _to_u(vf, g, "face", stage, lambda m: m // nft)
    x = disc.extra
    T = disc.terminals.T
    uT = np.empty((T, nvar))
    qT = np.empty((T, nvar + 3))
    # face terminals copy the projected face states
    uT[x["plain_dst"]] = uf.reshape(-1, nvar)[x["plain_src"]]
    qT[x["plain_dst"]] = qf[x["plain_src"]]
    td = TraceData(v, vf, uf, uT, qf, qT)
    if len(x["coarse_src"]):
        ce = x["coarse"][0]
        vface = vf.reshape(-1, nvar)[x["coarse_src"]]  # (C, nfp, nvar)
        if disc.formulation == Formulation.TWO_MORTAR:
            vm1 = np.matmul(x["Em1f"], vface)
            vm2 = np.matmul(x["Em2m1"], vm1)
            td.vm1 = vm1.reshape(-1, nvar)
            n1 = vm1.shape[1]
            td.um1, td.qm1 = _to_u(td.vm1, g, "mortar layer 1", stage, lambda m: ce[m // n1])
        else:
            vm2 = np.matmul(x["Emf"], vface)
        nm = vm2.shape[1]
        um, qm = _to_u(vm2.reshape(-1, nvar), g, "mortar", stage, lambda m: ce[m // nm])
        uT[x["coarse_dst"]] = um
        qT[x["coarse_dst"]] = qm
    return td


# ---------------------------------------------------------------- fast rhs

def residual(disc: Discretization, u, stage=None):
    """Weighted residual r with J Mhat du/dt = -r, shape (K, nv, nvar)."""
    if disc.formulation == Formulation.MORTAR_DIRECT:
        from .direct import direct_residual
        return direct_residual(disc, u, stage)
    x = disc.extra
    u = np.ascontiguousarray(u, dtype=float)
    td = entropy_project(disc, u, stage)
    K, nv, nvar = u.shape
    g = disc.gamma
    r = np.zeros_like(u)
    face = np.zeros_like(td.uf)
    q = kernels.to_primitives(u, g)
    qf, qT = td.qf, td.qT
    kernels.volume_kernel(q, qf, disc.gv, disc.gf, x["lines"], x["lface"], x["W"], x["S"], x["E1"], g, r, face)
    term = disc.terminals
    lf = 1.0 if disc.dissipation == Dissipation.LF else 0.0
    fstar = np.empty_like(td.uT)
    kernels.terminal_flux(td.uT, qT, term.partner, disc.nT, term.weight, g, lf, fstar)
    pe, pf, pt = x["plain"]
    if term.mortar_all and len(pe):
        kernels.mortar_correction(pe, pf, pt, qf, disc.nf, qT, disc.nT, term.weight, np.eye(disc.ops.nfp),
                                  g, face, fstar)
    else:
        kernels.add_face_terms(face, fstar, pe, pf, pt, disc.ops.nfp)
    ce, cf, ct = x["coarse"]
    if len(ce):
        if disc.formulation == Formulation.TWO_MORTAR:
            kernels.two_layer_correction(ce, cf, ct, x["m1slice"], qf, disc.nf, td.qm1, x["nm1"], x["w1"],
                                         qT, disc.nT, term.weight, x["Em1f"], x["Em2m1"], g, face, fstar)
        else:
            kernels.mortar_correction(ce, cf, ct, qf, disc.nf, qT, disc.nT, term.weight, x["Emf"],
                                      g, face, fstar)
    r += np.matmul(disc.ops.E.T, face)
    return r


def rhs(disc: Discretization, u, stage=None):
    """du/dt."""
    r = residual(disc, u, stage)
    return -r / disc.mass()[..., None]


def spatial_entropy(disc: Discretization, u):
    """(v^T F(u), relative magnitude) with F the weighted residual -r."""
    r = residual(disc, u)
    v = entropy_variables(u, disc.gamma)
    val = float(-np.sum(v * r))
    scale = float(np.linalg.norm(v) * np.linalg.norm(r))
    return val, (abs(val) / scale if scale > 0 else 0.0)


def integrate(disc: Discretization, u):
    """Quadrature totals of each conserved variable."""
    return np.einsum("kn,knq->q", disc.mass(), u)


def interpolate_initial(disc: Discretization, func):
    """Nodal interpolation of ``func(points (P, d)) -> (P, nvar)`` at collocation nodes."""
    pts = physical_nodes(disc)
    K, nv, d = pts.shape
    return np.asarray(func(pts.reshape(-1, d))).reshape(K, nv, -1)


def physical_nodes(disc: Discretization, ref=None):
    ref = disc.ops.volume_nodes if ref is None else ref
    V = tensor_interp(geo_nodes(disc.mesh.n_geo), ref)
    return np.einsum("pn,kcn->kpc", V, disc.mesh.X)
