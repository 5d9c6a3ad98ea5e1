"""Convergence, entropy and metric studies."""

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..euler import GAMMA
from ..geometry.mesh import make_cartesian_mesh, tensor_points, warp_3d
from ..geometry.metrics import exact_cofactor, metric_terms_3d
from ..reference_operators import gauss_quadrature, kron_all
from ..solver.discretization import build_discretization, interpolate_initial, spatial_entropy
from ..solver.timestep import integrate
from .config import RunConfig, build_mesh, discontinuous_state, entropy_mesh, level_h, mesh_midpoint
from .norms import compute_errors
from .vortex import vortex_2d_points, vortex_3d_points

FIELDS_2D = ("rho", "rhou", "rhov", "E")
FIELDS_3D = ("rho", "rhou", "rhov", "rhow", "E")


@dataclass
class LevelResult:
    level: int
    h: float
    l2: np.ndarray
    linf: np.ndarray
    wall: float
    steps: int = 0
    rate: float = float("nan")

    @property
    def l2_total(self):
        return float(np.sqrt(np.sum(self.l2**2)))

    @property
    def linf_total(self):
        return float(np.max(self.linf))


@dataclass
class ErrorReport:
    config: RunConfig
    levels: list = field(default_factory=list)

    def fields(self):
        return FIELDS_2D if self.config.dim == 2 else FIELDS_3D

    def rates(self):
        return [lv.rate for lv in self.levels[1:]]


def fitted_rate(e0, e1, h0, h1):
    return float(np.log(e0 / e1) / np.log(h0 / h1))


def vortex_case(dim):
    """(exact solution, Gauss boost) for the vortex in ``dim`` dimensions."""
    return (vortex_2d_points, 2) if dim == 2 else (vortex_3d_points, 3)


def freestream(dim, gamma=GAMMA):
    vel = np.array([0.3, -0.2, 0.1][:dim])
    state = np.concatenate([[1.0], vel, [1.0 / (gamma - 1.0) + 0.5 * vel @ vel]])
    return lambda p, t: np.tile(state, (len(p), 1))


def case_solution(cfg: RunConfig):
    if cfg.case == "vortex":
        return vortex_case(cfg.dim)
    if cfg.case == "freestream":
        return freestream(cfg.dim), 2
    raise ConfigError(f"unknown test case '{cfg.case}'")


def discretize(cfg: RunConfig, mesh):
    return build_discretization(mesh, cfg.N, cfg.quad, cfg.formulation, cfg.dissipation,
                                approach=cfg.approach)


def run_level(cfg: RunConfig, level: int, mesh=None) -> LevelResult:
    """Integrate the vortex to the final time on one mesh level and measure errors."""
    exact, boost = case_solution(cfg)
    mesh = build_mesh(cfg, level) if mesh is None else mesh
    disc = discretize(cfg, mesh)
    T = cfg.default_final_time()
    u0 = interpolate_initial(disc, lambda p: exact(p, 0.0))
    t0 = time.perf_counter()
    res = integrate(disc, u0, T, cfl=cfg.cfl)
    wall = time.perf_counter() - t0
    err = compute_errors(disc, res.u, exact, T, boost=boost)
    return LevelResult(level, level_h(cfg, level), err.l2, err.linf, wall, res.steps)


def run_convergence(cfg: RunConfig, levels=None, progress=None) -> ErrorReport:
    """Vortex errors over refinement levels with rates between successive levels."""
    cfg.validate()
    levels = range(1, cfg.level_count() + 1) if levels is None else levels
    rep = ErrorReport(cfg)
    for lev in levels:
        r = run_level(cfg, lev)
        if rep.levels:
            prev = rep.levels[-1]
            r.rate = fitted_rate(prev.l2_total, r.l2_total, prev.h, r.h)
        rep.levels.append(r)
        if progress is not None:
            progress(r)
    return rep


@dataclass
class EntropyResult:
    dim: int
    N: int
    quad: str
    formulation: str
    entropy: float
    relative: float
    wall: float


def entropy_formulations(dim):
    forms = ["mortar-direct", "mortar"]
    return forms + ["two-mortar"] if dim == 3 else forms


def run_entropy_check(dim, degrees=(1, 2, 3, 4), kinds=("gauss", "lobatto"), formulations=None,
                      dissipation="none", approach=2, seed=None, curved=True, gamma=GAMMA):
    """Spatial entropy v^T F(u) of discontinuous data on a curved non-conforming mesh."""
    rng = None if seed is None else np.random.default_rng(seed)
    forms = entropy_formulations(dim) if formulations is None else formulations
    out = []
    for N in degrees:
        mesh = entropy_mesh(dim, N, curved)
        mid = mesh_midpoint(mesh)
        for kind in kinds:
            for form in forms:
                t0 = time.perf_counter()
                disc = build_discretization(mesh, N, kind, form, dissipation, approach=approach, gamma=gamma)
                u = interpolate_initial(disc, lambda p: discontinuous_state(p, dim, mid, gamma, rng))
                val, rel = spatial_entropy(disc, u)
                out.append(EntropyResult(dim, N, kind, form, val, rel, time.perf_counter() - t0))
    return out


# ------------------------------------------------------------------ metric study

METRIC_CELLS = (2, 4, 8, 16)


def metric_error(n_geo, cells, approach, nq=None):
    """J-weighted L2 error of the discrete metric terms on the warped cube [-1, 1]^3."""
    m = make_cartesian_mesh(3, [(-1.0, 1.0)] * 3, [cells] * 3, periodic=False)
    md = metric_terms_3d(warp_3d(m, n_geo=n_geo), approach)
    q = gauss_quadrature(nq or n_geo + 3)
    pts = tensor_points(q.nodes, 3)
    wq = kron_all([q.weights[None, :]] * 3).ravel()
    g = md.g_at(pts)
    A = np.einsum("pn,kcjn->kpcj", md.interp_matrix(pts), md.dX)
    ge = exact_cofactor(A)
    J = np.linalg.det(A)
    diff = g.transpose(0, 3, 1, 2) - ge
    return float(np.sqrt(np.sum((wq[None] * J)[:, :, None, None] * diff**2)))


@dataclass
class MetricResult:
    approach: int
    n_geo: int
    h: float
    l2: float
    rate: float = float("nan")


def run_metric_convergence(approach, n_geos=(1, 2, 3, 4), cells=METRIC_CELLS[:3]):
    out = []
    for ng in n_geos:
        prev = None
        for c in cells:
            r = MetricResult(int(approach), ng, 2.0 / c, metric_error(ng, c, approach))
            if prev is not None:
                r.rate = fitted_rate(prev.l2, r.l2, prev.h, r.h)
            out.append(r)
            prev = r
    return out


def fit_slope(h, e):
    """Least-squares slope of log e against log h."""
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])
