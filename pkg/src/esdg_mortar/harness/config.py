"""Run configuration and mesh construction for the experiments."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..geometry.mesh import (Mesh, apply_warp, checkerboard_refine_2d, make_cartesian_mesh,
                             periodic_warp_func, raise_degree, two_block_mesh_3d, warp_2d)
from ..geometry.meshio import read_mesh

FORMULATIONS = ("conforming", "mortar-direct", "mortar", "two-mortar")
MESHES = ("cartesian", "checkerboard", "two-block")

# 2D vortex box and its coarsest lattice
DOMAIN_2D = ((0.0, 15.0), (-5.0, 5.0))
BASE_2D = (9, 6)
# 3D vortex box; the refined block starts at x = INTERFACE_3D
DOMAIN_3D = ((0.0, 15.0), (0.0, 20.0), (0.0, 1.0))
INTERFACE_3D = 8.0
H_3D = (1.0, 0.5, 0.25, 0.125)


@dataclass
class RunConfig:
    dim: int = 2
    N: int = 2
    quad: str = "gauss"
    formulation: str = "mortar"
    approach: int = 2
    n_geo: int | None = None      # None: N on curved meshes, 1 otherwise
    mesh: str = "checkerboard"
    levels: int | None = None
    all_levels: bool = False
    curved: bool = False
    cfl: float = 0.5
    final_time: float | None = None
    dissipation: str = "lf"
    case: str = "vortex"
    out: str | None = None
    threads: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.dim not in (2, 3):
            raise ConfigError("dim must be 2 or 3")
        if not 1 <= self.N <= 8:
            raise ConfigError("degree must be between 1 and 8")
        if self.quad not in ("gauss", "lobatto"):
            raise ConfigError(f"unknown quadrature '{self.quad}'")
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"unknown formulation '{self.formulation}'")
        if self.approach not in (1, 2):
            raise ConfigError("geo approach must be 1 or 2")
        if self.dissipation not in ("none", "lf"):
            raise ConfigError(f"unknown dissipation '{self.dissipation}'")
        if not self.mesh.startswith("file:") and self.mesh not in MESHES:
            raise ConfigError(f"unknown mesh '{self.mesh}'")
        if self.mesh == "two-block" and self.dim != 3:
            raise ConfigError("the two-block mesh is 3D only")
        if self.mesh == "checkerboard" and self.dim != 2:
            raise ConfigError("the checkerboard mesh is 2D only")
        if self.formulation == "two-mortar" and self.dim != 3:
            raise ConfigError("two-mortar needs dim 3")
        if self.n_geo is not None and not 1 <= self.n_geo <= self.N:
            raise ConfigError("ngeo must satisfy 1 <= ngeo <= N")
        if self.case not in ("vortex", "freestream"):
            raise ConfigError(f"unknown test case '{self.case}'")
        if not self.cfl > 0:
            raise ConfigError("cfl must be positive")
        if self.final_time is not None and not self.final_time > 0:
            raise ConfigError("final time must be positive")
        return self

    def geo_degree(self):
        if self.n_geo is not None:
            return self.n_geo
        return self.N if self.curved else 1

    def default_final_time(self):
        if self.final_time is not None:
            return self.final_time
        return 5.0 if self.dim == 2 else 1.0

    def level_count(self):
        if self.mesh.startswith("file:"):
            return 1
        if self.levels is not None:
            return self.levels
        if self.all_levels:
            return 4
        return 3 if self.dim == 2 else 2


def level_h(cfg: RunConfig, level: int) -> float:
    """Coarse element size on refinement level ``level`` (1-based)."""
    if cfg.dim == 2:
        return (DOMAIN_2D[0][1] - DOMAIN_2D[0][0]) / (BASE_2D[0] * 2 ** (level - 1))
    if level > len(H_3D):
        return H_3D[-1] / 2 ** (level - len(H_3D))
    return H_3D[level - 1]


def build_mesh(cfg: RunConfig, level: int = 1) -> Mesh:
    """Mesh for ``cfg`` at a refinement level; curved meshes are warped before refinement."""
    if cfg.mesh.startswith("file:"):
        return read_mesh(cfg.mesh[5:])
    ng = cfg.geo_degree()
    h = level_h(cfg, level)
    if cfg.dim == 2:
        cells = [b * 2 ** (level - 1) for b in BASE_2D]
        m = make_cartesian_mesh(2, DOMAIN_2D, cells)
        if cfg.curved:
            m = warp_2d(m, n_geo=ng)
        elif ng > 1:
            m = raise_degree(m, ng)
        if cfg.mesh == "checkerboard":
            m = checkerboard_refine_2d(m, parity=0)
        return m
    if cfg.mesh == "two-block":
        m = two_block_mesh_3d(h, DOMAIN_3D, interface=INTERFACE_3D)
    else:
        cells = [int(round((b - a) / h)) for a, b in DOMAIN_3D]
        m = make_cartesian_mesh(3, DOMAIN_3D, cells)
    if cfg.curved:
        return apply_warp(m, periodic_warp_func(DOMAIN_3D, amp=0.01), ng)
    return raise_degree(m, ng) if ng > 1 else m


def entropy_mesh(dim: int, N: int, curved: bool = True) -> Mesh:
    """Small non-conforming mesh for the spatial entropy check."""
    if dim == 2:
        m = make_cartesian_mesh(2, DOMAIN_2D, [4, 4])
        if curved:
            m = warp_2d(m, n_geo=N)
        return checkerboard_refine_2d(m, parity=0)
    ext = ((0.0, 2.0),) * 3
    m = two_block_mesh_3d(1.0, ext, interface=1.0)
    return apply_warp(m, periodic_warp_func(ext), N) if curved else m


def discontinuous_state(pts, dim, mid, gamma, rng=None, amp=1e-2):
    """Piecewise-constant density and pressure jumps, optionally perturbed."""
    x, y = pts[:, 0], pts[:, 1]
    rho = 1.0 + 0.5 * (x < mid[0])
    p = 1.0 + 0.3 * (y < mid[1])
    vel = np.array([0.1, 0.2, 0.1][:dim])
    if rng is not None:
        rho = rho * (1.0 + amp * rng.uniform(-1.0, 1.0, rho.shape))
        p = p * (1.0 + amp * rng.uniform(-1.0, 1.0, p.shape))
    u = np.empty((len(pts), dim + 2))
    u[:, 0] = rho
    u[:, 1:dim + 1] = rho[:, None] * vel[None, :]
    u[:, dim + 1] = p / (gamma - 1.0) + 0.5 * rho * (vel @ vel)
    return u


def mesh_midpoint(mesh: Mesh):
    return np.asarray(mesh.origin) + 0.5 * np.asarray(mesh.period) * np.asarray(mesh.scale)
