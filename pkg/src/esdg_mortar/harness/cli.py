"""Command line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import os
import sys
import time

import numpy as np

from ..errors import (ConfigError, DomainError, IncompatibleQuadratureError, InconsistentOperatorsError,
                      InvalidArgumentError, InvalidGeometryError, StabilityPreconditionError)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
ENTROPY_TOL = 1e-13


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _common(p, dissipation_default):
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--degree", type=int, default=None, help="polynomial degree N")
    p.add_argument("--quadrature", choices=("lobatto", "gauss"), default=None)
    p.add_argument("--formulation", choices=("conforming", "mortar-direct", "mortar", "two-mortar"), default=None)
    p.add_argument("--geo-approach", type=int, choices=(1, 2), default=None)
    p.add_argument("--ngeo", type=int, default=None)
    p.add_argument("--mesh", default=None, help="cartesian, checkerboard, two-block or file:<path>")
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--all-levels", action="store_true")
    p.add_argument("--curved", action="store_true")
    p.add_argument("--cfl", type=float, default=0.5)
    p.add_argument("--final-time", type=float, default=None)
    p.add_argument("--dissipation", choices=("none", "lf"), default=dissipation_default)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = _Parser(prog="esdg-mortar", description="Entropy-stable DG on non-conforming meshes")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("run", help="single vortex (or free-stream) run")
    _common(p, "lf")
    p.add_argument("--case", choices=("vortex", "freestream"), default="vortex")
    p = sub.add_parser("convergence", help="vortex convergence study")
    _common(p, "lf")
    p = sub.add_parser("entropy-check", help="spatial entropy of discontinuous data")
    _common(p, "none")
    p = sub.add_parser("metric-study", help="metric term convergence on the warped cube")
    _common(p, "none")
    p = sub.add_parser("make-mesh", help="write a generated mesh to a file")
    _common(p, "none")
    p = sub.add_parser("check-geometry", help="report Jacobian, GCL and watertightness")
    _common(p, "none")
    p = sub.add_parser("dump-operators", help="write reference operators as CSV")
    _common(p, "none")
    return parser


def config_from_args(a, mesh_default=None):
    from .config import RunConfig

    dim = a.dim
    mesh = a.mesh or mesh_default or ("checkerboard" if dim == 2 else "two-block")
    form = a.formulation or ("conforming" if mesh == "cartesian" else "mortar")
    return RunConfig(dim=dim, N=a.degree if a.degree is not None else 2, quad=a.quadrature or "gauss",
                     formulation=form, approach=a.geo_approach or 2, n_geo=a.ngeo, mesh=mesh,
                     levels=a.levels, all_levels=a.all_levels, curved=a.curved, cfl=a.cfl,
                     final_time=a.final_time, dissipation=a.dissipation, case=getattr(a, "case", "vortex"),
                     out=a.out, threads=a.threads, seed=a.seed).validate()


def _say(msg):
    print(msg, flush=True)


def cmd_run(a):
    from .experiments import ErrorReport, run_level
    from .report import write_convergence

    cfg = config_from_args(a)
    level = a.levels or 1
    r = run_level(cfg, level)
    _say(f"level {level} h={r.h:.6g} steps={r.steps} l2={r.l2_total:.6e} linf={r.linf_total:.6e} "
         f"wall={r.wall:.1f}s")
    if cfg.out:
        write_convergence(ErrorReport(cfg, [r]), cfg.out)
    return EXIT_OK


def cmd_convergence(a):
    from .experiments import run_convergence
    from .report import write_convergence

    cfg = config_from_args(a)

    def progress(r):
        _say(f"level {r.level} h={r.h:.6g} l2={r.l2_total:.6e} linf={r.linf_total:.6e} "
             f"rate={r.rate:.3f} wall={r.wall:.1f}s")

    rep = run_convergence(cfg, progress=progress)
    write_convergence(rep, cfg.out)
    return EXIT_OK


def cmd_entropy(a):
    from .experiments import entropy_formulations, run_entropy_check
    from .report import write_entropy

    degrees = (a.degree,) if a.degree else (1, 2, 3, 4)
    kinds = (a.quadrature,) if a.quadrature else ("gauss", "lobatto")
    if a.formulation == "two-mortar" and a.dim != 3:
        raise ConfigError("two-mortar needs dim 3")
    forms = [a.formulation] if a.formulation else entropy_formulations(a.dim)
    res = run_entropy_check(a.dim, degrees, kinds, forms, a.dissipation, a.geo_approach or 2, a.seed,
                            curved=True)
    ok = True
    for r in res:
        good = r.relative <= ENTROPY_TOL if a.dissipation == "none" else r.entropy <= ENTROPY_TOL
        ok &= good
        _say(f"dim={r.dim} N={r.N} {r.quad:7s} {r.formulation:13s} entropy={r.entropy:+.3e} "
             f"relative={r.relative:.3e} {'ok' if good else 'FAIL'}")
    if a.out:
        write_entropy(res, a.out, a.seed)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_metric(a):
    from .experiments import METRIC_CELLS, run_metric_convergence
    from .report import write_metric

    approaches = (a.geo_approach,) if a.geo_approach else (1, 2)
    n_geos = (a.ngeo,) if a.ngeo else (1, 2, 3, 4)
    nlev = 4 if a.all_levels else (a.levels or 3)
    if not 2 <= nlev <= len(METRIC_CELLS):
        raise ConfigError(f"metric study supports 2..{len(METRIC_CELLS)} levels")
    res = []
    for ap in approaches:
        res += run_metric_convergence(ap, n_geos, METRIC_CELLS[:nlev])
    for r in res:
        _say(f"approach={r.approach} ngeo={r.n_geo} h={r.h:.4g} l2={r.l2:.6e} rate={r.rate:.3f}")
    if a.out:
        write_metric(res, a.out)
    return EXIT_OK


def cmd_make_mesh(a):
    from ..geometry.meshio import write_mesh
    from .config import build_mesh

    if not a.out:
        raise ConfigError("make-mesh needs --out")
    cfg = config_from_args(a)
    mesh = build_mesh(cfg, a.levels or 1)
    write_mesh(mesh, a.out)
    _say(f"wrote {mesh.K} elements to {a.out}")
    return EXIT_OK


def cmd_check_geometry(a):
    from ..geometry.metrics import gcl_residual, metric_terms
    from ..geometry.physical import check_mortar_preconditions
    from ..geometry.terminals import build_terminals, watertight_residual
    from ..reference_operators import reference_operators
    from .config import build_mesh

    cfg = config_from_args(a)
    mesh = build_mesh(cfg, a.levels or 1)
    md = metric_terms(mesh, cfg.approach)
    ops = reference_operators(cfg.quad, cfg.N, cfg.dim)
    term = build_terminals(mesh, ops)
    J = md.J_at(ops.volume_nodes)
    gcl = gcl_residual(md, ops.ops1d.quad.nodes)
    wt = watertight_residual(md, term)
    _say(f"elements={mesh.K} nonconforming={mesh.nonconforming} n_geo={mesh.n_geo}")
    _say(f"min_J={J.min():.6e} gcl={gcl:.3e} watertight={wt:.3e}")
    if mesh.nonconforming:
        check_mortar_preconditions(md, cfg.quad, cfg.N)
        _say("mortar degree preconditions: ok")
    return EXIT_OK if (gcl < 1e-10 and wt < 1e-10) else EXIT_NUMERIC


def cmd_dump_operators(a):
    from ..reference_operators import reference_operators

    N = a.degree if a.degree is not None else 2
    ops = reference_operators(a.quadrature or "gauss", N, a.dim)
    mats = {"nodes_1d": ops.ops1d.quad.nodes[:, None], "weights_1d": ops.ops1d.quad.weights[:, None],
            "D_1d": ops.ops1d.D, "M": ops.M[:, None], "E": ops.E}
    for i, Q in enumerate(ops.Q):
        mats[f"Q{i + 1}"] = Q
    for i, B in enumerate(ops.B):
        mats[f"B{i + 1}"] = B[:, None]
    if a.out:
        os.makedirs(a.out, exist_ok=True)
        for name, m in mats.items():
            np.savetxt(os.path.join(a.out, f"{name}.csv"), np.atleast_2d(m), delimiter=",", fmt="%.17g")
        _say(f"wrote {len(mats)} operators to {a.out}")
    else:
        with np.printoptions(precision=6, suppress=True, linewidth=120):
            for name in ("nodes_1d", "weights_1d", "D_1d"):
                _say(f"{name} =\n{mats[name].squeeze()}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "entropy-check": cmd_entropy,
            "metric-study": cmd_metric, "make-mesh": cmd_make_mesh, "check-geometry": cmd_check_geometry,
            "dump-operators": cmd_dump_operators}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if a.threads:
        from ..solver.kernels import set_threads
        set_threads(a.threads)
    t0 = time.perf_counter()
    try:
        code = COMMANDS[a.command](a)
    except (ConfigError, InvalidArgumentError, StabilityPreconditionError, InvalidGeometryError,
            IncompatibleQuadratureError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, InconsistentOperatorsError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"done in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
