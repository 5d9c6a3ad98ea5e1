import numpy as np
import pytest

from esdg_mortar.errors import InvalidArgumentError, InvalidGeometryError, StabilityPreconditionError
from esdg_mortar.geometry.mesh import (COARSE, FINE, apply_warp, checkerboard_refine_2d, element_volumes,
                                       make_cartesian_mesh, periodic_warp_func, raise_degree,
                                       tensor_points, two_block_mesh_3d, warp_2d, warp_2d_func,
                                       warp_3d, warp_3d_func)
from esdg_mortar.geometry.meshio import read_mesh, write_mesh
from esdg_mortar.geometry.metrics import exact_cofactor, gcl_residual, metric_terms
from esdg_mortar.geometry.physical import (check_mortar_preconditions, effective_geo_degree,
                                           mortar_degree_bound, physical_boundary, physical_sbp)
from esdg_mortar.geometry.terminals import build_terminals, watertight_residual
from esdg_mortar.reference_operators import lobatto_quadrature, reference_operators
from esdg_mortar.solver.direct import element_mortar_sbp
from esdg_mortar.solver.discretization import build_discretization

KINDS = ("gauss", "lobatto")
BOX3 = ((0.0, 2.0),) * 3


def curved_2d(N, cells=4):
    m = make_cartesian_mesh(2, ((0.0, 15.0), (-5.0, 5.0)), [cells, cells])
    return checkerboard_refine_2d(warp_2d(m, n_geo=N), parity=0)


def curved_3d(N):
    return apply_warp(two_block_mesh_3d(1.0, BOX3, interface=1.0), periodic_warp_func(BOX3), N)


def test_checkerboard_counts():
    m = checkerboard_refine_2d(make_cartesian_mesh(2, ((0, 1), (0, 1)), [2, 2]), parity=0)
    assert m.K == 2 + 8
    assert int(np.sum(m.faces.kind == COARSE)) == 8
    assert int(np.sum(m.faces.kind == FINE)) == 16
    ops = reference_operators("gauss", 2, 2)
    md = metric_terms(m)
    vol = element_volumes(m, md.J_at(ops.volume_nodes), ops.M)
    assert abs(vol.sum() - 1.0) < 1e-14


def test_checkerboard_rejects_odd_counts_on_request():
    m = make_cartesian_mesh(2, ((0, 1), (0, 1)), [3, 2])
    with pytest.raises(InvalidArgumentError):
        checkerboard_refine_2d(m, require_even=True)


def test_two_block_volume():
    m = two_block_mesh_3d(1.0)
    assert m.K == 8 * 20 + 14 * 40 * 2
    ops = reference_operators("gauss", 1, 3)
    vol = element_volumes(m, metric_terms(m).J_at(ops.volume_nodes), ops.M)
    assert abs(vol.sum() - 300.0) < 1e-10
    with pytest.raises(InvalidArgumentError):
        two_block_mesh_3d(0.3)


def test_warp_examples():
    f = warp_2d_func()
    p = f(np.array([[7.5, 0.0], [0.0, -5.0], [15.0, 5.0]]))
    assert abs(p[0, 0] - (7.5 + 15.0 / 16.0)) < 1e-14
    # x = 0 and x = Lx boundaries stay put in x
    assert abs(p[1, 0]) < 1e-14 and abs(p[2, 0] - 15.0) < 1e-14
    assert np.allclose(warp_3d_func()(np.zeros((1, 3))), 0.0)


@pytest.mark.parametrize("dim", (2, 3))
@pytest.mark.parametrize("h", (0.5, 2.0))
def test_affine_metrics(dim, h):
    m = make_cartesian_mesh(dim, [(0.0, 2 * h)] * dim, [2] * dim)
    md = metric_terms(m)
    ops = reference_operators("gauss", 2, dim)
    g = md.g_at(ops.volume_nodes)
    assert np.allclose(g, (h / 2) ** (dim - 1) * np.eye(dim)[None, :, :, None], atol=1e-14)
    assert np.allclose(md.J_at(ops.volume_nodes), (h / 2) ** dim, atol=1e-14)
    Q = physical_sbp(ops, md, [0])[0]
    for i in range(dim):
        assert np.allclose(Q[i], (h / 2) ** (dim - 1) * ops.Qh[i], atol=1e-13)


def test_affine_two_block_metrics_across_periodic_seam():
    # regression: potentials must not jump by the period at the wrap-around
    m = raise_degree(two_block_mesh_3d(1.0, BOX3, interface=1.0), 2)
    for ap in (1, 2):
        md = metric_terms(m, ap)
        ops = reference_operators("gauss", 2, 3)
        g = md.g_at(ops.volume_nodes)
        scale = (m.size * m.scale / 2)[:, 0] ** 2
        assert np.allclose(g, scale[:, None, None, None] * np.eye(3)[None, :, :, None], atol=1e-13)


@pytest.mark.parametrize("N", (1, 2, 3))
def test_curved_2d_lemma2(N):
    m = curved_2d(N)
    md = metric_terms(m)
    for kind in KINDS:
        ops = reference_operators(kind, N, 2)
        Q = physical_sbp(ops, md)
        B = physical_boundary(ops, md)
        nv = ops.nv
        for k in range(m.K):
            for i in range(2):
                assert np.max(np.abs(Q[k, i] @ np.ones(len(Q[k, i])))) < 1e-12
                S = Q[k, i] + Q[k, i].T
                S[nv:, nv:] -= np.diag(B[k, i])
                assert np.max(np.abs(S)) < 1e-12


@pytest.mark.parametrize("approach", (1, 2))
@pytest.mark.parametrize("N", (1, 2, 3))
def test_curved_3d_gcl_and_watertight(approach, N):
    m = curved_3d(N)
    md = metric_terms(m, approach)
    for kind in KINDS:
        ops = reference_operators(kind, N, 3)
        assert gcl_residual(md, ops.ops1d.quad.nodes) < 1e-12
        assert watertight_residual(md, build_terminals(m, ops)) < 1e-12
        Q = physical_sbp(ops, md, [0, m.K - 1])
        B = physical_boundary(ops, md, [0, m.K - 1])
        for k in range(2):
            for i in range(3):
                S = Q[k, i] + Q[k, i].T
                S[ops.nv:, ops.nv:] -= np.diag(B[k, i])
                assert np.max(np.abs(S)) < 1e-12
                assert np.max(np.abs(Q[k, i].sum(axis=1))) < 1e-12


def test_metrics_converge_to_exact_cofactor():
    m0 = make_cartesian_mesh(3, [(-1.0, 1.0)] * 3, [2, 2, 2])
    errs = []
    for n_geo in (2, 4):
        md = metric_terms(warp_3d(m0, n_geo=n_geo), 2)
        r = lobatto_quadrature(5).nodes
        pts = tensor_points(r, 3)
        e = 0
        ex = warp_3d_func()
        # jacobian of the exact map by central differences of the analytic warp
        x = md.mesh.affine_coords(e, pts)
        eps = 1e-6
        jac = np.empty((len(pts), 3, 3))
        for j in range(3):
            dx = np.zeros(3)
            dx[j] = eps
            jac[:, :, j] = (ex(x + dx) - ex(x - dx)) / (2 * eps) * 0.5
        errs.append(np.max(np.abs(md.g_at(pts, [e])[0].transpose(2, 0, 1) - exact_cofactor(jac))))
    assert errs[1] < errs[0] / 10


def test_approach2_face_degree():
    n_geo = 3
    m = warp_3d(make_cartesian_mesh(3, [(-1.0, 1.0)] * 3, [1, 1, 1]), n_geo=n_geo)
    md = metric_terms(m, 2)
    t = np.linspace(-1, 1, 7)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([np.full(T1.size, -1.0), T1.ravel(), T2.ravel()], axis=1)
    g11 = md.g_at(pts, [0])[0, 0, 0].reshape(7, 7)
    # a polynomial of degree n_geo - 1 per tangential direction is reproduced exactly
    c = np.polynomial.legendre.legfit(t, g11, n_geo - 1)
    fit = np.polynomial.legendre.legval(t, c).T
    c2 = np.polynomial.legendre.legfit(t, fit, n_geo - 1)
    assert np.max(np.abs(np.polynomial.legendre.legval(t, c2).T - g11)) < 1e-12
    md1 = metric_terms(m, 1)
    g11 = md1.g_at(pts, [0])[0, 0, 0].reshape(7, 7)
    c = np.polynomial.legendre.legfit(t, g11, n_geo - 1)
    c2 = np.polynomial.legendre.legfit(t, np.polynomial.legendre.legval(t, c).T, n_geo - 1)
    assert np.max(np.abs(np.polynomial.legendre.legval(t, c2).T - g11)) > 1e-8


def test_inverted_element_rejected():
    m = make_cartesian_mesh(2, ((0, 1), (0, 1)), [2, 2])
    with pytest.raises(InvalidGeometryError):
        metric_terms(apply_warp(m, lambda p: p * np.array([-1.0, 1.0]), 1))


def _lemma6(disc, layers=1):
    term = disc.terminals
    worst = 0.0
    for e in np.nonzero(term.coarse.any(axis=1))[0]:
        msbp, Qm = element_mortar_sbp(disc, e, layers)
        nt = msbp.blocks[-1]
        sl = slice(term.offsets[e, 0], term.offsets[e, -1])
        for i in range(disc.dim):
            S = Qm[i] + Qm[i].T
            S[-nt:, -nt:] -= np.diag(disc.nT[sl, i] * term.weight[sl])
            worst = max(worst, np.max(np.abs(S)), np.max(np.abs(Qm[i].sum(axis=1))))
    return worst


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", (1, 2, 3))
def test_lemma6_curved_2d(kind, N):
    if kind == "lobatto" and N == 1:
        pytest.skip("N_geo = 1 is the minimum degree")
    disc = build_discretization(curved_2d(N), N, kind, "mortar-direct", "none")
    assert _lemma6(disc) < 1e-12


@pytest.mark.parametrize("N", (2, 3))
def test_lemma6_curved_3d(N):
    for approach, kind in ((1, "gauss"), (2, "gauss"), (2, "lobatto")):
        disc = build_discretization(curved_3d(N), N, kind, "mortar-direct", "none", approach=approach)
        assert _lemma6(disc) < 1e-12
        assert _lemma6(disc, layers=2) < 1e-12


def test_precondition_bounds():
    assert mortar_degree_bound(2, "lobatto", 3, 2)[0] == 3
    assert mortar_degree_bound(3, "lobatto", 3, 1)[0] == 2
    assert mortar_degree_bound(3, "lobatto", 3, 2)[0] == 3
    assert mortar_degree_bound(3, "gauss", 3, 1)[0] == 3
    md = metric_terms(curved_3d(3), 1)
    with pytest.raises(StabilityPreconditionError):
        check_mortar_preconditions(md, "lobatto", 3)
    check_mortar_preconditions(md, "gauss", 3)
    # affine elements have constant metrics and pass any bound
    md = metric_terms(raise_degree(two_block_mesh_3d(1.0, BOX3, interface=1.0), 3), 1)
    assert effective_geo_degree(md, 0) == 0
    check_mortar_preconditions(md, "lobatto", 3)


@pytest.mark.parametrize("dim", (2, 3))
def test_meshio_round_trip(tmp_path, dim):
    m = curved_2d(2) if dim == 2 else curved_3d(2)
    path = tmp_path / "mesh.txt"
    write_mesh(m, path)
    r = read_mesh(path)
    assert r.K == m.K and r.n_geo == m.n_geo
    assert np.array_equal(r.lo, m.lo) and np.array_equal(r.size, m.size)
    assert np.allclose(r.X, m.X, rtol=0, atol=1e-14)
    assert np.array_equal(r.faces.kind, m.faces.kind)
    assert np.array_equal(r.faces.neighbor, m.faces.neighbor)


def test_meshio_rejects_corrupt_file(tmp_path):
    m = curved_2d(1)
    path = tmp_path / "mesh.txt"
    write_mesh(m, path)
    lines = path.read_text().splitlines()
    k = next(i for i, l in enumerate(lines) if l.startswith("faces"))
    parts = lines[k + 1].split()
    parts[2] = "1" if parts[2] != "1" else "0"
    lines[k + 1] = " ".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InvalidGeometryError):
        read_mesh(path)


@pytest.mark.parametrize("dim", (2, 3))
def test_single_element_across_period(dim):
    # Lobatto face nodes on both ends of a one-cell periodic direction coincide modulo the period
    ext = ((0.0, 2.0),) * dim
    m = make_cartesian_mesh(dim, ext, [2] + [1] * (dim - 1))
    ops = reference_operators("lobatto", 1, dim)
    term = build_terminals(m, ops)
    assert np.array_equal(term.partner[term.partner], np.arange(len(term.partner)))
    assert len(np.unique(term.partner)) == len(term.partner)
