import numpy as np
import pytest

from esdg_mortar.errors import IncompatibleQuadratureError, InvalidArgumentError
from esdg_mortar.geometry.physical import mortar_sbp_points
from esdg_mortar.mortar import (
    Split,
    build_mortar_interp,
    build_mortar_layout,
    build_mortar_sbp,
    build_two_layer_mortar_sbp,
    correction_sparsity,
    face_interps,
    split_interp_1d,
    two_layer_interps,
)
from esdg_mortar.reference_operators import lagrange_interp_matrix, quadrature, reference_operators

KINDS = ("gauss", "lobatto")


def _exact_degree(kind, N):
    # min(N, N_f, N_m) with N_f = N_m = N + 1 (Gauss) or N - 1 (Lobatto)
    return N if kind == "gauss" else N - 1


def test_lobatto_half_split_n1():
    lay = build_mortar_layout(1, "half_split", "lobatto", 1)
    assert np.allclose(lay.nodes[:, 0], [-1, 0, 0, 1])
    assert np.allclose(lay.weights, 0.5)
    it = build_mortar_interp(quadrature("lobatto", 2), lay, [0.0, 1.0])
    assert np.allclose(it.E_mf, [[1, 0], [0.5, 0.5], [0.5, 0.5], [0, 1]])
    assert it.mhsbp_residual() < 1e-15


def test_layout_sizes_and_weights():
    for fd in (1, 2):
        for split in (Split.CONFORMING, Split.HALF):
            lay = build_mortar_layout(fd, split, "gauss", 3)
            assert lay.n_nodes == (4 if split == Split.CONFORMING else 8) ** fd
            assert abs(lay.weights.sum() - 2.0**fd) < 1e-14
            assert lay.n_sub == (1 if split == Split.CONFORMING else 2**fd)
    with pytest.raises(InvalidArgumentError):
        build_mortar_layout(1, Split.TWO_LAYER, "gauss", 2)
    with pytest.raises(InvalidArgumentError):
        build_mortar_layout(4, Split.HALF, "gauss", 2)


def test_incompatible_boundary_matrices():
    ops = reference_operators("gauss", 2, 2)
    its = face_interps(ops, build_mortar_layout(1, Split.HALF, "gauss", 2))
    bad = its[0]
    its[0] = type(bad)(bad.layout, bad.E_mf, bad.E_fm * 1.01, bad.M_f, bad.M_m, bad.B_f, bad.B_m)
    with pytest.raises(IncompatibleQuadratureError):
        build_mortar_sbp(ops, its)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 5))
@pytest.mark.parametrize("fd", (1, 2))
def test_lemma3_projection_exactness(kind, N, fd):
    lay = build_mortar_layout(fd, Split.HALF, kind, N)
    it = build_mortar_interp(quadrature(kind, N + 1), lay, np.eye(fd + 1)[0])
    x = quadrature(kind, N + 1).nodes
    P = it.E_fm @ it.E_mf
    top = _exact_degree(kind, N)
    grids = np.meshgrid(*([x] * fd), indexing="ij")
    for a in range(top + 1):
        for b in range(top + 1 if fd == 2 else 1):
            u = grids[0].ravel() ** a * (grids[1].ravel() ** b if fd == 2 else 1.0)
            assert np.max(np.abs(P @ u - u)) < 1e-11
    if kind == "lobatto":
        # degree N is generally lost by the Lobatto projection
        u = grids[0].ravel() ** N
        assert np.max(np.abs(P @ u - u)) > 1e-6


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", (2, 3))
@pytest.mark.parametrize("N", range(1, 5))
def test_lemma5_and_lemma4(kind, dim, N):
    ops = reference_operators(kind, N, dim)
    lay = build_mortar_layout(dim - 1, Split.HALF, kind, N)
    ms = build_mortar_sbp(ops, face_interps(ops, lay))
    nt = ms.blocks[-1]
    pts = mortar_sbp_points(ops, ms)
    V = np.vstack(ms.chain)
    for i in range(dim):
        Q = ms.Q[i]
        B = np.zeros_like(Q)
        B[-nt:, -nt:] = np.diag(ms.B_terminal[i])
        assert np.max(np.abs(Q + Q.T - B)) < 1e-13
        assert np.max(np.abs(Q @ np.ones(len(Q)))) < 1e-13
        for k in range(_exact_degree(kind, N) + 1):
            u = V.T @ Q @ pts[:, i] ** k / ops.M
            exact = k * ops.volume_nodes[:, i] ** max(k - 1, 0)
            assert np.max(np.abs(u - exact)) < 1e-11


def test_conforming_layout_replicates_face_block():
    ops = reference_operators("gauss", 2, 2)
    ms = build_mortar_sbp(ops, face_interps(ops, build_mortar_layout(1, Split.CONFORMING, "gauss", 2)))
    nv, nf = ops.nv, ms.blocks[1]
    for i in range(2):
        assert np.allclose(ms.B_terminal[i], ops.B[i])
        # eliminating the mortar block recovers the hybridized operator
        Q = ms.Q[i]
        S = Q[:nv + nf, :nv + nf].copy()
        S[nv:, nv:] += Q[nv:nv + nf, nv + nf:] + Q[nv + nf:, nv:nv + nf] + Q[nv + nf:, nv + nf:]
        S[:nv, nv:] += Q[:nv, nv + nf:]
        assert np.allclose(S, ops.Qh[i], atol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 5))
def test_two_layer_operator(kind, N):
    ops = reference_operators(kind, N, 3)
    ms = build_two_layer_mortar_sbp(ops)
    one = build_mortar_sbp(ops, face_interps(ops, build_mortar_layout(2, Split.HALF, kind, N)))
    nt = ms.blocks[-1]
    for i in range(3):
        Q = ms.Q[i]
        B = np.zeros_like(Q)
        B[-nt:, -nt:] = np.diag(ms.B_terminal[i])
        assert np.max(np.abs(Q + Q.T - B)) < 1e-13
        assert np.max(np.abs(Q @ np.ones(len(Q)))) < 1e-13
        assert np.allclose(ms.B_terminal[i], one.B_terminal[i], atol=1e-15)
    # chained interpolation equals the dense one-shot interpolation
    assert np.allclose(ms.chain[-1], one.chain[-1], atol=1e-13)


def test_two_layer_partial_faces():
    ops = reference_operators("gauss", 2, 3)
    ms = build_two_layer_mortar_sbp(ops, two_layer_faces=[1])
    assert ms.blocks[-1] == 5 * 9 + 36
    for i in range(3):
        assert np.max(np.abs(ms.Q[i] @ np.ones(ms.size))) < 1e-13


@pytest.mark.parametrize("N", range(1, 6))
def test_two_layer_chain_matches_dense(N):
    q = quadrature("gauss", N + 1)
    d = two_layer_interps(q, [1.0, 0.0, 0.0])
    lay = build_mortar_layout(2, Split.HALF, "gauss", N)
    dense = lagrange_interp_matrix(q.nodes, lay.nodes[:, 0])[:, :, None] * \
        lagrange_interp_matrix(q.nodes, lay.nodes[:, 1])[:, None, :]
    assert np.allclose(d["E_m2m1"] @ d["E_m1f"], dense.reshape(len(lay.nodes), -1), atol=1e-13)
    assert np.allclose(np.kron(split_interp_1d(q), split_interp_1d(q)), d["E_m2m1"] @ d["E_m1f"], atol=1e-13)


def test_sparsity_counts():
    assert correction_sparsity(2, 1) == (45, 648)
    assert correction_sparsity(2, 2) == (63, 324)
    ratios = [correction_sparsity(N, 2)[1] / correction_sparsity(N, 1)[1] for N in range(1, 6)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
