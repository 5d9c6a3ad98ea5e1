import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from esdg_mortar.errors import DegenerateBasisError, InconsistentOperatorsError, InvalidArgumentError
from esdg_mortar.reference_operators import (
    NodeKind,
    Operators1D,
    build_operators_1d,
    gauss_quadrature,
    gsbp_residual,
    hybridized_sbp_1d,
    lagrange_interp_matrix,
    lobatto_quadrature,
    quadrature,
    reference_operators,
)

KINDS = ("gauss", "lobatto")


def test_gauss_small_rules():
    q = gauss_quadrature(1)
    assert np.allclose(q.nodes, [0.0]) and np.allclose(q.weights, [2.0])
    q = gauss_quadrature(2)
    assert np.allclose(q.nodes, [-0.5773502691896258, 0.5773502691896258], atol=1e-15)
    assert np.allclose(q.weights, [1.0, 1.0], atol=1e-15)
    q = gauss_quadrature(3)
    assert np.allclose(q.nodes, [-0.7745966692414834, 0.0, 0.7745966692414834], atol=1e-15)
    assert np.allclose(q.weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-15)


def test_lobatto_small_rules():
    q = lobatto_quadrature(2)
    assert np.allclose(q.nodes, [-1, 1]) and np.allclose(q.weights, [1, 1])
    q = lobatto_quadrature(3)
    assert np.allclose(q.nodes, [-1, 0, 1], atol=1e-15)
    assert np.allclose(q.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-15)
    q = lobatto_quadrature(4)
    s = 1 / np.sqrt(5)
    assert np.allclose(q.nodes, [-1, -s, s, 1], atol=1e-15)
    assert np.allclose(q.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], atol=1e-15)


def test_invalid_point_counts():
    with pytest.raises(InvalidArgumentError):
        gauss_quadrature(0)
    with pytest.raises(InvalidArgumentError):
        lobatto_quadrature(1)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 8))
def test_quadrature_invariants(kind, N):
    q = quadrature(kind, N + 1)
    assert abs(q.weights.sum() - 2.0) < 1e-14
    assert np.all(np.diff(q.nodes) > 0) and np.all(q.weights > 0)
    if kind == "lobatto":
        assert q.nodes[0] == -1.0 and q.nodes[-1] == 1.0
    else:
        assert np.all(np.abs(q.nodes) < 1.0)
    top = 2 * N + 1 if kind == "gauss" else 2 * N - 1
    for k in range(top + 1):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(q.weights @ q.nodes**k - exact) <= 1e-13 * max(1.0, exact)
    # one degree beyond exactness fails
    k = top + 1
    assert abs(q.weights @ q.nodes**k - 2.0 / (k + 1)) > 1e-8


def test_interp_examples():
    q = gauss_quadrature(2)
    E = lagrange_interp_matrix(q.nodes, [-1.0, 1.0])
    a = (1 + np.sqrt(3)) / 2
    b = (1 - np.sqrt(3)) / 2
    assert np.allclose(E, [[a, b], [b, a]], atol=1e-14)
    assert np.allclose(E, [[1.3660254, -0.3660254], [-0.3660254, 1.3660254]], atol=1e-7)
    assert np.allclose(lagrange_interp_matrix(q.nodes, q.nodes), np.eye(2))
    ql = lobatto_quadrature(4)
    El = lagrange_interp_matrix(ql.nodes, [-1.0, 1.0])
    assert np.array_equal(El, np.eye(4)[[0, 3]])


def test_interp_duplicate_nodes():
    with pytest.raises(DegenerateBasisError):
        lagrange_interp_matrix([0.0, 0.0, 1.0], [0.5])


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=12), st.sampled_from(KINDS), st.integers(1, 7))
@example([2.2250738585e-313], "gauss", 2)
@settings(max_examples=60, deadline=None)
def test_interp_rows_sum_to_one(targets, kind, N):
    q = quadrature(kind, N + 1)
    V = lagrange_interp_matrix(q.nodes, targets)
    assert np.allclose(V.sum(axis=1), 1.0, atol=1e-12)
    # reproduces polynomials of degree N
    c = np.arange(1, N + 2, dtype=float)
    assert np.allclose(V @ np.polyval(c, q.nodes), np.polyval(c, np.asarray(targets)), atol=1e-10)


def test_lobatto_linear_Q():
    ops = build_operators_1d(lobatto_quadrature(2))
    assert np.allclose(ops.Q, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 8))
def test_operators_1d_identities(kind, N):
    ops = build_operators_1d(quadrature(kind, N + 1))
    assert gsbp_residual(ops) < 1e-12
    assert np.max(np.abs(ops.Q @ np.ones(N + 1))) < 1e-12
    assert np.max(np.abs(ops.E @ np.ones(N + 1) - 1)) < 1e-12
    x = ops.quad.nodes
    for k in range(1, N + 1):
        assert np.allclose(ops.D @ x**k, k * x ** (k - 1), rtol=1e-12, atol=1e-12)


def test_hybridized_lobatto_n1():
    h = hybridized_sbp_1d(build_operators_1d(lobatto_quadrature(2)))
    ref = 0.5 * np.array([[0, 1, -1, 0], [-1, 0, 0, 1], [1, 0, -1, 0], [0, -1, 0, 1]], dtype=float)
    assert np.allclose(h.Qh, ref, atol=1e-15)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 6))
def test_hybridized_identities(kind, N):
    h = hybridized_sbp_1d(build_operators_1d(quadrature(kind, N + 1)))
    Bh = np.diag(np.r_[np.zeros(N + 1), -1.0, 1.0])
    assert np.max(np.abs(h.Qh + h.Qh.T - Bh)) < 1e-13
    assert np.max(np.abs(h.Qh @ np.ones(N + 3))) < 1e-13


def test_hybridized_rejects_broken_gsbp():
    ops = build_operators_1d(gauss_quadrature(3))
    bad = Operators1D(ops.quad, ops.M, ops.Q + 1e-6, ops.E, ops.B)
    with pytest.raises(InconsistentOperatorsError):
        hybridized_sbp_1d(bad)


def test_tensor_shapes():
    ops = reference_operators("lobatto", 1, 2)
    assert np.allclose(ops.M, 1.0)
    ops = reference_operators("gauss", 2, 3)
    assert ops.E.shape == (54, 27)
    assert len(ops.face_weights) == 2 * 3 * 9


@pytest.mark.parametrize("dim", (2, 3))
@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("N", range(1, 5))
def test_lemma1(dim, kind, N):
    ops = reference_operators(kind, N, dim)
    nv = ops.nv
    for i in range(dim):
        Qh = ops.Qh[i]
        B = np.zeros_like(Qh)
        B[nv:, nv:] = np.diag(ops.B[i])
        assert np.max(np.abs(Qh + Qh.T - B)) < 1e-12
        assert np.max(np.abs(Qh @ np.ones(len(Qh)))) < 1e-12


def test_face_ordering():
    ops = reference_operators(NodeKind.GAUSS, 2, 3)
    for f in range(6):
        axis, side = divmod(f, 2)
        pts = ops.face_nodes[ops.face_slice(f)]
        assert np.all(pts[:, axis] == 2 * side - 1)
        assert np.allclose(ops.face_normals[ops.face_slice(f), axis], 2 * side - 1)
        # E rows of this face evaluate the trace of x_axis
        x = ops.volume_nodes[:, axis]
        assert np.allclose(ops.E[ops.face_slice(f)] @ x, 2 * side - 1, atol=1e-14)
