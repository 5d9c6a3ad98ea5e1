import numpy as np
import pytest

from esdg_mortar.errors import AdmissibilityError, InvalidArgumentError
from esdg_mortar.geometry.mesh import make_cartesian_mesh
from esdg_mortar.solver import build_discretization, estimate_dt, rk45_advance
from esdg_mortar.solver.timestep import (RK4A, RK4B, RK4C, mesh_length_scale, rk45_dense_tableau,
                                         trace_constant)


def test_trace_constants():
    assert trace_constant(3, 2, "gauss") == 20
    assert trace_constant(2, 3, "lobatto") == 9
    assert trace_constant(1, 2, "gauss") == 6


def test_dt_formula_on_unit_mesh():
    m = make_cartesian_mesh(2, ((0.0, 2.0), (0.0, 2.0)), [2, 2])
    for kind in ("gauss", "lobatto"):
        disc = build_discretization(m, 1, kind, "conforming")
        # unit cells: J = 1/4, |J_f| = 1/2, so 1 / (|J^-1| |J_f|) = 1/2
        h = mesh_length_scale(disc)
        assert abs(h - 0.5) < 1e-14
        # both node kinds step with the Gauss constant d (N+1)(N+2)/2 = 6
        assert abs(estimate_dt(disc, 1.0, 0.5) - 0.5 * h / 6) < 1e-15
    with pytest.raises(InvalidArgumentError):
        estimate_dt(disc, 0.0)


def _solve(f, y0, T, n):
    y, dt = np.array([y0], dtype=float), T / n
    for k in range(n):
        y = rk45_advance(y, f, k * dt, dt)
    return y[0]


def test_fourth_order():
    f = lambda y, t, s: -y
    errs = [abs(_solve(f, 1.0, 1.0, n) - np.exp(-1.0)) for n in (4, 8, 16)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 4) < 0.3)


def test_low_storage_matches_dense_tableau():
    A, b, c = rk45_dense_tableau()
    assert np.allclose(c, RK4C, atol=1e-15)
    assert abs(b.sum() - 1) < 1e-14
    f = lambda y, t: -y**2 + np.sin(t)
    y0, t0, dt = np.array([0.7]), 0.3, 0.2
    k = []
    for i in range(5):
        k.append(f(y0 + dt * sum(A[i, j] * k[j] for j in range(i)), t0 + c[i] * dt))
    dense = y0 + dt * sum(b[i] * k[i] for i in range(5))
    low = rk45_advance(y0, lambda y, t, s: f(y, t), t0, dt)
    assert np.max(np.abs(dense - low)) < 1e-14


def test_zero_rhs_and_bad_input():
    u = np.random.default_rng(0).uniform(size=(3, 4))
    assert np.array_equal(rk45_advance(u, lambda y, t, s: np.zeros_like(y), 0.0, 0.1), u)
    with pytest.raises(InvalidArgumentError):
        rk45_advance(u, lambda y, t, s: y, 0.0, 0.0)
    with pytest.raises(AdmissibilityError):
        rk45_advance(u, lambda y, t, s: np.full_like(y, np.nan), 0.0, 0.1)
    assert RK4A[0] == 0 and len(RK4B) == 5
