"""Timestep estimate and low-storage RK45 integration."""

from dataclasses import dataclass

import numpy as np

from ..errors import AdmissibilityError, DomainError, InvalidArgumentError
from ..euler import check_admissible, max_wavespeed

# Carpenter and Kennedy (1994), five-stage fourth-order 2N-storage scheme.
RK4A = np.array([0.0,
                 -567301805773.0 / 1357537059087.0,
                 -2404267990393.0 / 2016746695238.0,
                 -3550918686646.0 / 2091501179385.0,
                 -1275806237668.0 / 842570457699.0])
RK4B = np.array([1432997174477.0 / 9575080441755.0,
                 5161836677717.0 / 13612068292357.0,
                 1720146321549.0 / 2090206949498.0,
                 3134564353537.0 / 4481467310338.0,
                 2277821191437.0 / 14882151754819.0])
RK4C = np.array([0.0,
                 1432997174477.0 / 9575080441755.0,
                 2526269341429.0 / 6820363962896.0,
                 2006345519317.0 / 3224310063776.0,
                 2802321613138.0 / 2924317926251.0])


def trace_constant(N, dim, kind="gauss"):
    """C_N = d N(N+1)/2 for Lobatto nodes and d (N+1)(N+2)/2 for Gauss nodes."""
    kind = getattr(kind, "value", kind)
    if kind == "lobatto":
        return dim * N * (N + 1) / 2.0
    return dim * (N + 1) * (N + 2) / 2.0


def mesh_length_scale(disc):
    """min over elements of 1 / (||J^{-1}||_inf ||J_f||_inf)."""
    Jinv = 1.0 / disc.J.min(axis=1)
    Jf = np.linalg.norm(disc.nf, axis=-1).max(axis=1)
    return float(np.min(1.0 / (Jinv * Jf)))


def estimate_dt(disc, wavespeed, cfl=0.5, h=None):
    """dt = cfl h / (a C_N); both node kinds use the Gauss trace constant."""
    if not wavespeed > 0:
        raise InvalidArgumentError("wavespeed must be positive")
    h = mesh_length_scale(disc) if h is None else h
    return cfl * h / (wavespeed * trace_constant(disc.N, disc.dim, "gauss"))


def max_speed(u, gamma):
    return float(np.max(max_wavespeed(u, u, gamma)))


def rk45_advance(u, f, t, dt, res=None):
    """One low-storage RK45 step of du/dt = f(u, t, stage)."""
    if not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    u = np.array(u, dtype=float, copy=True)
    res = np.zeros_like(u) if res is None else res
    res[...] = 0.0
    for s in range(5):
        k = f(u, t + RK4C[s] * dt, s)
        if not np.all(np.isfinite(k)):
            raise AdmissibilityError("non-finite right-hand side", stage=s)
        res *= RK4A[s]
        res += dt * k
        u += RK4B[s] * res
    return u


def rk45_dense_tableau():
    """Butcher (A, b, c) equivalent to the low-storage coefficients."""
    A = np.zeros((5, 5))
    for i in range(1, 5):
        for j in range(i):
            acc = 0.0
            for m in range(j, i):
                prod = RK4B[m]
                for l in range(j + 1, m + 1):
                    prod *= RK4A[l]
                acc += prod
            A[i, j] = acc
    b = np.zeros(5)
    for j in range(5):
        acc = 0.0
        for m in range(j, 5):
            prod = RK4B[m]
            for l in range(j + 1, m + 1):
                prod *= RK4A[l]
            acc += prod
        b[j] = acc
    return A, b, A.sum(axis=1)


@dataclass
class IntegrationResult:
    u: np.ndarray
    t: float
    steps: int
    dt: float


def integrate(disc, u0, final_time, cfl=0.5, dt=None, check_every=50, callback=None):
    """Advance from t = 0 to ``final_time`` with a fixed dt; the last step is clamped."""
    from .discretization import rhs

    u = np.array(u0, dtype=float, copy=True)
    if dt is None:
        dt = estimate_dt(disc, max_speed(u, disc.gamma), cfl)
    t, step = 0.0, 0
    res = np.zeros_like(u)

    def f(v, tt, s):
        return rhs(disc, v, stage=s)

    while t < final_time * (1 - 1e-14):
        h = min(dt, final_time - t)
        u = rk45_advance(u, f, t, h, res)
        t += h
        step += 1
        if check_every and step % check_every == 0:
            try:
                check_admissible(u, disc.gamma)
            except DomainError as err:
                raise AdmissibilityError(f"step {step}: {err}") from None
        if callback is not None:
            callback(step, t, u)
    return IntegrationResult(u, t, step, dt)
