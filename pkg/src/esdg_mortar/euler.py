"""Compressible Euler state algebra and entropy-conservative two-point fluxes.

States are numpy arrays whose last axis holds ``(rho, rho*u_1, ..., rho*u_d, E)``;
all functions broadcast over leading axes.
"""

import numpy as np

from .errors import DomainError

GAMMA = 1.4


def _dim(u) -> int:
    return u.shape[-1] - 2


def pressure(u, gamma=GAMMA):
    rho, m, E = u[..., 0], u[..., 1:-1], u[..., -1]
    return (gamma - 1.0) * (E - 0.5 * np.sum(m * m, axis=-1) / rho)


def check_admissible(u, gamma=GAMMA):
    u = np.asarray(u, dtype=float)
    rho = u[..., 0]
    p = pressure(u, gamma)
    if not (np.all(rho > 0) and np.all(p > 0)):
        raise DomainError("inadmissible state: non-positive density or pressure")
    return rho, p


def entropy(u, gamma=GAMMA):
    """Mathematical entropy S = -rho*s/(gamma-1), s = log(p/rho^gamma)."""
    u = np.asarray(u, dtype=float)
    rho, p = check_admissible(u, gamma)
    s = np.log(p) - gamma * np.log(rho)
    return -rho * s / (gamma - 1.0)


def entropy_variables(u, gamma=GAMMA, check=True):
    u = np.asarray(u, dtype=float)
    rho, m, E = u[..., 0], u[..., 1:-1], u[..., -1]
    rhoe = E - 0.5 * np.sum(m * m, axis=-1) / rho
    if check and not (np.all(rho > 0) and np.all(rhoe > 0)):
        raise DomainError("inadmissible state: non-positive density or pressure")
    s = np.log((gamma - 1.0) * rhoe) - gamma * np.log(rho)
    v = np.empty_like(u)
    v[..., 0] = (rhoe * (gamma + 1.0 - s) - E) / rhoe
    v[..., 1:-1] = m / rhoe[..., None]
    v[..., -1] = -rho / rhoe
    return v


def conservative_from_entropy(v, gamma=GAMMA, check=True):
    v = np.asarray(v, dtype=float)
    v1, vu, vE = v[..., 0], v[..., 1:-1], v[..., -1]
    if check and not np.all(vE < 0):
        raise DomainError("entropy variables with v_last >= 0 have no state")
    vu2 = np.sum(vu * vu, axis=-1)
    s = gamma - v1 + vu2 / (2.0 * vE)
    rhoe = ((gamma - 1.0) / (-vE) ** gamma) ** (1.0 / (gamma - 1.0)) * np.exp(-s / (gamma - 1.0))
    u = np.empty_like(v)
    u[..., 0] = -rhoe * vE
    u[..., 1:-1] = rhoe[..., None] * vu
    u[..., -1] = rhoe * (1.0 - vu2 / (2.0 * vE))
    return u


def entropy_potential(u, i, gamma=GAMMA):
    """Potential paired with :func:`entropy_variables`.

    The entropy variables above equal ``(gamma-1) * dS/du``, so the matching
    potential is ``(gamma-1) * rho * u_i``.
    """
    return (gamma - 1.0) * np.asarray(u, dtype=float)[..., 1 + i]


def physical_flux(u, i, gamma=GAMMA):
    u = np.asarray(u, dtype=float)
    rho = u[..., 0]
    ui = u[..., 1 + i] / rho
    p = pressure(u, gamma)
    f = u * ui[..., None]
    f[..., 1 + i] += p
    f[..., -1] += p * ui
    return f


def _log_mean_raw(a, b):
    f = (a - b) / (a + b)
    uu = f * f
    small = uu < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.where(small, 1.0 + uu / 3.0 + uu * uu / 5.0 + uu * uu * uu / 7.0,
                     np.arctanh(f) / np.where(small, 1.0, f))
    return 0.5 * (a + b) / F


def log_mean(a, b):
    """Logarithmic mean (a-b)/(log a - log b), stable as a -> b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(a > 0) and np.all(b > 0)):
        raise DomainError("log_mean requires positive arguments")
    out = _log_mean_raw(a, b)
    return out if out.ndim else float(out)


def _primitive(u, gamma):
    rho = u[..., 0]
    vel = u[..., 1:-1] / rho[..., None]
    p = (gamma - 1.0) * (u[..., -1] - 0.5 * rho * np.sum(vel * vel, axis=-1))
    return rho, vel, p


def ec_flux_contracted(uL, uR, nrm, gamma=GAMMA):
    """Sum_i nrm_i * f_{i,S}(uL, uR), the Chandrashekar flux contracted with ``nrm``.

    ``nrm`` has trailing axis of length d and broadcasts against the states.
    """
    rhoL, vL, pL = _primitive(uL, gamma)
    rhoR, vR, pR = _primitive(uR, gamma)
    betaL = rhoL / (2.0 * pL)
    betaR = rhoR / (2.0 * pR)
    rho_ln = _log_mean_raw(rhoL, rhoR)
    beta_ln = _log_mean_raw(betaL, betaR)
    rho_avg = 0.5 * (rhoL + rhoR)
    beta_avg = 0.5 * (betaL + betaR)
    p_avg = rho_avg / (2.0 * beta_avg)
    v_avg = 0.5 * (vL + vR)
    vLR = np.sum(vL * vR, axis=-1)
    vn = np.sum(v_avg * nrm, axis=-1)
    mass = rho_ln * vn
    shape = np.broadcast_shapes(mass.shape + (1,), uL.shape, uR.shape)
    f = np.empty(shape[:-1] + (uL.shape[-1],))
    f[..., 0] = mass
    f[..., 1:-1] = mass[..., None] * v_avg + p_avg[..., None] * nrm
    E_avg = rho_ln / (2.0 * beta_ln * (gamma - 1.0)) + 0.5 * rho_ln * vLR
    f[..., -1] = (E_avg + p_avg) * vn
    return f


def ec_flux(uL, uR, gamma=GAMMA):
    """Chandrashekar flux in every direction; returns shape (..., d, d+2)."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    d = _dim(uL)
    eye = np.eye(d)
    return np.stack([ec_flux_contracted(uL, uR, eye[i], gamma) for i in range(d)], axis=-2)


def ec_flux_2d(uL, uR, gamma=GAMMA):
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    check_admissible(uL, gamma)
    check_admissible(uR, gamma)
    if _dim(uL) != 2:
        raise DomainError("ec_flux_2d expects 4-component states")
    f = ec_flux(uL, uR, gamma)
    return f[..., 0, :], f[..., 1, :]


def ec_flux_3d(uL, uR, gamma=GAMMA):
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    check_admissible(uL, gamma)
    check_admissible(uR, gamma)
    if _dim(uL) != 3:
        raise DomainError("ec_flux_3d expects 5-component states")
    f = ec_flux(uL, uR, gamma)
    return f[..., 0, :], f[..., 1, :], f[..., 2, :]


def max_wavespeed(uL, uR, gamma=GAMMA):
    """Two-state bound max(|u| + c)."""
    def speed(u):
        rho, vel, p = _primitive(np.asarray(u, dtype=float), gamma)
        return np.sqrt(np.sum(vel * vel, axis=-1)) + np.sqrt(gamma * p / rho)
    return np.maximum(speed(uL), speed(uR))


def lax_friedrichs_penalty(u_int, u_ext, lam):
    """-(lambda/2)(u_ext - u_int); added to the normal flux at a face point."""
    lam = np.asarray(lam, dtype=float)
    jump = np.asarray(u_ext, dtype=float) - np.asarray(u_int, dtype=float)
    if lam.ndim:
        lam = lam[..., None]
    return -0.5 * lam * jump
