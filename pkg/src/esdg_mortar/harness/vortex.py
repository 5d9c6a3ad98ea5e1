"""Analytic isentropic vortex solutions."""

import numpy as np

from ..euler import GAMMA


def vortex_2d(x, y, t, gamma=GAMMA, x0=5.0, y0=0.0, beta=5.0, period=15.0, xmin=0.0):
    """Conservative state of the translating 2D vortex; shape (..., 4)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xs = xmin + np.mod(x - t - xmin, period)   # periodic translation of x - t
    dx = xs - x0
    dy = y - y0
    r2 = dx * dx + dy * dy
    ex = np.exp(1.0 - r2)
    rho = (1.0 - 0.5 * (gamma - 1.0) * (beta * ex) ** 2 / (8.0 * gamma * np.pi**2)) ** (1.0 / (gamma - 1.0))
    p = rho**gamma
    u1 = 1.0 - beta / (2.0 * np.pi) * ex * dy
    u2 = beta / (2.0 * np.pi) * ex * dx
    E = p / (gamma - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2)
    return np.stack([rho, rho * u1, rho * u2, E], axis=-1)


def vortex_3d(x, y, z, t, gamma=GAMMA, c1=7.5, c2=7.5, p0=None, pi_max=0.4, period=20.0, ymin=0.0):
    """Extruded vortex travelling in +y; shape (..., 5)."""
    p0 = 1.0 / gamma if p0 is None else p0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    ys = ymin + np.mod(y - t - ymin, period)
    r1 = -(ys - c2)
    r2 = x - c1
    Pi = pi_max * np.exp(0.5 * (1.0 - r1 * r1 - r2 * r2))
    base = 1.0 - 0.5 * (gamma - 1.0) * Pi**2
    rho = base ** (1.0 / (gamma - 1.0))
    u1 = Pi * r1
    u2 = Pi * r2 + 1.0
    u3 = np.zeros_like(rho + z)
    E = p0 / (gamma - 1.0) * base ** (gamma / (gamma - 1.0)) + 0.5 * rho * (u1**2 + u2**2 + u3**2)
    return np.stack([rho, rho * u1, rho * u2, rho * u3, E], axis=-1)


def vortex_2d_points(pts, t, **kw):
    return vortex_2d(pts[:, 0], pts[:, 1], t, **kw)


def vortex_3d_points(pts, t, **kw):
    return vortex_3d(pts[:, 0], pts[:, 1], pts[:, 2], t, **kw)
