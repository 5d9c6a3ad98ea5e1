"""Reference (numpy) flux differencing and mortar flux corrections.

The fast kernels in :mod:`kernels` compute the same quantities element by
element; these versions operate on one operator at a time and are used for
testing and small problems.
"""

import numpy as np

from ..euler import GAMMA, ec_flux_contracted


def flux_differencing(Q, states, flux):
    """r_j = sum_k 2 Q_jk f(u_j, u_k) over structurally nonzero pairs.

    ``flux(uL, uR) -> (P, nvar)`` must be symmetric; each unordered pair is
    evaluated once.
    """
    Q = np.asarray(Q, dtype=float)
    u = np.asarray(states, dtype=float)
    n = len(u)
    r = np.zeros_like(u)
    nz = (Q != 0.0) | (Q.T != 0.0)
    j, k = np.nonzero(np.triu(nz, 1))
    if len(j):
        F = flux(u[j], u[k])
        np.add.at(r, j, 2.0 * Q[j, k][:, None] * F)
        np.add.at(r, k, 2.0 * Q[k, j][:, None] * F)
    d = np.nonzero(np.diag(Q))[0]
    if len(d):
        r[d] += 2.0 * np.diag(Q)[d][:, None] * flux(u[d], u[d])
    return r


def pair_count(Q):
    """Number of flux evaluations used by :func:`flux_differencing`."""
    nz = (np.asarray(Q) != 0.0)
    nz = nz | nz.T
    return int(np.count_nonzero(np.triu(nz, 1)) + np.count_nonzero(np.diag(nz)))


def mortar_flux_correction(uf, um, nf, nm, wm, Emf, fstar=None, gamma=GAMMA):
    """Face contributions of one non-conforming face.

    ``uf, nf``: projected states and scaled normals at the face nodes;
    ``um, nm, wm``: the same at the mortar nodes; ``fstar``: weighted terminal
    flux at the mortar nodes (zero if omitted).  Returns ``(face, delta)`` where
    ``face`` is added to the face rows of the residual and
    ``delta = face - E_mf^T fstar`` is the correction, which vanishes on
    conforming faces and for constant states on flat faces.
    """
    Emf = np.asarray(Emf, dtype=float)
    nvar = uf.shape[1]
    fstar = np.zeros((len(um), nvar)) if fstar is None else np.asarray(fstar)
    k, s = np.nonzero(Emf)
    navg = 0.5 * (nf[s] + nm[k])
    phi = Emf[k, s][:, None] * ec_flux_contracted(uf[s], um[k], navg, gamma)
    P1 = np.zeros((len(um), nvar))
    np.add.at(P1, k, phi)
    delta = np.zeros((len(uf), nvar))
    np.add.at(delta, s, wm[k][:, None] * phi)
    delta -= Emf.T @ (wm[:, None] * P1)
    return delta + Emf.T @ fstar, delta
