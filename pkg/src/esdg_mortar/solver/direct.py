"""Dense block-form mortar right-hand side.

Each element assembles its full mortar SBP operators Q_im and evaluates
sum_i V^T [(2 Q_im o F_i) 1 + B_i (f*_i - f_i(u_t))] with F_i(a, b) = f_{i,S}(u_a, u_b)
over all volume, face and mortar nodes.  Slow; used as the reference for the
face-local formulation and for small problems.
"""

import numpy as np

from ..errors import AdmissibilityError, DomainError
from ..euler import conservative_from_entropy, ec_flux, ec_flux_contracted, entropy_variables, max_wavespeed, physical_flux
from ..geometry.physical import physical_mortar_sbp
from ..mortar import Split, build_mortar_layout, build_mortar_sbp, build_two_layer_mortar_sbp, face_interps


def element_mortar_sbp(disc, e, layers=1):
    ops = disc.ops
    coarse = np.nonzero(disc.terminals.coarse[e])[0]
    if layers == 2:
        msbp = build_two_layer_mortar_sbp(ops, two_layer_faces=list(coarse))
    else:
        kind = ops.ops1d.quad.kind
        half = build_mortar_layout(ops.dim - 1, Split.HALF, kind, ops.N)
        conf = build_mortar_layout(ops.dim - 1, Split.CONFORMING, kind, ops.N)
        lays = [half if f in coarse else conf for f in range(ops.n_faces)]
        msbp = build_mortar_sbp(ops, face_interps(ops, lays))
    Qm = physical_mortar_sbp(ops, msbp, disc.metric, e, check=False)
    return msbp, Qm


def direct_residual(disc, u, stage=None, layers=1):
    """Weighted residual r (J Mhat du/dt = -r) from the dense block form."""
    from .discretization import Dissipation

    K, nv, nvar = u.shape
    g = disc.gamma
    term = disc.terminals
    cache = disc.extra.setdefault(("direct", layers), {})
    states, chains = [], []
    uT = np.empty((term.T, nvar))
    for e in range(K):
        if e not in cache:
            cache[e] = element_mortar_sbp(disc, e, layers)
        msbp, _ = cache[e]
        V = np.vstack(msbp.chain)
        try:
            v = entropy_variables(u[e], g)
            ut = conservative_from_entropy(V[nv:] @ v, g)
        except DomainError:
            raise AdmissibilityError("inadmissible state in direct assembly", element=e, stage=stage) from None
        s = np.vstack([u[e], ut])
        states.append(s)
        chains.append(V)
        nt = msbp.blocks[-1]
        uT[term.offsets[e, 0]:term.offsets[e, -1]] = s[-nt:]
    nT, wT = disc.nT, term.weight
    uP = uT[term.partner]
    fstar = ec_flux_contracted(uT, uP, nT, g)
    if disc.dissipation == Dissipation.LF:
        lam = max_wavespeed(uT, uP, g)
        fstar = fstar - 0.5 * (lam * np.linalg.norm(nT, axis=1))[:, None] * (uP - uT)
    fphys = sum(nT[:, i:i + 1] * physical_flux(uT, i, g) for i in range(disc.dim))
    bterm = wT[:, None] * (fstar - fphys)
    r = np.empty_like(u)
    for e in range(K):
        msbp, Qm = cache[e]
        s = states[e]
        F = ec_flux(s[:, None, :], s[None, :, :], g)  # (n, n, d, nvar)
        vol = sum(np.einsum("ab,abq->aq", 2.0 * Qm[i], F[:, :, i]) for i in range(disc.dim))
        vol[-msbp.blocks[-1]:] += bterm[term.offsets[e, 0]:term.offsets[e, -1]]
        r[e] = chains[e].T @ vol
    return r
