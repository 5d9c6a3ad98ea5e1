"""Compiled flux-differencing kernels.

States enter as flat rows of primitives ``q[row] = (rho, v_1..v_d, p, beta,
log rho, log beta)`` built by :func:`primitives`.  Volume rows are
``e * nv + a`` and face rows ``e * nft + s``.  ``g`` arrays are laid out as
(K, d, d, points) with g[k, i, j] = g_ij.
"""

import warnings

import numba as nb
import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

# old system TBB libraries only disable one optional threading backend
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)


@njit(cache=True)
def primitives(u, gamma, out):
    """Fill out[m] = (rho, v, p, beta, log rho, log beta) from conservative rows u[m]."""
    M = u.shape[0]
    d = u.shape[1] - 2
    for m in range(M):
        rho = u[m, 0]
        v2 = 0.0
        for i in range(d):
            vi = u[m, 1 + i] / rho
            out[m, 1 + i] = vi
            v2 += vi * vi
        p = (gamma - 1.0) * (u[m, d + 1] - 0.5 * rho * v2)
        beta = rho / (2.0 * p)
        out[m, 0] = rho
        out[m, d + 1] = p
        out[m, d + 2] = beta
        out[m, d + 3] = np.log(rho)
        out[m, d + 4] = np.log(beta)


@njit(cache=True)
def entropy_rows(u, gamma, v):
    """v[m] = entropy variables of u[m]; returns the first inadmissible row or -1."""
    M = u.shape[0]
    d = u.shape[1] - 2
    bad = -1
    for m in range(M):
        rho = u[m, 0]
        m2 = 0.0
        for i in range(d):
            m2 += u[m, 1 + i] * u[m, 1 + i]
        E = u[m, d + 1]
        rhoe = E - 0.5 * m2 / rho
        if not (rho > 0.0 and rhoe > 0.0):
            if bad < 0:
                bad = m
            continue
        s = np.log((gamma - 1.0) * rhoe) - gamma * np.log(rho)
        v[m, 0] = (rhoe * (gamma + 1.0 - s) - E) / rhoe
        for i in range(d):
            v[m, 1 + i] = u[m, 1 + i] / rhoe
        v[m, d + 1] = -rho / rhoe
    return bad


@njit(cache=True)
def conservative_rows(v, gamma, u, q):
    """u[m] = u(v[m]) and q[m] its primitives; returns the first bad row or -1."""
    M = v.shape[0]
    d = v.shape[1] - 2
    bad = -1
    gm1 = gamma - 1.0
    lgm1 = np.log(gm1)
    l2gm1 = np.log(2.0 * gm1)
    for m in range(M):
        vE = v[m, d + 1]
        if not vE < 0.0:
            if bad < 0:
                bad = m
            continue
        vu2 = 0.0
        for i in range(d):
            vu2 += v[m, 1 + i] * v[m, 1 + i]
        lv = np.log(-vE)
        s = gamma - v[m, 0] + vu2 / (2.0 * vE)
        lre = (lgm1 - gamma * lv - s) / gm1
        rhoe = np.exp(lre)
        rho = -rhoe * vE
        u[m, 0] = rho
        for i in range(d):
            u[m, 1 + i] = rhoe * v[m, 1 + i]
            q[m, 1 + i] = -v[m, 1 + i] / vE
        u[m, d + 1] = rhoe * (1.0 - vu2 / (2.0 * vE))
        if not (rho > 0.0 and np.isfinite(u[m, d + 1])):
            if bad < 0:
                bad = m
            continue
        # beta = rho / 2p = -vE / (2 (gamma - 1))
        q[m, 0] = rho
        q[m, d + 1] = gm1 * rhoe
        q[m, d + 2] = -vE / (2.0 * gm1)
        q[m, d + 3] = lre + lv
        q[m, d + 4] = lv - l2gm1
    return bad


@njit(cache=True, inline="always")
def _logmean(a, b, la, lb):
    """Logarithmic mean; series branch for (a-b)^2/(a+b)^2 < 1e-4."""
    f = (a - b) / (a + b)
    u = f * f
    if u < 1e-4:
        return 0.5 * (a + b) / (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0)
    return (a - b) / (la - lb)


@njit(cache=True, inline="always")
def fluxpair(qa, ia, qb, ib, n0, n1, n2, d, gamma, f):
    """f = sum_i n_i f_{i,S}(q_a, q_b), Chandrashekar flux."""
    rhoL = qa[ia, 0]
    rhoR = qb[ib, 0]
    vL0 = qa[ia, 1]
    vR0 = qb[ib, 1]
    vL1 = qa[ia, 2]
    vR1 = qb[ib, 2]
    if d == 3:
        vL2 = qa[ia, 3]
        vR2 = qb[ib, 3]
    else:
        vL2 = 0.0
        vR2 = 0.0
    betaL = qa[ia, d + 2]
    betaR = qb[ib, d + 2]
    rho_ln = _logmean(rhoL, rhoR, qa[ia, d + 3], qb[ib, d + 3])
    beta_ln = _logmean(betaL, betaR, qa[ia, d + 4], qb[ib, d + 4])
    p_avg = (rhoL + rhoR) / (2.0 * (betaL + betaR))
    a0 = 0.5 * (vL0 + vR0)
    a1 = 0.5 * (vL1 + vR1)
    a2 = 0.5 * (vL2 + vR2)
    vn = a0 * n0 + a1 * n1 + a2 * n2
    mass = rho_ln * vn
    f[0] = mass
    f[1] = mass * a0 + p_avg * n0
    f[2] = mass * a1 + p_avg * n1
    if d == 3:
        f[3] = mass * a2 + p_avg * n2
    vLR = vL0 * vR0 + vL1 * vR1 + vL2 * vR2
    E_avg = rho_ln / (2.0 * beta_ln * (gamma - 1.0)) + 0.5 * rho_ln * vLR
    f[d + 1] = (E_avg + p_avg) * vn


@njit(cache=True, inline="always")
def _wavespeed(q, i, d, gamma):
    v2 = 0.0
    for k in range(d):
        v2 += q[i, 1 + k] * q[i, 1 + k]
    return np.sqrt(v2) + np.sqrt(gamma * q[i, d + 1] / q[i, 0])


@njit(parallel=True, cache=True)
def volume_kernel(q, qf, gv, gf, lines, lface, W, S, E1, gamma, r, face):
    """Line-by-line hybridized flux differencing on every element.

    lines[j, t, a]: volume index of node a on line t in direction j.
    lface[j, side, t]: face-node index (into the face block) at the line end.
    Adds to the volume residual ``r`` and to the face accumulator ``face``.
    """
    K = gv.shape[0]
    d = gv.shape[1]
    nl = lines.shape[1]
    n = lines.shape[2]
    nv = r.shape[1]
    nft = face.shape[1]
    nvar = r.shape[2]
    for e in prange(K):
        f = np.empty(nvar)
        ov = e * nv
        of = e * nft
        for j in range(d):
            for t in range(nl):
                w = W[t]
                for a in range(n):
                    ia = lines[j, t, a]
                    for b in range(a + 1, n):
                        ib = lines[j, t, b]
                        n0 = 0.5 * (gv[e, 0, j, ia] + gv[e, 0, j, ib])
                        n1 = 0.5 * (gv[e, 1, j, ia] + gv[e, 1, j, ib])
                        n2 = 0.5 * (gv[e, 2, j, ia] + gv[e, 2, j, ib]) if d == 3 else 0.0
                        fluxpair(q, ov + ia, q, ov + ib, n0, n1, n2, d, gamma, f)
                        cab = w * S[a, b]
                        for k in range(nvar):
                            r[e, ia, k] += cab * f[k]
                            r[e, ib, k] -= cab * f[k]
                for side in range(2):
                    s = lface[j, side, t]
                    sgn = 2.0 * side - 1.0
                    for a in range(n):
                        c = E1[side, a]
                        if c == 0.0:
                            continue
                        ia = lines[j, t, a]
                        n0 = 0.5 * (gv[e, 0, j, ia] + gf[e, 0, j, s])
                        n1 = 0.5 * (gv[e, 1, j, ia] + gf[e, 1, j, s])
                        n2 = 0.5 * (gv[e, 2, j, ia] + gf[e, 2, j, s]) if d == 3 else 0.0
                        fluxpair(q, ov + ia, qf, of + s, n0, n1, n2, d, gamma, f)
                        cw = c * sgn * w
                        for k in range(nvar):
                            r[e, ia, k] += cw * f[k]
                            face[e, s, k] -= cw * f[k]


@njit(parallel=True, cache=True)
def terminal_flux(uT, qT, partner, nT, wT, gamma, lf, out):
    """out[t] = w_t (n_t . f_S(u_t, u_t+) - lf/2 * lambda |n_t| (u_t+ - u_t))."""
    T = uT.shape[0]
    nvar = uT.shape[1]
    d = nvar - 2
    for t in prange(T):
        f = np.empty(nvar)
        p = partner[t]
        n2 = nT[t, 2] if d == 3 else 0.0
        fluxpair(qT, t, qT, p, nT[t, 0], nT[t, 1], n2, d, gamma, f)
        c = 0.0
        if lf != 0.0:
            lam = max(_wavespeed(qT, t, d, gamma), _wavespeed(qT, p, d, gamma))
            nn = 0.0
            for i in range(d):
                nn += nT[t, i] * nT[t, i]
            c = 0.5 * lf * lam * np.sqrt(nn)
        for k in range(nvar):
            out[t, k] = wT[t] * (f[k] - c * (uT[p, k] - uT[t, k]))


@njit(parallel=True, cache=True)
def mortar_correction(cf_elem, cf_fslice, cf_tslice, qf, nf, qT, nT, wT, Emf, gamma, face, fstar):
    """One-layer coarse-face coupling.

    face[e, s] += (P^T w)_s + (E_mf^T (fstar - w * (P 1)))_s with
    P(k, s) = E_mf(k, s) * avg(n) . f_S(u_s, u_k).
    ``fstar`` already includes the weights.
    """
    C = cf_elem.shape[0]
    nm, nfp = Emf.shape
    nft = face.shape[1]
    nvar = face.shape[2]
    d = nf.shape[2]
    for c in prange(C):
        e = cf_elem[c]
        f0 = cf_fslice[c]
        t0 = cf_tslice[c]
        phi = np.empty(nvar)
        P1 = np.zeros((nm, nvar))
        for k in range(nm):
            for s in range(nfp):
                ekm = Emf[k, s]
                if ekm == 0.0:
                    continue
                n0 = 0.5 * (nf[e, f0 + s, 0] + nT[t0 + k, 0])
                n1 = 0.5 * (nf[e, f0 + s, 1] + nT[t0 + k, 1])
                n2 = 0.5 * (nf[e, f0 + s, 2] + nT[t0 + k, 2]) if d == 3 else 0.0
                fluxpair(qf, e * nft + f0 + s, qT, t0 + k, n0, n1, n2, d, gamma, phi)
                for q in range(nvar):
                    val = ekm * phi[q]
                    face[e, f0 + s, q] += wT[t0 + k] * val
                    P1[k, q] += val
        for k in range(nm):
            for s in range(nfp):
                ekm = Emf[k, s]
                if ekm == 0.0:
                    continue
                for q in range(nvar):
                    face[e, f0 + s, q] += ekm * (fstar[t0 + k, q] - wT[t0 + k] * P1[k, q])


@njit(parallel=True, cache=True)
def two_layer_correction(cf_elem, cf_fslice, cf_tslice, cf_m1slice, qf, nf, qm1, nm1, w1,
                         qT, nT, wT, Em1f, Em2m1, gamma, face, fstar):
    """Two-layer coarse-face coupling (face -> layer 1 -> layer 2 = terminal)."""
    C = cf_elem.shape[0]
    n1, nfp = Em1f.shape
    n2 = Em2m1.shape[0]
    nft = face.shape[1]
    nvar = face.shape[2]
    d = nf.shape[2]
    for c in prange(C):
        e = cf_elem[c]
        f0 = cf_fslice[c]
        t0 = cf_tslice[c]
        m0 = cf_m1slice[c]
        phi = np.empty(nvar)
        acc = np.empty(nvar)
        q1 = np.zeros((n1, nvar))
        P1row = np.zeros((n1, nvar))
        # layer 2: q2 = fstar - w2 * (P2 1); P2^T w2 goes to layer 1
        for k2 in range(n2):
            acc[:] = 0.0
            for k1 in range(n1):
                ee = Em2m1[k2, k1]
                if ee == 0.0:
                    continue
                n0 = 0.5 * (nm1[m0 + k1, 0] + nT[t0 + k2, 0])
                nn1 = 0.5 * (nm1[m0 + k1, 1] + nT[t0 + k2, 1])
                nn2 = 0.5 * (nm1[m0 + k1, 2] + nT[t0 + k2, 2])
                fluxpair(qm1, m0 + k1, qT, t0 + k2, n0, nn1, nn2, d, gamma, phi)
                for q in range(nvar):
                    val = ee * phi[q]
                    q1[k1, q] += wT[t0 + k2] * val
                    acc[q] += val
            for q in range(nvar):
                q2 = fstar[t0 + k2, q] - wT[t0 + k2] * acc[q]
                for k1 in range(n1):
                    ee = Em2m1[k2, k1]
                    if ee != 0.0:
                        q1[k1, q] += ee * q2
        # layer 1 against the face
        for k1 in range(n1):
            for s in range(nfp):
                ee = Em1f[k1, s]
                if ee == 0.0:
                    continue
                n0 = 0.5 * (nf[e, f0 + s, 0] + nm1[m0 + k1, 0])
                nn1 = 0.5 * (nf[e, f0 + s, 1] + nm1[m0 + k1, 1])
                nn2 = 0.5 * (nf[e, f0 + s, 2] + nm1[m0 + k1, 2])
                fluxpair(qf, e * nft + f0 + s, qm1, m0 + k1, n0, nn1, nn2, d, gamma, phi)
                for q in range(nvar):
                    val = ee * phi[q]
                    face[e, f0 + s, q] += w1[m0 + k1] * val
                    P1row[k1, q] += val
        for k1 in range(n1):
            for s in range(nfp):
                ee = Em1f[k1, s]
                if ee == 0.0:
                    continue
                for q in range(nvar):
                    face[e, f0 + s, q] += ee * (q1[k1, q] - w1[m0 + k1] * P1row[k1, q])


@njit(parallel=True, cache=True)
def add_face_terms(face, fstar, f_elem, f_fslice, f_tslice, nfp):
    """Conforming and fine faces: face[e, s] += fstar at the matching terminal."""
    C = f_elem.shape[0]
    for c in prange(C):
        e = f_elem[c]
        for s in range(nfp):
            face[e, f_fslice[c] + s, :] += fstar[f_tslice[c] + s, :]


def to_primitives(u, gamma):
    """Primitive rows for an array of conservative states (..., nvar)."""
    flat = np.ascontiguousarray(u).reshape(-1, u.shape[-1])
    out = np.empty((flat.shape[0], flat.shape[1] + 3))
    primitives(flat, gamma, out)
    return out


def set_threads(n):
    if n:
        nb.set_num_threads(int(n))
