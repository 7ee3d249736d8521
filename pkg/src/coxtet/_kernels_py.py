"""Pure numpy versions of the hot loops (fallback for the compiled module)."""

from __future__ import annotations

import math

import numpy as np

_SIG = np.array([1.0, 1.0, 1.0, -1.0])


def expand_level(U, M, N, tol):
    """Expand one BFS level of the reflection development.

    U[k] = g_k^{-1} x0 for frontier tile g_k, M[k] its motion. Child
    h = g R_i is kept iff i is the smallest index j with <h^{-1} x0, n_j> > tol,
    which selects each group element exactly once, from its lexicographically
    least reduced word. Returns (U', M', parent, gen) ordered by (parent, gen).
    """
    U = np.ascontiguousarray(U, dtype=float)
    M = np.ascontiguousarray(M, dtype=float)
    F = len(U)
    if F == 0:
        return np.zeros((0, 4)), np.zeros((0, 4, 4)), np.zeros(0, np.int64), np.zeros(0, np.int64)
    JN = N * _SIG
    us, ms, par, gen = [], [], [], []
    # s[k, j] = <u_k, n_j>
    s = U @ JN.T
    G = N @ JN.T
    for i in range(4):
        # u' = R_i u = u - 2 <u, n_i> n_i ; <u', n_j> = s_j - 2 s_i G_ij
        t = s - 2.0 * s[:, i : i + 1] * G[i][None, :]
        keep = t[:, i] > tol
        for j in range(i):
            keep &= t[:, j] <= tol
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            continue
        ui = U[idx] - 2.0 * s[idx, i : i + 1] * N[i][None, :]
        # h = g R_i = g - 2 (g n_i)(J n_i)^T
        gn = M[idx] @ N[i]
        mi = M[idx] - 2.0 * gn[:, :, None] * JN[i][None, None, :]
        us.append(ui)
        ms.append(mi)
        par.append(idx)
        gen.append(np.full(idx.size, i, dtype=np.int64))
    if not us:
        return np.zeros((0, 4)), np.zeros((0, 4, 4)), np.zeros(0, np.int64), np.zeros(0, np.int64)
    par = np.concatenate(par)
    gen = np.concatenate(gen)
    order = np.lexsort((gen, par))
    return (
        np.concatenate(us)[order],
        np.concatenate(ms)[order],
        par[order],
        gen[order],
    )


def _submultiple_array(theta, cmax, eps, slack):
    c = np.rint(math.pi / np.maximum(theta, 1e-300))
    good = (c >= 2) & (c <= cmax)
    cc = np.where(good, c, 2.0)
    tol = eps * np.maximum(1.0, math.pi / np.maximum(theta, 1e-300)) + slack
    good &= np.abs(theta - math.pi / cc) < tol
    return np.where(good, cc, 0).astype(np.int64)


def triangle_pairs(nF, S, cmax, eps, ulp_factor=64.0):
    """Scan pairs of planes (S_i, S_j) forming a hyperbolic triangle with nF.

    Returns arrays (i, j, a, b, c) for i < j where the three lines cut out by
    nF, S_i, S_j in their common perpendicular plane bound a triangle with
    angles pi/a (at nF & S_i), pi/b (at nF & S_j), pi/c (at S_i & S_j),
    plus the number of triangles rejected for a non-submultiple angle.
    """
    S = np.ascontiguousarray(S, dtype=float)
    K = len(S)
    empty = np.zeros(0, np.int64)
    if K < 2:
        return empty, empty, empty, empty, empty, 0
    nF = np.asarray(nF, dtype=float)
    JS = S * _SIG
    f = JS @ nF
    C = S @ JS.T
    mag = np.abs(S).max(axis=1)
    scale = np.abs(nF).max()
    i1, i2 = np.triu_indices(K, 1)
    a01 = f[i1]
    a02 = f[i2]
    a12 = C[i1, i2]
    lim = 1.0 - eps
    ok = (np.abs(a01) < lim) & (np.abs(a02) < lim) & (np.abs(a12) < lim)
    det = 1.0 + 2.0 * a01 * a02 * a12 - a01 * a01 - a02 * a02 - a12 * a12
    ok &= det < -eps
    i1, i2, a01, a02, a12, det = i1[ok], i2[ok], a01[ok], a02[ok], a12[ok], det[ok]
    if i1.size == 0:
        return empty, empty, empty, empty, empty, 0
    # time components of the vertex duals V = M^{-1} [nF; S_i; S_j]
    adj00 = 1.0 - a12 * a12
    adj01 = a02 * a12 - a01
    adj02 = a01 * a12 - a02
    adj11 = 1.0 - a02 * a02
    adj12 = a01 * a02 - a12
    adj22 = 1.0 - a01 * a01
    t0, t1, t2 = nF[3], S[i1, 3], S[i2, 3]
    v0 = (adj00 * t0 + adj01 * t1 + adj02 * t2) / det
    v1 = (adj01 * t0 + adj11 * t1 + adj12 * t2) / det
    v2 = (adj02 * t0 + adj12 * t1 + adj22 * t2) / det
    e0 = np.where(-v0 > 0, 1.0, -1.0)
    e1 = np.where(-v1 > 0, 1.0, -1.0)
    e2 = np.where(-v2 > 0, 1.0, -1.0)
    slack = ulp_factor * np.finfo(float).eps
    th_a = np.arccos(np.clip(-e0 * e1 * a01, -1.0, 1.0))
    th_b = np.arccos(np.clip(-e0 * e2 * a02, -1.0, 1.0))
    th_c = np.arccos(np.clip(-e1 * e2 * a12, -1.0, 1.0))
    # rounding in <S_i,S_j> grows with the coordinate magnitudes
    sa = slack * mag[i1] * scale
    sb = slack * mag[i2] * scale
    sc = slack * mag[i1] * mag[i2]
    a = _submultiple_array(th_a, cmax, eps, sa / np.maximum(np.sin(th_a), 1e-12))
    b = _submultiple_array(th_b, cmax, eps, sb / np.maximum(np.sin(th_b), 1e-12))
    c = _submultiple_array(th_c, cmax, eps, sc / np.maximum(np.sin(th_c), 1e-12))
    ok = (a > 0) & (b > 0) & (c > 0)
    nonsub = int(np.count_nonzero(~ok))
    ok &= a * b + b * c + c * a < a * b * c  # 1/a + 1/b + 1/c < 1
    return i1[ok], i2[ok], a[ok], b[ok], c[ok], nonsub
