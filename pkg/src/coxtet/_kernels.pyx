# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same interface as _kernels_py."""

import numpy as np
cimport numpy as cnp
from libc.math cimport acos, fabs, floor, sin

cnp.import_array()

cdef double PI = 3.14159265358979323846
cdef double DBL_EPS = 2.220446049250313e-16


def expand_level(U, M, N, double tol):
    cdef cnp.ndarray[double, ndim=2] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=3] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] n = np.ascontiguousarray(N, dtype=np.float64)
    cdef Py_ssize_t F = u.shape[0]
    cdef cnp.ndarray[double, ndim=2] uo = np.empty((4 * F, 4))
    cdef cnp.ndarray[double, ndim=3] mo = np.empty((4 * F, 4, 4))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] par = np.empty(4 * F, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] gen = np.empty(4 * F, dtype=np.int64)
    cdef double G[4][4]
    cdef double JN[4][4]
    cdef double s[4]
    cdef double t[4]
    cdef double gn[4]
    cdef Py_ssize_t k, i, j, a, b, cnt = 0
    cdef bint keep
    for i in range(4):
        for j in range(4):
            JN[i][j] = n[i, j] if j < 3 else -n[i, j]
    for i in range(4):
        for j in range(4):
            G[i][j] = n[i, 0] * JN[j][0] + n[i, 1] * JN[j][1] + n[i, 2] * JN[j][2] + n[i, 3] * JN[j][3]
    for k in range(F):
        for j in range(4):
            s[j] = u[k, 0] * JN[j][0] + u[k, 1] * JN[j][1] + u[k, 2] * JN[j][2] + u[k, 3] * JN[j][3]
        for i in range(4):
            for j in range(4):
                t[j] = s[j] - 2.0 * s[i] * G[i][j]
            keep = t[i] > tol
            if keep:
                for j in range(i):
                    if t[j] > tol:
                        keep = False
                        break
            if not keep:
                continue
            for j in range(4):
                uo[cnt, j] = u[k, j] - 2.0 * s[i] * n[i, j]
            for a in range(4):
                gn[a] = m[k, a, 0] * n[i, 0] + m[k, a, 1] * n[i, 1] + m[k, a, 2] * n[i, 2] + m[k, a, 3] * n[i, 3]
            for a in range(4):
                for b in range(4):
                    mo[cnt, a, b] = m[k, a, b] - 2.0 * gn[a] * JN[i][b]
            par[cnt] = k
            gen[cnt] = i
            cnt += 1
    return uo[:cnt], mo[:cnt], par[:cnt], gen[:cnt]


cdef inline long submultiple(double theta, long cmax, double eps, double slack):
    cdef double c, tol, r
    if theta <= 0.0:
        return 0
    r = PI / theta
    c = floor(r + 0.5)
    if c < 2 or c > cmax:
        return 0
    tol = eps * (r if r > 1.0 else 1.0) + slack
    if fabs(theta - PI / c) < tol:
        return <long>c
    return 0


cdef inline double clip1(double x):
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def triangle_pairs(nF, S, long cmax, double eps, double ulp_factor=64.0):
    cdef cnp.ndarray[double, ndim=2] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] nf = np.ascontiguousarray(nF, dtype=np.float64)
    cdef Py_ssize_t K = s.shape[0]
    cdef Py_ssize_t i, j, cnt = 0, cap = 1024, nonsub = 0
    cdef cnp.ndarray[double, ndim=1] f = np.empty(K)
    cdef cnp.ndarray[double, ndim=1] mag = np.empty(K)
    cdef double a01, a02, a12, det, lim = 1.0 - eps, slack = ulp_factor * DBL_EPS
    cdef double adj00, adj01, adj02, adj11, adj12, adj22, v0, v1, v2, e0, e1, e2
    cdef double ta, tb, tc, scale = 0.0
    cdef long a, b, c
    out = np.empty((cap, 5), dtype=np.int64)
    cdef cnp.int64_t[:, :] ov = out
    for j in range(4):
        if fabs(nf[j]) > scale:
            scale = fabs(nf[j])
    for i in range(K):
        f[i] = s[i, 0] * nf[0] + s[i, 1] * nf[1] + s[i, 2] * nf[2] - s[i, 3] * nf[3]
        mag[i] = 0.0
        for j in range(4):
            if fabs(s[i, j]) > mag[i]:
                mag[i] = fabs(s[i, j])
    for i in range(K):
        a01 = f[i]
        if fabs(a01) >= lim:
            continue
        for j in range(i + 1, K):
            a02 = f[j]
            if fabs(a02) >= lim:
                continue
            a12 = s[i, 0] * s[j, 0] + s[i, 1] * s[j, 1] + s[i, 2] * s[j, 2] - s[i, 3] * s[j, 3]
            if fabs(a12) >= lim:
                continue
            det = 1.0 + 2.0 * a01 * a02 * a12 - a01 * a01 - a02 * a02 - a12 * a12
            if det >= -eps:
                continue
            adj00 = 1.0 - a12 * a12
            adj01 = a02 * a12 - a01
            adj02 = a01 * a12 - a02
            adj11 = 1.0 - a02 * a02
            adj12 = a01 * a02 - a12
            adj22 = 1.0 - a01 * a01
            v0 = (adj00 * nf[3] + adj01 * s[i, 3] + adj02 * s[j, 3]) / det
            v1 = (adj01 * nf[3] + adj11 * s[i, 3] + adj12 * s[j, 3]) / det
            v2 = (adj02 * nf[3] + adj12 * s[i, 3] + adj22 * s[j, 3]) / det
            e0 = 1.0 if -v0 > 0 else -1.0
            e1 = 1.0 if -v1 > 0 else -1.0
            e2 = 1.0 if -v2 > 0 else -1.0
            ta = acos(clip1(-e0 * e1 * a01))
            a = submultiple(ta, cmax, eps, slack * mag[i] * scale / max(sin(ta), 1e-12))
            if a == 0:
                nonsub += 1
                continue
            tb = acos(clip1(-e0 * e2 * a02))
            b = submultiple(tb, cmax, eps, slack * mag[j] * scale / max(sin(tb), 1e-12))
            if b == 0:
                nonsub += 1
                continue
            tc = acos(clip1(-e1 * e2 * a12))
            c = submultiple(tc, cmax, eps, slack * mag[i] * mag[j] / max(sin(tc), 1e-12))
            if c == 0:
                nonsub += 1
                continue
            if a * b + b * c + c * a >= a * b * c:
                continue
            if cnt == cap:
                cap *= 2
                out = np.resize(out, (cap, 5))
                ov = out
            ov[cnt, 0] = i
            ov[cnt, 1] = j
            ov[cnt, 2] = a
            ov[cnt, 3] = b
            ov[cnt, 4] = c
            cnt += 1
    out = out[:cnt]
    return out[:, 0].copy(), out[:, 1].copy(), out[:, 2].copy(), out[:, 3].copy(), out[:, 4].copy(), nonsub
