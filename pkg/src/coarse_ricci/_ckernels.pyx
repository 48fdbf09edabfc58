# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: transportation simplex and cyclic Jacobi.

Mirrors ``_pykernels`` operation for operation (same pivot rules and tie
breaking) so both backends return the same plans up to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef double DBL_EPS = 2.220446049250313e-16


def transport_simplex(a, b, C, eps=None, max_iter=None):
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t m = av.shape[0], k = bv.shape[0]
    cdef Py_ssize_t nb = m + k - 1, nn = m + k
    cdef double ceps
    cdef long maxit
    cdef Py_ssize_t i, j, e, node, nbr, head, tail, p, q, flat, ei, ej, leave, best_key, key
    cdef double f, theta, best, r
    cdef bint bland = False
    cdef long streak = 0, pivots = 0

    if eps is None:
        ceps = 0.0
        for i in range(m):
            for j in range(k):
                if fabs(Cv[i, j]) > ceps:
                    ceps = fabs(Cv[i, j])
        if ceps < 1e-300:
            ceps = 1e-300
        ceps *= 16 * DBL_EPS
    else:
        ceps = eps
    maxit = 1000 + 50 * m * k if max_iter is None else max_iter

    ra_arr = np.array(av, copy=True)
    rb_arr = np.array(bv, copy=True)
    cdef double[::1] ra = ra_arr
    cdef double[::1] rb = rb_arr
    bi_arr = np.empty(nb, dtype=np.intp)
    bj_arr = np.empty(nb, dtype=np.intp)
    bx_arr = np.empty(nb, dtype=np.float64)
    cdef Py_ssize_t[::1] bi = bi_arr
    cdef Py_ssize_t[::1] bj = bj_arr
    cdef double[::1] bx = bx_arr

    # northwest corner
    i = 0
    j = 0
    e = 0
    while True:
        f = ra[i] if ra[i] < rb[j] else rb[j]
        bi[e] = i
        bj[e] = j
        bx[e] = f
        ra[i] -= f
        rb[j] -= f
        e += 1
        if i == m - 1 and j == k - 1:
            break
        if j == k - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1

    u_arr = np.zeros(m)
    v_arr = np.zeros(k)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr

    # tree workspace (CSR adjacency rebuilt every pivot)
    deg_arr = np.zeros(nn + 1, dtype=np.intp)
    adj_arr = np.empty(2 * nb, dtype=np.intp)
    adje_arr = np.empty(2 * nb, dtype=np.intp)
    fill_arr = np.empty(nn, dtype=np.intp)
    parent_arr = np.empty(nn, dtype=np.intp)
    pedge_arr = np.empty(nn, dtype=np.intp)
    depth_arr = np.empty(nn, dtype=np.intp)
    order_arr = np.empty(nn, dtype=np.intp)
    walk_arr = np.empty(nn, dtype=np.intp)
    upp_arr = np.empty(nn, dtype=np.intp)
    cdef Py_ssize_t[::1] start = deg_arr
    cdef Py_ssize_t[::1] adj = adj_arr
    cdef Py_ssize_t[::1] adje = adje_arr
    cdef Py_ssize_t[::1] fill = fill_arr
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef Py_ssize_t[::1] pedge = pedge_arr
    cdef Py_ssize_t[::1] depth = depth_arr
    cdef Py_ssize_t[::1] order = order_arr
    cdef Py_ssize_t[::1] walk = walk_arr
    cdef Py_ssize_t[::1] upp = upp_arr
    cdef Py_ssize_t nwalk, nupp, c

    while True:
        for node in range(nn + 1):
            start[node] = 0
        for e in range(nb):
            start[bi[e] + 1] += 1
            start[m + bj[e] + 1] += 1
        for node in range(nn):
            start[node + 1] += start[node]
        for node in range(nn):
            fill[node] = start[node]
            parent[node] = -1
        for e in range(nb):
            node = bi[e]
            adj[fill[node]] = m + bj[e]
            adje[fill[node]] = e
            fill[node] += 1
            node = m + bj[e]
            adj[fill[node]] = bi[e]
            adje[fill[node]] = e
            fill[node] += 1
        # BFS from row 0; parent of root is itself to mark it visited
        parent[0] = 0
        depth[0] = 0
        order[0] = 0
        head = 0
        tail = 1
        while head < tail:
            node = order[head]
            head += 1
            for c in range(start[node], start[node + 1]):
                nbr = adj[c]
                if parent[nbr] == -1:
                    parent[nbr] = node
                    pedge[nbr] = adje[c]
                    depth[nbr] = depth[node] + 1
                    order[tail] = nbr
                    tail += 1
        for c in range(1, nn):
            node = order[c]
            e = pedge[node]
            if node < m:
                u[node] = Cv[node, bj[e]] - v[bj[e]]
            else:
                v[node - m] = Cv[bi[e], node - m] - u[bi[e]]

        flat = -1
        if bland:
            for i in range(m):
                for j in range(k):
                    if Cv[i, j] - u[i] - v[j] < -ceps:
                        flat = i * k + j
                        break
                if flat >= 0:
                    break
            if flat < 0:
                break
        else:
            best = 0.0
            for i in range(m):
                for j in range(k):
                    r = Cv[i, j] - u[i] - v[j]
                    if flat < 0 or r < best:
                        best = r
                        flat = i * k + j
            if best >= -ceps:
                break
        if pivots >= maxit:
            raise RuntimeError("transport simplex did not converge")
        pivots += 1
        ei = flat // k
        ej = flat % k

        p = ei
        q = m + ej
        nupp = 0
        nwalk = 0
        while depth[p] > depth[q]:
            upp[nupp] = pedge[p]
            nupp += 1
            p = parent[p]
        while depth[q] > depth[p]:
            walk[nwalk] = pedge[q]
            nwalk += 1
            q = parent[q]
        while p != q:
            upp[nupp] = pedge[p]
            nupp += 1
            p = parent[p]
            walk[nwalk] = pedge[q]
            nwalk += 1
            q = parent[q]
        for c in range(nupp - 1, -1, -1):
            walk[nwalk] = upp[c]
            nwalk += 1

        theta = bx[walk[0]]
        for c in range(0, nwalk, 2):
            if bx[walk[c]] < theta:
                theta = bx[walk[c]]
        leave = -1
        if bland:
            best_key = -1
            for c in range(0, nwalk, 2):
                e = walk[c]
                if bx[e] == theta:
                    key = bi[e] * k + bj[e]
                    if best_key < 0 or key < best_key:
                        best_key = key
                        leave = e
        else:
            for c in range(0, nwalk, 2):
                if bx[walk[c]] == theta:
                    leave = walk[c]
                    break
        for c in range(nwalk):
            e = walk[c]
            if c % 2 == 0:
                bx[e] -= theta
                if bx[e] < 0.0:
                    bx[e] = 0.0
            else:
                bx[e] += theta
        bi[leave] = ei
        bj[leave] = ej
        bx[leave] = theta

        if theta == 0.0:
            streak += 1
            if streak > 2 * (m + k):
                bland = True
        else:
            streak = 0

    X = np.zeros((m, k))
    cdef double[:, ::1] Xv = X
    for e in range(nb):
        Xv[bi[e], bj[e]] += bx[e]
    return X, u_arr.copy(), v_arr.copy(), int(pivots)


def jacobi_eigh(S, double tol=1e-15, int max_sweeps=64):
    A_arr = np.array(S, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A.shape[0]
    V_arr = np.eye(n)
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, r
    cdef int sweeps = 0, sw
    cdef double apq, theta, t, c, s, xp, xq, off, total, scale

    total = 0.0
    for p in range(n):
        for q in range(n):
            total += A[p, q] * A[p, q]
    scale = sqrt(total)
    if scale < 1e-300:
        scale = 1e-300

    for sw in range(1, max_sweeps + 1):
        sweeps = sw
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += A[p, q] * A[p, q]
        if sqrt(off) <= tol * scale:
            sweeps = sw - 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / fabs(theta)
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    xp = A[r, p]
                    xq = A[r, q]
                    A[r, p] = c * xp - s * xq
                    A[r, q] = s * xp + c * xq
                for r in range(n):
                    xp = A[p, r]
                    xq = A[q, r]
                    A[p, r] = c * xp - s * xq
                    A[q, r] = s * xp + c * xq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(n):
                    xp = V[r, p]
                    xq = V[r, q]
                    V[r, p] = c * xp - s * xq
                    V[r, q] = s * xp + c * xq
    w = np.empty(n)
    for p in range(n):
        w[p] = A[p, p]
    return w, V_arr, sweeps
