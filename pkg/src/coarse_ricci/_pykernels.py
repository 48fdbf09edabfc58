"""Pure-Python implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, and as the
reference the compiled version is tested against.  Both modules expose the
same two functions with identical semantics.
"""

import numpy as np

_DBL_EPS = np.finfo(float).eps


def _northwest_corner(a, b):
    m, k = len(a), len(b)
    ra = a.copy()
    rb = b.copy()
    bi = np.empty(m + k - 1, dtype=np.intp)
    bj = np.empty(m + k - 1, dtype=np.intp)
    bx = np.empty(m + k - 1)
    i = j = e = 0
    while True:
        f = min(ra[i], rb[j])
        bi[e], bj[e], bx[e] = i, j, f
        ra[i] -= f
        rb[j] -= f
        e += 1
        if i == m - 1 and j == k - 1:
            break
        if j == k - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    return bi, bj, bx


def _tree(bi, bj, m, k):
    """Root the basis tree at row node 0.

    Nodes ``0..m-1`` are rows, ``m..m+k-1`` are columns.  Returns parent
    node, parent edge, depth and BFS order.
    """
    nn = m + k
    adj = [[] for _ in range(nn)]
    for e in range(len(bi)):
        r, c = bi[e], m + bj[e]
        adj[r].append((c, e))
        adj[c].append((r, e))
    parent = [-1] * nn
    pedge = [-1] * nn
    depth = [0] * nn
    seen = [False] * nn
    seen[0] = True
    order = [0]
    head = 0
    while head < len(order):
        node = order[head]
        head += 1
        for nb, e in adj[node]:
            if not seen[nb]:
                seen[nb] = True
                parent[nb] = node
                pedge[nb] = e
                depth[nb] = depth[node] + 1
                order.append(nb)
    return parent, pedge, depth, order


def transport_simplex(a, b, C, eps=None, max_iter=None):
    """Solve the balanced transportation problem exactly.

    Minimises ``sum(C * X)`` subject to ``X.sum(1) == a``, ``X.sum(0) == b``
    and ``X >= 0`` with the primal network simplex on the bipartite graph.

    Parameters
    ----------
    a, b : (m,), (k,) ndarray
        Positive supplies and demands with equal totals.
    C : (m, k) ndarray
        Transport costs.
    eps : float, optional
        Reduced-cost threshold for optimality.  Defaults to a few ulps of
        the largest cost.
    max_iter : int, optional

    Returns
    -------
    X : (m, k) ndarray
        Optimal plan.
    u, v : ndarray
        Dual potentials with ``u[i] + v[j] <= C[i, j] + eps`` everywhere and
        equality on the basis.
    pivots : int
    """
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    C = np.ascontiguousarray(C, dtype=float)
    m, k = len(a), len(b)
    if eps is None:
        eps = 16 * _DBL_EPS * max(float(np.abs(C).max()), 1e-300)
    if max_iter is None:
        max_iter = 1000 + 50 * m * k
    bi, bj, bx = _northwest_corner(a, b)
    u = np.zeros(m)
    v = np.zeros(k)
    bland = False
    streak = 0
    pivots = 0
    while True:
        parent, pedge, depth, order = _tree(bi, bj, m, k)
        for node in order[1:]:
            e = pedge[node]
            if node < m:
                u[node] = C[node, bj[e]] - v[bj[e]]
            else:
                v[node - m] = C[bi[e], node - m] - u[bi[e]]
        rc = C - u[:, None] - v[None, :]
        if bland:
            cand = np.flatnonzero(rc.ravel() < -eps)
            if cand.size == 0:
                break
            flat = int(cand[0])
        else:
            flat = int(np.argmin(rc))
            if rc.flat[flat] >= -eps:
                break
        if pivots >= max_iter:
            raise RuntimeError("transport simplex did not converge")
        pivots += 1
        ei, ej = divmod(flat, k)

        # cycle: walk from column node up/down to row node ei
        p, q = ei, m + ej
        up_p, up_q = [], []
        while depth[p] > depth[q]:
            up_p.append(pedge[p])
            p = parent[p]
        while depth[q] > depth[p]:
            up_q.append(pedge[q])
            q = parent[q]
        while p != q:
            up_p.append(pedge[p])
            p = parent[p]
            up_q.append(pedge[q])
            q = parent[q]
        walk = up_q + up_p[::-1]
        minus = walk[0::2]
        plus = walk[1::2]

        theta = min(bx[e] for e in minus)
        if bland:
            ties = [e for e in minus if bx[e] == theta]
            leave = min(ties, key=lambda e: bi[e] * k + bj[e])
        else:
            leave = next(e for e in minus if bx[e] == theta)
        for e in minus:
            bx[e] = max(bx[e] - theta, 0.0)
        for e in plus:
            bx[e] += theta
        bi[leave], bj[leave], bx[leave] = ei, ej, theta

        if theta == 0.0:
            streak += 1
            if streak > 2 * (m + k):
                bland = True
        else:
            streak = 0

    X = np.zeros((m, k))
    np.add.at(X, (bi, bj), bx)
    return X, u.copy(), v.copy(), pivots


def jacobi_eigh(S, tol=1e-15, max_sweeps=64):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues, unsorted (diagonal of the converged matrix).
    V : (n, n) ndarray
        Orthonormal eigenvectors as columns.
    sweeps : int
    """
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(float(np.linalg.norm(A)), 1e-300)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = A * A
        np.fill_diagonal(off, 0.0)
        if np.sqrt(off.sum()) <= tol * scale:
            sweeps -= 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, sweeps
