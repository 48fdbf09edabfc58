"""Independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linprog


def brute_force_w1(a, b, D) -> float:
    """Minimum cost over all vertices of the transport polytope.

    Every vertex is a basic feasible solution: ``n + m - 1`` basic cells
    whose columns of the (rank-deficient) marginal system are independent.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    r = n + m - 1
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    A = A[:-1]  # one marginal equation is redundant
    rhs = np.concatenate([a, b])[:-1]
    cost = np.asarray(D, dtype=float).reshape(-1)
    combos = np.array(list(itertools.combinations(range(n * m), r)))
    M = np.transpose(A[:, combos], (1, 0, 2))
    det = np.linalg.det(M)
    ok = np.abs(det) > 0.5  # the marginal matrix is totally unimodular
    M, combos = M[ok], combos[ok]
    x = np.linalg.solve(M, np.broadcast_to(rhs, (len(M), r))[..., None])[..., 0]
    feasible = np.all(x >= -1e-12, axis=1)
    return float(np.min(np.sum(x[feasible] * cost[combos[feasible]], axis=1)))


# HiGHS defaults to 1e-7 feasibility tolerances, too loose for a 1e-9 comparison
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def linprog_w1(a, b, D) -> float:
    n, m = len(a), len(b)
    A_eq = np.zeros((n + m, n * m))
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A_eq[n + j, j::m] = 1.0
    res = linprog(np.asarray(D, float).reshape(-1), A_eq=A_eq, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs", options=HIGHS_OPTIONS)
    assert res.status == 0
    return float(res.fun)


def expm_rows(Q, t):
    return expm(np.asarray(Q, dtype=float) * t)


def rational_measure(rng, n, max_denom=8):
    """Random probability vector whose entries are multiples of ``1/q``, ``q <= max_denom``."""
    q = int(rng.integers(1, max_denom + 1))
    counts = rng.multinomial(q, np.full(n, 1.0 / n))
    return np.array([float(Fraction(int(c), q)) for c in counts])


def random_metric(rng, n, kind=None):
    """Distance matrix on ``n`` points: line, plane or weighted graph."""
    kind = kind or rng.choice(["line", "plane", "graph"])
    if kind == "line":
        x = np.sort(rng.random(n)) * 10
        while n > 1 and np.min(np.diff(x)) < 1e-6:
            x = np.sort(rng.random(n)) * 10
        return np.abs(x[:, None] - x[None, :])
    if kind == "plane":
        p = rng.random((n, 2))
        return np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))
    W = rng.uniform(0.5, 2.0, (n, n))
    W = np.triu(W, 1)
    W = W + W.T
    np.fill_diagonal(W, 0.0)
    for k in range(n):
        W = np.minimum(W, W[:, [k]] + W[[k], :])
    return W


def random_measure(rng, n, sparsity=0.3):
    w = rng.random(n)
    w[rng.random(n) < sparsity] = 0.0
    if w.sum() == 0:
        w[rng.integers(n)] = 1.0
    return w / w.sum()


def two_state_w1(alpha, beta, t):
    """W1 between the two rows of ``exp(tQ)`` on two points at distance 1."""
    return float(np.exp(-(alpha + beta) * t))
