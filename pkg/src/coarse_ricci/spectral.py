"""Spectral gap of reversible generators and the curvature lower bound on it.

For a generator reversible with respect to ``pi``, ``S = D^1/2 Q D^-1/2``
(``D = diag(pi)``) is symmetric and shares the spectrum of ``Q``.  The gap
is minus its second-largest eigenvalue; positive curvature ``K`` forces
``gap >= K`` and ``||P^t||_{L^2_0(pi)} <= exp(-K t)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NotErgodicWarning, NotReversible, ZeroVector
from .markov_core import DEFAULT_EXP_TOL, Generator, MetricSpace, _weights, check_reversible, semigroup_rows

GAP_TOL = 1e-6
ZERO_EIG_TOL = 1e-9


@dataclass(eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    gap: float
    K: float | None = None
    bound_satisfied: bool | None = None
    norm_decay: list = field(default_factory=list)
    residual: float = 0.0


def symmetrized(gen: Generator, pi) -> np.ndarray:
    w = _weights(pi)
    s = np.sqrt(w)
    S = s[:, None] * np.asarray(gen.rates) / s[None, :]
    return 0.5 * (S + S.T)


def _require_reversible(gen, pi):
    w = _weights(pi)
    if np.any(w <= 0):
        raise NotReversible("reversible measure must be strictly positive")
    if not check_reversible(gen, w):
        raise NotReversible("generator is not reversible with respect to the given measure")
    return w


def spectral_gap(gen: Generator, pi) -> SpectralReport:
    """Eigenvalues of the symmetrized generator (descending) and the gap.

    Raises
    ------
    NotReversible
        If detailed balance fails or ``pi`` has a zero entry.

    Warns
    -----
    NotErgodicWarning
        When the gap is zero within tolerance.
    """
    _require_reversible(gen, pi)
    S = symmetrized(gen, pi)
    w, V, _ = kernels.jacobi_eigh(S)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    norm = max(float(np.linalg.norm(S, 2)), 1e-300)
    residual = float(np.abs(S @ V - V * w).max()) / norm if len(w) else 0.0
    gap = float(-w[1]) if len(w) > 1 else 0.0
    scale = max(1.0, float(np.abs(np.diag(S)).max()))
    if gap <= ZERO_EIG_TOL * scale:
        warnings.warn("spectral gap is zero: the process is not ergodic", NotErgodicWarning, stacklevel=2)
        gap = max(gap, 0.0)
    return SpectralReport(eigenvalues=w, gap=gap, residual=residual)


def check_lichnerowicz(gap: float, K: float) -> bool | None:
    """``gap >= K - 1e-6``; None when ``K <= 0`` (bound has no content)."""
    if K <= 0:
        return None
    return bool(gap >= K - GAP_TOL)


def l2_operator_norm(P: np.ndarray, pi) -> float:
    """Norm of ``P`` on mean-zero functions in ``L^2(pi)``."""
    w = _weights(pi)
    s = np.sqrt(w)
    M = s[:, None] * (P - np.outer(np.ones(len(w)), w)) / s[None, :]
    return float(np.linalg.norm(M, 2))


def operator_norm_decay(gen: Generator, pi, K: float, t_grid, tol: float = DEFAULT_EXP_TOL):
    """``(t, ||P^t||_{L^2_0}, exp(-K t))`` per grid time.

    Returns
    -------
    rows : list of tuple
    ok : bool
        Whether every norm is within ``1e-6`` of the envelope or below it.
    """
    _require_reversible(gen, pi)
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        P = semigroup_rows(gen, float(t), None, tol)
        rows.append((float(t), l2_operator_norm(P, pi), math.exp(-K * t)))
    ok = all(nrm <= env + GAP_TOL for _, nrm, env in rows)
    return rows, ok


def spectral_report(gen: Generator, pi, K: float | None = None, t_grid=None) -> SpectralReport:
    rep = spectral_gap(gen, pi)
    if K is not None:
        rep.K = float(K)
        rep.bound_satisfied = check_lichnerowicz(rep.gap, K)
        if t_grid is not None:
            rep.norm_decay, _ = operator_norm_decay(gen, pi, K, t_grid)
    return rep


def power_norm_check(S, x, n: int, weights=None, atol: float = 1e-9) -> bool:
    """``|Sx|/|x| <= (|S^(2^n) x| / |x|)^(2^-n) + atol`` for self-adjoint ``S``.

    With ``weights`` the norms are those of ``L^2(weights)`` and ``S`` must
    be self-adjoint there.

    Raises
    ------
    ZeroVector
    """
    S = np.asarray(S, dtype=float)
    x = np.asarray(x, dtype=float)
    w = np.ones(len(x)) if weights is None else _weights(weights)

    def norm(v):
        return math.sqrt(float(np.sum(w * v * v)))

    nx = norm(x)
    if nx == 0:
        raise ZeroVector("x must be nonzero")
    G = np.sqrt(w)[:, None] * S / np.sqrt(w)[None, :]
    if np.abs(G - G.T).max() > 1e-12 * max(1.0, np.abs(G).max()):
        raise ValueError("S is not self-adjoint in the given inner product")
    lhs = norm(S @ x) / nx
    y = x.copy()
    for _ in range(2 ** n):
        y = S @ y
    rhs = (norm(y) / nx) ** (1.0 / 2 ** n)
    return bool(lhs <= rhs + atol)


def additive_symmetrization_gap(gen: Generator, pi) -> float:
    """Gap of ``(S + S*)/2`` in ``L^2(pi)``; for non-reversible chains only.

    Reported for information; never a substitute for the reversible gap.
    """
    w = _weights(pi)
    s = np.sqrt(w)
    A = s[:, None] * np.asarray(gen.rates) / s[None, :]
    A = 0.5 * (A + A.T)
    ev = np.sort(kernels.jacobi_eigh(A)[0])[::-1]
    return float(-ev[1])


def lipschitz_variance_bound(space: MetricSpace, pi, f, x0: int) -> tuple[float, float]:
    """``(Var_pi f, Lip(f)^2 * E_pi[d(x, x0)^2])``; the first never exceeds the second."""
    w = _weights(pi)
    f = np.asarray(f, dtype=float)
    var = float(w @ (f - w @ f) ** 2)
    D = space.dist
    off = ~np.eye(space.n, dtype=bool)
    lip = float(np.max(np.abs(f[:, None] - f[None, :])[off] / D[off])) if space.n > 1 else 0.0
    return var, lip ** 2 * float(w @ D[:, x0] ** 2)
