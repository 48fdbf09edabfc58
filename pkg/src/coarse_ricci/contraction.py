"""Numerical checks of W1 contraction under a curvature lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curvature import CurvatureProfile, curvature_profile
from .errors import NoPositiveCurvature
from .markov_core import DEFAULT_EXP_TOL, Generator, Measure, MetricSpace, semigroup_rows, stationary_measure
from .transport import w1_distance

MARGIN_RTOL = 1e-7


class ContractionCheck(NamedTuple):
    pair: tuple
    t: float
    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True, eq=False)
class ContractionReport:
    K: float
    checks: list
    worst_margin: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tolerance

    def worst(self, k: int = 5) -> list:
        return sorted(self.checks, key=lambda c: c.margin)[:k]


def contraction_grid(K: float, npts: int = 20) -> np.ndarray:
    """``npts`` geometric times in ``[0.01, 2 / max(|K|, 0.1)]``."""
    return np.geomspace(0.01, 2.0 / max(abs(K), 0.1), npts)


def verify_contraction(gen: Generator, K: float, t_grid=None, space: MetricSpace | None = None,
                       tol: float = DEFAULT_EXP_TOL) -> ContractionReport:
    """Compare ``W1(P_x^t, P_y^t)`` with ``d(x, y) exp(-K t)`` for all pairs.

    Passes when the smallest margin ``rhs - lhs`` is at least
    ``-1e-7 * diameter``.  ``K`` may be negative.
    """
    space = gen.space if space is None else space
    times = contraction_grid(K) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    D = space.dist
    n = space.n
    checks = []
    for t in times:
        P = semigroup_rows(gen, float(t), None, tol)
        decay = math.exp(-K * t)
        for x in range(n):
            for y in range(x + 1, n):
                lhs = w1_distance(P[x], P[y], space)
                rhs = D[x, y] * decay
                checks.append(ContractionCheck((x, y), float(t), lhs, rhs, rhs - lhs))
    worst = min(c.margin for c in checks) if checks else 0.0
    return ContractionReport(float(K), checks, float(worst), MARGIN_RTOL * space.diameter)


def check_inf_equality(gen_or_profile, t_grid=None) -> tuple[float, float]:
    """``(min kappa_low, min kappa_high)`` over all pairs.

    Accepts a generator (a profile is computed) or a ready profile.
    """
    if isinstance(gen_or_profile, CurvatureProfile):
        prof = gen_or_profile
    else:
        prof = curvature_profile(gen_or_profile, t_grid, extrapolate=False)
    return prof.global_K, prof.global_K_high


def inf_equality_tolerance(inf_low: float) -> float:
    return 0.05 * abs(inf_low) + 1e-3


def equilibrium_by_contraction(gen: Generator, x0: int, t0: float, tol: float = 1e-10,
                               K: float | None = None, max_iter: int = 100_000,
                               exp_tol: float = DEFAULT_EXP_TOL):
    """Iterate ``mu <- mu.P^t0`` from ``delta_x0`` until successive W1 <= tol.

    Parameters
    ----------
    K : float, optional
        Global curvature bound; computed from :func:`curvature_profile`
        when omitted.

    Returns
    -------
    pi_hat : Measure
    iterations : int
    w1_trace : list of float
        ``W1(mu_n, mu_{n+1})`` for each step.

    Raises
    ------
    NoPositiveCurvature
        If ``K <= 0``.
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    if K is None:
        K = curvature_profile(gen, extrapolate=False).global_K
    if K <= 0:
        raise NoPositiveCurvature(f"global curvature {K} is not positive")
    space = gen.space
    P = semigroup_rows(gen, t0, None, exp_tol)
    mu = np.zeros(gen.n)
    mu[x0] = 1.0
    trace = []
    for it in range(1, max_iter + 1):
        nxt = mu @ P
        nxt = np.clip(nxt, 0.0, None)
        nxt /= nxt.sum()
        w = w1_distance(mu, nxt, space)
        trace.append(w)
        mu = nxt
        if w <= tol:
            return Measure(mu), it, trace
    raise RuntimeError(f"no convergence after {max_iter} steps")


def equilibrium_gap(pi_hat: Measure, gen: Generator) -> float:
    """W1 distance between ``pi_hat`` and the linear-algebra stationary law."""
    return w1_distance(pi_hat, stationary_measure(gen), gen.space)
