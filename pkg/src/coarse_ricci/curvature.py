"""Coarse Ricci curvature of discrete kernels and continuous-time generators.

For a generator the curvature between ``x`` and ``y`` is a limit as
``t -> 0`` of::

    r(t) = (1/t) * (1 - W1(P_x^t, P_y^t) / d(x, y))

``kappa_low`` and ``kappa_high`` estimate its liminf and limsup as the min
and max of ``r`` over the smallest quarter of a geometric time grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import GridTooCoarse, NotEpsilonGeodesic, SamePoint, ShortTimeWarning
from .markov_core import Generator, MetricSpace, _rows, semigroup_rows
from .transport import w1_distance

# Poisson tail allowed when sampling r(t); far below rounding so that the
# 1/t amplification in r(t) does not expose truncation error
SAMPLE_TOL = 1e-18
MIN_WINDOW = 8
WINDOW_FRACTION = 0.25
DEFAULT_DENSITY = 48
DEFAULT_T_MAX = 1e-1
DEFAULT_T_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class CurvatureEstimate:
    """Samples of ``r(t)`` for one pair and the window estimates.

    ``times``, ``r`` and ``w1`` are aligned arrays in grid order (descending
    ``t``).  ``extrapolated`` and ``lower_bound`` are filled in by
    :func:`curvature_profile`.
    """

    pair: tuple
    distance: float
    times: np.ndarray
    r: np.ndarray
    w1: np.ndarray
    kappa_low: float
    kappa_high: float
    extrapolated: float | None = None
    lower_bound: float | None = None

    @property
    def spread(self) -> float:
        return self.kappa_high - self.kappa_low

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.r.tolist()))

    def value(self, which: str) -> float:
        if which == "low":
            return self.kappa_low
        if which == "high":
            return self.kappa_high
        if which == "extrapolated":
            if self.extrapolated is None:
                raise ValueError("no extrapolated value recorded")
            return self.extrapolated
        raise ValueError(f"unknown curvature variant {which!r}")


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    space: MetricSpace
    estimates: dict
    global_K: float
    rate_scale: float = 1.0
    reduced: bool = False
    epsilon: float | None = None
    meta: dict = field(default_factory=dict)

    def __getitem__(self, pair):
        i, j = pair
        return self.estimates[(i, j) if i < j else (j, i)]

    @property
    def global_K_high(self) -> float:
        return min(e.kappa_high for e in self.estimates.values())

    @property
    def max_spread(self) -> float:
        return max((e.spread for e in self.estimates.values()), default=0.0)


def time_grid(t_min: float = DEFAULT_T_MIN, t_max: float = DEFAULT_T_MAX,
              density: int = DEFAULT_DENSITY) -> np.ndarray:
    """Descending geometric grid with ``density`` points per ``2*pi`` of ``ln t``."""
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    npts = int(math.ceil(math.log(t_max / t_min) / (2 * math.pi) * density)) + 1
    return np.geomspace(t_max, t_min, npts)


def _check_pair(x: int, y: int) -> None:
    if x == y:
        raise SamePoint(f"curvature undefined for coinciding states ({x}, {y})")


def _window(n: int) -> int:
    if n < MIN_WINDOW:
        raise GridTooCoarse(f"time grid has {n} points; at least {MIN_WINDOW} are needed")
    return max(MIN_WINDOW, int(math.ceil(WINDOW_FRACTION * n)))


def _validate_grid(t_grid, gen: Generator | None = None) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t <= 0):
        raise ValueError("time grid must be a nonempty vector of positive times")
    if np.any(np.diff(t) >= 0):
        raise ValueError("time grid must be strictly descending")
    if gen is not None:
        floor = 1e-13 * max(1.0, 1.0 / gen.uniformization_rate)
        if t[-1] < floor:
            warnings.warn(
                f"t = {t[-1]:.3g} is below {floor:.3g}; r(t) has no significant digits there",
                ShortTimeWarning,
                stacklevel=3,
            )
    return t


def window_estimates(r: np.ndarray) -> tuple[float, float]:
    """``(min, max)`` of ``r`` over the smallest-``t`` window (grid is descending)."""
    w = _window(len(r))
    tail = r[-w:]
    return float(tail.min()), float(tail.max())


def _pair_values(gen: Generator, pairs, times, tol=SAMPLE_TOL):
    """``(r, w1)`` arrays of shape ``(len(times), len(pairs))``."""
    space = gen.space
    states = sorted({s for p in pairs for s in p})
    pos = {s: k for k, s in enumerate(states)}
    R = np.empty((len(times), len(pairs)))
    W = np.empty_like(R)
    for a, t in enumerate(times):
        rows = semigroup_rows(gen, float(t), states, tol)
        for b, (x, y) in enumerate(pairs):
            d = space.dist[x, y]
            w = w1_distance(rows[pos[x]], rows[pos[y]], space)
            W[a, b] = w
            R[a, b] = (d - w) / (d * t)
    return R, W


def kappa_discrete(P, space: MetricSpace, x: int, y: int) -> float:
    """Ollivier curvature ``1 - W1(P_x, P_y) / d(x, y)`` of a one-step kernel."""
    _check_pair(x, y)
    M = _rows(P)
    d = space.dist[x, y]
    return float((d - w1_distance(M[x], M[y], space)) / d)


def r_samples(gen: Generator, x: int, y: int, t_grid=None, tol: float = SAMPLE_TOL) -> CurvatureEstimate:
    """Sample ``r(t)`` on a descending grid and take window min/max.

    Raises
    ------
    SamePoint
        If ``x == y``.
    GridTooCoarse
        If the grid has fewer than 8 points.
    """
    _check_pair(x, y)
    t = _validate_grid(time_grid() if t_grid is None else t_grid, gen)
    _window(len(t))
    R, W = _pair_values(gen, [(x, y)], t, tol)
    low, high = window_estimates(R[:, 0])
    return CurvatureEstimate((x, y), float(gen.space.dist[x, y]), t, R[:, 0], W[:, 0], low, high)


def default_t0(gen: Generator) -> float:
    """Extrapolation step scaled so that ``Lambda * t0 = 1e-4``."""
    return 1e-4 / gen.uniformization_rate


def kappa_extrapolated(gen: Generator, x: int, y: int, t0: float | None = None,
                       tol: float = SAMPLE_TOL) -> float:
    """One-level Richardson value ``2 r(t0/2) - r(t0)``.

    Removes the O(t) term of ``r`` when it is differentiable at 0.  With
    ``t0=None`` the step is :func:`default_t0`.
    """
    _check_pair(x, y)
    if t0 is None:
        t0 = default_t0(gen)
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    R, _ = _pair_values(gen, [(x, y)], [t0, t0 / 2], tol)
    return float(2 * R[1, 0] - R[0, 0])


def coupling_lower_bound(gen: Generator, x: int, y: int) -> float:
    """First-order curvature of the coupling where ``x`` and ``y`` jump alone.

    ``sum_z q(x,z)(1 - d(z,y)/d) + sum_w q(y,w)(1 - d(x,w)/d)``; a lower
    bound on the curvature because that coupling overestimates W1.
    """
    _check_pair(x, y)
    D = gen.space.dist
    Q = np.asarray(gen.rates)
    d = D[x, y]
    qx = Q[x].copy()
    qy = Q[y].copy()
    qx[x] = 0.0
    qy[y] = 0.0
    return float(qx @ (1.0 - D[:, y] / d) + qy @ (1.0 - D[x, :] / d))


def geodesic_closure(space: MetricSpace, epsilon: float) -> np.ndarray:
    """Shortest-path distances using only steps of length ``<= epsilon``."""
    D = space.dist
    G = np.where(D <= epsilon, D, np.inf)
    for k in range(space.n):
        G = np.minimum(G, G[:, k][:, None] + G[k, :][None, :])
    return G


def is_epsilon_geodesic(space: MetricSpace, epsilon: float, atol: float = 1e-9) -> bool:
    G = geodesic_closure(space, epsilon)
    return bool(np.all(np.abs(G - space.dist) <= atol))


def _all_pairs(n):
    return list(combinations(range(n), 2))


def curvature_profile(gen: Generator, t_grid=None, use_geodesic_reduction: bool = False,
                      epsilon: float | None = None, pairs=None, extrapolate: bool = True,
                      tol: float = SAMPLE_TOL) -> CurvatureProfile:
    """Curvature estimates for every pair (or the local pairs only).

    Parameters
    ----------
    gen : Generator
    t_grid : array_like, optional
        Descending times; defaults to :func:`time_grid`.
    use_geodesic_reduction : bool
        Evaluate only pairs with ``d <= epsilon``.  Valid when the space is
        ``epsilon``-geodesic, which is checked.
    pairs : iterable of (int, int), optional
        Restrict to these pairs, e.g. one orbit representative per pair
        class on a symmetric space.
    extrapolate : bool
        Also record the Richardson value and the coupling lower bound.

    Raises
    ------
    NotEpsilonGeodesic
        Reduction requested on a space that is not ``epsilon``-geodesic.
    """
    space = gen.space
    t = _validate_grid(time_grid() if t_grid is None else t_grid, gen)
    _window(len(t))
    if pairs is None:
        chosen = _all_pairs(space.n)
    else:
        chosen = sorted({(min(p), max(p)) for p in pairs})
        for p in chosen:
            _check_pair(*p)
    if use_geodesic_reduction:
        if epsilon is None:
            raise ValueError("epsilon is required for the geodesic reduction")
        if not is_epsilon_geodesic(space, epsilon):
            raise NotEpsilonGeodesic(f"space is not {epsilon}-geodesic")
        chosen = [p for p in chosen if space.dist[p] <= epsilon]
    if not chosen:
        raise ValueError("no pairs to evaluate")

    R, W = _pair_values(gen, chosen, t, tol)
    if extrapolate:
        t0 = default_t0(gen)
        R0, _ = _pair_values(gen, chosen, [t0, t0 / 2], tol)
    estimates = {}
    for b, (x, y) in enumerate(chosen):
        low, high = window_estimates(R[:, b])
        extra = lb = None
        if extrapolate:
            extra = float(2 * R0[1, b] - R0[0, b])
            lb = coupling_lower_bound(gen, x, y)
        estimates[(x, y)] = CurvatureEstimate(
            (x, y), float(space.dist[x, y]), t, R[:, b].copy(), W[:, b].copy(), low, high, extra, lb
        )
    global_K = min(e.kappa_low for e in estimates.values())
    return CurvatureProfile(
        space, estimates, global_K, rate_scale=gen.uniformization_rate,
        reduced=use_geodesic_reduction, epsilon=epsilon,
        meta={"t_max": float(t[0]), "t_min": float(t[-1]), "n_times": int(len(t))},
    )


def discrete_profile(P, space: MetricSpace) -> CurvatureProfile:
    """Profile of exact one-step curvatures for a discrete kernel."""
    estimates = {}
    empty = np.empty(0)
    for x, y in _all_pairs(space.n):
        k = kappa_discrete(P, space, x, y)
        estimates[(x, y)] = CurvatureEstimate((x, y), float(space.dist[x, y]), empty, empty, empty, k, k, k)
    return CurvatureProfile(space, estimates, min(e.kappa_low for e in estimates.values()),
                            rate_scale=0.0)


def check_concavity(profile: CurvatureProfile, space: MetricSpace | None = None,
                    which: str = "low", tol: float | None = None,
                    all_triples: bool = False, align_rtol: float = 1e-9):
    """Triples violating ``d(x,z)k(x,z) >= d(x,y)k(x,y) + d(y,z)k(y,z) - tol``.

    By default only triples with ``y`` metrically between ``x`` and ``z``
    (``d(x,z) = d(x,y) + d(y,z)``) are tested: there the inequality is the
    W1 triangle inequality divided by ``t``.  ``all_triples=True`` tests
    every triple of distinct states.

    Returns
    -------
    list of (x, y, z, slack)
        ``slack`` is LHS minus RHS; violations have ``slack < -tol``.
    """
    space = profile.space if space is None else space
    D = space.dist
    if tol is None:
        tol = 1e-6 * profile.rate_scale if profile.rate_scale > 0 else 1e-9
    states = sorted({s for p in profile.estimates for s in p})
    have = set(profile.estimates)
    out = []
    for x in states:
        for z in states:
            if z <= x or (x, z) not in have:
                continue
            for y in states:
                if y in (x, z):
                    continue
                if (min(x, y), max(x, y)) not in have or (min(y, z), max(y, z)) not in have:
                    continue
                if not all_triples and abs(D[x, y] + D[y, z] - D[x, z]) > align_rtol * D[x, z]:
                    continue
                lhs = D[x, z] * profile[(x, z)].value(which)
                rhs = D[x, y] * profile[(x, y)].value(which) + D[y, z] * profile[(y, z)].value(which)
                slack = lhs - rhs
                if slack < -tol:
                    out.append((x, y, z, float(slack)))
    return out
