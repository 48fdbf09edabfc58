"""Ready-made processes: dyadic cascade, circle walk, deterministic flow,
random reversible chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curvature import CurvatureEstimate, _check_pair, _validate_grid, _window, window_estimates
from .errors import GridTooCoarse
from .markov_core import (
    Generator,
    Measure,
    MetricSpace,
    build_generator,
    build_metric_space,
    circle_chordal_space,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def dyadic_cascade(N: int, truncation: str = "halved") -> tuple[Generator, MetricSpace]:
    """States ``1, 1/2, ..., 2^-N, 0`` on the line.

    ``2^-n`` jumps to ``2^-(n+1)`` at rate ``2^n + 1`` for ``n < N`` and
    ``0`` jumps to ``1`` at rate ``1/2``.  The infinite tail below ``2^-N``
    is replaced by a direct jump ``2^-N -> 0``:

    ``truncation="halved"`` (default)
        rate ``(2^N + 1) / 2``.  This keeps the curvature of the last two
        pairs at ``1/2`` and ``3/2``, so every adjacent pair matches the
        infinite process and the global bound stays ``1/2``.
    ``truncation="literal"``
        rate ``2^N + 1``.  The pair ``(2^-(N-1), 2^-N)`` then has curvature
        ``-2^(N-1)``.

    State index ``n`` is the point ``2^-n``; index ``N + 1`` is ``0``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if truncation not in ("halved", "literal"):
        raise ValueError("truncation must be 'halved' or 'literal'")
    pos = [2.0 ** -n for n in range(N + 1)] + [0.0]
    labels = [str(Fraction(1, 2 ** n)) for n in range(N + 1)] + ["0"]
    x = np.array(pos)
    space = build_metric_space(labels, np.abs(x[:, None] - x[None, :]))
    n = N + 2
    Q = np.zeros((n, n))
    for k in range(N):
        Q[k, k + 1] = 2.0 ** k + 1
    last = 2.0 ** N + 1
    Q[N, N + 1] = last / 2 if truncation == "halved" else last
    Q[N + 1, 0] = 0.5
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return build_generator(space, Q), space


def circle_walk(N: int) -> tuple[Generator, MetricSpace]:
    """Nearest-neighbour walk on ``N`` equispaced angles, chordal metric.

    Jump rate ``1 / (2 h^2)`` to each neighbour with ``h = 2 pi / N``, so
    the generator approximates ``(1/2) d^2/dtheta^2``.
    """
    if N < 4 or N % 2:
        raise ValueError("N must be even and at least 4")
    space = circle_chordal_space(N)
    h = 2 * math.pi / N
    c = 1.0 / (2 * h * h)
    Q = np.zeros((N, N))
    idx = np.arange(N)
    Q[idx, (idx + 1) % N] = c
    Q[idx, (idx - 1) % N] = c
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return build_generator(space, Q), space


def circle_gap(N: int) -> float:
    """Closed-form spectral gap ``(1 - cos h) / h^2`` of :func:`circle_walk`."""
    h = 2 * math.pi / N
    return (1 - math.cos(h)) / (h * h)


def random_reversible_ctmc(n: int, seed: int) -> tuple[Generator, MetricSpace, Measure]:
    """Random chain reversible with respect to a random ``pi > 0``.

    Points are sorted uniform samples on ``[0, 1]``; conductances ``c_ij``
    are symmetric uniforms and ``q_ij = c_ij / pi_i``.
    """
    if not 2 <= n <= 64:
        raise ValueError("n must lie in [2, 64]")
    rng = np.random.default_rng(seed)
    while True:
        x = np.sort(rng.random(n))
        if np.all(np.diff(x) > 1e-9):
            break
    labels = [f"s{i}" for i in range(n)]
    space = build_metric_space(labels, np.abs(x[:, None] - x[None, :]))
    c = rng.random((n, n))
    c = np.triu(c, 1)
    c = c + c.T
    pi = rng.random(n) + 0.05
    pi /= pi.sum()
    Q = c / pi[:, None]
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return build_generator(space, Q), space, Measure(pi)


# -- deterministic flow --------------------------------------------------------


def _oscillating(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = s * (1.0 + SQRT_HALF * np.sin(np.log(np.abs(s))))
    return np.where(s == 0, 0.0, out)


@dataclass(frozen=True)
class FlowExample:
    """Increasing ``f`` whose flow ``a -> f(f^-1(a) + t)`` is the Markov kernel.

    Around ``t1`` and ``t3``, ``f(ti + s) - f(ti) = s (1 + sin(ln|s|)/sqrt 2)``;
    around ``t2`` it is a unit translation.  Between neighbourhoods ``f`` is
    linear, and outside them it continues with slope 1.
    """

    anchor_times: tuple = (0.0, 1.0, 2.0)
    anchor_points: tuple = (0.0, 1.0, 2.0)
    neighborhood_radius: float = 0.3

    def _local(self, k: int, s):
        return _oscillating(s) if k in (0, 2) else np.asarray(s, dtype=float)

    def displacement(self, k: int, t):
        """``f(t_k + t) - f(t_k)`` for anchor ``k``; exact while ``|t|`` is
        inside the neighbourhood."""
        return self._local(k, t)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ts, fs, rad = self.anchor_times, self.anchor_points, self.neighborhood_radius
        # knots: ends of each neighbourhood, joined linearly
        knots_t, knots_f = [], []
        for k in range(3):
            for side in (-rad, rad):
                knots_t.append(ts[k] + side)
                knots_f.append(fs[k] + float(self._local(k, side)))
        knots_t = np.array(knots_t)
        knots_f = np.array(knots_f)
        out = np.interp(t, knots_t, knots_f)
        out = np.where(t < knots_t[0], knots_f[0] + (t - knots_t[0]), out)
        out = np.where(t > knots_t[-1], knots_f[-1] + (t - knots_t[-1]), out)
        for k in range(3):
            s = t - ts[k]
            near = np.abs(s) < rad
            out = np.where(near, fs[k] + self._local(k, s), out)
        return out if out.ndim else float(out)

    def anchor_of(self, point) -> int:
        for k, p in enumerate(self.anchor_points):
            if p == point:
                return k
        raise KeyError(f"{point!r} is not an anchor point")

    def is_increasing(self, samples: int = 10_000) -> bool:
        ts = self.anchor_times
        grid = np.linspace(ts[0] - 2 * self.neighborhood_radius, ts[-1] + 2 * self.neighborhood_radius, samples)
        return bool(np.all(np.diff(self(grid)) > 0))

    def w1(self, a, b, t) -> float:
        """W1 between the Diracs ``P_a^t`` and ``P_b^t``."""
        ka, kb = self.anchor_of(a), self.anchor_of(b)
        d = self.anchor_points[kb] - self.anchor_points[ka]
        return abs(d + float(self.displacement(kb, t) - self.displacement(ka, t)))

    def r(self, a, b, t) -> float:
        """``(1/t)(1 - W1/d)`` computed without cancellation."""
        ka, kb = self.anchor_of(a), self.anchor_of(b)
        if ka > kb:
            ka, kb = kb, ka
        d = self.anchor_points[kb] - self.anchor_points[ka]
        excess = float(self.displacement(kb, t) - self.displacement(ka, t))
        return -excess / (d * t) + 0.0


def deterministic_flow() -> FlowExample:
    return FlowExample()


def flow_curvature(flow: FlowExample, pair, t_grid, density: float | None = None) -> CurvatureEstimate:
    """Window liminf/limsup of ``r(t)`` for two anchor points of ``flow``.

    Raises
    ------
    GridTooCoarse
        Fewer than 8 grid points, or (when ``density`` of the grid in points
        per ``2 pi`` of ``ln t`` is below 48) too sparse to resolve the
        oscillation.
    """
    a, b = pair
    _check_pair(flow.anchor_of(a), flow.anchor_of(b))
    t = _validate_grid(t_grid)
    if t[0] >= flow.neighborhood_radius:
        raise ValueError("time grid must stay inside the oscillatory neighbourhood")
    _window(len(t))
    if len(t) > 1:
        per_period = 2 * math.pi / float(np.max(np.diff(np.log(t[::-1]))))
        if per_period < 48 - 1e-9:
            raise GridTooCoarse(f"{per_period:.1f} samples per 2*pi of ln t; need 48")
    r = np.array([flow.r(a, b, float(s)) for s in t])
    w1 = np.array([flow.w1(a, b, float(s)) for s in t])
    low, high = window_estimates(r)
    ka, kb = flow.anchor_of(a), flow.anchor_of(b)
    d = abs(flow.anchor_points[kb] - flow.anchor_points[ka])
    return CurvatureEstimate((ka, kb), d, t, r, w1, low, high)


def flow_space(flow: FlowExample) -> MetricSpace:
    x = np.array(flow.anchor_points)
    return build_metric_space(["x", "y", "z"], np.abs(x[:, None] - x[None, :]))


def flow_table(flow: FlowExample, t_min: float = -0.5, t_max: float = 2.5, samples: int = 2001):
    """``(t, f(t))`` pairs for plotting."""
    ts = np.linspace(t_min, t_max, samples)
    return list(zip(ts.tolist(), np.atleast_1d(flow(ts)).tolist()))


def parse_gallery(spec: str, seed: int = 0):
    """Resolve ``name:param`` selectors: ``dyadic:N``, ``circle:N``,
    ``random:n:seed``, ``flow``.  Returns a Generator or a FlowExample."""
    parts = spec.split(":")
    name = parts[0]
    try:
        if name == "dyadic":
            N = int(parts[1]) if len(parts) > 1 else 12
            trunc = parts[2] if len(parts) > 2 else "halved"
            return dyadic_cascade(N, trunc)[0]
        if name == "circle":
            return circle_walk(int(parts[1]) if len(parts) > 1 else 64)[0]
        if name == "random":
            n = int(parts[1]) if len(parts) > 1 else 5
            s = int(parts[2]) if len(parts) > 2 else seed
            return random_reversible_ctmc(n, s)[0]
        if name == "flow":
            return deterministic_flow()
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad gallery selector {spec!r}: {exc}") from None
    raise ValueError(f"unknown gallery {name!r}")
