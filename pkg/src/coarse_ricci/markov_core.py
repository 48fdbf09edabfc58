"""Finite metric spaces, measures, kernels and continuous-time generators.

The semigroup ``P^t = exp(tQ)`` is evaluated by uniformization, which keeps
every partial sum entrywise nonnegative, combined with squaring when
``t * max|q_ii|`` is large.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ChainSpecError,
    GeneratorViolation,
    InvalidKernel,
    InvalidMeasure,
    MetricViolation,
    Reducible,
)

MEASURE_TOL = 1e-12
ROW_SUM_TOL = 1e-12
TRIANGLE_RTOL = 1e-12
DEFAULT_EXP_TOL = 1e-12

# above this value of Lambda*t the series is evaluated at t / 2^s and squared
_SQUARING_THRESHOLD = 16.0


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite set of labelled points with a distance matrix.

    ``checked`` is False only for spaces built with ``unchecked=True``;
    reports carry the flag so that unvalidated metrics stay visible.
    """

    labels: tuple
    dist: np.ndarray
    checked: bool = True

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        """Index of ``label``; integers that are not labels are taken as indices."""
        for i, lab in enumerate(self.labels):
            if lab == label or str(lab) == str(label):
                return i
        if isinstance(label, (int, np.integer)) and 0 <= label < self.n:
            return int(label)
        raise KeyError(f"unknown state {label!r}")

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0


@dataclass(frozen=True, eq=False)
class Measure:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1:
            raise InvalidMeasure("weights must be a vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidMeasure("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > MEASURE_TOL:
            raise InvalidMeasure(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, n: int, i: int) -> "Measure":
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n: int) -> "Measure":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-stochastic matrix; row ``i`` is the law after one step from ``i``."""

    rows: np.ndarray

    def __post_init__(self):
        P = _frozen(self.rows)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidKernel("kernel must be a square matrix")
        if np.any(P < 0) or not np.all(np.isfinite(P)):
            raise InvalidKernel("kernel entries must be finite and nonnegative")
        if P.size and np.abs(P.sum(axis=1) - 1.0).max() > MEASURE_TOL:
            raise InvalidKernel("every row must be a probability vector")
        object.__setattr__(self, "rows", P)

    @classmethod
    def identity(cls, n: int) -> "TransitionKernel":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def row(self, i: int) -> Measure:
        return Measure(self.rows[i])


@dataclass(frozen=True, eq=False)
class Generator:
    """Rate matrix ``Q`` of a continuous-time chain on ``space``."""

    space: MetricSpace
    rates: np.ndarray

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def uniformization_rate(self) -> float:
        lam = float(np.max(-np.diag(self.rates))) if self.n else 0.0
        return lam if lam > 0 else 1.0

    def jump_rate(self, i: int, j: int) -> float:
        return float(self.rates[i, j])


def _weights(m) -> np.ndarray:
    return m.weights if isinstance(m, Measure) else np.asarray(m, dtype=float)


def _rows(k) -> np.ndarray:
    return k.rows if isinstance(k, TransitionKernel) else np.asarray(k, dtype=float)


def build_metric_space(labels: Sequence, dist, unchecked: bool = False) -> MetricSpace:
    """Validate ``dist`` and wrap it in a :class:`MetricSpace`.

    Raises
    ------
    MetricViolation
        On a non-square matrix, asymmetry, negative or zero off-diagonal
        entries, or a triangle-inequality failure; the message names the
        offending pair or triple.
    """
    labels = tuple(labels)
    D = np.array(dist, dtype=float)
    n = len(labels)
    if D.shape != (n, n):
        raise MetricViolation(f"distance matrix has shape {D.shape}, expected {(n, n)}")
    if len(set(map(str, labels))) != n:
        raise MetricViolation("labels must be distinct")
    if unchecked:
        return MetricSpace(labels, _frozen(D), checked=False)
    if not np.all(np.isfinite(D)):
        raise MetricViolation("distances must be finite")
    bad = np.argwhere(D < 0)
    if bad.size:
        i, j = bad[0]
        raise MetricViolation(f"negative distance d({labels[i]}, {labels[j]}) = {D[i, j]}")
    bad = np.argwhere(D != D.T)
    if bad.size:
        i, j = bad[0]
        raise MetricViolation(
            f"asymmetry: d({labels[i]}, {labels[j]}) = {D[i, j]} but "
            f"d({labels[j]}, {labels[i]}) = {D[j, i]}"
        )
    if np.any(np.diag(D) != 0):
        i = int(np.flatnonzero(np.diag(D))[0])
        raise MetricViolation(f"d({labels[i]}, {labels[i]}) must be 0")
    off = D + np.eye(n)
    bad = np.argwhere(off <= 0)
    if bad.size:
        i, j = bad[0]
        raise MetricViolation(f"zero distance between distinct points {labels[i]} and {labels[j]}")
    for j in range(n):
        via = D[:, j][:, None] + D[j, :][None, :]
        viol = D > via * (1 + TRIANGLE_RTOL)
        if viol.any():
            i, k = np.argwhere(viol)[0]
            raise MetricViolation(
                f"triangle inequality fails for ({labels[i]}, {labels[j]}, {labels[k]}): "
                f"d({labels[i]}, {labels[k]}) = {D[i, k]} > {via[i, k]}"
            )
    return MetricSpace(labels, _frozen(D))


def line_space(positions: Sequence[float], labels: Sequence | None = None) -> MetricSpace:
    x = np.asarray(positions, dtype=float)
    if labels is None:
        labels = [repr(float(p)) for p in x]
    return build_metric_space(labels, np.abs(x[:, None] - x[None, :]))


def circle_chordal_space(n: int, labels: Sequence | None = None) -> MetricSpace:
    """``n`` equispaced angles with the chordal distance ``2|sin(dtheta/2)|``."""
    theta = 2 * np.pi * np.arange(n) / n
    D = 2 * np.abs(np.sin((theta[:, None] - theta[None, :]) / 2))
    np.fill_diagonal(D, 0.0)
    if labels is None:
        labels = [f"theta{j}" for j in range(n)]
    return build_metric_space(labels, D)


def build_generator(space: MetricSpace, rates) -> Generator:
    """Validate a rate matrix against ``space``.

    Raises
    ------
    GeneratorViolation
        Wrong shape, negative off-diagonal rate, or a row sum farther than
        ``1e-12`` (relative to the row's total rate) from zero.
    """
    Q = np.array(rates, dtype=float)
    n = space.n
    if Q.shape != (n, n):
        raise GeneratorViolation(f"rate matrix has shape {Q.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(Q)):
        raise GeneratorViolation("rates must be finite")
    off = Q - np.diag(np.diag(Q))
    bad = np.argwhere(off < 0)
    if bad.size:
        i, j = bad[0]
        raise GeneratorViolation(
            f"negative rate q({space.labels[i]}, {space.labels[j]}) = {Q[i, j]}"
        )
    sums = Q.sum(axis=1)
    scale = np.maximum(1.0, np.abs(Q).sum(axis=1))
    bad = np.flatnonzero(np.abs(sums) > ROW_SUM_TOL * scale)
    if bad.size:
        i = bad[0]
        raise GeneratorViolation(f"row sum for {space.labels[i]} is {sums[i]}, not 0")
    return Generator(space, _frozen(Q))


def _poisson_weights(lt: float, tol: float) -> np.ndarray:
    """Poisson(lt) probabilities for k = 0..M with tail mass beyond M <= tol."""
    if lt == 0.0:
        return np.ones(1)
    log_lt = math.log(lt)
    w = []
    k = 0
    while True:
        w.append(math.exp(-lt + k * log_lt - math.lgamma(k + 1)))
        # tail after k is at most w_{k+1} / (1 - lt/(k+2)) once k+2 > lt
        if k + 2 > lt:
            nxt = math.exp(-lt + (k + 1) * log_lt - math.lgamma(k + 2))
            if nxt / (1.0 - lt / (k + 2)) <= tol:
                break
        k += 1
    return np.array(w)


def _series(start: np.ndarray, P_unif: np.ndarray, lt: float, tol: float) -> np.ndarray:
    weights = _poisson_weights(lt, tol)
    term = start.copy()
    acc = weights[0] * term
    for wk in weights[1:]:
        term = term @ P_unif
        acc += wk * term
    return acc


def _renormalize(M: np.ndarray) -> np.ndarray:
    np.clip(M, 0.0, None, out=M)
    M /= M.sum(axis=1, keepdims=True)
    return M


def semigroup_rows(gen: Generator, t: float, rows: Sequence[int] | None = None,
                   tol: float = DEFAULT_EXP_TOL) -> np.ndarray:
    """Rows ``rows`` of ``exp(tQ)`` as a dense array (all rows when None).

    Each returned row is within ``tol`` of the exact row in total variation
    before renormalization to unit sum.
    """
    n = gen.n
    if t < 0:
        raise ValueError("t must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    idx = np.arange(n) if rows is None else np.asarray(rows, dtype=int)
    if t == 0.0 or not np.any(gen.rates):
        return np.eye(n)[idx]
    lam = gen.uniformization_rate
    P_unif = np.eye(n) + np.asarray(gen.rates) / lam
    np.clip(P_unif, 0.0, None, out=P_unif)
    lt = lam * t
    if lt <= _SQUARING_THRESHOLD:
        return _renormalize(_series(np.eye(n)[idx], P_unif, lt, tol))
    s = int(math.ceil(math.log2(lt / _SQUARING_THRESHOLD)))
    P = _renormalize(_series(np.eye(n), P_unif, lt / 2**s, tol / 2**s))
    for _ in range(s):
        P = _renormalize(P @ P)
    return P[idx]


def transition_at(gen: Generator, t: float, tol: float = DEFAULT_EXP_TOL) -> TransitionKernel:
    """The kernel ``P^t = exp(tQ)`` by uniformization.

    ``Lambda = max_i |q_ii|`` (1 for the zero generator), ``P_unif = I + Q/Lambda``
    and ``P^t = sum_k Poisson(k; Lambda t) P_unif^k`` truncated where the
    discarded Poisson mass is below ``tol``.  Rows are renormalized.
    """
    return TransitionKernel(semigroup_rows(gen, t, None, tol))


def _strongly_connected(Q: np.ndarray) -> bool:
    n = Q.shape[0]
    A = (Q > 0) & ~np.eye(n, dtype=bool)

    def reach(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(j)
        return seen.all()

    return reach(A) and reach(A.T)


def stationary_measure(gen: Generator) -> Measure:
    """Unique invariant law of an irreducible generator.

    Solves ``pi Q = 0, sum(pi) = 1`` by LU with partial pivoting on the
    system with one balance equation replaced by the normalization, then
    applies one step of iterative refinement.

    Raises
    ------
    Reducible
        If the rate graph is not strongly connected.
    """
    n = gen.n
    Q = np.asarray(gen.rates)
    if n == 1:
        return Measure(np.ones(1))
    if not _strongly_connected(Q):
        raise Reducible("rate graph is not strongly connected")
    A = Q.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    pi += np.linalg.solve(A, rhs - A @ pi)
    pi = np.clip(pi, 0.0, None)
    return Measure(pi / pi.sum())


def check_reversible(gen: Generator, pi, tol: float = 1e-10) -> bool:
    """Detailed balance ``pi_i q_ij = pi_j q_ji`` within ``tol`` times the largest flux."""
    w = _weights(pi)
    Q = np.asarray(gen.rates)
    if w.shape != (gen.n,):
        raise ValueError("measure and generator dimensions differ")
    flux = w[:, None] * Q
    np.fill_diagonal(flux, 0.0)
    scale = np.abs(flux).max()
    if scale == 0:
        return True
    return bool(np.abs(flux - flux.T).max() <= tol * scale)


def push_measure(mu, k) -> Measure:
    """``mu.k``: the law after one step of ``k`` started from ``mu``."""
    w = _weights(mu)
    P = _rows(k)
    if P.shape[0] != w.shape[0]:
        raise ValueError("measure and kernel dimensions differ")
    out = np.clip(w @ P, 0.0, None)
    return Measure(out / out.sum())


def compose_kernels(k1, k2) -> TransitionKernel:
    """``k1 * k2``: first a step of ``k1``, then a step of ``k2``."""
    A, B = _rows(k1), _rows(k2)
    if A.shape != B.shape:
        raise ValueError("kernels must have the same dimension")
    return TransitionKernel(_renormalize(A @ B))


# -- chain-spec JSON -----------------------------------------------------------


def space_from_spec(doc: dict) -> MetricSpace:
    try:
        labels = list(doc["labels"])
        dist = doc["dist"]
    except (KeyError, TypeError) as exc:
        raise ChainSpecError(f"chain spec needs 'labels' and 'dist': {exc}") from None
    unchecked = doc.get("check_metric", True) is False
    if isinstance(dist, dict):
        if "line_positions" in dist:
            x = np.asarray(dist["line_positions"], dtype=float)
            D = np.abs(x[:, None] - x[None, :])
        elif "circle_chordal" in dist:
            N = int(dist["circle_chordal"])
            if N != len(labels):
                raise ChainSpecError("circle_chordal size must match the number of labels")
            D = circle_chordal_space(N).dist
        else:
            raise ChainSpecError(f"unknown distance generator {sorted(dist)}")
    else:
        D = np.asarray(dist, dtype=float)
    return build_metric_space(labels, D, unchecked=unchecked)


def generator_from_spec(doc: dict) -> Generator:
    """Build a validated generator from a chain-spec document.

    Document shape::

        {"labels": [...],
         "dist": [[...]] | {"line_positions": [...]} | {"circle_chordal": N},
         "rates": [[...]]}
    """
    if not isinstance(doc, dict):
        raise ChainSpecError("chain spec must be a JSON object")
    space = space_from_spec(doc)
    if "rates" not in doc:
        raise ChainSpecError("chain spec needs 'rates'")
    try:
        rates = np.asarray(doc["rates"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ChainSpecError(f"bad rates: {exc}") from None
    return build_generator(space, rates)


def generator_to_spec(gen: Generator) -> dict:
    doc = {
        "labels": [lab if isinstance(lab, (str, int)) else str(lab) for lab in gen.space.labels],
        "dist": gen.space.dist.tolist(),
        "rates": np.asarray(gen.rates).tolist(),
    }
    if not gen.space.checked:
        doc["check_metric"] = False
    return doc


def load_chain_spec(path) -> Generator:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ChainSpecError(f"{path}: invalid JSON ({exc})") from None
    return generator_from_spec(doc)


def dump_chain_spec(gen: Generator, path) -> None:
    with open(path, "w") as fh:
        json.dump(generator_to_spec(gen), fh, indent=1)
