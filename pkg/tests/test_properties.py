"""Randomized invariants driven by hypothesis."""

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from coarse_ricci.curvature import check_concavity, discrete_profile, kappa_discrete
from coarse_ricci.markov_core import build_generator, build_metric_space, line_space, semigroup_rows
from coarse_ricci.transport import dual_certificate, w1_distance
from oracles import linprog_w1

finite = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def line_problem(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    gaps = draw(arrays(float, n - 1, elements=st.floats(0.05, 3.0)))
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    sp = line_space(x)

    def measure():
        w = draw(arrays(float, n, elements=finite))
        if w.sum() < 1e-3:
            w = w + 1.0
        return w / w.sum()

    return sp, measure(), measure(), measure()


@settings(max_examples=150, deadline=None)
@given(line_problem())
def test_w1_metric_axioms(prob):
    sp, a, b, c = prob
    ab = w1_distance(a, b, sp)
    assert ab >= 0
    assert abs(ab - w1_distance(b, a, sp)) <= 1e-10
    assert w1_distance(a, c, sp) <= ab + w1_distance(b, c, sp) + 1e-9
    assert w1_distance(a, a, sp) == 0.0


@settings(max_examples=100, deadline=None)
@given(line_problem())
def test_w1_line_closed_form(prob):
    # on the line W1 is the L1 distance between distribution functions
    sp, a, b, _ = prob
    x = sp.dist[0]
    F = np.cumsum(a - b)[:-1]
    exact = float(np.sum(np.abs(F) * np.diff(x)))
    assert abs(w1_distance(a, b, sp) - exact) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(line_problem(max_n=8))
def test_duality_and_linprog(prob):
    sp, a, b, _ = prob
    w = w1_distance(a, b, sp)
    cert = dual_certificate(a, b, sp)
    assert abs(cert.value - w) <= 1e-9
    assert abs(w - linprog_w1(a, b, sp.dist)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.data())
def test_discrete_concavity_on_lines(n, data):
    x = np.cumsum(data.draw(arrays(float, n, elements=st.floats(0.1, 2.0))))
    sp = line_space(x)
    P = data.draw(arrays(float, (n, n), elements=st.floats(0.0, 1.0)))
    P = P + 1e-3
    P /= P.sum(1, keepdims=True)
    assert check_concavity(discrete_profile(P, sp), tol=1e-9) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.data())
def test_semigroup_rows_stochastic(n, data):
    Q = data.draw(arrays(float, (n, n), elements=st.floats(0.0, 20.0)))
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(1))
    g = build_generator(line_space(range(n)), Q)
    t = data.draw(st.floats(0.0, 10.0))
    P = semigroup_rows(g, t)
    assert np.all(P >= 0) and np.all(P <= 1)
    assert np.allclose(P.sum(1), 1.0, atol=1e-15)
    P2 = semigroup_rows(g, 2 * t)
    assert np.abs(P @ P - P2).max() <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_kappa_discrete_bounds(n, data):
    # kappa <= 1 always; kappa >= 1 - diam/d when the kernel moves anything
    x = np.cumsum(data.draw(arrays(float, n, elements=st.floats(0.1, 2.0))))
    sp = line_space(x)
    P = data.draw(arrays(float, (n, n), elements=st.floats(0.0, 1.0))) + 1e-3
    P /= P.sum(1, keepdims=True)
    for i in range(n):
        for j in range(i + 1, n):
            k = kappa_discrete(P, sp, i, j)
            assert k <= 1 + 1e-12
            assert k >= 1 - sp.diameter / sp.dist[i, j] - 1e-12
