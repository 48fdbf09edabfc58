import math
import warnings

import numpy as np
import pytest

from coarse_ricci.curvature import curvature_profile
from coarse_ricci.errors import NotErgodicWarning, NotReversible, ZeroVector
from coarse_ricci.gallery import circle_gap, circle_walk, random_reversible_ctmc
from coarse_ricci.markov_core import Measure, build_generator, circle_chordal_space, line_space, stationary_measure
from coarse_ricci.spectral import (
    additive_symmetrization_gap,
    check_lichnerowicz,
    l2_operator_norm,
    lipschitz_variance_bound,
    operator_norm_decay,
    power_norm_check,
    spectral_gap,
    spectral_report,
    symmetrized,
)
from test_markov_core import two_state


def ehrenfest(n):
    """Birth-death chain on {0..n}: up rate n - i, down rate i.  Curvature
    of every adjacent pair is 2, which equals the spectral gap."""
    Q = np.zeros((n + 1, n + 1))
    for i in range(n):
        Q[i, i + 1] = n - i
        Q[i + 1, i] = i + 1
    np.fill_diagonal(Q, -Q.sum(1))
    return build_generator(line_space(range(n + 1)), Q)


@pytest.mark.parametrize("ab", [(1, 1), (0.2, 3.0), (7.0, 0.5)])
def test_two_state(ab):
    a, b = ab
    g = two_state(a, b)
    rep = spectral_gap(g, stationary_measure(g))
    np.testing.assert_allclose(rep.eigenvalues, [0, -(a + b)], atol=1e-12)
    assert rep.gap == pytest.approx(a + b, abs=1e-12)
    assert check_lichnerowicz(rep.gap, a + b) is True


def test_circle_closed_form():
    for N in (8, 16, 32, 64):
        g, _ = circle_walk(N)
        rep = spectral_gap(g, Measure.uniform(N))
        assert rep.gap == pytest.approx(circle_gap(N), abs=1e-10)
        assert abs(rep.eigenvalues[0]) <= 1e-9
        assert rep.residual <= 1e-8


def test_frozen_not_ergodic():
    g = build_generator(line_space([0, 1, 2]), np.zeros((3, 3)))
    with pytest.warns(NotErgodicWarning):
        rep = spectral_gap(g, Measure.uniform(3))
    np.testing.assert_array_equal(rep.eigenvalues, 0.0)
    assert rep.gap == 0.0


def test_not_reversible():
    g = build_generator(circle_chordal_space(3), [[-1, 1, 0], [0, -1, 1], [1, 0, -1]])
    with pytest.raises(NotReversible):
        spectral_gap(g, Measure.uniform(3))
    assert additive_symmetrization_gap(g, Measure.uniform(3)) == pytest.approx(1.5)


def test_lichnerowicz_cases():
    assert check_lichnerowicz(1.0, 1.0 + 5e-7) is True
    assert check_lichnerowicz(1.0, 1.1) is False
    assert check_lichnerowicz(1.0, -0.3) is None
    assert check_lichnerowicz(1.0, 0.0) is None


def test_ehrenfest_tight():
    g = ehrenfest(7)
    pi = stationary_measure(g)
    K = curvature_profile(g, extrapolate=False).global_K
    rep = spectral_gap(g, pi)
    assert rep.gap == pytest.approx(2.0, abs=1e-10)
    assert K == pytest.approx(2.0, abs=1e-4) and K <= 2.0 + 1e-9
    assert check_lichnerowicz(rep.gap, K)


def test_symmetrization_and_residual():
    for seed in range(20):
        g, _, pi = random_reversible_ctmc(int(2 + seed % 7), seed)
        S = symmetrized(g, pi)
        raw = np.sqrt(pi.weights)[:, None] * np.asarray(g.rates) / np.sqrt(pi.weights)[None, :]
        assert np.abs(raw - raw.T).max() <= 1e-9 * max(1.0, np.abs(raw).max())
        rep = spectral_gap(g, pi)
        assert rep.residual <= 1e-8
        np.testing.assert_allclose(np.sort(rep.eigenvalues), np.linalg.eigvalsh(S), atol=1e-9 * np.abs(S).max())


def test_norm_equals_exp_gap():
    for seed in range(15):
        g, _, pi = random_reversible_ctmc(int(2 + seed % 7), 100 + seed)
        gap = spectral_gap(g, pi).gap
        rows, _ = operator_norm_decay(g, pi, 0.0, [0.0, 0.05, 0.3, 1.0])
        for t, nrm, _ in rows:
            assert nrm == pytest.approx(math.exp(-gap * t), abs=1e-7)


def test_two_state_norm_value():
    g = two_state(1, 1)
    rows, ok = operator_norm_decay(g, stationary_measure(g), 2.0, [1.0])
    assert rows[0][1] == pytest.approx(math.exp(-2), abs=1e-12) and ok


def test_identity_operator_norm():
    pi = np.array([0.2, 0.3, 0.5])
    assert l2_operator_norm(np.eye(3), pi) == pytest.approx(1.0)


def test_report_bundle():
    g = two_state(1, 2)
    rep = spectral_report(g, stationary_measure(g), K=3.0, t_grid=[0.1, 1.0])
    assert rep.bound_satisfied and len(rep.norm_decay) == 2


class TestPowerNorm:
    def test_identity(self):
        assert power_norm_check(np.eye(3), [1, 2, 3], 2)

    def test_diag_example(self):
        S = np.diag([0.5, 0.2])
        x = np.array([1.0, 1.0])
        lhs = np.linalg.norm(S @ x) / np.linalg.norm(x)
        assert lhs == pytest.approx(0.3808, abs=1e-4)
        rhs = (np.linalg.norm(np.linalg.matrix_power(S, 8) @ x) / np.linalg.norm(x)) ** 0.125
        assert lhs <= rhs
        assert power_norm_check(S, x, 3)

    def test_weighted(self):
        g, _, pi = random_reversible_ctmc(5, 3)
        from coarse_ricci.markov_core import transition_at

        P = transition_at(g, 0.2).rows
        assert power_norm_check(P, np.arange(5.0) - 2, 3, weights=pi)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            power_norm_check(np.eye(2), [0, 0], 1)

    def test_not_self_adjoint(self):
        with pytest.raises(ValueError):
            power_norm_check([[0, 1], [0, 0]], [1, 1], 1)


def test_variance_lipschitz():
    rng = np.random.default_rng(0)
    for seed in range(5):
        g, sp, pi = random_reversible_ctmc(6, seed)
        for _ in range(50):
            f = rng.normal(size=6)
            var, bound = lipschitz_variance_bound(sp, pi, f, int(rng.integers(6)))
            assert var <= bound + 1e-12
