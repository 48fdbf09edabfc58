import io

import numpy as np
import pytest

from coarse_ricci.markov_core import Measure, build_metric_space, line_space
from coarse_ricci.transport import dual_certificate, w1_distance, wasserstein1, write_plan_csv
from oracles import brute_force_w1, linprog_w1, random_measure, random_metric, rational_measure


def _space(D):
    return build_metric_space(list(range(len(D))), D)


def test_diracs():
    sp = line_space([0, 1, 3])
    p = wasserstein1(Measure.dirac(3, 0), Measure.dirac(3, 2), sp)
    assert p.cost == 3.0
    assert p.plan[0, 2] == 1.0 and p.plan.sum() == 1.0


def test_identical_measures():
    sp = line_space([0, 1, 3])
    mu = Measure([0.2, 0.3, 0.5])
    p = wasserstein1(mu, mu, sp)
    assert p.cost == 0.0
    np.testing.assert_array_equal(p.plan, np.diag(mu.weights))
    cert = dual_certificate(mu, mu, sp)
    assert cert.value == 0.0


def test_line_shift():
    sp = line_space([0, 1, 2])
    mu, nu = [0.5, 0.5, 0], [0, 0.5, 0.5]
    assert w1_distance(mu, nu, sp) == pytest.approx(1.0, abs=1e-15)
    assert brute_force_w1(mu, nu, sp.dist) == pytest.approx(1.0, abs=1e-15)
    cert = dual_certificate(mu, nu, sp)
    assert cert.value == pytest.approx(1.0, abs=1e-15)
    f = cert.potential
    np.testing.assert_allclose(f - f[2], [2, 1, 0], atol=1e-15)


def test_dirac_certificate():
    sp = line_space([0, 2, 5])
    cert = dual_certificate(Measure.dirac(3, 0), Measure.dirac(3, 2), sp)
    assert cert.value == pytest.approx(5.0)
    assert cert.potential[0] - cert.potential[2] == pytest.approx(5.0)


@pytest.mark.parametrize("seed", range(40))
def test_plan_invariants_and_linprog(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 21))
    D = random_metric(rng, n)
    sp = _space(D)
    mu, nu = random_measure(rng, n), random_measure(rng, n)
    p = wasserstein1(mu, nu, sp)
    np.testing.assert_allclose(p.plan.sum(1), mu, atol=1e-10)
    np.testing.assert_allclose(p.plan.sum(0), nu, atol=1e-10)
    assert np.all(p.plan >= -1e-15)
    assert abs(p.cost - float(np.sum(p.plan * D))) <= 1e-10
    assert abs(p.cost - linprog_w1(mu, nu, D)) <= 1e-9
    cert = dual_certificate(mu, nu, sp)
    f = cert.potential
    assert np.all(np.abs(f[:, None] - f[None, :]) <= D + 1e-9)
    assert abs(cert.value - float(f @ (mu - nu))) <= 1e-12
    assert abs(cert.value - p.cost) <= 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_rational(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 5))
    D = random_metric(rng, n)
    mu, nu = rational_measure(rng, n), rational_measure(rng, n)
    assert abs(w1_distance(mu, nu, _space(D)) - brute_force_w1(mu, nu, D)) <= 1e-10


def test_symmetry_and_triangle():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(2, 12))
        sp = _space(random_metric(rng, n))
        a, b, c = (random_measure(rng, n) for _ in range(3))
        ab, ba = w1_distance(a, b, sp), w1_distance(b, a, sp)
        assert abs(ab - ba) <= 1e-10
        assert w1_distance(a, c, sp) <= ab + w1_distance(b, c, sp) + 1e-9


def test_zero_mass_states_ignored():
    sp = line_space([0, 1, 2, 10])
    assert w1_distance([0.5, 0.5, 0, 0], [0, 0.5, 0.5, 0], sp) == pytest.approx(1.0)
    cert = dual_certificate([0.5, 0.5, 0, 0], [0, 0.5, 0.5, 0], sp)
    f = cert.potential
    assert np.all(np.abs(f[:, None] - f[None, :]) <= sp.dist + 1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        w1_distance([1.0], [0.5, 0.5], line_space([0, 1]))


def test_plan_csv():
    sp = build_metric_space(["a", "b", "c"], np.abs(np.subtract.outer([0, 1, 2], [0, 1, 2])))
    buf = io.StringIO()
    write_plan_csv(wasserstein1([0.5, 0.5, 0], [0, 0.5, 0.5], sp), sp, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "i,j,mass,cost_contribution"
    total = sum(float(r.split(",")[3]) for r in lines[1:])
    assert total == pytest.approx(1.0)
