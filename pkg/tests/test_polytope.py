import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from nonsig_lab import box as boxes
from nonsig_lab.bell import BellFunctional, chain, chsh, classical_value, evaluate, generalized_chain
from nonsig_lab.box import disturbance_total, marginalize_tripartite
from nonsig_lab.checks import bob_noise, random_ns_box
from nonsig_lab.errors import InputError, ResourceError
from nonsig_lab.lp import min_disturbance_adversary, ns_box_optimum, ns_value, ns_value_deterministic, relevance


def scipy_ns_value(C, forced=None):
    """Independent no-signaling LP with every outcome and every pair of settings."""
    n, m = C.shape
    N = n * m * 4
    idx = np.arange(N).reshape(n, m, 2, 2)
    eq, rhs = [], []
    for x, y in itertools.product(range(n), range(m)):
        r = np.zeros(N); r[idx[x, y].ravel()] = 1; eq.append(r); rhs.append(1)
    for x, y, y2, a in itertools.product(range(n), range(m), range(m), range(2)):
        if y < y2:
            r = np.zeros(N); r[idx[x, y, a]] = 1; r[idx[x, y2, a]] -= 1; eq.append(r); rhs.append(0)
    for y, x, x2, b in itertools.product(range(m), range(n), range(n), range(2)):
        if x < x2:
            r = np.zeros(N); r[idx[x, y, :, b]] = 1; r[idx[x2, y, :, b]] -= 1; eq.append(r); rhs.append(0)
    sign = np.array([[1, -1], [-1, 1]])
    c = (C[:, :, None, None] * sign).ravel()
    bounds = [(0, 1)] * N
    if forced is not None:
        y, v = forced
        for i in idx[:, y, :, 1 - v].ravel():
            bounds[i] = (0, 0)
    res = linprog(-c, A_eq=np.array(eq), b_eq=rhs, bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


def scipy_adversary(p, eps):
    """Independent adversary LP: full no-signaling on the tripartite box plus |.| variables."""
    n, m = p.n, p.m
    nq = n * m * 8
    q = np.arange(nq).reshape(n, m, 2, 2, 2)
    t = nq + np.arange(n * m * 4).reshape(n, m, 2, 2)
    N = nq + t.size
    eq, rhs = [], []

    def add(coef_idx, coef, value):
        r = np.zeros(N)
        np.add.at(r, coef_idx, coef)
        eq.append(r); rhs.append(value)

    for x, y in itertools.product(range(n), range(m)):
        add(q[x, y].ravel(), 1, 1)
    for x, y, y2, a, g in itertools.product(range(n), range(m), range(m), range(2), range(2)):
        if y < y2:
            add(np.r_[q[x, y, a, :, g], q[x, y2, a, :, g]], np.r_[1, 1, -1, -1], 0)
    for y, x, x2, b, g in itertools.product(range(m), range(n), range(n), range(2), range(2)):
        if x < x2:
            add(np.r_[q[x, y, :, b, g], q[x2, y, :, b, g]], np.r_[1, 1, -1, -1], 0)
    for x, y, a, b in itertools.product(range(n), range(m), range(2), range(2)):
        if y == 0:
            for g in range(2):
                add([q[x, 0, a, b, g]], 1, p.probs[x, 0, a, b] * (0.5 + eps if g == b else 0.5 - eps))
    ub, ub_rhs = [], []
    for x, y, a, b in itertools.product(range(n), range(1, m), range(2), range(2)):
        for s in (1, -1):
            r = np.zeros(N); r[q[x, y, a, b]] = s; r[t[x, y, a, b]] = -1
            ub.append(r); ub_rhs.append(s * p.probs[x, y, a, b])
    # Alice's marginal is untouched (Grace only measures on Bob's side)
    pa = p.alice_marginal()
    for x, a in itertools.product(range(n), range(2)):
        add(q[x, 1 if m > 1 else 0, a].ravel(), 1, pa[x, a])
    c = np.zeros(N); c[t.ravel()] = 1 / n
    res = linprog(c, A_ub=np.array(ub) if ub else None, b_ub=ub_rhs or None, A_eq=np.array(eq), b_eq=rhs,
                  bounds=[(0, None)] * N, method="highs")
    assert res.status == 0
    return res.fun


class TestNsValue:
    def test_chsh(self):
        assert ns_value(chsh()) == pytest.approx(4, abs=1e-9)

    def test_optimal_box_is_pr(self):
        np.testing.assert_allclose(ns_box_optimum(chsh()).probs, boxes.make_pr_box().probs, atol=1e-9)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_chain(self, n):
        assert ns_value(chain(n)) == pytest.approx(2 * n, abs=1e-8)

    @pytest.mark.parametrize("n,k", [(4, 2), (6, 2), (6, 3), (8, 2)])
    def test_generalized_chain(self, n, k):
        assert ns_value(generalized_chain(n, k)) == pytest.approx(2 * k * n, abs=1e-8)

    def test_random_against_scipy(self, rng):
        for _ in range(15):
            n, m = rng.integers(1, 5, size=2)
            C = rng.normal(size=(n, m))
            f = BellFunctional.from_correlators(C)
            assert ns_value(f) == pytest.approx(scipy_ns_value(C), abs=1e-7)
            assert ns_value_deterministic(f) == pytest.approx(
                max(scipy_ns_value(C, (0, v)) for v in (0, 1)), abs=1e-7)

    def test_too_large(self):
        with pytest.raises(ResourceError):
            ns_value(BellFunctional.from_correlators(np.ones((21, 20))))


class TestRelevance:
    def test_chsh(self):
        assert ns_value_deterministic(chsh()) == pytest.approx(2)
        assert relevance(chsh()) == pytest.approx(2, abs=1e-9)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_chain(self, n):
        assert relevance(chain(n)) == pytest.approx(2, abs=1e-8)

    @pytest.mark.parametrize("n,k", [(4, 2), (6, 2), (6, 3), (8, 3)])
    def test_generalized_chain(self, n, k):
        assert relevance(generalized_chain(n, k)) == pytest.approx(2 * k, abs=1e-8)

    def test_deterministic_box_has_no_relevance_gap(self):
        # a functional not involving Bob's first setting: forcing it costs nothing
        f = BellFunctional.from_correlators(np.array([[0.0, 1.0], [0.0, -1.0]]))
        assert relevance(f) == pytest.approx(0, abs=1e-9)

    def test_bad_setting(self):
        with pytest.raises(InputError):
            ns_value_deterministic(chsh(), 3)

    def test_at_least_min_of_n_and_gap(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 5))
            C = rng.choice([-1.0, 1.0], size=(n, n))
            f = BellFunctional.from_correlators(C)
            gap = ns_value(f) - classical_value(f)
            assert relevance(f) >= min(n, gap) - 1e-8


class TestAdversary:
    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.25, 0.4, 0.5])
    def test_pr_box_exact(self, eps):
        res = min_disturbance_adversary(boxes.make_pr_box(), eps)
        assert res.d_min == pytest.approx(2 * eps, abs=1e-9)

    def test_eps_zero_is_exactly_zero(self):
        assert min_disturbance_adversary(boxes.make_pr_box(), 0.0).d_min == 0.0

    def test_local_box_undisturbed(self):
        res = min_disturbance_adversary(boxes.deterministic_box([0, 1], [1, 0]), 0.5)
        assert res.d_min == pytest.approx(0, abs=1e-9)

    def test_extension_is_consistent(self):
        p = boxes.make_pr_box()
        res = min_disturbance_adversary(p, 0.3)
        gentle = res.extension.probs[:, 0]
        np.testing.assert_allclose(gentle.sum(axis=3), p.probs[:, 0], atol=1e-9)
        assert res.extension.gentle_correlator() == pytest.approx(0.6, abs=1e-9)
        rep = disturbance_total(p, marginalize_tripartite(res.extension))
        assert rep.total == pytest.approx(res.d_min, abs=1e-7)

    def test_random_against_scipy(self, rng):
        for _ in range(6):
            n, m = (int(v) for v in rng.integers(2, 4, size=2))
            p = random_ns_box(rng, n, m)
            eps = float(rng.uniform(0, 0.5))
            assert min_disturbance_adversary(p, eps).d_min == pytest.approx(scipy_adversary(p, eps), abs=1e-7)

    def test_bound_holds_on_noisy_boxes(self, rng):
        from nonsig_lab.tradeoff import bound_general

        f = chsh()
        for _ in range(5):
            p = bob_noise(boxes.make_pr_box(), rng)
            eps = float(rng.uniform(0, 0.5))
            d = min_disturbance_adversary(p, eps).d_min
            assert d >= bound_general(2, 2, eps, evaluate(f, p), 4) - 1e-8

    @pytest.mark.parametrize("eps", [-0.1, 0.51])
    def test_epsilon_range(self, eps):
        with pytest.raises(InputError):
            min_disturbance_adversary(boxes.make_pr_box(), eps)

    def test_too_large(self):
        with pytest.raises(ResourceError):
            min_disturbance_adversary(boxes.uniform_box(11, 10), 0.1)


def test_tsirelson_box_below_threshold():
    from nonsig_lab.quantum import quantum_box, tsirelson_scenario

    p = quantum_box(tsirelson_scenario())
    res = min_disturbance_adversary(p, 0.2)
    assert res.d_min >= 0
    assert res.d_min == pytest.approx(scipy_adversary(p, 0.2), abs=1e-7)


def test_deterministic_value_generalized_chain():
    assert ns_value_deterministic(generalized_chain(6, 2)) == pytest.approx(20, abs=1e-8)
    assert ns_value_deterministic(chain(5)) == pytest.approx(8, abs=1e-8)
