import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nonsig_lab import box as boxes
from nonsig_lab.bell import BellFunctional, chsh, classical_value, evaluate
from nonsig_lab.box import correlator, disturbance_total, marginalize_tripartite
from nonsig_lab.checks import bob_noise, random_ns_box
from nonsig_lab.lp import min_disturbance_adversary, ns_value
from nonsig_lab.quantum import (
    QuantumScenario,
    quantum_box,
    quantum_monogamy_check,
    quantum_value,
    random_pure_state,
    tripartite_quantum_box,
    verify_gentle_assumptions,
)
from nonsig_lab.tradeoff import bound_general, raw_bound_general

seeds = st.integers(0, 2**32 - 1)
eps = st.floats(0, 0.5)
angles = st.lists(st.floats(0, 2 * math.pi), min_size=1, max_size=4)
small = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def corr_matrix(max_side=4):
    shape = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shape.flatmap(lambda s: arrays(float, s, elements=st.integers(-3, 3).map(float)))


@given(seeds, st.integers(1, 4), st.integers(1, 4))
@small
def test_random_boxes_are_valid(seed, n, m):
    p = random_ns_box(np.random.default_rng(seed), n, m)
    assert abs(p.probs.sum() - n * m) < 1e-9
    for x in range(1, n + 1):
        for y in range(1, m + 1):
            assert -1 - 1e-12 <= correlator(p, x, y) <= 1 + 1e-12


@given(seeds, st.integers(1, 3), st.integers(2, 4))
@small
def test_disturbance_symmetric_and_nonnegative(seed, n, m):
    rng = np.random.default_rng(seed)
    p = random_ns_box(rng, n, m)
    q = bob_noise(p, rng)
    d = disturbance_total(p, q).total
    assert d >= 0
    assert d == pytest.approx(disturbance_total(q, p).total, abs=1e-12)
    assert disturbance_total(p, p).total == 0


@given(corr_matrix())
@small
def test_classical_invariant_under_relabeling(C):
    f = BellFunctional.from_correlators(C)
    rng = np.random.default_rng(0)
    signs_r = rng.choice([-1.0, 1.0], C.shape[0])
    signs_c = rng.choice([-1.0, 1.0], C.shape[1])
    G = (signs_r[:, None] * C * signs_c)[rng.permutation(C.shape[0])][:, rng.permutation(C.shape[1])]
    assert classical_value(BellFunctional.from_correlators(G)) == classical_value(f)


@given(corr_matrix(3))
@small
def test_value_ordering(C):
    f = BellFunctional.from_correlators(C)
    cl = classical_value(f)
    ns = ns_value(f)
    assert cl <= ns + 1e-8
    assert ns <= np.abs(C).sum() + 1e-8


@given(arrays(float, (3, 3), elements=st.floats(-1, 1)).filter(lambda C: np.abs(C).max() > 1e-3),
       angles.filter(lambda a: len(a) == 3), angles.filter(lambda a: len(a) == 3), seeds)
@small
def test_quantum_boxes_within_bounds(C, alice, bob, seed):
    f = BellFunctional.from_correlators(C)
    sc = QuantumScenario(tuple(alice), tuple(bob), 0.0, random_pure_state(np.random.default_rng(seed)))
    value = evaluate(f, quantum_box(sc))
    assert value <= quantum_value(f) + 1e-8
    assert value <= ns_value(f) + 1e-8


@given(angles, angles, eps)
@small
def test_eps_zero_gentle_step_is_invisible(alice, bob, e):
    sc = QuantumScenario(tuple(alice), tuple(bob), 0.0)
    after = marginalize_tripartite(tripartite_quantum_box(sc))
    np.testing.assert_allclose(after.probs, quantum_box(sc).probs, atol=1e-12)
    # Grace's outcome is always unbiased on |phi+>
    tri = tripartite_quantum_box(sc.with_epsilon(e))
    np.testing.assert_allclose(tri.probs[0, 0].sum(axis=(0, 1)), [0.5, 0.5], atol=1e-12)


@given(st.floats(0, 1), eps)
@settings(max_examples=100, deadline=None)
def test_gentle_measurement_assumptions(alpha, e):
    rep = verify_gentle_assumptions(alpha, e)
    assert rep.marginal_deviation <= 1e-12
    assert rep.conditional_deviation <= 1e-12


@given(st.tuples(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi)),
       st.tuples(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi)), eps, seeds)
@small
def test_monogamy(alice, bob, e, seed):
    sc = QuantumScenario(alice, bob, e, random_pure_state(np.random.default_rng(seed)))
    assert quantum_monogamy_check(sc).holds


@given(st.integers(1, 50), st.floats(0.01, 10), eps, eps, st.floats(0, 1))
def test_bound_monotone(n, w, e1, e2, frac):
    beta_max = 4.0
    beta = frac * beta_max
    lo, hi = sorted((e1, e2))
    assert raw_bound_general(n, w, lo, beta, beta_max) <= raw_bound_general(n, w, hi, beta, beta_max)
    assert bound_general(n, w, hi, beta, beta_max) >= 0


@given(seeds, eps)
@settings(max_examples=15, deadline=None)
def test_adversary_respects_chsh_bound(seed, e):
    p = bob_noise(boxes.make_pr_box(), np.random.default_rng(seed))
    d = min_disturbance_adversary(p, e).d_min
    assert d >= bound_general(2, 2, e, evaluate(chsh(), p), 4) - 1e-8


@given(seeds, eps, eps)
@settings(max_examples=10, deadline=None)
def test_adversary_monotone_in_epsilon(seed, e1, e2):
    p = random_ns_box(np.random.default_rng(seed), 2, 2)
    lo, hi = sorted((e1, e2))
    assert min_disturbance_adversary(p, lo).d_min <= min_disturbance_adversary(p, hi).d_min + 1e-8
