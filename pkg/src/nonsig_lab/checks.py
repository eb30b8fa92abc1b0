"""Seeded invariant suites run by ``nonsig-lab check``.

Each check returns a :class:`CheckResult`; a suite passes when every check does.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from nonsig_lab import bell, box as boxes, quantum, tradeoff
from nonsig_lab.bell import BellFunctional, chain, chsh, classical_value, evaluate, generalized_chain, rescale
from nonsig_lab.box import Box, disturbance_total, marginalize_tripartite
from nonsig_lab.lp import LpProblem, min_disturbance_adversary, ns_value, relevance, solve_lp

SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}.{self.name} worst={self.worst:.3e} {self.detail}".rstrip()


# -- random objects -------------------------------------------------------------


def random_ns_box(rng: np.random.Generator, n: int, m: int) -> Box:
    """Mixture of XOR boxes, local deterministic boxes and a quantum box."""
    parts = [boxes.xor_box(rng.integers(0, 2, (n, m))) for _ in range(2)]
    parts += [boxes.deterministic_box(rng.integers(0, 2, n), rng.integers(0, 2, m)) for _ in range(2)]
    parts.append(quantum.quantum_box(quantum.random_scenario(rng, n, m, 0.0)))
    return boxes.mix(parts, rng.dirichlet(np.ones(len(parts))))


def bob_noise(box: Box, rng: np.random.Generator, keep_first: bool = True) -> Box:
    """Flip Bob's output at each setting y (except y=1) with a random probability."""
    probs = np.array(box.probs)
    for y in range(1 if keep_first else 0, box.m):
        q = rng.uniform()
        probs[:, y] = (1 - q) * probs[:, y] + q * probs[:, y, :, ::-1]
    return Box(probs)


def random_functional(rng: np.random.Generator, n: int, m: int) -> BellFunctional:
    return rescale(BellFunctional(rng.uniform(-1, 1, (n, m, 2, 2))))


def _result(suite, name, worst, limit, detail="") -> CheckResult:
    return CheckResult(suite, name, bool(worst <= limit), float(worst), detail)


# -- box suite ------------------------------------------------------------------


def check_box(tol: float = 1e-7) -> list[CheckResult]:
    rng = np.random.default_rng(SEED)
    out = []

    worst = 0.0
    for _ in range(20):
        n, m = rng.integers(2, 4, 2)
        tri = quantum.tripartite_quantum_box(quantum.random_scenario(rng, n, m))
        p = tri.probs.sum(axis=4)
        worst = max(worst, np.abs(p.sum(3) - p[:, :1].sum(3)).max(), np.abs(p.sum(2) - p[:1].sum(2)).max())
        marginalize_tripartite(tri)
    out.append(_result("box", "marginal_no_signaling", worst, 1e-9))

    worst = 0.0
    for _ in range(20):
        p = random_ns_box(rng, 3, 3)
        worst = max(worst, abs(disturbance_total(p, p).total))
        q = bob_noise(p, rng)
        worst = max(worst, -disturbance_total(p, q).total)
    out.append(_result("box", "disturbance_nonnegative", worst, 0.0))

    worst = -math.inf
    for _ in range(40):
        n, m = rng.integers(2, 5, 2)
        p = random_ns_box(rng, n, m)
        q = bob_noise(p, rng)
        d = disturbance_total(p, q).total
        fs = [random_functional(rng, n, m)] + [rescale(f) for f in bell.library_functionals(n, m)]
        for f in fs:
            worst = max(worst, abs(evaluate(f, p) - evaluate(f, q)) - n * d)
    out.append(_result("box", "n_disturbance_bounds_bell_change", worst, tol))

    worst = 0.0
    for _ in range(20):
        n, m = rng.integers(2, 5, 2)
        p = random_ns_box(rng, n, m)
        C = rng.normal(size=(n, m))
        f = BellFunctional.from_correlators(C)
        worst = max(worst, abs(evaluate(f, p) - np.sum(C * p.correlators())))
    out.append(_result("box", "correlator_form_consistency", worst, 1e-12))

    worst = 0.0
    for _ in range(20):
        p, q = random_ns_box(rng, 3, 2), random_ns_box(rng, 3, 2)
        lam = rng.uniform()
        f = random_functional(rng, 3, 2)
        mixed = boxes.mix([p, q], [lam, 1 - lam])
        worst = max(worst, abs(evaluate(f, mixed) - lam * evaluate(f, p) - (1 - lam) * evaluate(f, q)))
    out.append(_result("box", "evaluate_linear", worst, 1e-12))
    return out


# -- lp suite -------------------------------------------------------------------


def _vertex_optimum(c, A, b) -> float:
    best = -math.inf
    for rows in itertools.combinations(range(len(b)), 3):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        v = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ v <= b + 1e-9):
            best = max(best, float(c @ v))
    return best


def check_lp(tol: float = 1e-6) -> list[CheckResult]:
    rng = np.random.default_rng(SEED + 1)
    out = []

    worst = 0.0
    funcs = [chsh()] + [chain(n) for n in range(2, 9)]
    funcs += [generalized_chain(n, k) for n in range(4, 11) for k in range(2, n // 2 + 1)]
    for f in funcs:
        worst = max(worst, abs(ns_value(f) - np.abs(f.correlators).sum()))
    out.append(_result("lp", "ns_value_is_algebraic_max", worst, tol, f"{len(funcs)} functionals"))

    worst = -math.inf
    for f in funcs[:12]:
        cl, ns = classical_value(f), ns_value(f)
        worst = max(worst, cl - ns, ns - f.algebraic_max)
    out.append(_result("lp", "classical_le_ns_le_algebraic", worst, tol))

    worst = 0.0
    count = 0
    for n in range(2, 13):
        for k in range(1, n // 2 + 1):
            f = generalized_chain(n, k)
            C = f.correlators
            toeplitz = np.abs(C[1:, 1:] - C[:-1, :-1]).max()
            nonzeros = np.abs(np.count_nonzero(C, axis=1) - 2 * k).max()
            worst = max(worst, toeplitz, nonzeros)
            if n % k == 0:
                worst = max(worst, abs(classical_value(f) - 2 * k * (n - k)))
                count += 1
    out.append(_result("lp", "genchain_structure_and_classical", worst, 0.0, f"{count} classical values"))

    worst = -math.inf
    for _ in range(15):
        n = int(rng.integers(2, 6))
        f = BellFunctional.from_correlators(rng.choice([-1.0, 1.0], (n, n)))
        ns, cl = ns_value(f), classical_value(f)
        worst = max(worst, min(n, ns - cl) - relevance(f))
    out.append(_result("lp", "xor_relevance_lower_bound", worst, tol))

    worst_bound = -math.inf
    worst_mono = -math.inf
    cases = [(boxes.make_pr_box(), None)]
    cases += [(quantum.quantum_box(quantum.tsirelson_scenario()), None)]
    cases += [(quantum.quantum_box(quantum.chain_scenario(3)), None)]
    cases += [(random_ns_box(rng, 2, 2), None), (random_ns_box(rng, 3, 3), None)]
    for p, _ in cases:
        fs = bell.library_functionals(p.n, p.m)
        stats = [(f, ns_value(f), relevance(f)) for f in fs]
        for eps in (0.0, 0.25, 0.5):
            res = min_disturbance_adversary(p, eps)
            after = res.disturbed_box
            corr = res.extension.gentle_correlator(1)
            for f, bmax, w in stats:
                bound = tradeoff.raw_bound_general(p.n, w, eps, min(evaluate(f, p), bmax), bmax)
                worst_bound = max(worst_bound, bound - res.d_min)
                worst_mono = max(worst_mono, evaluate(f, after) + w * corr - bmax)
    out.append(_result("lp", "adversary_respects_tradeoff", worst_bound, tol))
    out.append(_result("lp", "adversary_monogamy", worst_mono, tol))

    worst = 0.0
    for _ in range(30):
        c = rng.normal(size=3)
        A = np.vstack([rng.normal(size=(4, 3)), np.eye(3), -np.eye(3)])
        b = np.concatenate([rng.uniform(0.5, 2, 4), np.full(3, 5.0), np.zeros(3)])
        sol = solve_lp(LpProblem(c, "max", A_ub=A[:4], b_ub=b[:4], hi=np.full(3, 5.0)))
        worst = max(worst, abs(sol.objective - _vertex_optimum(c, A, b)))
    out.append(_result("lp", "simplex_matches_vertex_enumeration", worst, 1e-9))
    return out


# -- quantum suite --------------------------------------------------------------


def check_quantum(tol: float = 1e-10) -> list[CheckResult]:
    rng = np.random.default_rng(SEED + 2)
    out = []

    worst = 0.0
    for eps in np.linspace(0, 0.5, 50):
        E0, E1 = quantum.kraus_gentle(eps)
        worst = max(worst, np.abs(E0.conj().T @ E0 + E1.conj().T @ E1 - np.eye(2)).max())
    out.append(_result("quantum", "kraus_completeness", worst, 1e-14))

    marg = cond = 0.0
    for _ in range(100):
        r = quantum.verify_gentle_assumptions(rng.uniform(), rng.uniform(0, 0.5))
        marg, cond = max(marg, r.marginal_deviation), max(cond, r.conditional_deviation)
    out.append(_result("quantum", "gentle_marginal", marg, tol))
    out.append(_result("quantum", "gentle_conditional", cond, tol))

    ns_worst = corr_worst = eq6_worst = 0.0
    for _ in range(30):
        n, m = (int(v) for v in rng.integers(2, 5, 2))
        sc = quantum.random_scenario(rng, n, m)
        tri = quantum.tripartite_quantum_box(sc)
        p = tri.probs
        ns_worst = max(ns_worst, np.abs(p.sum(2) - p[:1].sum(2)).max(), np.abs(p.sum(3) - p[:, :1].sum(3)).max())
        corr_worst = max(corr_worst, abs(tri.gentle_correlator(1) - 2 * sc.epsilon))
        before, after = quantum.quantum_box(sc), marginalize_tripartite(tri)
        d = disturbance_total(before, after).total
        for f in [rescale(f) for f in bell.library_functionals(n, m)] + [random_functional(rng, n, m)]:
            eq6_worst = max(eq6_worst, abs(evaluate(f, before) - evaluate(f, after)) - n * d)
    out.append(_result("quantum", "tripartite_no_signaling", ns_worst, tol))
    out.append(_result("quantum", "gentle_correlator_is_2eps", corr_worst, tol))
    out.append(_result("quantum", "n_disturbance_bounds_bell_change", eq6_worst, 1e-7))

    worst = 0.0
    for n in range(2, 13):
        for k in range(1, n // 2 + 1):
            C = generalized_chain(n, k).correlators
            lam = np.sort(np.abs(quantum.gen_chain_eigenvalues(n, k)))
            sv = np.sort(np.linalg.svd(C, compute_uv=False))
            worst = max(worst, np.abs(lam - sv).max())
    out.append(_result("quantum", "eigenvalues_match_singular_values", worst, 1e-9))

    gap = tight = 0.0
    for n in range(2, 11):
        box = quantum.quantum_box(quantum.chain_scenario(n))
        for k in range(1, n // 2 + 1):
            f = generalized_chain(n, k)
            bq = quantum.quantum_value(f)
            val = evaluate(f, box)
            gap = max(gap, val - bq)
            tight = max(tight, abs(bq - val))
    out.append(_result("quantum", "spectral_bound_dominates", gap, 1e-9))
    out.append(_result("quantum", "chain_angles_attain_spectral_bound", tight, 1e-9))

    worst = -math.inf
    for eps in np.linspace(0, 0.5, 11):
        worst = max(worst, quantum.quantum_monogamy_check(quantum.tsirelson_scenario(eps)).lhs - 8)
        for _ in range(3):
            sc = quantum.random_scenario(rng, 2, 2, eps)
            worst = max(worst, quantum.quantum_monogamy_check(sc).lhs - 8)
    out.append(_result("quantum", "chsh_monogamy", worst, 1e-8))
    return out


# -- tradeoff suite -------------------------------------------------------------


def check_tradeoff(tol: float = 1e-12) -> list[CheckResult]:
    out = []
    eps = np.linspace(0, 0.5, 101)

    worst = 0.0
    for n in (2, 3, 5, 8):
        for beta in np.linspace(0, 2 * n, 7):
            vals = [tradeoff.bound_general(n, 2, e, beta, 2 * n) for e in eps]
            worst = max(worst, -np.diff(vals).min())
            worst = max(worst, max(abs(tradeoff.bound_chain(n, e, beta) - v) for e, v in zip(eps, vals)))
            if n < 8:
                wider = [tradeoff.bound_general(n + 1, 2, e, beta, 2 * n) for e in eps]
                worst = max(worst, max(w - v for w, v in zip(wider, vals)))
        for e in eps[::10]:
            vals = [tradeoff.bound_general(n, 2, e, b, 2 * n) for b in np.linspace(0, 2 * n, 21)]
            worst = max(worst, -np.diff(vals).min())
    out.append(_result("tradeoff", "general_bound_monotone", worst, tol))

    worst = -math.inf
    for e in np.linspace(0, 0.5, 100):
        for beta in np.linspace(2, tradeoff.TSIRELSON, 100):
            worst = max(worst, tradeoff.bound_general(2, 2, e, beta, 4) - tradeoff.bound_quantum_chsh(e, beta))
    out.append(_result("tradeoff", "quantum_dominates_ns_chsh", worst, tol))

    e = 0.4
    crossing = None
    for n in range(10, 2001, 10):
        k = tradeoff.default_k(n)
        if tradeoff.bound_gen_chain(n, k, e) > tradeoff.bound_chain(n, e, 2 * n * math.cos(math.pi / (2 * n))):
            crossing = crossing or n
        else:
            crossing = None
    out.append(CheckResult("tradeoff", "genchain_beats_chain_asymptotically", crossing is not None,
                           float(crossing or -1), f"from n={crossing}"))
    return out


SUITES = {
    "box": check_box,
    "lp": check_lp,
    "quantum": check_quantum,
    "tradeoff": check_tradeoff,
}


def run_suite(name: str, tol: float | None = None) -> list[CheckResult]:
    """Run one suite (or ``"all"``); ``tol`` overrides each suite's default tolerance."""
    kwargs = {} if tol is None else {"tol": tol}
    if name == "all":
        return [r for fn in SUITES.values() for r in fn(**kwargs)]
    return SUITES[name](**kwargs)
