"""No-signaling polytope programs: Bell values, relevance, minimal-disturbance adversaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nonsig_lab.bell import BellFunctional
from nonsig_lab.box import Box, TripartiteBox, _check_setting
from nonsig_lab.errors import InputError, ResourceError, SolverError
from nonsig_lab.lp.simplex import LpProblem, solve_lp

MAX_NS_CELLS = 400
MAX_ADVERSARY_CELLS = 100


def _ns_rows(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalization plus no-signaling rows over variables p[x, y, a, b].

    Each no-signaling family compares setting y (resp. x) against setting 1 and
    only for outcome 0; outcome 1 follows from normalization.
    """
    idx = np.arange(n * m * 4).reshape(n, m, 2, 2)
    rows = []
    for x in range(n):
        for y in range(m):
            r = np.zeros(idx.size)
            r[idx[x, y].ravel()] = 1
            rows.append(r)
    for x in range(n):
        for y in range(1, m):
            r = np.zeros(idx.size)
            r[idx[x, y, 0, :]] = 1
            r[idx[x, 0, 0, :]] -= 1
            rows.append(r)
    for y in range(m):
        for x in range(1, n):
            r = np.zeros(idx.size)
            r[idx[x, y, :, 0]] = 1
            r[idx[0, y, :, 0]] -= 1
            rows.append(r)
    A = np.array(rows)
    b = np.zeros(len(rows))
    b[: n * m] = 1
    return A, b


def _ns_program(f: BellFunctional, forced: tuple[int, int] | None = None) -> LpProblem:
    n, m = f.n, f.m
    if n * m > MAX_NS_CELLS:
        raise ResourceError(f"n*m={n * m} exceeds {MAX_NS_CELLS}")
    A, b = _ns_rows(n, m)
    hi = np.full(n * m * 4, np.inf)
    if forced is not None:
        y, v = forced
        idx = np.arange(n * m * 4).reshape(n, m, 2, 2)
        hi[idx[:, y, :, 1 - v].ravel()] = 0.0
    return LpProblem(f.coeffs.ravel(), "max", A, b, lo=np.zeros(n * m * 4), hi=hi)


def _optimum(problem: LpProblem) -> tuple[float, np.ndarray]:
    sol = solve_lp(problem)
    if not sol.optimal:
        raise SolverError(f"no-signaling program reported {sol.status}", {"status": sol.status})
    return sol.objective, sol.x


def ns_value(f: BellFunctional) -> float:
    """Maximum of the functional over the no-signaling polytope."""
    return _optimum(_ns_program(f))[0]


def ns_box_optimum(f: BellFunctional) -> Box:
    """A no-signaling box attaining :func:`ns_value`."""
    _, x = _optimum(_ns_program(f))
    return Box(np.clip(x, 0, 1).reshape(f.n, f.m, 2, 2), tol=1e-7)


def ns_value_deterministic(f: BellFunctional, y_det: int = 1) -> float:
    """No-signaling maximum when Bob's observable ``y_det`` has a fixed output."""
    _check_setting(y_det, f.m, "y_det")
    return max(_optimum(_ns_program(f, (y_det - 1, v)))[0] for v in (0, 1))


def relevance(f: BellFunctional, y: int = 1) -> float:
    """How much forcing Bob's observable ``y`` to be deterministic lowers the no-signaling maximum."""
    return max(0.0, ns_value(f) - ns_value_deterministic(f, y))


@dataclass(frozen=True)
class AdversaryResult:
    d_min: float
    extension: TripartiteBox
    epsilon: float
    iterations: int = 0

    @property
    def disturbed_box(self) -> Box:
        return Box(self.extension.probs.sum(axis=4), tol=self.extension.tol)


def min_disturbance_adversary(p: Box, epsilon: float) -> AdversaryResult:
    """Smallest average disturbance any no-signaling gentle measurement of B_1 can cause.

    Grace's output must reproduce B_1's outcome with probability 1/2 + epsilon
    without changing B_1's statistics; everything else about the tripartite
    extension is free.
    """
    if not 0.0 <= epsilon <= 0.5:
        raise InputError(f"epsilon={epsilon} outside [0, 1/2]")
    n, m = p.n, p.m
    if n * m > MAX_ADVERSARY_CELLS:
        raise ResourceError(f"n*m={n * m} exceeds {MAX_ADVERSARY_CELLS}")

    q = np.arange(n * m * 8).reshape(n, m, 2, 2, 2)  # q[x, y, a, b, g]
    n_q = q.size
    t = (n_q + np.arange(n * (m - 1) * 4)).reshape(n, m - 1, 2, 2)
    nv = n_q + t.size
    eq = []

    def row():
        r = np.zeros(nv)
        eq.append(r)
        return r

    rhs = []
    for x in range(n):
        for y in range(m):
            row()[q[x, y].ravel()] = 1
            rhs.append(1.0)
    # Bob-Grace marginal independent of x.
    for y in range(1, m):
        for x in range(1, n):
            for b in range(2):
                for g in range(2):
                    r = row()
                    r[q[x, y, :, b, g]] = 1
                    r[q[0, y, :, b, g]] -= 1
                    rhs.append(0.0)
    # Alice-Grace marginal independent of y.
    for x in range(n):
        for y in range(1, m):
            for a in range(2):
                for g in range(2):
                    r = row()
                    r[q[x, y, a, :, g]] = 1
                    r[q[x, 0, a, :, g]] -= 1
                    rhs.append(0.0)
    pa = p.alice_marginal()
    for x in range(n):
        for y in range(1, m):
            for a in range(2):
                row()[q[x, y, a].ravel()] = 1
                rhs.append(pa[x, a])

    # Gentle slice at y=1 is fully pinned by bounds.
    lo = np.zeros(nv)
    hi = np.full(nv, np.inf)
    strength = np.array([[0.5 + epsilon, 0.5 - epsilon], [0.5 - epsilon, 0.5 + epsilon]])
    pinned = p.probs[:, 0, :, :, None] * strength[None, None, :, :]
    lo[q[:, 0].ravel()] = pinned.ravel()
    hi[q[:, 0].ravel()] = pinned.ravel()

    # t >= |p - sum_g q| for y != 1.
    ub, ub_rhs = [], []
    for x in range(n):
        for y in range(1, m):
            for a in range(2):
                for b in range(2):
                    for sign in (1.0, -1.0):
                        r = np.zeros(nv)
                        r[t[x, y - 1, a, b]] = -1
                        r[q[x, y, a, b, :]] = sign
                        ub.append(r)
                        ub_rhs.append(sign * p.probs[x, y, a, b])

    c = np.zeros(nv)
    c[t.ravel()] = 1.0 / n
    problem = LpProblem(
        c, "min", np.array(eq), np.array(rhs),
        np.array(ub) if ub else None, np.array(ub_rhs) if ub else None, lo, hi,
    )
    sol = solve_lp(problem)
    if not sol.optimal:
        raise SolverError(f"adversary program reported {sol.status}", {"status": sol.status})
    d_min = sol.objective
    if d_min < -1e-9:
        raise SolverError("negative disturbance optimum", {"objective": d_min})
    if d_min <= 1e-12:  # roundoff around an exact zero
        d_min = 0.0
    ext = np.clip(sol.x[:n_q], 0.0, 1.0).reshape(n, m, 2, 2, 2)
    return AdversaryResult(d_min, TripartiteBox(ext, tol=1e-7), epsilon, sol.iterations)
