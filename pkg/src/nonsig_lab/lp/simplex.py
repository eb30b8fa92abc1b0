"""Dense two-phase tableau simplex.

Problems are given with general bounds and (in)equality rows and reduced to
``min c.z  s.t.  A z = b, z >= 0`` before pivoting.  Fixed variables are
substituted out up front.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nonsig_lab.errors import InputError, SolverError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
COST_TOL = 1e-10
RESIDUAL_TOL = 1e-8
DEGENERATE_STREAK = 50


@dataclass
class LpProblem:
    """``sense`` c.x subject to A_eq x = b_eq, A_ub x <= b_ub, lo <= x <= hi."""

    c: np.ndarray
    sense: str = "max"
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nv = self.c.size
        if self.sense not in ("max", "min"):
            raise InputError(f"sense must be 'max' or 'min', got {self.sense!r}")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, nv, "equality")
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, nv, "inequality")
        self.lo = np.zeros(nv) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        self.hi = np.full(nv, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if self.lo.size != nv or self.hi.size != nv:
            raise InputError("bounds must have one entry per variable")
        for name, arr in (("c", self.c), ("b_eq", self.b_eq), ("b_ub", self.b_ub),
                          ("A_eq", self.A_eq), ("A_ub", self.A_ub)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name}: non-finite entry")
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise InputError("bounds: NaN entry")
        if np.any(self.lo == np.inf) or np.any(self.hi == -np.inf):
            raise InputError("bounds: infinite lower bound of +inf or upper bound of -inf")

    @property
    def n_vars(self) -> int:
        return self.c.size


def _rows(A, b, nv, label):
    if A is None:
        return np.zeros((0, nv)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape != (b.size, nv):
        raise InputError(f"{label} rows: matrix {A.shape} does not match rhs {b.size} / {nv} variables")
    return A, b


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Rows ``0..m-1`` are constraints, the last row holds reduced costs.

    The last column is the right-hand side; ``basis[i]`` is the column basic in row i.
    """

    def __init__(self, T: np.ndarray, basis: np.ndarray, max_iter: int):
        self.T = T
        self.basis = basis
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= col[nz, None] * T[r]
        T[nz, c] = 0.0
        self.basis[r] = c
        self.iterations += 1

    def run(self, allowed: np.ndarray) -> str:
        """Minimise the objective row over columns flagged in ``allowed``."""
        T = self.T
        m = T.shape[0] - 1
        streak = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(
                    "simplex iteration limit reached",
                    {"iterations": self.iterations, "rows": m, "cols": T.shape[1] - 1},
                )
            cost = T[-1, :-1]
            candidates = np.flatnonzero((cost < -COST_TOL) & allowed)
            if candidates.size == 0:
                return "optimal"
            if streak >= DEGENERATE_STREAK:
                c = candidates[0]  # Bland: lowest index
            else:
                c = candidates[np.argmin(cost[candidates])]
            col = T[:m, c]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = ties[np.argmin(self.basis[ties])]
            streak = streak + 1 if T[r, -1] <= FEAS_TOL else 0
            self.pivot(r, c)


def _standardize(p: LpProblem):
    """Map x = offset + M z with z >= 0; returns (A, b, cost, M, offset)."""
    nv = p.n_vars
    lo, hi = p.lo, p.hi
    fixed = np.isfinite(lo) & np.isfinite(hi) & (np.abs(hi - lo) <= 0.0)
    if np.any(lo > hi):
        return None
    offset = np.zeros(nv)
    cols = []  # (variable, sign)
    upper_rows = []  # (z column, width)
    for j in range(nv):
        if fixed[j]:
            offset[j] = lo[j]
        elif np.isfinite(lo[j]):
            offset[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(hi[j]):
                upper_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            offset[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    M = np.zeros((nv, nz))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s

    n_ub = p.A_ub.shape[0]
    n_up = len(upper_rows)
    n_slack = n_ub + n_up
    blocks = []
    rhs = []
    if p.A_eq.shape[0]:
        blocks.append(np.hstack([p.A_eq @ M, np.zeros((p.A_eq.shape[0], n_slack))]))
        rhs.append(p.b_eq - p.A_eq @ offset)
    if n_ub:
        blocks.append(np.hstack([p.A_ub @ M, np.eye(n_ub), np.zeros((n_ub, n_up))]))
        rhs.append(p.b_ub - p.A_ub @ offset)
    if n_up:
        U = np.zeros((n_up, nz + n_slack))
        for i, (k, width) in enumerate(upper_rows):
            U[i, k] = 1.0
            U[i, nz + n_ub + i] = 1.0
        blocks.append(U)
        rhs.append(np.array([w for _, w in upper_rows]))
    A = np.vstack(blocks) if blocks else np.zeros((0, nz + n_slack))
    b = np.concatenate(rhs) if rhs else np.zeros(0)
    sign = 1.0 if p.sense == "min" else -1.0
    cost = np.concatenate([sign * (p.c @ M), np.zeros(n_slack)])
    slack_start = nz
    return A, b, cost, M, offset, slack_start


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` with a deterministic two-phase simplex."""
    std = _standardize(problem)
    if std is None:
        return LpSolution("infeasible")
    A, b, cost, M, offset, slack_start = std
    m, nz = A.shape

    # Rows whose slack can start basic need no artificial variable.
    neg = b < 0
    A = A.copy()
    b = b.copy()
    A[neg] *= -1
    b[neg] *= -1
    basis = np.full(m, -1)
    for i in range(m):
        if neg[i]:
            continue
        for c in np.flatnonzero(A[i, slack_start:] == 1.0) + slack_start:
            if np.count_nonzero(A[:, c]) == 1:
                basis[i] = c
                break
    art_rows = np.flatnonzero(basis < 0)
    n_art = art_rows.size
    ncols = nz + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :nz] = A
    T[:m, -1] = b
    for k, i in enumerate(art_rows):
        T[i, nz + k] = 1.0
        basis[i] = nz + k
    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000
    tab = _Tableau(T, basis, max_iter)

    # Phase 1: minimise the sum of artificials.
    if n_art:
        T[-1, :] = 0.0
        T[-1, nz:nz + n_art] = 1.0
        T[-1] -= T[art_rows].sum(axis=0)
        allowed = np.ones(ncols, dtype=bool)
        tab.run(allowed)
        infeas = -T[-1, -1]
        scale = max(1.0, np.abs(b).max(initial=0.0))
        if infeas > FEAS_TOL * scale * max(1, m):
            return LpSolution("infeasible", iterations=tab.iterations)
        # Drive artificials out of the basis or drop redundant rows.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if tab.basis[i] >= nz:
                row = tab.T[i, :nz]
                cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if cand.size:
                    tab.pivot(i, cand[np.argmax(np.abs(row[cand]))])
                else:
                    keep[i] = False
        rows = np.append(np.flatnonzero(keep), m)
        T = np.hstack([tab.T[rows][:, :nz], tab.T[rows][:, -1:]])
        tab.T = T
        tab.basis = tab.basis[keep]
        m = T.shape[0] - 1

    # Phase 2 objective row: reduced costs for the current basis.
    T[-1, :] = 0.0
    T[-1, :nz] = cost
    cb = cost[tab.basis]
    T[-1] -= cb @ T[:m]
    status = tab.run(np.ones(nz, dtype=bool))
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations)

    z = np.zeros(nz)
    z[tab.basis] = T[:m, -1]
    z = _refine(A, b, tab.basis, z)
    x = offset + M @ z[: M.shape[1]]
    x = np.clip(x, problem.lo, problem.hi)
    _check_residuals(problem, x, tab.iterations)
    return LpSolution("optimal", float(problem.c @ x), x, tab.iterations)


def _refine(A, b, basis, z):
    """Recompute basic values from the original rows to shed pivoting error."""
    B = A[:, basis]
    try:
        zb, *_ = np.linalg.lstsq(B, b - A @ _nonbasic(z, basis), rcond=None)
    except np.linalg.LinAlgError:
        return z
    out = z.copy()
    out[basis] = zb
    if out.min() < -FEAS_TOL:
        return z
    return np.maximum(out, 0.0)


def _nonbasic(z, basis):
    out = z.copy()
    out[basis] = 0.0
    return out


def _check_residuals(p: LpProblem, x: np.ndarray, iterations: int) -> None:
    diag = {"iterations": iterations}
    if p.A_eq.shape[0]:
        diag["eq_residual"] = float(np.abs(p.A_eq @ x - p.b_eq).max())
    if p.A_ub.shape[0]:
        diag["ub_violation"] = float(max(0.0, (p.A_ub @ x - p.b_ub).max()))
    if diag.get("eq_residual", 0.0) > RESIDUAL_TOL or diag.get("ub_violation", 0.0) > RESIDUAL_TOL:
        raise SolverError("solution violates constraints beyond tolerance", diag)
