"""Dense two-phase primal simplex solver.

Sized for the optimality-verification programs this package generates: a
handful of variables against up to a few thousand inequality rows.  Free
variables are split into differences of nonnegative pairs; phase 1
minimizes the sum of artificial variables, phase 2 the real objective.
Dantzig pricing with a switch to Bland's rule after a degeneracy budget is
spent guards against cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
RATIO_TOL = 1e-10
FEAS_TOL = 1e-8


@dataclass
class LinearProgram:
    """min objective @ x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq, per-variable
    bounds 'nonnegative' or 'free'."""

    objective: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple[str, ...] | None = None  # default: all nonnegative

    def normalized(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        n = c.shape[0]
        A_ub = _as_matrix(self.A_ub, n, "A_ub")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        bounds = self.bounds or ("nonnegative",) * n
        if len(bounds) != n:
            raise ValueError("bounds length must match objective length")
        for b in bounds:
            if b not in ("nonnegative", "free"):
                raise ValueError(f"unknown variable bound {b!r}")
        for arr in (c, A_ub, b_ub, A_eq, b_eq):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError("linear program entries must be finite")
        return c, A_ub, b_ub, A_eq, b_eq, bounds


def _as_matrix(A, n, name):
    if A is None:
        return np.zeros((0, n))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != n:
        raise ValueError(f"{name} has {A.shape[1]} columns, expected {n}")
    return A


def _as_vector(b, m, name):
    if b is None:
        b = np.zeros(0)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape[0] != m:
        raise ValueError(f"{name} has length {b.shape[0]}, expected {m}")
    return b


@dataclass
class LpResult:
    status: str  # "Optimal" | "Infeasible" | "Unbounded"
    x: np.ndarray | None = None
    objective_value: float = float("nan")
    phase1_residual: float = 0.0
    dual_ineq: np.ndarray | None = None
    iterations: int = 0
    message: str = ""


def lp_solve(lp: LinearProgram, max_pivots: int | None = None) -> LpResult:
    """Solve a small dense LP; Infeasible / Unbounded are results, not errors."""
    c_orig, A_ub, b_ub, A_eq, b_eq, bounds = lp.normalized()
    n = c_orig.shape[0]
    c = c_orig

    # split free variables into positive/negative parts
    split = [j for j, b in enumerate(bounds) if b == "free"]
    if split:
        c = np.concatenate([c, -c[split]])
        A_ub = np.hstack([A_ub, -A_ub[:, split]])
        A_eq = np.hstack([A_eq, -A_eq[:, split]])
    n_std = c.shape[0]

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    A = np.vstack([A_ub, A_eq]) if m else np.zeros((0, n_std))
    b = np.concatenate([b_ub, b_eq])

    # slack columns for inequality rows
    if m:
        slack_cols = np.vstack([np.eye(m_ub), np.zeros((m_eq, m_ub))])
        A = np.hstack([A, slack_cols])
    c_full = np.concatenate([c, np.zeros(m_ub)])

    # normalize to b >= 0
    flip = b < 0
    A[flip] *= -1.0
    b = np.abs(b)

    # basis: slack where its column is +e_i, artificial otherwise
    n_cols = A.shape[1]
    basis = np.empty(m, dtype=int)
    art_rows = []
    for i in range(m):
        if i < m_ub and not flip[i]:
            basis[i] = n_std + i
        else:
            art_rows.append(i)
    n_art = len(art_rows)
    if n_art:
        art_block = np.zeros((m, n_art))
        for j, i in enumerate(art_rows):
            art_block[i, j] = 1.0
            basis[i] = n_cols + j
        A = np.hstack([A, art_block])

    tab = _Tableau(A, b, basis, max_pivots or (5000 + 100 * m))

    phase1_residual = 0.0
    if n_art:
        cost1 = np.zeros(A.shape[1])
        cost1[n_cols:] = 1.0
        status = tab.run(cost1)
        phase1_residual = float(tab.objective(cost1))
        if status != "Optimal" or phase1_residual > FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
            return LpResult(status="Infeasible", phase1_residual=phase1_residual,
                            iterations=tab.pivots)
        tab.drop_artificials(n_cols)

    cost2 = np.zeros(tab.A.shape[1])
    cost2[:n_std] = c
    status = tab.run(cost2)
    if status == "Unbounded":
        return LpResult(status="Unbounded", phase1_residual=phase1_residual,
                        iterations=tab.pivots)
    if status != "Optimal":
        return LpResult(status="Infeasible", phase1_residual=phase1_residual,
                        iterations=tab.pivots, message=status)

    x_std = tab.solution()[:n_std]
    x = x_std[:n].copy()
    for pos, j in enumerate(split):
        x[j] -= x_std[n + pos]

    dual = None
    if m_ub and not m_eq:
        # multipliers of the original <= rows, from reduced costs on slacks
        r = tab.reduced_costs(cost2)
        y = -r[n_std:n_std + m_ub]
        y[flip[:m_ub]] *= -1.0
        dual = y
    return LpResult(status="Optimal", x=x, objective_value=float(c_orig @ x),
                    phase1_residual=phase1_residual, dual_ineq=dual,
                    iterations=tab.pivots)


class _Tableau:
    """Row-reduced simplex tableau with explicit basis bookkeeping."""

    def __init__(self, A, b, basis, max_pivots):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.basis = np.asarray(basis, dtype=int)
        self.max_pivots = max_pivots
        self.pivots = 0
        self.degenerate = 0

    def reduced_costs(self, cost):
        r = cost.copy()
        for i, j in enumerate(self.basis):
            cj = cost[j]
            if cj != 0.0:
                r -= cj * self.A[i]
        return r

    def objective(self, cost):
        return float(cost[self.basis] @ self.b)

    def solution(self):
        x = np.zeros(self.A.shape[1])
        x[self.basis] = self.b
        return x

    def run(self, cost):
        m = self.A.shape[0]
        bland_after = 50 * max(m, 1)
        r = self.reduced_costs(cost)
        while True:
            if self.pivots > self.max_pivots:
                return "PivotLimit"
            if self.degenerate > bland_after:
                neg = np.flatnonzero(r < -PIVOT_TOL)
                if neg.size == 0:
                    return "Optimal"
                col = int(neg[0])  # Bland: smallest index
            else:
                col = int(np.argmin(r))
                if r[col] >= -PIVOT_TOL:
                    return "Optimal"
            a = self.A[:, col]
            ok = a > RATIO_TOL
            if not np.any(ok):
                return "Unbounded"
            ratios = np.full(m, np.inf)
            ratios[ok] = self.b[ok] / a[ok]
            row = int(np.argmin(ratios))
            # deterministic tie-break on the smallest basis index
            ties = np.flatnonzero(ratios <= ratios[row] + RATIO_TOL)
            if ties.size > 1:
                row = int(ties[np.argmin(self.basis[ties])])
            if ratios[row] <= RATIO_TOL:
                self.degenerate += 1
            self._pivot(row, col)
            r -= r[col] * self.A[row]
            r[col] = 0.0

    def _pivot(self, row, col):
        piv = self.A[row, col]
        self.A[row] /= piv
        self.b[row] /= piv
        factors = self.A[:, col].copy()
        factors[row] = 0.0
        self.A -= np.outer(factors, self.A[row])
        self.b -= factors * self.b[row]
        self.A[:, col] = 0.0
        self.A[row, col] = 1.0
        self.basis[row] = col
        self.pivots += 1

    def drop_artificials(self, n_real):
        # pivot basic artificials onto any usable real column; drop dead rows
        keep_rows = np.ones(self.A.shape[0], dtype=bool)
        for i in range(self.A.shape[0]):
            if self.basis[i] >= n_real:
                cand = np.flatnonzero(np.abs(self.A[i, :n_real]) > PIVOT_TOL)
                if cand.size:
                    self._pivot(i, int(cand[0]))
                else:
                    keep_rows[i] = False  # redundant row
        self.A = self.A[keep_rows, :n_real]
        self.b = self.b[keep_rows]
        self.basis = self.basis[keep_rows]
