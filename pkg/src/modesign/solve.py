"""Solvers for the three convex design problems on the probability simplex:
single-objective, efficiency-constrained, and maximin-efficiency.

All three run a primal log-barrier path-following Newton method.  Iterates
stay strictly inside the simplex (and strictly feasible for the nonlinear
constraints); the barrier parameter decreases geometrically from 1 to 1e-10.
The non-differentiable E criterion is replaced during solving by a softmin
over the eigenvalues whose error is at most mu * log(q); certificates are
computed downstream against the exact minimum eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .criteria import (
    CriterionSpec,
    SingularInformationMatrix,
    criterion_value,
    dispersion,
    efficiency_bound,
    efficiency_bound_slope,
    efficiency_from_value,
    min_eigen_dispersion,
    min_eigen_info,
)
from .model_grid import Design, DesignGrid, information_matrix

STATUS_CONVERGED = "Converged"
STATUS_INFEASIBLE = "Infeasible"
STATUS_MAX_ITERATIONS = "MaxIterations"

_PD_RTOL = 1e-12


@dataclass
class SolveResult:
    design: Design
    objective: float
    status: str
    iterations: int
    kkt_residual: float
    t_star: float | None = None
    objective_trace: list[float] = field(default_factory=list)


@dataclass
class MultiObjectiveProblem:
    """A design problem: K criteria on one grid plus the problem kind.

    kind is one of "single" (criterion ``single_index``), "constrained"
    (floors are the efficiency lower bounds for criteria 2..K), or
    "maximin".  ``min_phi`` caches the single-objective optima; entries are
    filled by presolves before the constrained/maximin solves run.
    """

    grid: DesignGrid
    specs: tuple[CriterionSpec, ...]
    kind: str
    single_index: int = 0
    floors: tuple[float, ...] = ()
    delta: float = 1e-4
    solver_tol: float = 1e-7
    max_iterations: int = 500
    support_threshold: float = 1e-4
    barrier_shrink: float = 0.2
    barrier_floor: float = 1e-10
    e_smoothing_floor: float = 1e-9
    e_smoothing_cap: float = 1e-3
    min_phi: list = field(init=False)

    def __post_init__(self):
        self.specs = tuple(self.specs)
        if not self.specs:
            raise ValueError("problem needs at least one criterion")
        if self.kind not in ("single", "constrained", "maximin"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == "single" and not 0 <= self.single_index < len(self.specs):
            raise ValueError("single_index out of range")
        if self.kind == "constrained":
            if len(self.specs) < 2:
                raise ValueError("constrained problems need at least two criteria")
            if len(self.floors) != len(self.specs) - 1:
                raise ValueError("need one efficiency floor per secondary criterion")
            for m in self.floors:
                if not 0.0 < m < 1.0:
                    raise ValueError(f"efficiency floors must lie in (0, 1), got {m}")
        self.min_phi = [None] * len(self.specs)
        self.grid.ensure_cached({s.model for s in self.specs})

    @property
    def n_criteria(self) -> int:
        return len(self.specs)

    def copy_with(self, **changes) -> "MultiObjectiveProblem":
        """New problem on the same grid/criteria, keeping the presolve cache."""
        kwargs = dict(
            grid=self.grid, specs=self.specs, kind=self.kind,
            single_index=self.single_index, floors=self.floors,
            delta=self.delta, solver_tol=self.solver_tol,
            max_iterations=self.max_iterations,
            support_threshold=self.support_threshold,
            barrier_shrink=self.barrier_shrink,
            barrier_floor=self.barrier_floor,
            e_smoothing_floor=self.e_smoothing_floor,
            e_smoothing_cap=self.e_smoothing_cap,
        )
        kwargs.update(changes)
        out = MultiObjectiveProblem(**kwargs)
        out.min_phi = list(self.min_phi)
        return out

    def require_min_phi(self, indices=None):
        idx = range(self.n_criteria) if indices is None else indices
        missing = [k for k in idx if self.min_phi[k] is None]
        if missing:
            raise ValueError(
                f"single-objective optima not cached for criteria {missing}; "
                "run the presolves first"
            )

    def constraint_bounds(self) -> np.ndarray:
        """Criterion-value bounds h_k for the constrained problem."""
        self.require_min_phi(range(1, self.n_criteria))
        return np.array([
            efficiency_bound(self.specs[k], self.floors[k - 1], self.min_phi[k])
            for k in range(1, self.n_criteria)
        ])


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _limits(problem):
    return (problem.e_smoothing_floor, problem.e_smoothing_cap)


# ---------------------------------------------------------------------------
# criterion evaluation in the weight variable


class _CriterionEval:
    """Value, gradient, and Hessian of Phi(w) = phi(M(w)) for one criterion.

    The E criterion is smoothed: the softmin of the eigenvalues with
    temperature ``smooth`` replaces the minimum, which keeps the solver's
    Newton model twice differentiable.
    """

    def __init__(self, spec: CriterionSpec, grid: DesignGrid):
        self.spec = spec
        self.Z = np.asarray(grid.z_matrix(spec.model))
        self.q = spec.model.q

    def _moment(self, w):
        M = (self.Z * w[:, None]).T @ self.Z
        return 0.5 * (M + M.T)

    def value(self, w: np.ndarray, smooth: float) -> float:
        M = self._moment(w)
        lam = np.linalg.eigvalsh(M)
        kind = self.spec.kind
        if kind == "E":
            return _softmin_value(lam, smooth)
        if lam[0] <= _PD_RTOL * max(lam[-1], 0.0) or lam[-1] <= 0.0:
            return math.inf
        if kind == "D":
            return -float(np.sum(np.log(lam)))
        if kind == "A":
            return float(np.sum(1.0 / lam))
        factor = cho_factor(M, lower=True)
        if kind == "c":
            c = self.spec.c_vector
            return float(c @ cho_solve(factor, c))
        L = self.spec.L_matrix
        return float(np.sum(L * cho_solve(factor, L)))

    def true_value(self, w: np.ndarray) -> float:
        M = self._moment(w)
        if self.spec.kind == "E":
            return -float(np.linalg.eigvalsh(M)[0])
        lam = np.linalg.eigvalsh(M)
        if lam[0] <= _PD_RTOL * max(lam[-1], 0.0) or lam[-1] <= 0.0:
            return math.inf
        return criterion_value(self.spec, M)

    def eval(self, w: np.ndarray, smooth: float):
        """Return (value, gradient, Hessian); value is +inf outside the
        criterion's domain, in which case the derivatives are None."""
        Z = self.Z
        M = self._moment(w)
        kind = self.spec.kind
        if kind == "E":
            return self._eval_softmin(M, smooth)
        lam = np.linalg.eigvalsh(M)
        if lam[0] <= _PD_RTOL * max(lam[-1], 0.0) or lam[-1] <= 0.0:
            return math.inf, None, None
        factor = cho_factor(M, lower=True)
        B = cho_solve(factor, Z.T).T  # N x q, rows z_i' M^-1
        G = B @ Z.T
        if kind == "D":
            val = -float(np.sum(np.log(lam)))
            grad = -np.einsum("ij,ij->i", B, Z)
            hess = G * G
        elif kind == "A":
            val = float(np.sum(1.0 / lam))
            G2 = B @ B.T
            grad = -np.diag(G2).copy()
            hess = 2.0 * G * G2
        elif kind == "c":
            s = cho_solve(factor, self.spec.c_vector)
            sig = Z @ s
            val = float(self.spec.c_vector @ s)
            grad = -(sig**2)
            hess = 2.0 * G * np.outer(sig, sig)
        else:
            S = cho_solve(factor, self.spec.L_matrix)
            T = Z @ S
            val = float(np.sum(self.spec.L_matrix * S))
            grad = -np.einsum("ij,ij->i", T, T)
            hess = 2.0 * G * (T @ T.T)
        return val, grad, hess

    def _eval_softmin(self, M, smooth):
        lam, V = np.linalg.eigh(M)
        val, p = _softmin_value(lam, smooth, with_weights=True)
        W = self.Z @ V  # N x q, entries v_j' z_i
        P = W**2
        g = P @ p
        grad = -g
        # spectral-function Hessian: separable second-derivative part plus
        # divided differences of the first derivatives
        hess = ((P * p) @ P.T - np.outer(g, g)) / smooth
        q = lam.shape[0]
        for a in range(q):
            for b in range(a + 1, q):
                coeff = _divided_difference(lam[a], lam[b], p[a], p[b], smooth)
                k_ab = W[:, a] * W[:, b]
                hess += (2.0 * coeff) * np.outer(k_ab, k_ab)
        return val, grad, hess


def _softmin_value(lam, smooth, with_weights=False):
    shifted = -(lam - lam[0]) / smooth
    e = np.exp(shifted)
    total = float(e.sum())
    val = -float(lam[0]) + smooth * math.log(total)
    if not with_weights:
        return val
    return val, e / total


def _divided_difference(la, lb, pa, pb, smooth):
    """Slope (p_b - p_a) / (la - lb) of the softmin weights, computed stably."""
    delta = la - lb
    if abs(delta) <= 1e-14 * smooth:
        return pa / smooth
    if abs(delta) <= 30.0 * smooth:
        return pa * math.expm1(delta / smooth) / delta
    return (pb - pa) / delta


# ---------------------------------------------------------------------------
# barrier subproblems


def _smoothing(mu, floor, cap):
    """Softmin temperature for the E criterion: tracks the barrier
    parameter between a floor (conditioning) and a cap (the surrogate must
    stay within the constraint gaps it enters)."""
    return min(max(mu, floor), max(cap, floor))


class _SingleBarrier:
    def __init__(self, ev: _CriterionEval, smooth_limits):
        self.ev = ev
        self.smooth_limits = smooth_limits
        n = ev.Z.shape[0]
        self.e = np.ones(n)

    def start(self):
        return uniform_weights(self.e.shape[0])

    def _smooth(self, mu):
        return _smoothing(mu, *self.smooth_limits)

    def value(self, x, mu):
        return self.value_gaps(x, mu)[0]

    def value_gaps(self, x, mu):
        if np.any(x <= 0.0):
            return math.inf, None
        f = self.ev.value(x, self._smooth(mu))
        if not np.isfinite(f):
            return math.inf, None
        return f - mu * float(np.sum(np.log(x))), None

    def eval(self, x, mu):
        f, g, H = self.ev.eval(x, self._smooth(mu))
        if not np.isfinite(f):
            return math.inf, None, None
        f -= mu * float(np.sum(np.log(x)))
        g = g - mu / x
        H = H + np.diag(mu / x**2)
        return f, g, H

    def true_objective(self, x):
        return self.ev.true_value(x)


class _ConstrainedBarrier:
    """Barrier for: min Phi_1(w) s.t. Phi_k(w) <= bound_k, w in simplex."""

    def __init__(self, evals, bounds, smooth_limits):
        self.evals = evals
        self.bounds = np.asarray(bounds, dtype=float)
        self.smooth_limits = smooth_limits
        n = evals[0].Z.shape[0]
        self.e = np.ones(n)
        self._gap_state = None  # (gaps, grads) from the latest eval

    def start_from(self, w):
        return np.asarray(w, dtype=float).copy()

    def _smooth(self, mu):
        return _smoothing(mu, *self.smooth_limits)

    def gaps(self, w, mu):
        s = self._smooth(mu)
        return np.array([
            self.bounds[j] - ev.value(w, s) for j, ev in enumerate(self.evals[1:])
        ])

    def value(self, x, mu):
        return self.value_gaps(x, mu)[0]

    def value_gaps(self, x, mu):
        if np.any(x <= 0.0):
            return math.inf, None
        s = self._smooth(mu)
        f = self.evals[0].value(x, s)
        if not np.isfinite(f):
            return math.inf, None
        total = f - mu * float(np.sum(np.log(x)))
        gaps = np.empty(len(self.evals) - 1)
        for j, ev in enumerate(self.evals[1:]):
            gap = self.bounds[j] - ev.value(x, s)
            if gap <= 0.0 or not np.isfinite(gap):
                return math.inf, None
            gaps[j] = gap
            total -= mu * math.log(gap)
        return total, gaps

    def eval(self, x, mu):
        s = self._smooth(mu)
        f, g, H = self.evals[0].eval(x, s)
        if not np.isfinite(f):
            return math.inf, None, None
        f -= mu * float(np.sum(np.log(x)))
        g = g - mu / x
        H = H + np.diag(mu / x**2)
        gap_state = []
        for j, ev in enumerate(self.evals[1:]):
            fk, gk, Hk = ev.eval(x, s)
            gap = self.bounds[j] - fk if np.isfinite(fk) else -1.0
            if gap <= 0.0:
                return math.inf, None, None
            f -= mu * math.log(gap)
            g += (mu / gap) * gk
            H += (mu / gap) * Hk + (mu / gap**2) * np.outer(gk, gk)
            gap_state.append((gap, gk))
        self._gap_state = gap_state
        return f, g, H

    def max_step(self, x, dx):
        return _gap_fraction_step(self._gap_state, dx)

    def true_objective(self, x):
        return self.evals[0].true_value(x)


class _Phase1Barrier:
    """Epigraph barrier for: min s s.t. Phi_k(w) - bound_k <= s, w in simplex.

    The extra epigraph variable is the last component of x.
    """

    def __init__(self, evals, bounds, smooth_limits):
        self.evals = evals
        self.bounds = np.asarray(bounds, dtype=float)
        self.smooth_limits = smooth_limits
        n = evals[0].Z.shape[0]
        self.e = np.concatenate([np.ones(n), [0.0]])

    def worst(self, w, mu):
        s = _smoothing(mu, *self.smooth_limits)
        return max(
            ev.value(w, s) - self.bounds[j] for j, ev in enumerate(self.evals)
        )

    def start(self):
        n = self.e.shape[0] - 1
        w = uniform_weights(n)
        top = self.worst(w, 1.0)
        return np.concatenate([w, [top + max(1.0, 0.1 * abs(top))]])

    def value(self, x, mu):
        return self.value_gaps(x, mu)[0]

    def value_gaps(self, x, mu):
        w, s = x[:-1], x[-1]
        if np.any(w <= 0.0):
            return math.inf, None
        sm = _smoothing(mu, *self.smooth_limits)
        total = s - mu * float(np.sum(np.log(w)))
        gaps = np.empty(len(self.evals))
        for j, ev in enumerate(self.evals):
            gap = s + self.bounds[j] - ev.value(w, sm)
            if gap <= 0.0 or not np.isfinite(gap):
                return math.inf, None
            gaps[j] = gap
            total -= mu * math.log(gap)
        return total, gaps

    def eval(self, x, mu):
        w, s = x[:-1], x[-1]
        sm = _smoothing(mu, *self.smooth_limits)
        n = w.shape[0]
        f = s - mu * float(np.sum(np.log(w)))
        g = np.zeros(n + 1)
        g[:n] = -mu / w
        g[n] = 1.0
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = np.diag(mu / w**2)
        gap_state = []
        for j, ev in enumerate(self.evals):
            fk, gk, Hk = ev.eval(w, sm)
            gap = s + self.bounds[j] - fk if np.isfinite(fk) else -1.0
            if gap <= 0.0:
                return math.inf, None, None
            f -= mu * math.log(gap)
            g[:n] += (mu / gap) * gk
            g[n] -= mu / gap
            H[:n, :n] += (mu / gap) * Hk + (mu / gap**2) * np.outer(gk, gk)
            H[:n, n] -= (mu / gap**2) * gk
            H[n, :n] -= (mu / gap**2) * gk
            H[n, n] += mu / gap**2
            gfull = np.concatenate([gk, [-1.0]])
            gap_state.append((gap, gfull))
        self._gap_state = gap_state
        return f, g, H

    def max_step(self, x, dx):
        return _gap_fraction_step(getattr(self, "_gap_state", None), dx)

    def true_objective(self, x):
        return self.worst(x[:-1], 0.0)


class _MaximinBarrier:
    """Barrier for: min t s.t. Phi_k(w) <= bound_k(1/t), w in simplex, with
    the reciprocal-efficiency variable t as the last component of x."""

    def __init__(self, evals, specs, min_phi, smooth_limits):
        self.evals = evals
        self.specs = specs
        self.min_phi = np.asarray(min_phi, dtype=float)
        self.smooth_limits = smooth_limits
        n = evals[0].Z.shape[0]
        self.e = np.concatenate([np.ones(n), [0.0]])

    def bound(self, k, t):
        spec, mp = self.specs[k], self.min_phi[k]
        if spec.kind == "D":
            return mp + spec.q * math.log(t)
        if spec.kind == "E":
            return mp / t
        return t * mp

    def bound_slope(self, k, t):
        return efficiency_bound_slope(self.specs[k], t, self.min_phi[k])

    def bound_curvature(self, k, t):
        spec, mp = self.specs[k], self.min_phi[k]
        if spec.kind == "D":
            return -spec.q / t**2
        if spec.kind == "E":
            return 2.0 * mp / t**3
        return 0.0

    def gaps(self, x, mu):
        w, t = x[:-1], x[-1]
        sm = _smoothing(mu, *self.smooth_limits)
        return np.array([
            self.bound(k, t) - ev.value(w, sm) for k, ev in enumerate(self.evals)
        ])

    def value(self, x, mu):
        return self.value_gaps(x, mu)[0]

    def value_gaps(self, x, mu):
        w, t = x[:-1], x[-1]
        if np.any(w <= 0.0) or t <= 0.0:
            return math.inf, None
        sm = _smoothing(mu, *self.smooth_limits)
        total = t - mu * float(np.sum(np.log(w)))
        gaps = np.empty(len(self.evals))
        for k, ev in enumerate(self.evals):
            gap = self.bound(k, t) - ev.value(w, sm)
            if gap <= 0.0 or not np.isfinite(gap):
                return math.inf, None
            gaps[k] = gap
            total -= mu * math.log(gap)
        return total, gaps

    def eval(self, x, mu):
        w, t = x[:-1], x[-1]
        sm = _smoothing(mu, *self.smooth_limits)
        n = w.shape[0]
        f = t - mu * float(np.sum(np.log(w)))
        g = np.zeros(n + 1)
        g[:n] = -mu / w
        g[n] = 1.0
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = np.diag(mu / w**2)
        gap_state = []
        for k, ev in enumerate(self.evals):
            fk, gk, Hk = ev.eval(w, sm)
            hp = self.bound_slope(k, t)
            hpp = self.bound_curvature(k, t)
            gap = self.bound(k, t) - fk if np.isfinite(fk) else -1.0
            if gap <= 0.0:
                return math.inf, None, None
            f -= mu * math.log(gap)
            g[:n] += (mu / gap) * gk
            g[n] -= (mu / gap) * hp
            H[:n, :n] += (mu / gap) * Hk + (mu / gap**2) * np.outer(gk, gk)
            cross = -(mu / gap**2) * hp * gk
            H[:n, n] += cross
            H[n, :n] += cross
            H[n, n] += (mu / gap**2) * hp**2 - (mu / gap) * hpp
            gfull = np.concatenate([gk, [-hp]])
            gap_state.append((gap, gfull))
        self._gap_state = gap_state
        return f, g, H

    def max_step(self, x, dx):
        return _gap_fraction_step(getattr(self, "_gap_state", None), dx)

    def true_objective(self, x):
        return float(x[-1])


# ---------------------------------------------------------------------------
# Newton path following


def _kkt_step(H, g, e):
    """Newton step for min f subject to e'dx = 0, via a Cholesky of H."""
    n = H.shape[0]
    scale = float(np.mean(np.abs(np.diag(H)))) or 1.0
    jitter = 0.0
    for _ in range(10):
        try:
            factor = cho_factor(H + jitter * np.eye(n) if jitter else H, lower=True)
            break
        except np.linalg.LinAlgError:
            jitter = scale * 1e-14 if jitter == 0.0 else jitter * 100.0
    else:
        raise np.linalg.LinAlgError("barrier Hessian could not be factored")
    u = cho_solve(factor, g)
    v = cho_solve(factor, e)
    nu = -float(e @ u) / float(e @ v)
    dx = -(u + nu * v)
    dx -= e * (float(e @ dx) / float(e @ e))
    return dx


def _max_step(x, dx, n_pos):
    """Largest step keeping the first n_pos components strictly positive."""
    neg = dx[:n_pos] < 0.0
    if not np.any(neg):
        return 1.0
    return min(1.0, 0.995 * float(np.min(-x[:n_pos][neg] / dx[:n_pos][neg])))


def _gap_fraction_step(gap_state, dx):
    """Fraction-to-boundary cap from linearized nonlinear-constraint gaps.

    Allows at most a tenfold gap shrink per step; Newton recovers very
    slowly from overshoots that pin a gap near the rounding floor, so a
    conservative cap is much cheaper than the crawl back out.
    """
    if not gap_state:
        return 1.0
    alpha = 1.0
    for gap, grad in gap_state:
        decrease = float(grad @ dx)  # linearized change of Phi - bound
        if decrease > 0.0:
            alpha = min(alpha, 0.9 * gap / decrease)
    return alpha


@dataclass
class _PathInfo:
    steps: int = 0
    stalled: bool = False
    trace: list = field(default_factory=list)


def _follow_path(adapter, x0, problem, n_pos, stop_when=None) -> tuple[np.ndarray, _PathInfo]:
    x = np.asarray(x0, dtype=float).copy()
    info = _PathInfo()
    mu = 1.0
    max_steps = problem.max_iterations
    while True:
        for _ in range(150):
            if info.steps >= max_steps:
                info.stalled = True
                break
            f, g, H = adapter.eval(x, mu)
            if g is None or not np.all(np.isfinite(g)) or not np.all(np.isfinite(H)):
                info.stalled = True
                break
            dx = _kkt_step(H, g, adapter.e)
            info.steps += 1
            descent = float(g @ dx)
            if -descent / 2.0 <= max(1e-12, 1e-3 * mu):
                break
            alpha = min(_max_step(x, dx, n_pos), adapter.max_step(x, dx)) \
                if hasattr(adapter, "max_step") else _max_step(x, dx, n_pos)
            gaps_ref = [gap for gap, _ in getattr(adapter, "_gap_state", None) or []]
            accepted = False
            while alpha > 1e-14:
                xt = x + alpha * dx
                ft, gaps_t = adapter.value_gaps(xt, mu)
                ok = ft <= f + 1e-4 * alpha * descent
                if ok and gaps_ref and gaps_t is not None:
                    # nonlinear fraction-to-boundary: a single step may not
                    # shrink any constraint gap more than tenfold
                    ok = bool(np.all(gaps_t >= 0.1 * np.asarray(gaps_ref)))
                if ok:
                    x = xt
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break  # line-search stall at this barrier stage
            if stop_when is not None and stop_when(x):
                info.trace.append(adapter.true_objective(x))
                return x, info
        info.trace.append(adapter.true_objective(x))
        if mu <= problem.barrier_floor or info.stalled:
            break
        mu = max(mu * problem.barrier_shrink, problem.barrier_floor)
    return x, info


# ---------------------------------------------------------------------------
# public solves


def solve_single(problem: MultiObjectiveProblem, k: int | None = None) -> SolveResult:
    """Minimize one criterion over the simplex; caches its optimal value."""
    if k is None:
        k = problem.single_index if problem.kind == "single" else 0
    spec = problem.specs[k]
    ev = _CriterionEval(spec, problem.grid)
    adapter = _SingleBarrier(ev, _limits(problem))
    x, info = _follow_path(adapter, adapter.start(), problem, n_pos=problem.grid.n)
    w = x / x.sum()
    objective = ev.true_value(w)
    problem.min_phi[k] = objective
    residual = _single_residual(problem, k, w)
    status = STATUS_CONVERGED if residual <= problem.solver_tol and not info.stalled \
        else STATUS_MAX_ITERATIONS
    return SolveResult(
        design=Design(w, problem.support_threshold),
        objective=objective,
        status=status,
        iterations=info.steps,
        kkt_residual=residual,
        objective_trace=info.trace,
    )


def presolve(problem: MultiObjectiveProblem, max_workers: int = 1) -> list[SolveResult]:
    """Fill the single-objective optimum cache, optionally in parallel."""
    ks = [k for k in range(problem.n_criteria) if problem.min_phi[k] is None]
    results: dict[int, SolveResult] = {}
    if max_workers > 1 and len(ks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {k: pool.submit(solve_single, problem, k) for k in ks}
        results = {k: f.result() for k, f in futures.items()}
    else:
        results = {k: solve_single(problem, k) for k in ks}
    return [results[k] for k in sorted(results)]


def solve_constrained(problem: MultiObjectiveProblem) -> SolveResult:
    """Solve the efficiency-constrained problem; requires presolved optima."""
    if problem.kind != "constrained":
        raise ValueError("problem kind is not 'constrained'")
    bounds = problem.constraint_bounds()
    evals = [_CriterionEval(s, problem.grid) for s in problem.specs]
    n = problem.grid.n

    w0, phase1_steps = _find_strictly_feasible(problem, evals, bounds)
    if w0 is None:
        w_best = uniform_weights(n)
        return SolveResult(
            design=Design(w_best, problem.support_threshold),
            objective=evals[0].true_value(w_best),
            status=STATUS_INFEASIBLE,
            iterations=phase1_steps,
            kkt_residual=math.inf,
        )

    adapter = _ConstrainedBarrier(evals, bounds, _limits(problem))
    x, info = _follow_path(adapter, adapter.start_from(w0), problem, n_pos=n)
    w = x / x.sum()
    objective = evals[0].true_value(w)
    residual, violation = _constrained_residual(problem, w, bounds)
    converged = (residual <= problem.solver_tol and violation <= 1e-8
                 and not info.stalled)
    return SolveResult(
        design=Design(w, problem.support_threshold),
        objective=objective,
        status=STATUS_CONVERGED if converged else STATUS_MAX_ITERATIONS,
        iterations=phase1_steps + info.steps,
        kkt_residual=residual,
        objective_trace=info.trace,
    )


def _find_strictly_feasible(problem, evals, bounds):
    """Phase 1: minimize the largest constraint violation over the simplex.

    Runs to completion so the handoff point carries the best attainable
    margin; returns None when the feasibility optimum stays above zero
    (threshold 1e-8, or simply no strict interior found)."""
    sub = [_CriterionEval(s, problem.grid) for s in problem.specs[1:]]
    adapter = _Phase1Barrier(sub, bounds, _limits(problem))
    w0 = uniform_weights(problem.grid.n)
    if adapter.worst(w0, 0.0) < -1e-2:
        return w0, 0
    x, info = _follow_path(adapter, adapter.start(), problem, n_pos=problem.grid.n)
    w = x[:-1] / x[:-1].sum()
    worst = adapter.worst(w, 0.0)
    if worst < -1e-12:
        return w, info.steps
    return None, info.steps


def solve_maximin(problem: MultiObjectiveProblem) -> SolveResult:
    """Solve the maximin-efficiency problem; requires presolved optima."""
    if problem.kind != "maximin":
        raise ValueError("problem kind is not 'maximin'")
    problem.require_min_phi()
    evals = [_CriterionEval(s, problem.grid) for s in problem.specs]
    n = problem.grid.n
    adapter = _MaximinBarrier(evals, problem.specs, problem.min_phi,
                              _limits(problem))

    w0 = uniform_weights(n)
    effs = [
        efficiency_from_value(problem.specs[k], evals[k].true_value(w0),
                              problem.min_phi[k])
        for k in range(problem.n_criteria)
    ]
    t0 = 2.0 / min(effs)
    x0 = np.concatenate([w0, [t0]])
    # smoothing of E criteria may shift values; back off until the start is
    # strictly inside the smoothed constraints
    for _ in range(60):
        if np.isfinite(adapter.value(x0, 1.0)):
            break
        x0[-1] *= 2.0
    x, info = _follow_path(adapter, x0, problem, n_pos=n)
    w = x[:-1] / x[:-1].sum()
    t_star = float(x[-1])
    residual = _maximin_residual(problem, w, t_star)
    converged = residual <= problem.solver_tol and not info.stalled
    return SolveResult(
        design=Design(w, problem.support_threshold),
        objective=t_star,
        status=STATUS_CONVERGED if converged else STATUS_MAX_ITERATIONS,
        iterations=info.steps,
        kkt_residual=residual,
        t_star=t_star,
        objective_trace=info.trace,
    )


# ---------------------------------------------------------------------------
# first-order residuals at returned iterates
#
# Each residual is the smallest relaxation at which the corresponding
# optimality system admits multipliers, computed by the certifier's own LP
# assembly; this keeps the solver's convergence flag and the certificates
# consistent by construction.


def _single_residual(problem, k, w) -> float:
    from .certify import single_kkt_slack

    try:
        return single_kkt_slack(problem.specs[k], problem.grid, w)
    except SingularInformationMatrix:
        return math.inf


def _constrained_residual(problem, w, bounds):
    from .certify import constrained_kkt_slack

    try:
        values = np.array([
            _true_criterion_value(problem, k, w)
            for k in range(1, problem.n_criteria)
        ])
        violation = float(max(0.0, (values - bounds).max()))
        return constrained_kkt_slack(problem, w), violation
    except SingularInformationMatrix:
        return math.inf, math.inf


def _maximin_residual(problem, w, t_star):
    from .certify import maximin_kkt_slack

    try:
        return maximin_kkt_slack(problem, w, t_star)
    except SingularInformationMatrix:
        return math.inf


def _true_criterion_value(problem, k, w) -> float:
    M = information_matrix(problem.grid, problem.specs[k].model, w)
    return criterion_value(problem.specs[k], M, criterion_index=k)
