"""Optimality certificates for computed designs, via linear programming.

A candidate design is accepted as delta-optimal when nonnegative multipliers
exist that satisfy the relaxed stationarity and complementarity conditions
of the constrained or maximin problem; the search for multipliers is a small
linear program over the grid's dispersion values.

E criteria contribute rows built from the minimum-eigenvalue eigenspace.
With multiplicity r above one, the subgradient is parameterized by a
symmetric positive-semidefinite r x r witness matrix of trace equal to the
criterion's multiplier (trace one for an unweighted criterion); its entries
enter the program linearly and positive semidefiniteness is enforced by
cutting planes, which keeps every solve a plain LP while remaining exact.
Restricting the witness to diagonal matrices in a fixed eigenbasis is not
sufficient: optimal designs exist whose certificates need rotated bases.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    CriterionSpec,
    criterion_value,
    dispersion,
    efficiency_bound_slope,
    min_eigen_info,
)
from .lp import LinearProgram, lp_solve
from .model_grid import DesignGrid, as_weights, information_matrix

ROW_TOL = 1e-9
FEAS_PRECHECK = 1e-6
PSD_CUT_TOL = 1e-10
MAX_PSD_CUTS = 80


class InfeasibleDesignError(ValueError):
    """The design to certify violates the problem constraints outright."""


@dataclass
class Certificate:
    """Outcome of an optimality verification.

    ``multipliers`` holds the constraint multipliers found by the LP (one
    per secondary criterion for constrained problems, one per criterion for
    maximin).  For E criteria with a repeated minimum eigenvalue,
    ``a_weights`` maps the criterion index to the spectrum of the eigenspace
    witness matrix, normalized to convex weights.
    """

    verdict: str  # "Certified" | "NotCertified"
    delta: float
    multipliers: np.ndarray | None
    a_weights: dict[int, np.ndarray] | None
    max_stationarity_residual: float | None
    complementarity_residuals: np.ndarray | None
    curves: np.ndarray  # K x N per-criterion dispersion curves
    combined: np.ndarray | None  # N, multiplier-weighted curve
    warnings: list[str] = field(default_factory=list)
    lp_status: str | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == "Certified"


# ---------------------------------------------------------------------------
# per-criterion row data


def _sym_pairs(r: int) -> list[tuple[int, int]]:
    return [(j, j) for j in range(r)] + [
        (j, l) for j in range(r) for l in range(j + 1, r)
    ]


def _sym_row_matrix(Y: np.ndarray) -> np.ndarray:
    """N x r(r+1)/2 map from stacked symmetric-matrix entries to y' S y."""
    cols = [Y[:, j] * Y[:, j] for j in range(Y.shape[1])]
    cols += [2.0 * Y[:, j] * Y[:, l] for j, l in _sym_pairs(Y.shape[1])[Y.shape[1]:]]
    return np.column_stack(cols)


def _sym_coeffs_of(Smat: np.ndarray) -> np.ndarray:
    r = Smat.shape[0]
    vals = [Smat[j, j] for j in range(r)]
    vals += [2.0 * Smat[j, l] for j, l in _sym_pairs(r)[r:]]
    return np.asarray(vals)


def _sym_matrix_from(vals: np.ndarray, r: int) -> np.ndarray:
    S = np.zeros((r, r))
    pairs = _sym_pairs(r)
    for v, (j, l) in zip(vals, pairs):
        S[j, l] = v
        S[l, j] = v
    return S


class _CriterionRows:
    """Dispersion data for one criterion at the candidate design."""

    def __init__(self, spec: CriterionSpec, grid: DesignGrid, w, index: int):
        self.spec = spec
        self.index = index
        M = information_matrix(grid, spec.model, w)
        self.phi = criterion_value(spec, M, criterion_index=index)
        if spec.kind == "E":
            self.eigen = min_eigen_info(M)
            Z = grid.z_matrix(spec.model)
            Y = Z @ self.eigen.vectors  # N x r
            self.sym_rows = _sym_row_matrix(Y)
            self.curve_fixed = None
            if self.eigen.multiplicity == 1:
                self.curve_fixed = self.sym_rows[:, 0] - self.eigen.lambda_min
        else:
            self.eigen = None
            self.sym_rows = None
            self.curve_fixed = dispersion(spec, grid, w, criterion_index=index)

    @property
    def needs_block(self) -> bool:
        return self.spec.kind == "E" and self.eigen.multiplicity > 1

    @property
    def block_size(self) -> int:
        r = self.eigen.multiplicity
        return r * (r + 1) // 2

    def curve(self, svals=None, scale: float = 1.0) -> np.ndarray:
        """Unit-multiplier dispersion curve; for a witness block, svals are
        the stacked matrix entries and scale its trace."""
        if self.curve_fixed is not None:
            return self.curve_fixed
        if svals is None:  # reporting fallback: balanced witness
            r = self.eigen.multiplicity
            svals = _sym_coeffs_of(np.eye(r) / r)
            svals[r:] /= 2.0
            scale = 1.0
        if scale <= 0.0:
            scale = 1.0
        return (self.sym_rows @ np.asarray(svals, dtype=float)) / scale \
            - self.eigen.lambda_min


# ---------------------------------------------------------------------------
# assembled multiplier programs


@dataclass
class _Assembled:
    """Multiplier-search program with the relaxation delta kept out of the
    right-hand side: feasibility at slack delta means
    A_ub x <= rhs0 + delta * relax (rows with relax 0 are hard)."""

    A_ub: np.ndarray
    rhs0: np.ndarray
    relax: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    objective: np.ndarray
    layout: "_Layout"
    rows: list
    slack: np.ndarray

    def solve_certificate(self, delta: float):
        """Feasibility search at fixed delta, with PSD cutting planes on the
        eigenspace witness blocks.  Returns the LP solution or None."""
        A_ub, rhs = self.A_ub, self.rhs0 + delta * self.relax
        bounds = self.layout.var_bounds()
        for _ in range(MAX_PSD_CUTS):
            res = lp_solve(LinearProgram(
                objective=self.objective, A_ub=A_ub, b_ub=rhs,
                A_eq=self.A_eq, b_eq=self.b_eq, bounds=bounds,
            ))
            if res.status != "Optimal":
                return None, res.status
            cut = self.layout.psd_cut(res.x)
            if cut is None:
                return res, res.status
            A_ub = np.vstack([A_ub, cut])
            rhs = np.concatenate([rhs, [0.0]])
        return None, "CutLimit"

    def min_slack(self) -> float:
        """Smallest delta at which the system is feasible (epigraph LP with
        the same PSD cutting planes)."""
        ncol = self.A_ub.shape[1]
        A_ub = np.hstack([self.A_ub, -self.relax[:, None]])
        rhs = self.rhs0.copy()
        A_eq = np.hstack([self.A_eq, np.zeros((self.A_eq.shape[0], 1))]) \
            if self.A_eq.size else None
        obj = np.zeros(ncol + 1)
        obj[-1] = 1.0
        bounds = self.layout.var_bounds() + ("free",)
        for _ in range(MAX_PSD_CUTS):
            res = lp_solve(LinearProgram(
                objective=obj, A_ub=A_ub, b_ub=rhs,
                A_eq=A_eq, b_eq=self.b_eq if self.b_eq.size else None,
                bounds=bounds,
            ))
            if res.status == "Unbounded":
                return -math.inf
            if res.status != "Optimal":
                return math.inf
            cut = self.layout.psd_cut(res.x[:ncol])
            if cut is None:
                return float(res.objective_value)
            A_ub = np.vstack([A_ub, np.concatenate([cut, [0.0]])])
            rhs = np.concatenate([rhs, [0.0]])
        return math.inf


class _Layout:
    """Column layout: multipliers first, then one stacked symmetric witness
    block per E criterion with a repeated minimum eigenvalue."""

    def __init__(self, n_eta: int):
        self.n_eta = n_eta
        self.ncol = n_eta
        self.blocks: dict[int, dict] = {}

    def add_block(self, crit_index: int, multiplicity: int, primary: bool):
        size = multiplicity * (multiplicity + 1) // 2
        self.blocks[crit_index] = {
            "cols": np.arange(self.ncol, self.ncol + size),
            "r": multiplicity,
            "primary": primary,
        }
        self.ncol += size

    def block_cols(self, crit_index: int) -> np.ndarray:
        return self.blocks[crit_index]["cols"]

    def trace_equalities(self, eta_offset: int):
        """trace(S) = 1 for a primary block, trace(S) = eta_k otherwise."""
        rows, rhs = [], []
        for k, blk in self.blocks.items():
            row = np.zeros(self.ncol)
            row[blk["cols"][: blk["r"]]] = 1.0  # diagonal entries
            if blk["primary"]:
                rhs.append(1.0)
            else:
                row[k + eta_offset] = -1.0
                rhs.append(0.0)
            rows.append(row)
        if not rows:
            return np.zeros((0, self.ncol)), np.zeros(0)
        return np.vstack(rows), np.asarray(rhs)

    def psd_cut(self, x) -> np.ndarray | None:
        """A violated positive-semidefiniteness cut at the current solution,
        or None when every witness block is PSD (to tolerance)."""
        for blk in self.blocks.values():
            S = _sym_matrix_from(x[blk["cols"]], blk["r"])
            lam, V = np.linalg.eigh(S)
            scale = max(1.0, float(np.trace(S)))
            if lam[0] < -PSD_CUT_TOL * scale:
                v = V[:, 0]
                row = np.zeros(self.ncol)
                row[blk["cols"]] = -_sym_coeffs_of(np.outer(v, v))
                return row
        return None

    def var_bounds(self) -> tuple[str, ...]:
        bounds = ["nonnegative"] * self.ncol
        for blk in self.blocks.values():
            for col in blk["cols"][blk["r"]:]:  # off-diagonal entries
                bounds[col] = "free"
        return tuple(bounds)

    def extract(self, x, eta_offset: int):
        """Multipliers, per-criterion eigenspace weights, and block values."""
        eta = x[: self.n_eta]
        a_by_crit: dict[int, np.ndarray] = {}
        svals_by_crit: dict[int, tuple[np.ndarray, float]] = {}
        for k, blk in self.blocks.items():
            vals = x[blk["cols"]]
            S = _sym_matrix_from(vals, blk["r"])
            tr = float(np.trace(S))
            lam = np.linalg.eigvalsh(S)
            a = np.clip(lam[::-1], 0.0, None)
            a_by_crit[k] = a / tr if tr > 1e-12 else np.full(
                blk["r"], 1.0 / blk["r"])
            scale = 1.0 if blk["primary"] else (tr if tr > 1e-12 else 1.0)
            svals_by_crit[k] = (vals, scale)
        return eta, a_by_crit, svals_by_crit


# ---------------------------------------------------------------------------
# single-objective verification


def verify_single(spec: CriterionSpec, grid: DesignGrid, w, delta: float = 1e-4) -> Certificate:
    """Check delta-optimality of a design for one criterion.

    Differentiable criteria (and the E criterion with a simple minimum
    eigenvalue) reduce to a sign check of the dispersion vector; a repeated
    minimum eigenvalue triggers the witness-matrix feasibility program.
    """
    wv = _simplex_weights(w)
    rows = _CriterionRows(spec, grid, wv, 0)
    if not rows.needs_block:
        curve = rows.curve()
        resid = float(curve.max())
        a = {0: np.ones(1)} if spec.kind == "E" else None
        return Certificate(
            verdict="Certified" if resid <= delta else "NotCertified",
            delta=delta,
            multipliers=np.zeros(0),
            a_weights=a,
            max_stationarity_residual=resid,
            complementarity_residuals=np.zeros(0),
            curves=curve[None, :],
            combined=curve,
        )
    asm = _assemble_single_eigen(rows, grid.n)
    res, status = asm.solve_certificate(delta)
    if res is None:
        curve = rows.curve()
        return Certificate(
            verdict="NotCertified", delta=delta, multipliers=None,
            a_weights=None, max_stationarity_residual=float(curve.max()),
            complementarity_residuals=None, curves=curve[None, :],
            combined=None, lp_status=status,
        )
    _, a_by, svals_by = asm.layout.extract(res.x, eta_offset=0)
    curve = rows.curve(*svals_by[0])
    return Certificate(
        verdict="Certified", delta=delta, multipliers=np.zeros(0),
        a_weights=a_by, max_stationarity_residual=float(curve.max()),
        complementarity_residuals=np.zeros(0), curves=curve[None, :],
        combined=curve, lp_status=status,
    )


def single_kkt_slack(spec, grid, w) -> float:
    """Smallest relaxation certifying single-objective optimality: the max
    dispersion value, minimized over the eigenspace witness for E."""
    wv = _simplex_weights(w)
    rows = _CriterionRows(spec, grid, wv, 0)
    if not rows.needs_block:
        return float(rows.curve().max())
    return _assemble_single_eigen(rows, grid.n).min_slack()


def _assemble_single_eigen(rows: _CriterionRows, n: int) -> _Assembled:
    layout = _Layout(n_eta=0)
    layout.add_block(0, rows.eigen.multiplicity, primary=True)
    A_eq, b_eq = layout.trace_equalities(eta_offset=0)
    objective = np.zeros(layout.ncol)
    objective[: rows.eigen.multiplicity] = 1.0  # trace of the witness
    return _Assembled(
        A_ub=rows.sym_rows,
        rhs0=np.full(n, rows.eigen.lambda_min),
        relax=np.ones(n),
        A_eq=A_eq, b_eq=b_eq, objective=objective,
        layout=layout, rows=[rows], slack=np.zeros(0),
    )


# ---------------------------------------------------------------------------
# multi-objective certificates


def _assemble_constrained(problem, w, check_feasible=True) -> _Assembled:
    wv = _simplex_weights(w)
    K, N = problem.n_criteria, problem.grid.n
    bounds = problem.constraint_bounds()
    rows = [_CriterionRows(s, problem.grid, wv, k) for k, s in enumerate(problem.specs)]

    slack = np.array([rows[k].phi - bounds[k - 1] for k in range(1, K)])
    if check_feasible and np.any(slack > FEAS_PRECHECK):
        worst = int(np.argmax(slack))
        raise InfeasibleDesignError(
            f"design violates efficiency constraint {worst + 2} by {slack[worst]:.3e}"
        )

    layout = _Layout(n_eta=K - 1)
    for k in range(1, K):
        if rows[k].needs_block:
            layout.add_block(k, rows[k].eigen.multiplicity, primary=False)
    if rows[0].needs_block:
        layout.add_block(0, rows[0].eigen.multiplicity, primary=True)

    ncol = layout.ncol
    A_st = np.zeros((N, ncol))
    rhs_st = np.zeros(N)
    # primary criterion enters with unit multiplier
    if rows[0].needs_block:
        A_st[:, layout.block_cols(0)] = rows[0].sym_rows
        rhs_st += rows[0].eigen.lambda_min
    else:
        rhs_st -= rows[0].curve()
    for k in range(1, K):
        if rows[k].needs_block:
            A_st[:, layout.block_cols(k)] = rows[k].sym_rows
            A_st[:, k - 1] = -rows[k].eigen.lambda_min
        else:
            A_st[:, k - 1] = rows[k].curve()

    A_comp = np.zeros((2 * (K - 1), ncol))
    for k in range(1, K):
        A_comp[2 * (k - 1), k - 1] = slack[k - 1]
        A_comp[2 * (k - 1) + 1, k - 1] = -slack[k - 1]

    A_eq, b_eq = layout.trace_equalities(eta_offset=-1)

    objective = np.zeros(ncol)
    objective[: K - 1] = 1.0
    if rows[0].needs_block:
        blk = layout.blocks[0]
        objective[blk["cols"][: blk["r"]]] = 1.0  # plus trace of the witness

    return _Assembled(
        A_ub=np.vstack([A_st, A_comp]),
        rhs0=np.concatenate([rhs_st, np.zeros(2 * (K - 1))]),
        relax=np.ones(N + 2 * (K - 1)),
        A_eq=A_eq, b_eq=b_eq, objective=objective,
        layout=layout, rows=rows, slack=slack,
    )


def certify_constrained(problem, w, delta: float | None = None) -> Certificate:
    """Certificate for the efficiency-constrained problem at a design."""
    delta = problem.delta if delta is None else delta
    asm = _assemble_constrained(problem, w)
    res, status = asm.solve_certificate(delta)
    warnings = _slater_warning(problem)
    if res is None:
        return _not_certified(asm.rows, delta, warnings, status)
    eta, a_by, svals_by = asm.layout.extract(res.x, eta_offset=-1)
    curves = np.vstack([
        rows.curve(*svals_by[k]) if k in svals_by else rows.curve()
        for k, rows in enumerate(asm.rows)
    ])
    combined = curves[0] + eta @ curves[1:]
    comp = np.abs(eta * asm.slack)
    return Certificate(
        verdict="Certified", delta=delta, multipliers=eta,
        a_weights=a_by or None,
        max_stationarity_residual=float(combined.max()),
        complementarity_residuals=comp, curves=curves, combined=combined,
        warnings=warnings, lp_status=status,
    )


def constrained_kkt_slack(problem, w) -> float:
    """Smallest relaxation at which the constrained optimality system admits
    multipliers; the solver's stationarity residual."""
    return _assemble_constrained(problem, w, check_feasible=False).min_slack()


def _assemble_maximin(problem, w, t_star, check_feasible=True) -> _Assembled:
    wv = _simplex_weights(w)
    problem.require_min_phi()
    K, N = problem.n_criteria, problem.grid.n
    rows = [_CriterionRows(s, problem.grid, wv, k) for k, s in enumerate(problem.specs)]
    bounds = np.array([
        _recip_bound(problem.specs[k], t_star, problem.min_phi[k]) for k in range(K)
    ])
    slack = np.array([rows[k].phi - bounds[k] for k in range(K)])
    if check_feasible and np.any(slack > FEAS_PRECHECK):
        worst = int(np.argmax(slack))
        raise InfeasibleDesignError(
            f"design violates efficiency constraint {worst + 1} by {slack[worst]:.3e}"
        )
    slopes = np.array([
        efficiency_bound_slope(problem.specs[k], t_star, problem.min_phi[k])
        for k in range(K)
    ])

    layout = _Layout(n_eta=K)
    for k in range(K):
        if rows[k].needs_block:
            layout.add_block(k, rows[k].eigen.multiplicity, primary=False)
    ncol = layout.ncol

    A_st = np.zeros((N, ncol))
    for k in range(K):
        if rows[k].needs_block:
            A_st[:, layout.block_cols(k)] = rows[k].sym_rows
            A_st[:, k] = -rows[k].eigen.lambda_min
        else:
            A_st[:, k] = rows[k].curve()

    A_comp = np.zeros((2 * K, ncol))
    for k in range(K):
        A_comp[2 * k, k] = slack[k]
        A_comp[2 * k + 1, k] = -slack[k]

    A_eq, b_eq = layout.trace_equalities(eta_offset=0)
    norm_row = np.zeros((1, ncol))
    norm_row[0, :K] = slopes
    A_eq = np.vstack([norm_row, A_eq]) if A_eq.size else norm_row
    b_eq = np.concatenate([[1.0], b_eq])

    objective = np.zeros(ncol)
    objective[:K] = 1.0

    return _Assembled(
        A_ub=np.vstack([A_st, A_comp]),
        rhs0=np.zeros(N + 2 * K),
        relax=np.ones(N + 2 * K),
        A_eq=A_eq, b_eq=b_eq, objective=objective,
        layout=layout, rows=rows, slack=slack,
    )


def certify_maximin(problem, w, t_star: float, delta: float | None = None) -> Certificate:
    """Certificate for the maximin problem at a candidate (design, t)."""
    delta = problem.delta if delta is None else delta
    asm = _assemble_maximin(problem, w, t_star)
    res, status = asm.solve_certificate(delta)
    if res is None:
        return _not_certified(asm.rows, delta, [], status)
    eta, a_by, svals_by = asm.layout.extract(res.x, eta_offset=0)
    curves = np.vstack([
        rows.curve(*svals_by[k]) if k in svals_by else rows.curve()
        for k, rows in enumerate(asm.rows)
    ])
    combined = eta @ curves
    comp = np.abs(eta * asm.slack)
    return Certificate(
        verdict="Certified", delta=delta, multipliers=eta,
        a_weights=a_by or None,
        max_stationarity_residual=float(combined.max()),
        complementarity_residuals=comp, curves=curves, combined=combined,
        lp_status=status,
    )


def maximin_kkt_slack(problem, w, t_star: float) -> float:
    """Smallest relaxation at which the maximin optimality system (with its
    normalization equality) admits multipliers."""
    return _assemble_maximin(problem, w, t_star, check_feasible=False).min_slack()


# backwards-compatible builders used by tests to inspect the assembled rows
def build_constrained_program(problem, w, delta: float):
    asm = _assemble_constrained(problem, w)
    lp = LinearProgram(objective=asm.objective, A_ub=asm.A_ub,
                       b_ub=asm.rhs0 + delta * asm.relax,
                       A_eq=asm.A_eq, b_eq=asm.b_eq)
    return lp, asm


def build_maximin_program(problem, w, t_star: float, delta: float):
    asm = _assemble_maximin(problem, w, t_star)
    lp = LinearProgram(objective=asm.objective, A_ub=asm.A_ub,
                       b_ub=asm.rhs0 + delta * asm.relax,
                       A_eq=asm.A_eq, b_eq=asm.b_eq)
    return lp, asm


# ---------------------------------------------------------------------------
# reporting


def dispersion_report(problem, w, certificate: Certificate) -> np.ndarray:
    """N x (K+1) table: per-criterion dispersion curves and the combined
    multiplier-weighted curve (zeros when no multipliers exist)."""
    del w  # curves were evaluated at certification time
    combined = certificate.combined
    if combined is None:
        combined = np.zeros(certificate.curves.shape[1])
    return np.column_stack([certificate.curves.T, combined])


def write_dispersion_csv(path, grid: DesignGrid, certificate: Certificate) -> None:
    """CSV: index, point coordinates, one dispersion column per criterion,
    and the combined curve; 17 significant digits."""
    K = certificate.curves.shape[0]
    combined = certificate.combined
    if combined is None:
        combined = np.zeros(certificate.curves.shape[1])
    header = (
        ["index"]
        + [f"x{d + 1}" for d in range(grid.p)]
        + [f"d_{k + 1}" for k in range(K)]
        + ["combined"]
    )
    lines = [",".join(header)]
    for i in range(grid.n):
        cells = [str(i)]
        cells += [_fmt(v) for v in grid.points[i]]
        cells += [_fmt(certificate.curves[k, i]) for k in range(K)]
        cells.append(_fmt(combined[i]))
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "verdict": cert.verdict,
        "delta": cert.delta,
        "multipliers": _listify(cert.multipliers),
        "a_weights": {str(k): _listify(v) for k, v in cert.a_weights.items()}
        if cert.a_weights else None,
        "max_stationarity_residual": cert.max_stationarity_residual,
        "complementarity_residuals": _listify(cert.complementarity_residuals),
        "warnings": list(cert.warnings),
        "lp_status": cert.lp_status,
        "dispersion_curves": [_listify(c) for c in cert.curves],
        "combined_curve": _listify(cert.combined),
    }


def write_certificate_json(path, cert: Certificate) -> None:
    _atomic_write(path, json.dumps(certificate_to_dict(cert), indent=2) + "\n")


# ---------------------------------------------------------------------------
# helpers


def _recip_bound(spec, t, min_phi):
    if spec.kind == "D":
        return min_phi + spec.q * math.log(t)
    if spec.kind == "E":
        return min_phi / t
    return t * min_phi


def _simplex_weights(w) -> np.ndarray:
    wv = as_weights(w)
    total = wv.sum()
    if abs(total - 1.0) > 1e-6 or np.any(wv < -1e-9):
        raise ValueError("candidate design is not on the probability simplex")
    wv = np.clip(wv, 0.0, None)
    return wv / wv.sum()


def _slater_warning(problem) -> list[str]:
    try:
        bounds = problem.constraint_bounds()
        n = problem.grid.n
        wu = np.full(n, 1.0 / n)
        for k in range(1, problem.n_criteria):
            M = information_matrix(problem.grid, problem.specs[k].model, wu)
            if criterion_value(problem.specs[k], M, k) >= bounds[k - 1]:
                return ["uniform design is not strictly feasible; the strict "
                        "feasibility assumption behind the certificate may fail"]
    except Exception:
        return ["could not check strict feasibility at the uniform design"]
    return []


def _not_certified(rows, delta, warnings, status) -> Certificate:
    curves = np.vstack([r.curve() for r in rows])
    return Certificate(
        verdict="NotCertified", delta=delta, multipliers=None, a_weights=None,
        max_stationarity_residual=None, complementarity_residuals=None,
        curves=curves, combined=None, warnings=warnings, lp_status=status,
    )


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _listify(arr):
    if arr is None:
        return None
    return [float(v) for v in np.atleast_1d(arr)]


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
