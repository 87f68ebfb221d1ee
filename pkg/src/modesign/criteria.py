"""Design criteria: values, matrix gradients, dispersion functions,
efficiencies, and efficiency-bound transforms.

Five criteria are supported, each a convex scalarization of the information
matrix M:

    D: -log det M        A: trace M^-1        E: -lambda_min(M)
    c: c' M^-1 c         L: trace(L' M^-1 L)

The dispersion function of a criterion at a design is the directional
derivative quantity whose non-positivity over the whole grid certifies
single-objective optimality; the E criterion is non-differentiable when the
minimum eigenvalue is repeated and gets its own dispersion parameterized by
convex weights over the minimum eigenspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model_grid import DesignGrid, RegressionModel, as_weights, information_matrix

CRITERION_KINDS = ("D", "A", "c", "L", "E")

# relative floor on lambda_min below which M is treated as singular
PD_RTOL = 1e-12
# relative width of the eigenvalue cluster counted into the minimum eigenspace
EPS_EIG = 1e-6


class SingularInformationMatrix(Exception):
    """Information matrix too close to singular for the requested criterion."""

    def __init__(self, lambda_min: float, criterion_index: int | None = None):
        self.lambda_min = lambda_min
        self.criterion_index = criterion_index
        where = "" if criterion_index is None else f" (criterion {criterion_index})"
        super().__init__(
            f"information matrix is singular{where}: lambda_min = {lambda_min:.3e}"
        )


@dataclass(frozen=True, eq=False)
class CriterionSpec:
    """One optimality criterion bound to one regression model."""

    kind: str
    model: RegressionModel
    c_vector: np.ndarray | None = None
    L_matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in CRITERION_KINDS:
            raise ValueError(f"unknown criterion kind {self.kind!r}")
        if self.kind == "c":
            if self.c_vector is None:
                raise ValueError("c criterion needs c_vector")
            c = np.asarray(self.c_vector, dtype=float)
            if c.shape != (self.q,) or not np.any(c):
                raise ValueError("c_vector must be a nonzero vector of length q")
            object.__setattr__(self, "c_vector", c)
        if self.kind == "L":
            if self.L_matrix is None:
                raise ValueError("L criterion needs L_matrix")
            L = np.atleast_2d(np.asarray(self.L_matrix, dtype=float))
            if L.shape[0] != self.q or not np.any(L):
                raise ValueError("L_matrix must be nonzero with q rows")
            object.__setattr__(self, "L_matrix", L)

    @property
    def q(self) -> int:
        return self.model.q


@dataclass(frozen=True)
class EigenInfo:
    """Minimum eigenvalue, its cluster multiplicity, and an orthonormal
    basis of the corresponding eigenspace."""

    lambda_min: float
    multiplicity: int
    vectors: np.ndarray  # q x multiplicity


def min_eigen_info(M: np.ndarray, eps_eig: float = EPS_EIG) -> EigenInfo:
    """Full symmetric eigendecomposition, clustered at the bottom.

    Eigenvalues within eps_eig * max(1, |lambda_min|) of the smallest one
    count into the minimum eigenspace.
    """
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    lmin = float(lam[0])
    thresh = eps_eig * max(1.0, abs(lmin))
    r = int(np.sum(lam - lmin <= thresh))
    return EigenInfo(lambda_min=lmin, multiplicity=r, vectors=V[:, :r].copy())


def _pd_factor(M: np.ndarray, criterion_index: int | None):
    lam = np.linalg.eigvalsh(M)
    if lam[0] <= PD_RTOL * max(lam[-1], 0.0) or lam[-1] <= 0.0:
        raise SingularInformationMatrix(float(lam[0]), criterion_index)
    return cho_factor(M, lower=True), lam


def _solve_spd(factor, M: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cholesky solve with one mixed-precision refinement pass.

    The refinement keeps dispersion values usable near boundary-singular
    optima (e.g. c-optimal designs), where the plain solve loses digits.
    """
    B = np.asarray(B, dtype=float)
    X = cho_solve(factor, B)
    R = B.astype(np.longdouble) - M.astype(np.longdouble) @ X.astype(np.longdouble)
    return X + cho_solve(factor, np.asarray(R, dtype=float))


def criterion_value(spec: CriterionSpec, M: np.ndarray, criterion_index: int | None = None) -> float:
    """Value of the criterion at an information matrix."""
    if spec.kind == "E":
        return -float(np.linalg.eigvalsh(M)[0])
    factor, lam = _pd_factor(M, criterion_index)
    if spec.kind == "D":
        return -float(np.sum(np.log(lam)))
    if spec.kind == "A":
        return float(np.sum(1.0 / lam))
    if spec.kind == "c":
        return float(spec.c_vector @ _solve_spd(factor, M, spec.c_vector))
    return float(np.sum(spec.L_matrix * _solve_spd(factor, M, spec.L_matrix)))


def criterion_gradient(spec: CriterionSpec, M: np.ndarray) -> np.ndarray:
    """Matrix gradient of the criterion at M (not defined for kind E)."""
    if spec.kind == "E":
        raise ValueError("the E criterion has no single matrix gradient; "
                         "use min_eigen_dispersion")
    factor, _ = _pd_factor(M, None)
    q = M.shape[0]
    Minv = _solve_spd(factor, M, np.eye(q))
    if spec.kind == "D":
        G = -Minv
    elif spec.kind == "A":
        G = -(Minv @ Minv)
    elif spec.kind == "c":
        s = _solve_spd(factor, M, spec.c_vector)
        G = -np.outer(s, s)
    else:
        S = _solve_spd(factor, M, spec.L_matrix)
        G = -(S @ S.T)
    return 0.5 * (G + G.T)


def dispersion(spec: CriterionSpec, grid: DesignGrid, w, criterion_index: int | None = None) -> np.ndarray:
    """Per-point dispersion values of a differentiable criterion at a design.

    Entry i equals trace(grad_phi(M)' (M - z_i z_i')); non-positivity of the
    whole vector certifies single-objective optimality.
    """
    if spec.kind == "E":
        raise ValueError("use min_eigen_dispersion for the E criterion")
    Z = grid.z_matrix(spec.model)
    M = information_matrix(grid, spec.model, w)
    factor, lam = _pd_factor(M, criterion_index)
    if spec.kind == "D":
        B = _solve_spd(factor, M, Z.T)  # q x N
        quad = np.einsum("ij,ji->i", Z, B)
        base = float(M.shape[0])
    elif spec.kind == "A":
        Minv = _solve_spd(factor, M, np.eye(M.shape[0]))
        B = Z @ Minv
        quad = np.einsum("ij,ij->i", B, B)
        base = float(np.trace(Minv))
    elif spec.kind == "c":
        s = _solve_spd(factor, M, spec.c_vector)
        sig = Z @ s
        quad = sig**2
        base = float(spec.c_vector @ s)
    else:
        S = _solve_spd(factor, M, spec.L_matrix)
        T = Z @ S
        quad = np.einsum("ij,ij->i", T, T)
        base = float(np.sum(spec.L_matrix * S))
    return quad - base


def min_eigen_dispersion(
    model: RegressionModel,
    grid: DesignGrid,
    w,
    a,
    eps_eig: float = EPS_EIG,
    eigen: EigenInfo | None = None,
) -> np.ndarray:
    """Dispersion of the E criterion for a given convex combination over the
    minimum eigenspace.

    ``a`` has one entry per clustered minimum eigenvector; with multiplicity
    one it is just (1,).  Entry i is sum_j a_j (v_j' z_i)^2 - lambda_min.
    """
    if eigen is None:
        M = information_matrix(grid, model, w)
        eigen = min_eigen_info(M, eps_eig)
    a = np.asarray(a, dtype=float)
    if a.shape != (eigen.multiplicity,):
        raise ValueError(
            f"a has length {a.size}, expected multiplicity {eigen.multiplicity}"
        )
    if np.any(a < -1e-8) or abs(a.sum() - 1.0) > 1e-8:
        raise ValueError("a must be convex weights (nonnegative, summing to 1)")
    Z = grid.z_matrix(model)
    proj = Z @ eigen.vectors  # N x r
    return (proj**2) @ a - eigen.lambda_min


def efficiency_from_value(spec: CriterionSpec, value: float, min_phi: float) -> float:
    """Efficiency of a design given its criterion value and the optimum."""
    _check_min_phi(spec, min_phi)
    if spec.kind == "D":
        return float(np.exp((min_phi - value) / spec.q))
    if spec.kind == "E":
        return value / min_phi
    return min_phi / value


def efficiency(spec: CriterionSpec, grid: DesignGrid, w, min_phi: float) -> float:
    """Efficiency of a design relative to the single-objective optimum."""
    M = information_matrix(grid, spec.model, w)
    return efficiency_from_value(spec, criterion_value(spec, M), min_phi)


def efficiency_bound(spec: CriterionSpec, m: float, min_phi: float) -> float:
    """Criterion-value bound equivalent to the efficiency floor Eff >= m."""
    if not 0.0 < m <= 1.0:
        raise ValueError(f"efficiency floor must lie in (0, 1], got {m}")
    _check_min_phi(spec, min_phi)
    if spec.kind == "D":
        return min_phi - spec.q * np.log(m)
    if spec.kind == "E":
        return m * min_phi
    return min_phi / m


def efficiency_bound_slope(spec: CriterionSpec, t: float, min_phi: float) -> float:
    """Derivative in t of efficiency_bound evaluated at floor m = 1/t."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    _check_min_phi(spec, min_phi)
    if spec.kind == "D":
        return spec.q / t
    if spec.kind == "E":
        return -min_phi / t**2
    return min_phi


def _check_min_phi(spec: CriterionSpec, min_phi: float) -> None:
    if spec.kind == "E" and not min_phi < 0.0:
        raise ValueError("the optimal E criterion value must be negative")
    if spec.kind in ("A", "c", "L") and not min_phi > 0.0:
        raise ValueError(f"the optimal {spec.kind} criterion value must be positive")
