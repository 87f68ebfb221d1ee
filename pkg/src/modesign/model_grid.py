"""Design grids, regression models, information matrices, and integral targets.

A design grid holds the candidate points of a discretized design space and
caches, per regression model, the matrix of parameter-gradient vectors
evaluated at every grid point.  Everything downstream (criterion values,
dispersion functions, solvers, certificates) works off these cached rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class IntervalFactor:
    """Equally spaced 1-D factor: ``points`` values from ``lo`` to ``hi``."""

    lo: float
    hi: float
    points: int


@dataclass(frozen=True)
class FiniteFactor:
    """Finite-level factor (e.g. a binary treatment indicator)."""

    values: tuple[float, ...]


GridFactor = IntervalFactor | FiniteFactor


@dataclass(frozen=True)
class RegressionModel:
    """A regression mean function, identified by the gradient of its mean
    with respect to the parameters at a nominal parameter value.

    ``kind`` selects one of the built-in forms; ``theta_star`` is the nominal
    parameter vector (ignored by models that are linear in the parameters).
    For ``kind="linear"`` the basis is given either as monomial exponent
    tuples or as a callable mapping a design point to the basis vector.
    """

    kind: str
    q: int
    theta_star: tuple[float, ...] | None = None
    monomials: tuple[tuple[int, ...], ...] | None = None
    basis: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind in _NONLINEAR_Q:
            expect = _NONLINEAR_Q[self.kind]
            if self.theta_star is None or len(self.theta_star) != expect:
                raise ValueError(
                    f"model kind {self.kind!r} needs theta_star of length {expect}"
                )
        elif self.kind == "linear":
            if self.monomials is None and self.basis is None:
                raise ValueError("linear model needs monomials or a basis callable")
        elif self.kind != "poly-interaction":
            raise ValueError(f"unknown model kind {self.kind!r}")


_NONLINEAR_Q = {"compartment4": 4, "emax3": 3, "logistic4": 4}


def compartment_model(theta_star: Sequence[float]) -> RegressionModel:
    """Two-compartment drug concentration model, four parameters."""
    return RegressionModel("compartment4", 4, tuple(float(t) for t in theta_star))


def emax_model(theta_star: Sequence[float]) -> RegressionModel:
    """Three-parameter Emax dose-response model."""
    return RegressionModel("emax3", 3, tuple(float(t) for t in theta_star))


def logistic_model(theta_star: Sequence[float]) -> RegressionModel:
    """Four-parameter logistic dose-response model."""
    return RegressionModel("logistic4", 4, tuple(float(t) for t in theta_star))


def interaction_model() -> RegressionModel:
    """Two-factor linear model with interaction and curvature in the second
    factor: basis (1, x1, x2, x1*x2, x2^2)."""
    return RegressionModel("poly-interaction", 5)


def linear_model(
    monomials: Sequence[Sequence[int]] | None = None,
    basis: Callable[[np.ndarray], np.ndarray] | None = None,
    q: int | None = None,
) -> RegressionModel:
    """Model linear in the parameters with a user-supplied basis.

    ``monomials`` gives exponent tuples, one per basis function, so that
    basis j at point x is prod_d x_d ** monomials[j][d].  Alternatively pass
    a ``basis`` callable together with its output length ``q``.
    """
    if monomials is not None:
        mono = tuple(tuple(int(e) for e in m) for m in monomials)
        return RegressionModel("linear", len(mono), None, mono)
    if basis is None or q is None:
        raise ValueError("pass monomials, or basis together with q")
    return RegressionModel("linear", int(q), None, None, basis)


def model_value(model: RegressionModel, point, theta) -> float:
    """Mean response f(x, theta).  Used mainly to cross-check gradients."""
    x = np.atleast_1d(np.asarray(point, dtype=float))
    th = np.asarray(theta, dtype=float)
    if model.kind == "compartment4":
        return th[0] * np.exp(-th[1] * x[0]) + th[2] * np.exp(-th[3] * x[0])
    if model.kind == "emax3":
        return th[0] + th[1] * x[0] / (th[2] + x[0])
    if model.kind == "logistic4":
        return th[0] + th[1] / (1.0 + np.exp((th[2] - x[0]) / th[3]))
    # linear in theta
    return float(gradient_vector(model, x) @ th)


def gradient_vector(model: RegressionModel, point) -> np.ndarray:
    """Gradient of the mean function with respect to the parameters,
    evaluated at the model's nominal parameter value.

    Raises ValueError when the evaluation overflows (the offending point is
    named rather than clamped).
    """
    x = np.atleast_1d(np.asarray(point, dtype=float))
    with np.errstate(over="ignore", invalid="ignore"):
        z = _gradient_raw(model, x)
    if not np.all(np.isfinite(z)):
        raise ValueError(
            f"gradient of model {model.kind!r} is not finite at point {x.tolist()}"
        )
    return z


def _gradient_raw(model: RegressionModel, x: np.ndarray) -> np.ndarray:
    if model.kind == "compartment4":
        t1, t2, t3, t4 = model.theta_star
        e2 = np.exp(-t2 * x[0])
        e4 = np.exp(-t4 * x[0])
        return np.array([e2, -t1 * x[0] * e2, e4, -t3 * x[0] * e4])
    if model.kind == "emax3":
        t1, t2, t3 = model.theta_star
        den = t3 + x[0]
        return np.array([1.0, x[0] / den, -t2 * x[0] / den**2])
    if model.kind == "logistic4":
        t1, t2, t3, t4 = model.theta_star
        e = np.exp((t3 - x[0]) / t4)
        den = (1.0 + e) ** 2
        return np.array(
            [1.0, 1.0 / (1.0 + e), -t2 * e / (t4 * den), t2 * e * (t3 - x[0]) / (t4**2 * den)]
        )
    if model.kind == "poly-interaction":
        return np.array([1.0, x[0], x[1], x[0] * x[1], x[1] ** 2])
    if model.monomials is not None:
        return np.array([np.prod(x ** np.asarray(m, dtype=float)) for m in model.monomials])
    return np.asarray(model.basis(x), dtype=float)


@dataclass(frozen=True, eq=False)
class DesignGrid:
    """Discrete design space: N candidate points plus per-model gradient rows.

    The gradient cache is a pure function of (model, point); rows are
    computed once per model and frozen, so a populated grid is safe to share
    across threads.
    """

    points: np.ndarray
    factors: tuple[GridFactor, ...]
    _zcache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    def z_matrix(self, model: RegressionModel) -> np.ndarray:
        """N x q matrix of gradient vectors, cached per model."""
        Z = self._zcache.get(model)
        if Z is None:
            Z = np.vstack([gradient_vector(model, u) for u in self.points])
            Z.setflags(write=False)
            self._zcache[model] = Z
        return Z

    def ensure_cached(self, models) -> None:
        for m in models:
            self.z_matrix(m)

    def interval_spacing(self) -> float | None:
        """Grid spacing of the (single) interval factor, if there is one."""
        steps = [
            (f.hi - f.lo) / (f.points - 1)
            for f in self.factors
            if isinstance(f, IntervalFactor)
        ]
        return steps[0] if len(steps) == 1 else None


def build_grid(factors: GridFactor | Sequence[GridFactor]) -> DesignGrid:
    """Build the product grid of the given factors.

    Points are enumerated lexicographically with finite factors outermost
    (slowest varying); coordinate columns keep the caller's factor order.
    """
    if isinstance(factors, (IntervalFactor, FiniteFactor)):
        factors = [factors]
    factors = tuple(factors)
    if not factors:
        raise ValueError("design space needs at least one factor")

    axes = []
    for dim, f in enumerate(factors):
        if isinstance(f, IntervalFactor):
            if not (np.isfinite(f.lo) and np.isfinite(f.hi)):
                raise ValueError(f"dimension {dim}: interval bounds must be finite")
            if f.points < 2:
                raise ValueError(
                    f"dimension {dim}: an interval factor needs at least 2 points"
                )
            if f.hi <= f.lo:
                raise ValueError(f"dimension {dim}: requires lo < hi")
            axes.append(f.lo + (f.hi - f.lo) * np.arange(f.points) / (f.points - 1))
        elif isinstance(f, FiniteFactor):
            if len(f.values) == 0:
                raise ValueError(f"dimension {dim}: finite factor must be nonempty")
            vals = np.asarray(f.values, dtype=float)
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"dimension {dim}: finite levels must be finite")
            axes.append(vals)
        else:
            raise TypeError(f"dimension {dim}: unknown factor type {type(f)!r}")

    # finite factors outermost, stable within each group
    order = sorted(
        range(len(factors)),
        key=lambda i: (isinstance(factors[i], IntervalFactor), i),
    )
    mesh = np.meshgrid(*[axes[i] for i in order], indexing="ij")
    cols = [None] * len(factors)
    for pos, i in enumerate(order):
        cols[i] = mesh[pos].reshape(-1)
    points = np.column_stack(cols)
    points.setflags(write=False)
    return DesignGrid(points=points, factors=factors)


@dataclass(frozen=True)
class Design:
    """Weight vector on the probability simplex over the grid points."""

    weights: np.ndarray
    support_threshold: float = 1e-4

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if np.any(w < -1e-12):
            raise ValueError("weights must be nonnegative")
        w = np.where(w < 0, 0.0, w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def support(self) -> np.ndarray:
        """Indices with weight at or above the support threshold."""
        return np.flatnonzero(self.weights >= self.support_threshold)


def as_weights(w) -> np.ndarray:
    """Accept either a Design or a raw weight vector."""
    if isinstance(w, Design):
        return w.weights
    return np.asarray(w, dtype=float)


def information_matrix(grid: DesignGrid, model: RegressionModel, w) -> np.ndarray:
    """Weighted outer-product moment matrix sum_i w_i z_i z_i^T (q x q).

    Exactly symmetric by construction; positive semidefinite whenever the
    weights are nonnegative.
    """
    Z = grid.z_matrix(model)
    wv = as_weights(w)
    M = (Z * wv[:, None]).T @ Z
    return 0.5 * (M + M.T)


def integral_L_matrix(model: RegressionModel, interval, nodes: int) -> np.ndarray:
    """Symmetric PSD square root of the integral of z z^T over an interval.

    Gauss-Legendre quadrature with the given node count, then an
    eigendecomposition square root.  Raises if the quadrature result is not
    PSD beyond rounding (tolerance 1e-12 relative).
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    if nodes < 1:
        raise ValueError("need at least one quadrature node")
    xg, wg = np.polynomial.legendre.leggauss(int(nodes))
    pts = 0.5 * (b - a) * xg + 0.5 * (a + b)
    A = np.zeros((model.q, model.q))
    for t, wq in zip(pts, wg):
        z = gradient_vector(model, [t])
        A += wq * np.outer(z, z)
    A *= 0.5 * (b - a)
    A = 0.5 * (A + A.T)
    return _psd_sqrt(A)


def _psd_sqrt(A: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    lam, V = np.linalg.eigh(A)
    scale = max(1.0, float(lam[-1]))
    if lam[0] < -tol * scale:
        raise ValueError(
            f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})"
        )
    lam = np.clip(lam, 0.0, None)
    return (V * np.sqrt(lam)) @ V.T
