"""Shared fixtures: the three benchmark applications, solved once per session."""

import time
from types import SimpleNamespace

import numpy as np
import pytest

import modesign as md
from modesign.certify import certify_constrained, certify_maximin
from modesign.solve import (
    MultiObjectiveProblem,
    presolve,
    solve_constrained,
    solve_maximin,
)

COMPARTMENT_THETA = (5.25, 1.34, 1.75, 0.13)


def compartment_specs(grid_points=501):
    grid = md.build_grid(md.IntervalFactor(0.0, 15.0, grid_points))
    model = md.compartment_model(COMPARTMENT_THETA)
    th = np.asarray(COMPARTMENT_THETA)
    specs = (
        md.CriterionSpec("L", model, L_matrix=np.diag(1.0 / th)),
        md.CriterionSpec("D", model),
        md.CriterionSpec("L", model,
                         L_matrix=md.integral_L_matrix(model, (2.0, 10.0), 200)),
    )
    return grid, specs


def app1_problem(grid_points=501, floors=(0.9, 0.8)):
    grid, specs = compartment_specs(grid_points)
    return MultiObjectiveProblem(grid=grid, specs=specs, kind="constrained",
                                 floors=floors)


def app2_problem(grid_points=501):
    grid = md.build_grid(md.IntervalFactor(0.0, 500.0, grid_points))
    models = (
        md.linear_model(monomials=[[0], [1]]),
        md.emax_model([60.0, 294.0, 25.0]),
        md.emax_model([60.0, 340.0, 107.14]),
        md.logistic_model([49.62, 290.51, 150.0, 45.51]),
    )
    specs = tuple(md.CriterionSpec("D", m) for m in models)
    return MultiObjectiveProblem(grid=grid, specs=specs, kind="maximin")


def app3_problem(interval_points=201):
    grid = md.build_grid([
        md.FiniteFactor((0.0, 1.0)),
        md.IntervalFactor(-1.0, 1.0, interval_points),
    ])
    model = md.interaction_model()
    specs = (
        md.CriterionSpec("A", model),
        md.CriterionSpec("E", model),
        md.CriterionSpec("c", model, c_vector=np.array([0.0, 0.0, 0.0, 1.0, 0.0])),
    )
    return MultiObjectiveProblem(grid=grid, specs=specs, kind="maximin")


def efficiencies(problem, weights):
    return np.array([
        md.efficiency(problem.specs[k], problem.grid, weights, problem.min_phi[k])
        for k in range(problem.n_criteria)
    ])


@pytest.fixture(scope="session")
def app1():
    problem = app1_problem()
    start = time.perf_counter()
    pre = presolve(problem)
    result = solve_constrained(problem)
    elapsed = time.perf_counter() - start
    cert = certify_constrained(problem, result.design.weights)
    return SimpleNamespace(problem=problem, presolves=pre, result=result,
                           certificate=cert, elapsed=elapsed)


@pytest.fixture(scope="session")
def app1_variants(app1):
    """The three other floor settings, reusing the presolve cache."""
    out = {}
    for floors in [(0.9, 0.7), (0.7, 0.7), (0.9, 0.9)]:
        problem = app1.problem.copy_with(floors=floors)
        result = solve_constrained(problem)
        cert = None
        if result.status != "Infeasible":
            cert = certify_constrained(problem, result.design.weights)
        out[floors] = SimpleNamespace(problem=problem, result=result,
                                      certificate=cert)
    return out


@pytest.fixture(scope="session")
def app2():
    problem = app2_problem()
    start = time.perf_counter()
    pre = presolve(problem)
    result = solve_maximin(problem)
    elapsed = time.perf_counter() - start
    cert = certify_maximin(problem, result.design.weights, result.t_star)
    return SimpleNamespace(problem=problem, presolves=pre, result=result,
                           certificate=cert, elapsed=elapsed)


@pytest.fixture(scope="session")
def app3():
    problem = app3_problem()
    start = time.perf_counter()
    pre = presolve(problem)
    result = solve_maximin(problem)
    elapsed = time.perf_counter() - start
    cert = certify_maximin(problem, result.design.weights, result.t_star)
    return SimpleNamespace(problem=problem, presolves=pre, result=result,
                           certificate=cert, elapsed=elapsed)
