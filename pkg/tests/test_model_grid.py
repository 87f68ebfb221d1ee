import numpy as np
import pytest

import modesign as md
from modesign.model_grid import _psd_sqrt


def test_interval_grid_endpoints_and_spacing():
    grid = md.build_grid(md.IntervalFactor(0.0, 15.0, 501))
    assert grid.n == 501
    assert grid.points[0, 0] == 0.0
    assert grid.points[1, 0] == pytest.approx(0.03, abs=0)
    assert grid.points[-1, 0] == 15.0
    steps = np.diff(grid.points[:, 0])
    assert np.allclose(steps, steps[0], atol=1e-14)


def test_two_point_interval_is_endpoints():
    grid = md.build_grid(md.IntervalFactor(0.0, 1.0, 2))
    assert grid.points[:, 0].tolist() == [0.0, 1.0]


def test_product_grid_finite_block_outermost():
    grid = md.build_grid([
        md.FiniteFactor((0.0, 1.0)),
        md.IntervalFactor(-1.0, 1.0, 201),
    ])
    assert grid.n == 402
    assert np.all(grid.points[:201, 0] == 0.0)
    assert np.all(grid.points[201:, 0] == 1.0)
    assert grid.points[0, 1] == -1.0
    assert grid.points[200, 1] == 1.0


def test_grid_errors_name_the_dimension():
    with pytest.raises(ValueError, match="dimension 0"):
        md.build_grid(md.IntervalFactor(0.0, 1.0, 1))
    with pytest.raises(ValueError, match="dimension 1"):
        md.build_grid([md.FiniteFactor((0.0,)), md.IntervalFactor(0.0, np.inf, 5)])
    with pytest.raises(ValueError, match="dimension 0"):
        md.build_grid(md.FiniteFactor(()))


def test_grid_is_deterministic_and_cached():
    a = md.build_grid(md.IntervalFactor(0.0, 15.0, 51))
    b = md.build_grid(md.IntervalFactor(0.0, 15.0, 51))
    assert np.array_equal(a.points, b.points)
    model = md.compartment_model([5.25, 1.34, 1.75, 0.13])
    z1 = a.z_matrix(model)
    z2 = a.z_matrix(model)
    assert z1 is z2
    assert not z1.flags.writeable


def test_compartment_gradient_at_zero():
    model = md.compartment_model([5.25, 1.34, 1.75, 0.13])
    z = md.gradient_vector(model, [0.0])
    assert np.allclose(z, [1.0, 0.0, 1.0, 0.0])


def test_interaction_gradient_by_substitution():
    z = md.gradient_vector(md.interaction_model(), [1.0, -1.0])
    assert np.allclose(z, [1.0, 1.0, -1.0, -1.0, 1.0])


def test_emax_gradient_hand_value_and_fd():
    model = md.emax_model([60.0, 294.0, 25.0])
    z = md.gradient_vector(model, [25.0])
    assert np.allclose(z, [1.0, 0.5, -294.0 * 25.0 / 50.0**2])
    fd = _fd_gradient(model, [25.0])
    assert np.allclose(z, fd, rtol=1e-5)


def _fd_gradient(model, point, h=1e-6):
    theta = np.asarray(model.theta_star, dtype=float)
    out = np.zeros_like(theta)
    for j in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[j] += h
        tm[j] -= h
        out[j] = (md.model_value(model, point, tp)
                  - md.model_value(model, point, tm)) / (2.0 * h)
    return out


def test_nonlinear_gradients_match_finite_differences():
    rng = np.random.RandomState(7)
    models = [
        md.compartment_model([5.25, 1.34, 1.75, 0.13]),
        md.emax_model([60.0, 294.0, 25.0]),
        md.logistic_model([49.62, 290.51, 150.0, 45.51]),
    ]
    domains = [(0.0, 15.0), (0.0, 500.0), (0.0, 500.0)]
    for model, (lo, hi) in zip(models, domains):
        for _ in range(10):
            x = [rng.uniform(lo, hi)]
            z = md.gradient_vector(model, x)
            fd = _fd_gradient(model, x)
            np.testing.assert_allclose(z, fd, rtol=1e-5, atol=1e-8)


def test_gradient_overflow_names_the_point():
    model = md.compartment_model([5.25, -10.0, 1.75, 0.13])
    with pytest.raises(ValueError, match="100"):
        md.gradient_vector(model, [100.0])


def test_information_matrix_identity_case():
    grid = md.build_grid(md.IntervalFactor(-1.0, 1.0, 2))
    model = md.linear_model(monomials=[[0], [1]])
    M = md.information_matrix(grid, model, np.array([0.5, 0.5]))
    assert np.allclose(M, np.eye(2))


def test_information_matrix_single_point_rank_one():
    grid = md.build_grid(md.IntervalFactor(0.0, 15.0, 11))
    model = md.compartment_model([5.25, 1.34, 1.75, 0.13])
    w = np.zeros(11)
    w[0] = 1.0
    M = md.information_matrix(grid, model, w)
    z = grid.z_matrix(model)[0]
    assert np.allclose(M, np.outer(z, z))
    assert np.linalg.matrix_rank(M) == 1


def test_information_matrix_linear_in_weights():
    rng = np.random.RandomState(3)
    grid = md.build_grid(md.IntervalFactor(0.0, 15.0, 21))
    model = md.compartment_model([5.25, 1.34, 1.75, 0.13])
    for _ in range(20):
        w1 = rng.dirichlet(np.ones(21))
        w2 = rng.dirichlet(np.ones(21))
        a = rng.uniform()
        lhs = md.information_matrix(grid, model, a * w1 + (1 - a) * w2)
        rhs = a * md.information_matrix(grid, model, w1) \
            + (1 - a) * md.information_matrix(grid, model, w2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        M = md.information_matrix(grid, model, w1)
        assert np.array_equal(M, M.T)


def test_integral_L_constant_model():
    model = md.linear_model(monomials=[[0]])
    L = md.integral_L_matrix(model, (0.0, 1.0), 8)
    assert np.allclose(L, [[1.0]])


def test_integral_L_linear_model_closed_form():
    model = md.linear_model(monomials=[[0], [1]])
    L = md.integral_L_matrix(model, (0.0, 1.0), 64)
    target = np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])
    # eigendecomposition square-root oracle
    lam, V = np.linalg.eigh(target)
    oracle = (V * np.sqrt(lam)) @ V.T
    np.testing.assert_allclose(L, oracle, atol=1e-13)
    np.testing.assert_allclose(L @ L.T, target, atol=1e-13)


def test_integral_L_quadrature_self_consistency():
    model = md.compartment_model([5.25, 1.34, 1.75, 0.13])
    L200 = md.integral_L_matrix(model, (2.0, 10.0), 200)
    L400 = md.integral_L_matrix(model, (2.0, 10.0), 400)
    assert np.abs(L200 - L400).max() <= 1e-10


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(ValueError, match="positive semidefinite"):
        _psd_sqrt(np.diag([1.0, -1.0]))


def test_design_support_threshold():
    design = md.Design(np.array([0.4999, 0.4999, 1.1e-4, 1e-5, 8e-5]))
    assert design.support().tolist() == [0, 1, 2]


def test_design_rejects_bad_weights():
    with pytest.raises(ValueError, match="sum"):
        md.Design(np.array([0.5, 0.4]))
    with pytest.raises(ValueError, match="nonnegative"):
        md.Design(np.array([1.5, -0.5]))
