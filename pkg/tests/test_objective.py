"""Node costs, stacked objective, Hessian bounds."""

import numpy as np
import pytest

from dalopt.objective import (
    LogisticCost,
    ObjectiveStack,
    QuadraticCost,
    condition_number,
    eval_stack,
    grad_stack,
    load_dataset,
    logistic_hessian_bounds,
    save_dataset,
)


def scalar_quadratic(center, curvature=1.0):
    return QuadraticCost(matrix=np.array([[curvature]]), linear=np.array([-curvature * center]))


def random_logistic_stack(rng, n=4, d=5, reg=1.0):
    costs = []
    for _ in range(n):
        a = rng.standard_normal(d - 1)
        b = int(rng.choice([-1, 1]))
        costs.append(LogisticCost(feature=a, label=b, reg=reg, n_nodes=n))
    return ObjectiveStack(tuple(costs))


class TestEvalStack:
    def test_pure_quadratic_at_zero(self):
        stack = ObjectiveStack(tuple(scalar_quadratic(0.0) for _ in range(3)))
        assert eval_stack(stack, np.zeros(3)) == 0.0

    def test_each_block_at_its_minimizer(self):
        # value at the minimizer c is -curvature * c^2 / 2 per block
        stack = ObjectiveStack((scalar_quadratic(1.0), scalar_quadratic(2.0)))
        assert eval_stack(stack, np.array([1.0, 2.0])) == pytest.approx(-2.5, abs=1e-15)

    def test_matches_termwise_oracle(self, rng):
        stack = random_logistic_stack(rng)
        x = rng.standard_normal(stack.n_nodes * stack.dimension)
        blocks = x.reshape(stack.n_nodes, stack.dimension)
        oracle = sum(c.value(xi) for c, xi in zip(stack.costs, blocks))
        assert eval_stack(stack, x) == pytest.approx(oracle, rel=1e-12)

    def test_dimension_mismatch(self, rng):
        stack = random_logistic_stack(rng)
        with pytest.raises(ValueError, match="size"):
            eval_stack(stack, np.zeros(7))


class TestGradStack:
    def test_quadratic_at_minimizer(self):
        stack = ObjectiveStack((scalar_quadratic(2.0), scalar_quadratic(-1.0)))
        g = grad_stack(stack, np.array([2.0, -1.0]))
        assert np.allclose(g, 0.0, atol=1e-15)

    def test_logistic_finite_differences(self, rng):
        stack = random_logistic_stack(rng)
        n, d = stack.n_nodes, stack.dimension
        x = rng.standard_normal(n * d)
        g = grad_stack(stack, x)
        h = 1e-6
        for idx in range(n * d):
            e = np.zeros(n * d)
            e[idx] = h
            fd = (eval_stack(stack, x + e) - eval_stack(stack, x - e)) / (2 * h)
            assert g[idx] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_blockwise_decomposition(self, rng):
        stack = random_logistic_stack(rng)
        n, d = stack.n_nodes, stack.dimension
        x = rng.standard_normal(n * d)
        g0 = grad_stack(stack, x)
        x2 = x.copy()
        x2[d : 2 * d] += 1.0  # perturb block 1 only
        g1 = grad_stack(stack, x2)
        changed = np.abs(g1 - g0) > 0
        assert changed[d : 2 * d].any()
        changed[d : 2 * d] = False
        assert not changed.any()


class TestLogisticHessianBounds:
    def test_direct_arithmetic(self):
        # P=1, N=10, ||c||^2 = 4 -> (0.1, 1.1)
        a = np.array([1.0, np.sqrt(2.0)])  # ||c||^2 = 1 + 2 + 1 = 4
        cost = LogisticCost(feature=a, label=1, reg=1.0, n_nodes=10)
        lo, hi = logistic_hessian_bounds(cost)
        assert lo == pytest.approx(0.1, abs=1e-15)
        assert hi == pytest.approx(1.1, abs=1e-15)

    def test_sampled_curvature_within_bounds(self, rng):
        cost = LogisticCost(feature=rng.standard_normal(4), label=-1, reg=2.0, n_nodes=5)
        lo, hi = logistic_hessian_bounds(cost)
        h = 1e-5
        for _ in range(10_000):
            x = rng.standard_normal(5)
            u = rng.standard_normal(5)
            u /= np.linalg.norm(u)
            curv = float(u @ (cost.grad(x + h * u) - cost.grad(x - h * u))) / (2 * h)
            assert lo - 1e-6 <= curv <= hi + 1e-6

    def test_strong_convexity_and_lipschitz_sampled(self, rng):
        cost = LogisticCost(feature=rng.standard_normal(3), label=1, reg=1.0, n_nodes=4)
        lo, hi = cost.h_min, cost.h_max
        xs = rng.standard_normal((10_000, 4))
        ys = rng.standard_normal((10_000, 4))
        for x, y in zip(xs, ys):
            gap = cost.value(y) - cost.value(x) - float(cost.grad(x) @ (y - x))
            assert gap >= 0.5 * lo * float((x - y) @ (x - y)) - 1e-9
            gd = np.linalg.norm(cost.grad(x) - cost.grad(y))
            assert gd <= hi * np.linalg.norm(x - y) + 1e-9


class TestConditionNumber:
    def test_identical_quadratics(self):
        stack = ObjectiveStack(tuple(scalar_quadratic(0.0) for _ in range(3)))
        assert condition_number(stack) == 1.0

    def test_from_logistic_bounds(self):
        # P=1, N=10, max ||c||^2 = 4 -> gamma = 1.1 / 0.1 = 11
        a4 = np.array([1.0, np.sqrt(2.0)])
        a0 = np.zeros(2)
        costs = (
            LogisticCost(feature=a4, label=1, reg=1.0, n_nodes=10),
            LogisticCost(feature=a0, label=-1, reg=1.0, n_nodes=10),
        )
        assert condition_number(ObjectiveStack(costs)) == pytest.approx(11.0, rel=1e-12)


class TestValidation:
    def test_mixed_dimensions_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            ObjectiveStack((scalar_quadratic(0.0),
                            QuadraticCost(matrix=np.eye(2), linear=np.zeros(2))))

    def test_indefinite_quadratic_rejected(self):
        with pytest.raises(ValueError, match="definite"):
            QuadraticCost(matrix=np.diag([1.0, -1.0]), linear=np.zeros(2))

    def test_bad_label_rejected(self):
        with pytest.raises(ValueError, match="label"):
            LogisticCost(feature=np.ones(2), label=0, reg=1.0, n_nodes=2)


class TestDatasetIO:
    def test_roundtrip(self, tmp_path, rng):
        stack = random_logistic_stack(rng, n=3, d=4, reg=2.0)
        path = tmp_path / "data.csv"
        save_dataset(stack, path)
        loaded = load_dataset(path, reg=2.0)
        assert loaded.n_nodes == 3 and loaded.dimension == 4
        for a, b in zip(loaded.costs, stack.costs):
            assert a.label == b.label
            assert np.array_equal(a.feature, b.feature)

    def test_quadratic_rejected(self, tmp_path):
        stack = ObjectiveStack((scalar_quadratic(0.0),))
        with pytest.raises(TypeError, match="logistic"):
            save_dataset(stack, tmp_path / "bad.csv")


class TestNumericalStability:
    def test_extreme_arguments_finite(self):
        cost = LogisticCost(feature=np.array([100.0]), label=1, reg=1.0, n_nodes=1)
        for x in (np.array([500.0, 0.0]), np.array([-500.0, 0.0])):
            assert np.isfinite(cost.value(x))
            assert np.isfinite(cost.grad(x)).all()
