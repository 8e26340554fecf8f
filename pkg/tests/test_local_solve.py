"""Per-node prox solver, gradient step, exact augmented-objective oracle."""

import numpy as np
import pytest

from dalopt.local_solve import (
    ProxProblem,
    SolverBudget,
    al_objective_grad,
    exact_al_minimizer,
    exact_al_minimizer_direct,
    gradient_step_local,
    prox_local,
    prox_local_info,
)
from dalopt.objective import LogisticCost, ObjectiveStack, QuadraticCost, grad_stack
from dalopt.theory import saddle_point


def scalar_quadratic(center, curvature=1.0):
    return QuadraticCost(matrix=np.array([[curvature]]), linear=np.array([-curvature * center]))


class TestProxLocal:
    def test_already_optimal_short_circuits(self):
        p = ProxProblem(cost=scalar_quadratic(0.0), rho=1.0, linear_term=np.zeros(1))
        y, grads = prox_local_info(p, SolverBudget(warm_start=np.zeros(1)))
        assert y == pytest.approx(0.0)
        assert grads == 1  # only the distance-estimate evaluation

    def test_quadratic_closed_form(self):
        # min 0.5 (y-3)^2 + 0.5 y^2 -> y = 3/2
        p = ProxProblem(cost=scalar_quadratic(3.0), rho=1.0, linear_term=np.zeros(1))
        eps = 1e-8
        y = prox_local(p, SolverBudget(warm_start=np.zeros(1), epsilon=eps))
        nu = p.cost.h_min + p.rho
        assert abs(float(y[0]) - 1.5) <= np.sqrt(2 * eps / nu)

    def test_matches_linear_solve_oracle(self, rng):
        a = np.array([[2.0, 0.3], [0.3, 1.0]])
        cost = QuadraticCost(matrix=a, linear=rng.standard_normal(2))
        v = rng.standard_normal(2)
        rho = 0.7
        p = ProxProblem(cost=cost, rho=rho, linear_term=v)
        y = prox_local(p, SolverBudget(warm_start=np.zeros(2), epsilon=1e-12))
        oracle = np.linalg.solve(a + rho * np.eye(2), -(cost.linear + v))
        assert np.allclose(y, oracle, atol=1e-5)

    def test_logistic_gradient_norm_certificate(self, rng):
        cost = LogisticCost(feature=rng.standard_normal(4), label=1, reg=1.0, n_nodes=3)
        v = rng.standard_normal(5)
        rho = 0.5
        eps = 1e-6
        p = ProxProblem(cost=cost, rho=rho, linear_term=v)
        y = prox_local(p, SolverBudget(warm_start=np.zeros(5), epsilon=eps))
        gn = np.linalg.norm(cost.grad(y) + v + rho * y)
        assert gn <= np.sqrt(2 * (cost.h_max + rho) * eps)

    def test_iteration_cap_raises(self):
        from dalopt.local_solve import SolverError

        p = ProxProblem(cost=scalar_quadratic(100.0), rho=0.0, linear_term=np.zeros(1))
        with pytest.raises(SolverError, match="exceeded"):
            prox_local(p, SolverBudget(warm_start=np.zeros(1), epsilon=1e-14, max_iterations=2))


class TestGradientStepLocal:
    def test_fixed_point(self, rng):
        cost = scalar_quadratic(2.0)
        x = rng.standard_normal(1)
        mu = -cost.grad(x)
        out = gradient_step_local(cost, x, x, mu, beta=1.0, rho=1.0)
        assert np.allclose(out, x, atol=1e-15)

    def test_direct_arithmetic(self):
        cost = scalar_quadratic(0.0)
        out = gradient_step_local(
            cost, np.array([1.0]), np.array([1.0]), np.zeros(1), beta=0.1, rho=1.0
        )
        assert out == pytest.approx(0.9)

    def test_matches_stacked_al_gradient(self, rng, chain5_net, quad5_stack):
        net, stack = chain5_net, quad5_stack
        n, d = stack.n_nodes, stack.dimension
        x = rng.standard_normal(n * d)
        mu = rng.standard_normal(n * d)
        beta, rho = 0.05, 1.3
        xbar = net.weights_apply(x, d)
        stepped = np.concatenate([
            gradient_step_local(
                stack.costs[i],
                x[i * d : (i + 1) * d],
                xbar[i * d : (i + 1) * d],
                mu[i * d : (i + 1) * d],
                beta,
                rho,
            )
            for i in range(n)
        ])
        oracle = x - beta * al_objective_grad(stack, net, x, mu, rho)
        assert np.allclose(stepped, oracle, atol=1e-12)


class TestExactAlMinimizer:
    def test_rho_zero_decouples(self, chain5_net, quad5_stack, rng):
        net, stack = chain5_net, quad5_stack
        n, d = stack.n_nodes, stack.dimension
        mu = rng.standard_normal(n * d)
        x = exact_al_minimizer(stack, net, mu, rho=0.0, tol=1e-12)
        for i, c in enumerate(stack.costs):
            block = np.linalg.solve(c.matrix, -(c.linear + mu[i * d : (i + 1) * d]))
            assert np.allclose(x[i * d : (i + 1) * d], block, atol=1e-9)

    def test_matches_direct_solve(self, chain5_net, quad5_stack, rng):
        net, stack = chain5_net, quad5_stack
        mu = rng.standard_normal(stack.n_nodes * stack.dimension)
        rho = 2.0
        x_it = exact_al_minimizer(stack, net, mu, rho, tol=1e-12)
        x_direct = exact_al_minimizer_direct(stack, net, mu, rho)
        assert np.allclose(x_it, x_direct, atol=1e-9)

    def test_saddle_dual_returns_consensus(self, chain5_net, quad5_stack, quad5_ref):
        net, stack, ref = chain5_net, quad5_stack, quad5_ref
        saddle = saddle_point(stack, ref.x_star)
        x = exact_al_minimizer(stack, net, saddle.mu_bullet, rho=1.0, tol=1e-12)
        assert np.allclose(x, saddle.x_bullet, atol=1e-9)

    def test_stationarity_residual(self, chain5_net, quad5_stack, rng):
        net, stack = chain5_net, quad5_stack
        mu = rng.standard_normal(stack.n_nodes * stack.dimension)
        rho, tol = 1.5, 1e-11
        x = exact_al_minimizer(stack, net, mu, rho, tol=tol)
        g = grad_stack(stack, x) + mu + rho * net.laplacian_apply(x, stack.dimension)
        assert np.linalg.norm(g) <= tol


class TestJacobiSweepContraction:
    def test_single_sweep_bound(self, chain5_net, quad5_stack, rng):
        # one full sweep of exact-ish prox solves contracts the distance to
        # the exact augmented-objective minimizer by <= rho/(rho+h_min)
        from dalopt.almethods import jacobi_sweeps

        net, stack = chain5_net, quad5_stack
        n, d = stack.n_nodes, stack.dimension
        rho = stack.h_min
        eps = 1e-12
        mu = rng.standard_normal(n * d)
        mu = mu - np.tile(mu.reshape(n, d).mean(axis=0), n)  # zero block sum
        x = rng.standard_normal(d)
        x = np.tile(x, n) + rng.standard_normal(n * d)
        x_prime = exact_al_minimizer_direct(stack, net, mu, rho)
        x_new, _, _ = jacobi_sweeps(stack, net, x, mu, rho, tau=1, epsilon=eps)
        delta = rho / (rho + stack.h_min)
        c_slack = 2 * np.sqrt(2 * (stack.h_max + rho)) / (stack.h_min + rho)
        num = np.linalg.norm(x_new - x_prime)
        den = np.linalg.norm(x - x_prime)
        assert num <= (delta + c_slack * np.sqrt(eps)) * den
