"""Per-node convex costs with gradient access and certified Hessian bounds.

A stack of N node costs of common dimension d defines the block-separable
objective F(x_1,...,x_N) = sum_i f_i(x_i) on R^{Nd} and the aggregate
f(x) = sum_i f_i(x) on R^d.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NodeCost",
    "QuadraticCost",
    "LogisticCost",
    "ObjectiveStack",
    "eval_stack",
    "grad_stack",
    "logistic_hessian_bounds",
    "condition_number",
    "save_dataset",
    "load_dataset",
]


class NodeCost:
    """Base class: twice-differentiable strongly convex node cost.

    Subclasses provide value(x), grad(x), and the Hessian bounds
    (h_min, h_max) with 0 < h_min <= h_max. Instances are immutable and
    evaluation is reentrant.
    """

    dimension: int
    h_min: float
    h_max: float

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class QuadraticCost(NodeCost):
    """f(x) = 0.5 x'Ax + b'x + c with A symmetric positive definite.

    Test instrument: the Hessian bounds are the exact extreme eigenvalues
    and the unconstrained minimizer is -A^{-1} b.
    """

    matrix: np.ndarray
    linear: np.ndarray
    constant: float = 0.0
    h_min: float = field(init=False)
    h_max: float = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.linear, dtype=float)
        if a.shape != (b.size, b.size):
            raise ValueError("matrix/linear dimension mismatch")
        if np.max(np.abs(a - a.T)) > 1e-12:
            raise ValueError("quadratic matrix must be symmetric")
        eigs = np.linalg.eigvalsh(a)
        if eigs[0] <= 0.0:
            raise ValueError("quadratic matrix must be positive definite")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "linear", b)
        object.__setattr__(self, "h_min", float(eigs[0]))
        object.__setattr__(self, "h_max", float(eigs[-1]))

    @property
    def dimension(self):
        return self.linear.size

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.matrix @ x + self.linear @ x + self.constant)

    def grad(self, x):
        return self.matrix @ np.asarray(x, dtype=float) + self.linear

    def minimizer(self):
        return np.linalg.solve(self.matrix, -self.linear)


def _stable_logloss(z):
    # log(1 + exp(-z)) without overflow
    return float(np.log1p(np.exp(-abs(z))) + max(0.0, -z))


def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


@dataclass(frozen=True, eq=False)
class LogisticCost(NodeCost):
    """l2-regularized logistic loss of a single labeled sample.

    f(x) = log(1 + exp(-c'x)) + (reg/(2 N)) ||x||^2 where
    c = (b*a, b) stacks the labeled feature vector with an intercept slot,
    b in {-1,+1}, and reg > 0 is shared across the N nodes.
    """

    feature: np.ndarray
    label: int
    reg: float
    n_nodes: int

    def __post_init__(self):
        a = np.asarray(self.feature, dtype=float)
        if self.label not in (-1, 1):
            raise ValueError("label must be -1 or +1")
        if self.reg <= 0 or self.n_nodes < 1:
            raise ValueError("need reg > 0 and n_nodes >= 1")
        object.__setattr__(self, "feature", a)

    @property
    def stacked_sample(self):
        """c = (b*a, b), dimension d."""
        return np.concatenate([self.label * self.feature, [float(self.label)]])

    @property
    def dimension(self):
        return self.feature.size + 1

    @property
    def h_min(self):
        return self.reg / self.n_nodes

    @property
    def h_max(self):
        c = self.stacked_sample
        return self.reg / self.n_nodes + 0.25 * float(c @ c)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        z = float(self.stacked_sample @ x)
        return _stable_logloss(z) + 0.5 * self.reg / self.n_nodes * float(x @ x)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        c = self.stacked_sample
        z = float(c @ x)
        return -_sigmoid(-z) * c + (self.reg / self.n_nodes) * x


def logistic_hessian_bounds(cost: LogisticCost):
    """(h_min, h_max) = (reg/N, reg/N + ||c||^2 / 4).

    ||c c'|| = ||c||^2 for the rank-one sample term, and the logistic
    curvature factor never exceeds 1/4.
    """
    return cost.h_min, cost.h_max


@dataclass(frozen=True, eq=False)
class ObjectiveStack:
    """N node costs of common dimension d."""

    costs: tuple

    def __post_init__(self):
        costs = tuple(self.costs)
        if not costs:
            raise ValueError("empty stack")
        d = costs[0].dimension
        if any(c.dimension != d for c in costs):
            raise ValueError("node costs must share a common dimension")
        object.__setattr__(self, "costs", costs)

    @property
    def n_nodes(self):
        return len(self.costs)

    @property
    def dimension(self):
        return self.costs[0].dimension

    @property
    def h_min(self):
        return min(c.h_min for c in self.costs)

    @property
    def h_max(self):
        return max(c.h_max for c in self.costs)

    def aggregate_value(self, x):
        """f(x) = sum_i f_i(x), common argument."""
        return sum(c.value(x) for c in self.costs)

    def aggregate_grad(self, x):
        g = np.zeros(self.dimension)
        for c in self.costs:
            g += c.grad(x)
        return g


def _blocks(stack, x):
    x = np.asarray(x, dtype=float)
    n, d = stack.n_nodes, stack.dimension
    if x.size != n * d:
        raise ValueError(f"expected stacked vector of size {n * d}, got {x.size}")
    return x.reshape(n, d)


def eval_stack(stack: ObjectiveStack, x) -> float:
    """F(x) = sum_i f_i(x_i) for stacked x in R^{Nd}."""
    xb = _blocks(stack, x)
    return sum(c.value(xi) for c, xi in zip(stack.costs, xb))


def grad_stack(stack: ObjectiveStack, x) -> np.ndarray:
    """Block-stacked gradient (grad f_1(x_1), ..., grad f_N(x_N))."""
    xb = _blocks(stack, x)
    return np.concatenate([c.grad(xi) for c, xi in zip(stack.costs, xb)])


def condition_number(stack: ObjectiveStack) -> float:
    """gamma = h_max / h_min >= 1 across the stack."""
    return stack.h_max / stack.h_min


def save_dataset(stack: ObjectiveStack, path):
    """Write per-node rows ``label,feature_1,...,feature_{d-1}`` (CSV).

    Only defined for logistic stacks; quadratic stacks are synthetic test
    instruments and are regenerated from seeds.
    """
    with open(path, "w") as fh:
        fh.write("# label, then d-1 feature entries per row\n")
        for c in stack.costs:
            if not isinstance(c, LogisticCost):
                raise TypeError("dataset files hold logistic costs only")
            row = [f"{c.label:d}"] + [f"{v:.17g}" for v in c.feature]
            fh.write(",".join(row) + "\n")


def load_dataset(path, reg=1.0) -> ObjectiveStack:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            rows.append((int(parts[0]), np.array([float(v) for v in parts[1:]])))
    n = len(rows)
    return ObjectiveStack(
        tuple(LogisticCost(feature=a, label=b, reg=reg, n_nodes=n) for b, a in rows)
    )
