"""Distributed augmented-Lagrangian drivers.

The generic driver alternates an inner primal policy with a dual ascent
step mu <- mu + alpha (L (x) I) x. Four concrete inner policies are
provided: synchronized Jacobi sweeps, synchronized gradient sweeps, and
their randomized single-node counterparts driven by a Poisson tick
schedule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .local_solve import ProxProblem, SolverBudget, gradient_step_local, prox_local_info
from .network import NetworkModel
from .objective import ObjectiveStack

__all__ = [
    "PrimalDualState",
    "AlgorithmConfig",
    "PoissonSchedule",
    "RunTrace",
    "ConfigError",
    "VARIANTS",
    "dual_update",
    "jacobi_sweeps",
    "gradient_sweeps",
    "sample_poisson_schedule",
    "run_det_jacobi",
    "run_det_gradient",
    "run_rand_gauss_seidel",
    "run_rand_gradient",
    "run_inexact_al",
    "run_variant",
    "write_trace_csv",
    "read_trace_csv",
    "TRACE_HEADER",
]

VARIANTS = ("det_jacobi", "det_gradient", "rand_gauss_seidel", "rand_gradient")

TRACE_HEADER = (
    "k,transmissions_total,grad_evals_total,rel_cost_error,"
    "primal_error_norm,dual_sum_norm,lyapunov_value"
)


class ConfigError(ValueError):
    """Inconsistent algorithm configuration."""


@dataclass
class PrimalDualState:
    """Stacked primal/dual iterates plus cached neighbor averages."""

    x: np.ndarray
    mu: np.ndarray
    xbar: np.ndarray
    outer_index: int = 0

    def copy(self):
        return PrimalDualState(self.x.copy(), self.mu.copy(), self.xbar.copy(), self.outer_index)


@dataclass(frozen=True)
class AlgorithmConfig:
    """Variant tag and tuning parameters of one run.

    tau is the exact inner-iteration count for deterministic variants and
    the expected per-node tick count (Poisson rate multiplier) for the
    randomized ones.
    """

    variant: str
    alpha: float
    rho: float
    tau: int
    beta: float | None = None
    seed: int = 0
    epsilon: float = 1e-5
    label: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.alpha <= 0 or self.rho < 0 or self.tau < 1:
            raise ConfigError("need alpha > 0, rho >= 0, tau >= 1")
        if self.variant in ("det_gradient", "rand_gradient"):
            if self.beta is None or self.beta <= 0:
                raise ConfigError("gradient variants need beta > 0")

    @property
    def name(self):
        return self.label or self.variant


@dataclass(frozen=True)
class PoissonSchedule:
    """Tick count and ordered node identities for one outer iteration."""

    nodes: np.ndarray  # shape (tau_k,), values in [0, N)

    @property
    def tick_count(self):
        return int(self.nodes.size)


@dataclass
class RunTrace:
    """Per-outer-iteration history of one run (row 0 is the initial state)."""

    xs: list = field(default_factory=list)
    mus: list = field(default_factory=list)
    transmissions: list = field(default_factory=list)
    grad_evals: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list)
    config: AlgorithmConfig | None = None
    n_nodes: int = 0

    def record(self, x, mu, tx, ge, t):
        self.xs.append(x.copy())
        self.mus.append(mu.copy())
        self.transmissions.append(int(tx))
        self.grad_evals.append(int(ge))
        self.wall_clock.append(float(t))

    @property
    def outer_iterations(self):
        return len(self.xs) - 1


def _check_beta(cfg: AlgorithmConfig, stack: ObjectiveStack):
    limit = 1.0 / (stack.h_max + cfg.rho)
    if cfg.beta > limit * (1.0 + 1e-12):
        raise ConfigError(
            f"beta={cfg.beta} exceeds 1/(h_max+rho)={limit}; contraction not guaranteed"
        )


def dual_update(state: PrimalDualState, net: NetworkModel, alpha: float) -> PrimalDualState:
    """mu_i <- mu_i + alpha (x_i - xbar_i), the stacked dual ascent step.

    Requires state.xbar consistent with state.x; then x - xbar equals
    (L (x) I) x.
    """
    mu = state.mu + alpha * (state.x - state.xbar)
    return PrimalDualState(state.x.copy(), mu, state.xbar.copy(), state.outer_index + 1)


def jacobi_sweeps(stack, net, x, mu, rho, tau, epsilon):
    """tau synchronized Jacobi sweeps: every node solves its prox problem
    warm-started at its current block, then neighbor averages refresh.

    Returns (x_new, xbar_new, gradient_evaluations). Within one sweep the
    per-node solves read only the previous sweep's state, so they are
    order-independent.
    """
    n, d = stack.n_nodes, stack.dimension
    x = x.copy()
    xbar = net.weights_apply(x, d)
    grads = 0
    for _ in range(tau):
        new_x = np.empty_like(x)
        for i in range(n):
            sl = slice(i * d, (i + 1) * d)
            v = mu[sl] - rho * xbar[sl]
            p = ProxProblem(cost=stack.costs[i], rho=rho, linear_term=v)
            y, g = prox_local_info(p, SolverBudget(warm_start=x[sl], epsilon=epsilon))
            new_x[sl] = y
            grads += g
        x = new_x
        xbar = net.weights_apply(x, d)
    return x, xbar, grads


def gradient_sweeps(stack, net, x, mu, rho, tau, beta):
    """tau synchronized gradient sweeps; one gradient evaluation per node
    per sweep. Returns (x_new, xbar_new, gradient_evaluations)."""
    n, d = stack.n_nodes, stack.dimension
    x = x.copy()
    xbar = net.weights_apply(x, d)
    grads = 0
    for _ in range(tau):
        new_x = np.empty_like(x)
        for i in range(n):
            sl = slice(i * d, (i + 1) * d)
            new_x[sl] = gradient_step_local(
                stack.costs[i], x[sl], xbar[sl], mu[sl], beta, rho
            )
            grads += 1
        x = new_x
        xbar = net.weights_apply(x, d)
    return x, xbar, grads


def _init_state(stack, net, x0=None):
    n, d = stack.n_nodes, stack.dimension
    if x0 is None:
        x = np.zeros(n * d)
    else:
        x = np.asarray(x0, dtype=float).copy()
        blocks = x.reshape(n, d)
        if np.max(np.abs(blocks - blocks[0])) > 0:
            raise ConfigError("primal initialization must be equal across nodes")
    return PrimalDualState(x=x, mu=np.zeros(n * d), xbar=net.weights_apply(x, d))


def _run_deterministic(stack, net, cfg, k_max, inner, x0, stop=None):
    state = _init_state(stack, net, x0)
    trace = RunTrace(config=cfg, n_nodes=stack.n_nodes)
    tx = ge = 0
    t0 = time.perf_counter()
    trace.record(state.x, state.mu, tx, ge, 0.0)
    n = stack.n_nodes
    for k in range(k_max):
        x, xbar, g = inner(state.x, state.mu)
        tx += n * cfg.tau  # one broadcast per node per inner iteration
        ge += g
        state = dual_update(PrimalDualState(x, state.mu, xbar, state.outer_index), net, cfg.alpha)
        trace.record(state.x, state.mu, tx, ge, time.perf_counter() - t0)
        if stop is not None and stop(state.x, state.mu, k + 1):
            break
    return trace


def run_det_jacobi(stack, net, cfg: AlgorithmConfig, k_max, x0=None, stop=None) -> RunTrace:
    """Deterministic AL with Jacobi primal updates."""
    if cfg.variant != "det_jacobi":
        raise ConfigError("config variant mismatch")

    def inner(x, mu):
        return jacobi_sweeps(stack, net, x, mu, cfg.rho, cfg.tau, cfg.epsilon)

    return _run_deterministic(stack, net, cfg, k_max, inner, x0, stop)


def run_det_gradient(stack, net, cfg: AlgorithmConfig, k_max, x0=None, stop=None) -> RunTrace:
    """Deterministic AL with gradient primal updates."""
    if cfg.variant != "det_gradient":
        raise ConfigError("config variant mismatch")
    _check_beta(cfg, stack)

    def inner(x, mu):
        return gradient_sweeps(stack, net, x, mu, cfg.rho, cfg.tau, cfg.beta)

    return _run_deterministic(stack, net, cfg, k_max, inner, x0, stop)


def sample_poisson_schedule(n, tau, k_max, seed) -> list[PoissonSchedule]:
    """k_max outer iterations of Poisson ticks.

    The superposition of N unit-rate clocks over an interval of length tau
    is a Poisson(N tau) tick count with iid uniform node labels, which is
    what is drawn here (cheaper than simulating N streams, identically
    distributed).
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(k_max):
        ticks = int(rng.poisson(n * tau))
        out.append(PoissonSchedule(nodes=rng.integers(0, n, size=ticks)))
    return out


def _run_randomized(stack, net, cfg, k_max, tick_update, x0, schedule, check_xbar, stop=None):
    n, d = stack.n_nodes, stack.dimension
    if schedule is None:
        schedule = sample_poisson_schedule(n, cfg.tau, k_max, cfg.seed)
    if len(schedule) < k_max:
        raise ConfigError("schedule shorter than k_max")
    w = net.weights.entries
    hoods = net.graph.neighborhoods
    state = _init_state(stack, net, x0)
    trace = RunTrace(config=cfg, n_nodes=stack.n_nodes)
    tx = ge = 0
    t0 = time.perf_counter()
    trace.record(state.x, state.mu, tx, ge, 0.0)
    x, mu, xbar = state.x, state.mu, state.xbar
    k = 0
    for sched in schedule[:k_max]:
        for i in sched.nodes:
            i = int(i)
            sl = slice(i * d, (i + 1) * d)
            new_block, g = tick_update(i, x[sl], xbar[sl], mu[sl])
            delta = new_block - x[sl]
            x[sl] = new_block
            # only the selected node broadcasts; refresh averages in O_i
            for j in hoods[i]:
                jl = slice(j * d, (j + 1) * d)
                xbar[jl] += w[j, i] * delta
            tx += 1
            ge += g
        if check_xbar:
            full = net.weights_apply(x, d)
            assert np.max(np.abs(full - xbar)) <= 1e-12 * max(1.0, np.max(np.abs(full)))
            xbar = full
        # dual update happens every outer boundary, even for zero ticks
        mu = mu + cfg.alpha * (x - xbar)
        k += 1
        trace.record(x, mu, tx, ge, time.perf_counter() - t0)
        if stop is not None and stop(x, mu, k):
            break
    return trace


def run_rand_gauss_seidel(
    stack, net, cfg: AlgorithmConfig, k_max, x0=None, schedule=None, check_xbar=False, stop=None
) -> RunTrace:
    """Randomized AL: the ticking node solves its prox problem in place."""
    if cfg.variant != "rand_gauss_seidel":
        raise ConfigError("config variant mismatch")

    def tick(i, xi, xbari, mui):
        p = ProxProblem(cost=stack.costs[i], rho=cfg.rho, linear_term=mui - cfg.rho * xbari)
        return prox_local_info(p, SolverBudget(warm_start=xi, epsilon=cfg.epsilon))

    return _run_randomized(stack, net, cfg, k_max, tick, x0, schedule, check_xbar, stop)


def run_rand_gradient(
    stack, net, cfg: AlgorithmConfig, k_max, x0=None, schedule=None, check_xbar=False, stop=None
) -> RunTrace:
    """Randomized AL: the ticking node takes one gradient step."""
    if cfg.variant != "rand_gradient":
        raise ConfigError("config variant mismatch")
    _check_beta(cfg, stack)

    def tick(i, xi, xbari, mui):
        y = gradient_step_local(stack.costs[i], xi, xbari, mui, cfg.beta, cfg.rho)
        return y, 1

    return _run_randomized(stack, net, cfg, k_max, tick, x0, schedule, check_xbar, stop)


def run_inexact_al(stack, net, cfg: AlgorithmConfig, inner_policy, k_max, x0=None) -> RunTrace:
    """Generic inexact AL driver.

    inner_policy(x, mu) -> x_next produces the new stacked primal; the dual
    then ascends along (L (x) I) x_next. The four concrete variants are
    instances of this driver with their sweep policies plugged in.
    """
    d = stack.dimension
    state = _init_state(stack, net, x0)
    trace = RunTrace(config=cfg, n_nodes=stack.n_nodes)
    t0 = time.perf_counter()
    trace.record(state.x, state.mu, 0, 0, 0.0)
    x, mu = state.x, state.mu
    for _ in range(k_max):
        x = np.asarray(inner_policy(x, mu), dtype=float)
        mu = mu + cfg.alpha * net.laplacian_apply(x, d)
        trace.record(x, mu, 0, 0, time.perf_counter() - t0)
    return trace


_RUNNERS = {
    "det_jacobi": run_det_jacobi,
    "det_gradient": run_det_gradient,
    "rand_gauss_seidel": run_rand_gauss_seidel,
    "rand_gradient": run_rand_gradient,
}


def run_variant(stack, net, cfg: AlgorithmConfig, k_max, x0=None, stop=None) -> RunTrace:
    """Dispatch on cfg.variant."""
    return _RUNNERS[cfg.variant](stack, net, cfg, k_max, x0=x0, stop=stop)


def write_trace_csv(path, trace: RunTrace, rel_cost_error, primal_error_norm, lyapunov_value):
    """Serialize one run: fixed header, one row per outer iteration.

    Metric columns are precomputed arrays aligned with the trace rows
    (the trace itself has no access to the reference solution). Floats are
    written with 17 significant digits so identical runs produce
    byte-identical files.
    """
    n_rows = len(trace.xs)
    for col in (rel_cost_error, primal_error_norm, lyapunov_value):
        if len(col) != n_rows:
            raise ValueError("metric column length mismatch")
    if trace.n_nodes < 1:
        raise ValueError("trace is missing its node count")
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for k in range(n_rows):
            mu = trace.mus[k]
            dual_sum = float(np.linalg.norm(mu.reshape(trace.n_nodes, -1).sum(axis=0)))
            fh.write(
                f"{k},{trace.transmissions[k]},{trace.grad_evals[k]},"
                f"{rel_cost_error[k]:.17g},{primal_error_norm[k]:.17g},"
                f"{dual_sum:.17g},{lyapunov_value[k]:.17g}\n"
            )


def read_trace_csv(path):
    """Load the columns of a trace CSV as a dict of numpy arrays."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header in {path}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = TRACE_HEADER.split(",")
    data = {c: np.array([float(r[i]) for r in rows]) for i, c in enumerate(cols)}
    data["k"] = data["k"].astype(int)
    return data
