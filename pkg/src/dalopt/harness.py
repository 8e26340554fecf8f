"""Experiment orchestration: config ingestion, data generation, reference
solve, runs, metrics, CSV and plot emission.

An experiment is described by a JSON config file (see ExperimentConfig)
and produces a directory containing the network file, the dataset, one
trace CSV and one certificate report per algorithm, and two semi-log
plots rendered from the CSVs alone.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .almethods import AlgorithmConfig, RunTrace, run_variant, read_trace_csv, write_trace_csv
from .network import (
    NetworkModel,
    build_chain_graph,
    build_complete_graph,
    build_geometric_graph,
    build_network,
    save_network,
)
from .objective import LogisticCost, ObjectiveStack, QuadraticCost, save_dataset
from .svgplot import semilog_svg
from .theory import certificate, lyapunov_value, saddle_point

__all__ = [
    "ExperimentConfig",
    "ReferenceSolution",
    "StageError",
    "OUTPUT_DIR_ENV",
    "generate_logistic_data",
    "generate_quadratic_stack",
    "reference_solve",
    "relative_cost_error",
    "trace_metrics",
    "resolve_algorithm",
    "run_experiment",
    "render_plots",
]

OUTPUT_DIR_ENV = "DALOPT_OUTPUT_DIR"


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment batch.

    network: {"type": "geometric"|"chain"|"complete", "n": int,
              "radius": float, "seed": int}
    objective: {"type": "logistic"|"quadratic", "d": int, "reg": float,
                "seed": int}
    algorithms: list of entries, each either {"recipe": <name>, ...} or an
        explicit {"variant", "alpha", "rho", "tau", "beta"} set; every
        entry may carry "label", "seed", "epsilon", and recipe entries may
        override "tau".
    stop_rel_cost: optional early-stop threshold on the relative cost
        error (runs end once they cross it).
    """

    network: dict
    objective: dict
    algorithms: list
    k_max: int = 300
    epsilon: float = 1e-5
    stop_rel_cost: float | None = None
    output_dir: str = "dalopt_out"

    @classmethod
    def from_dict(cls, doc):
        known = {"network", "objective", "algorithms", "k_max", "epsilon",
                 "stop_rel_cost", "output_dir"}
        extra = set(doc) - known
        if extra:
            raise StageError("config", f"unknown config keys: {sorted(extra)}")
        for key in ("network", "objective", "algorithms"):
            if key not in doc:
                raise StageError("config", f"missing config key {key!r}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise StageError("config", f"cannot read {path}: {exc}") from exc
        return cls.from_dict(doc)


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    """Centralized optimum of the aggregate cost f = sum_i f_i."""

    x_star: np.ndarray
    f_star: float
    grad_norm_at_solution: float


def generate_logistic_data(n, d, reg=1.0, seed=0) -> ObjectiveStack:
    """One labeled sample per node.

    Features and the ground-truth vector are iid standard normal; labels
    follow the sign of the true affine score plus N(0, 0.001^2) noise.
    """
    if d < 2:
        raise ValueError("need d >= 2 (features plus intercept)")
    rng = np.random.default_rng(seed)
    x_true = rng.standard_normal(d)
    costs = []
    for _ in range(n):
        a = rng.standard_normal(d - 1)
        eps = rng.normal(0.0, 0.001)
        score = float(x_true[:-1] @ a + x_true[-1] + eps)
        b = 1 if score >= 0 else -1
        costs.append(LogisticCost(feature=a, label=b, reg=reg, n_nodes=n))
    return ObjectiveStack(tuple(costs))


def generate_quadratic_stack(n, d, seed=0, h_lo=0.5, h_hi=5.0) -> ObjectiveStack:
    """Random strongly convex quadratics with spectra in [h_lo, h_hi]."""
    rng = np.random.default_rng(seed)
    costs = []
    for _ in range(n):
        q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        eigs = rng.uniform(h_lo, h_hi, size=d)
        a = q @ np.diag(eigs) @ q.T
        a = 0.5 * (a + a.T)
        b = rng.standard_normal(d)
        costs.append(QuadraticCost(matrix=a, linear=b))
    return ObjectiveStack(tuple(costs))


def reference_solve(stack: ObjectiveStack, max_iterations=2_000_000) -> ReferenceSolution:
    """Centralized minimizer of f(x) = sum_i f_i(x).

    All-quadratic stacks are solved in closed form; otherwise an
    accelerated gradient method runs until the gradient norm is below
    1e-12 * max(1, ||grad f(0)||).
    """
    d = stack.dimension
    g0 = float(np.linalg.norm(stack.aggregate_grad(np.zeros(d))))
    tol = 1e-12 * max(1.0, g0)
    if all(isinstance(c, QuadraticCost) for c in stack.costs):
        a = sum(c.matrix for c in stack.costs)
        b = sum(c.linear for c in stack.costs)
        x = np.linalg.solve(a, -b)
    else:
        m = sum(c.h_min for c in stack.costs)
        lip = sum(c.h_max for c in stack.costs)
        sq = math.sqrt(m / lip)
        momentum = (1.0 - sq) / (1.0 + sq)
        x = np.zeros(d)
        y = x.copy()
        for it in range(max_iterations):
            g = stack.aggregate_grad(y)
            if it % 10 == 0 and float(np.linalg.norm(stack.aggregate_grad(x))) <= tol:
                break
            x_new = y - g / lip
            y = x_new + momentum * (x_new - x)
            x = x_new
        else:
            raise StageError("reference", f"did not reach gradient norm {tol}")
    gn = float(np.linalg.norm(stack.aggregate_grad(x)))
    if gn > tol:
        raise StageError("reference", f"gradient norm {gn} above tolerance {tol}")
    return ReferenceSolution(x_star=x, f_star=stack.aggregate_value(x),
                             grad_norm_at_solution=gn)


def relative_cost_error(stack: ObjectiveStack, ref: ReferenceSolution, x, f0=None) -> float:
    """(1/N) sum_i (f(x_i) - f*) / (f(0) - f*), f evaluated at every
    node's local copy. Tiny negative rounding residue clamps to 0."""
    d = stack.dimension
    if f0 is None:
        f0 = stack.aggregate_value(np.zeros(d))
    denom = f0 - ref.f_star
    if denom <= 0:
        raise StageError("metrics", "degenerate instance: f(0) equals f*")
    x = np.asarray(x, dtype=float).reshape(stack.n_nodes, d)
    total = sum(stack.aggregate_value(xi) - ref.f_star for xi in x)
    return max(total / (stack.n_nodes * denom), 0.0)


def trace_metrics(stack, net: NetworkModel, ref: ReferenceSolution, trace: RunTrace):
    """Per-row (rel_cost_error, primal_error_norm, lyapunov_value) arrays."""
    saddle = saddle_point(stack, ref.x_star)
    f0 = stack.aggregate_value(np.zeros(stack.dimension))
    rel, prim, lyap = [], [], []
    for x, mu in zip(trace.xs, trace.mus):
        rel.append(relative_cost_error(stack, ref, x, f0))
        prim.append(float(np.linalg.norm(x - saddle.x_bullet)))
        lyap.append(lyapunov_value(x, mu, saddle, net.spec, stack.h_min))
    return np.array(rel), np.array(prim), np.array(lyap)


def resolve_algorithm(entry, stack, net, default_epsilon=1e-5) -> AlgorithmConfig:
    """Turn one config entry (recipe or explicit) into an AlgorithmConfig."""
    entry = dict(entry)
    label = entry.pop("label", None)
    seed = entry.pop("seed", 0)
    epsilon = entry.pop("epsilon", default_epsilon)
    if "recipe" in entry:
        from .theory import resolve_recipe

        recipe = entry.pop("recipe")
        variant, alpha, rho, beta, tau = resolve_recipe(
            recipe, stack.h_min, stack.h_max, net.lambda2, stack.n_nodes
        )
        alpha = entry.pop("alpha", alpha)
        rho = entry.pop("rho", rho)
        beta = entry.pop("beta", beta)
        tau = entry.pop("tau", tau)
        label = label or recipe
    else:
        try:
            variant = entry.pop("variant")
            alpha = entry.pop("alpha")
            rho = entry.pop("rho")
            tau = entry.pop("tau")
        except KeyError as exc:
            raise StageError("config", f"algorithm entry missing {exc}") from exc
        beta = entry.pop("beta", None)
        label = label or variant
    if entry:
        raise StageError("config", f"unknown algorithm keys: {sorted(entry)}")
    return AlgorithmConfig(variant=variant, alpha=alpha, rho=rho, tau=int(tau),
                           beta=beta, seed=seed, epsilon=epsilon, label=label)


def _build_graph(spec):
    kind = spec.get("type", "geometric")
    n = spec["n"]
    meta = {"type": kind, "n": n}
    if kind == "geometric":
        radius = spec.get("radius", 0.45)
        seed = spec.get("seed", 0)
        g, attempts = build_geometric_graph(n, radius=radius, rng_seed=seed)
        meta.update(radius=radius, seed=seed, attempts=attempts)
        return g, meta
    if kind == "chain":
        return build_chain_graph(n), meta
    if kind == "complete":
        return build_complete_graph(n), meta
    raise StageError("network", f"unknown network type {kind!r}")


def _build_objective(spec):
    kind = spec.get("type", "logistic")
    n, d = spec["n"], spec.get("d", 15)
    seed = spec.get("seed", 0)
    if kind == "logistic":
        return generate_logistic_data(n, d, reg=spec.get("reg", 1.0), seed=seed)
    if kind == "quadratic":
        return generate_quadratic_stack(
            n, d, seed=seed,
            h_lo=spec.get("h_lo", 0.5), h_hi=spec.get("h_hi", 5.0),
        )
    raise StageError("objective", f"unknown objective type {kind!r}")


def render_plots(out_dir):
    """Draw both figures purely from the trace CSVs in out_dir."""
    out_dir = Path(out_dir)
    csvs = sorted(out_dir.glob("trace_*.csv"))
    if not csvs:
        raise StageError("plots", f"no trace CSVs in {out_dir}")
    tx_series, comp_series = [], []
    for p in csvs:
        data = read_trace_csv(p)
        label = p.stem[len("trace_"):]
        tx_series.append((label, data["transmissions_total"], data["rel_cost_error"]))
        comp_series.append((label, data["grad_evals_total"], data["rel_cost_error"]))
    semilog_svg(
        out_dir / "error_vs_transmissions.svg", tx_series,
        xlabel="total transmissions", ylabel="average relative cost error",
        title="Relative cost error vs. communication",
    )
    semilog_svg(
        out_dir / "error_vs_computation.svg", comp_series,
        xlabel="cumulative gradient evaluations",
        ylabel="average relative cost error",
        title="Relative cost error vs. computation",
    )


def run_experiment(cfg: ExperimentConfig):
    """Execute the full pipeline; returns the output directory path.

    The DALOPT_OUTPUT_DIR environment variable overrides cfg.output_dir.
    Any stage failure raises StageError naming the stage.
    """
    out = Path(os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        graph, meta = _build_graph(dict(cfg.network))
        net = build_network(graph, meta=meta)
        save_network(net, out / "network.json")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("network", str(exc)) from exc

    try:
        ospec = dict(cfg.objective)
        ospec.setdefault("n", net.node_count)
        if ospec["n"] != net.node_count:
            raise ValueError("objective node count differs from the network's")
        stack = _build_objective(ospec)
        if ospec.get("type", "logistic") == "logistic":
            save_dataset(stack, out / "dataset.csv")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("objective", str(exc)) from exc

    ref = reference_solve(stack)

    try:
        acfgs = [resolve_algorithm(e, stack, net, cfg.epsilon) for e in cfg.algorithms]
        labels = [a.name for a in acfgs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate algorithm labels: {labels}")
    except StageError:
        raise
    except Exception as exc:
        raise StageError("config", str(exc)) from exc

    f0 = stack.aggregate_value(np.zeros(stack.dimension))
    for acfg in acfgs:
        try:
            stop = None
            if cfg.stop_rel_cost is not None:
                threshold = float(cfg.stop_rel_cost)

                def stop(x, mu, k, _t=threshold):
                    return relative_cost_error(stack, ref, x, f0) <= _t

            trace = run_variant(stack, net, acfg, cfg.k_max, stop=stop)
            rel, prim, lyap = trace_metrics(stack, net, ref, trace)
            write_trace_csv(out / f"trace_{acfg.name}.csv", trace, rel, prim, lyap)
            cert = certificate(acfg, stack, net, ref.x_star)
            # cost translation: f(x_i) - f* <= (sum_j h_max_j)/2 ||x_i - x*||^2,
            # so rel_cost_error <= cost_factor * (r^k * bound_constant)^2
            cost_factor = sum(c.h_max for c in stack.costs) / (2.0 * (f0 - ref.f_star))
            with open(out / f"certificate_{acfg.name}.txt", "w") as fh:
                fh.write(f"algorithm: {acfg.name} ({acfg.variant})\n")
                fh.write(f"tau: {acfg.tau}\n")
                if acfg.beta is not None:
                    fh.write(f"beta: {acfg.beta:.17g}\n")
                fh.write(cert.report())
                fh.write(
                    "cost translation: rel_cost_error(k) <= cost_factor *"
                    " (r^k * bound_constant)^2\n"
                    f"  cost_factor    = {cost_factor:.17g}\n"
                )
        except StageError:
            raise
        except Exception as exc:
            raise StageError(f"run:{acfg.name}", str(exc)) from exc

    try:
        render_plots(out)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("plots", str(exc)) from exc
    return out
