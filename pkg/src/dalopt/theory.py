"""Convergence-rate certificates and diagnostic quantities.

Per-variant inner contraction factors, the global linear-rate conditions
and factor r, the primal error bound constant, saddle-point residuals, and
the Lyapunov value whose geometric decay the test suite checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkModel
from .objective import ObjectiveStack, grad_stack

__all__ = [
    "RateCertificate",
    "SaddlePoint",
    "CertificateError",
    "RECIPES",
    "xi_det_jacobi",
    "xi_det_gradient",
    "eta_rand_gs",
    "eta_rand_gradient",
    "select_tau",
    "resolve_recipe",
    "certificate",
    "saddle_residuals",
    "lyapunov_value",
    "saddle_point",
]


class CertificateError(ValueError):
    """Rate conditions violated or malformed certificate inputs."""


def xi_det_jacobi(rho, h_min, tau) -> float:
    """Inner contraction of tau Jacobi sweeps: (rho/(rho+h_min))^tau."""
    if rho < 0 or h_min <= 0 or tau < 1:
        raise ValueError("need rho >= 0, h_min > 0, tau >= 1")
    return (rho / (rho + h_min)) ** tau


def xi_det_gradient(beta, h_min, tau) -> float:
    """Inner contraction of tau gradient sweeps: (1 - beta h_min)^tau."""
    if not (0.0 < beta * h_min < 1.0):
        raise ValueError("need 0 < beta*h_min < 1")
    if tau < 1:
        raise ValueError("tau >= 1")
    return (1.0 - beta * h_min) ** tau


def eta_rand_gs(n, rho, h_min) -> float:
    """Per-unit-time contraction exponent of randomized single-node prox
    updates: N (1 - sqrt(1 - (1 - delta^2)/N)), delta = rho/(rho+h_min)."""
    if n < 1 or h_min <= 0 or rho < 0:
        raise ValueError("need n >= 1, h_min > 0, rho >= 0")
    delta = rho / (rho + h_min)
    return n * (1.0 - math.sqrt(1.0 - (1.0 - delta * delta) / n))


def eta_rand_gradient(n, beta, h_min) -> float:
    """Exponent of randomized single-node gradient updates:
    N (1 - sqrt(1 - beta h_min (1 - beta h_min)/N))."""
    if not (0.0 < beta * h_min < 1.0):
        raise ValueError("need 0 < beta*h_min < 1")
    arg = beta * h_min * (1.0 - beta * h_min)
    return n * (1.0 - math.sqrt(1.0 - arg / n))


# recipe name -> how (alpha, rho, beta, tau) are derived from (gamma,
# lambda2, n) with h_min normalized out; see resolve_recipe
RECIPES = (
    "section4_jacobi",
    "section4_gradient",
    "section5_jacobi",
    "section5_gradient",
    "section5_rand_gs",
    "section5_rand_gradient",
)


def select_tau(recipe, gamma, lambda2, n=None) -> int:
    """Inner-iteration count that drives the contraction below the global
    rate threshold for the given recipe."""
    if gamma < 1 or not (0.0 < lambda2 <= 1.0):
        raise ValueError("need gamma >= 1 and lambda2 in (0, 1]")
    if recipe == "section4_jacobi":
        return math.ceil(math.log(6.0 * gamma / lambda2) / math.log(1.0 + 1.0 / gamma))
    if recipe == "section4_gradient":
        return math.ceil(
            math.log(6.0 * gamma / lambda2) / math.log(1.0 + 1.0 / (2.0 * gamma - 1.0))
        )
    target = math.log(3.0 * (1.0 + gamma) / lambda2)
    if recipe == "section5_jacobi":
        return math.ceil(target / math.log(2.0))
    if recipe == "section5_gradient":
        return math.ceil(target / math.log((gamma + 1.0) / gamma))
    if recipe in ("section5_rand_gs", "section5_rand_gradient"):
        if n is None:
            raise ValueError("randomized recipes need the node count")
        if recipe == "section5_rand_gs":
            denom = n * (1.0 - math.sqrt(1.0 - 3.0 / (4.0 * n)))
        else:
            denom = n * (1.0 - math.sqrt(1.0 - gamma / (n * (1.0 + gamma) ** 2)))
        return math.ceil(abs(target) / denom)
    raise ValueError(f"unknown recipe {recipe!r}")


def resolve_recipe(recipe, h_min, h_max, lambda2, n=None):
    """Return (variant, alpha, rho, beta, tau) for a recipe name.

    section4 recipes use rho = h_max and alpha = h_min + rho; section5
    recipes use alpha = rho = h_min. Gradient recipes take
    beta = 1/(rho + h_max).
    """
    gamma = h_max / h_min
    tau = select_tau(recipe, gamma, lambda2, n)
    if recipe == "section4_jacobi":
        rho = h_max
        return "det_jacobi", h_min + rho, rho, None, tau
    if recipe == "section4_gradient":
        rho = h_max
        return "det_gradient", h_min + rho, rho, 1.0 / (rho + h_max), tau
    rho = h_min
    alpha = h_min
    beta = 1.0 / (rho + h_max)
    variant = {
        "section5_jacobi": "det_jacobi",
        "section5_gradient": "det_gradient",
        "section5_rand_gs": "rand_gauss_seidel",
        "section5_rand_gradient": "rand_gradient",
    }[recipe]
    return variant, alpha, rho, beta if variant.endswith("gradient") else None, tau


def inner_contraction(variant, *, rho, h_min, tau, beta=None, n=None) -> float:
    """xi for a variant: the factor by which one inner phase shrinks the
    distance to the exact augmented-objective minimizer (in expectation for
    the randomized variants)."""
    if variant == "det_jacobi":
        return xi_det_jacobi(rho, h_min, tau)
    if variant == "det_gradient":
        return xi_det_gradient(beta, h_min, tau)
    if variant == "rand_gauss_seidel":
        return math.exp(-eta_rand_gs(n, rho, h_min) * tau)
    if variant == "rand_gradient":
        return math.exp(-eta_rand_gradient(n, beta, h_min) * tau)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class RateCertificate:
    """Global linear-rate certificate of one configured run."""

    xi: float
    alpha_ok: bool
    xi_ok: bool
    r: float
    d_x: float
    d_mu: float
    bound_constant: float
    alpha: float
    rho: float
    lambda2: float
    h_min: float
    h_max: float

    @property
    def conditions_hold(self):
        return self.alpha_ok and self.xi_ok

    def report(self):
        lines = [
            "rate certificate",
            f"  alpha          = {self.alpha:.17g}",
            f"  rho            = {self.rho:.17g}",
            f"  lambda2        = {self.lambda2:.17g}",
            f"  h_min          = {self.h_min:.17g}",
            f"  h_max          = {self.h_max:.17g}",
            f"  xi             = {self.xi:.17g}",
            f"  alpha_ok       = {self.alpha_ok}",
            f"  xi_ok          = {self.xi_ok}",
            f"  r              = {self.r:.17g}",
            f"  D_x            = {self.d_x:.17g}",
            f"  D_mu           = {self.d_mu:.17g}",
            f"  bound_constant = {self.bound_constant:.17g}",
        ]
        return "\n".join(lines) + "\n"


def certificate(cfg, stack: ObjectiveStack, net: NetworkModel, x_star, x_init=None,
                strict=False) -> RateCertificate:
    """Evaluate the rate conditions and convergence factor of a config.

    x_star is the centralized optimum from the reference solver; x_init is
    the common initial block of every node (defaults to zero). With
    strict=True a violated condition raises CertificateError naming the
    failed flag; otherwise the flags are recorded on the certificate.
    """
    h_min, h_max = stack.h_min, stack.h_max
    lam2 = net.lambda2
    xi = inner_contraction(
        cfg.variant,
        rho=cfg.rho,
        h_min=h_min,
        tau=cfg.tau,
        beta=cfg.beta,
        n=stack.n_nodes,
    )
    alpha_ok = cfg.alpha <= (h_min + cfg.rho) * (1.0 + 1e-12)
    threshold = lam2 * h_min / (3.0 * (cfg.rho + h_max))
    xi_ok = xi < threshold
    r = max(
        0.5 + 1.5 * xi,
        (1.0 - cfg.alpha * lam2 / (cfg.rho + h_max)) + 3.0 * cfg.alpha * xi / h_min,
    )
    x_star = np.asarray(x_star, dtype=float)
    x_init = np.zeros_like(x_star) if x_init is None else np.asarray(x_init, dtype=float)
    d_x = float(np.linalg.norm(x_init - x_star))
    d_mu = float(
        math.sqrt(
            np.mean([np.linalg.norm(c.grad(x_star)) ** 2 for c in stack.costs])
        )
    )
    bound = math.sqrt(stack.n_nodes) * max(d_x, 2.0 * d_mu / (math.sqrt(lam2) * h_min))
    cert = RateCertificate(
        xi=xi, alpha_ok=alpha_ok, xi_ok=xi_ok, r=r, d_x=d_x, d_mu=d_mu,
        bound_constant=bound, alpha=cfg.alpha, rho=cfg.rho, lambda2=lam2,
        h_min=h_min, h_max=h_max,
    )
    if strict and not cert.conditions_hold:
        failed = [] if alpha_ok else ["alpha_ok"]
        if not xi_ok:
            failed.append("xi_ok")
        raise CertificateError(f"rate conditions violated: {', '.join(failed)}")
    return cert


@dataclass(frozen=True, eq=False)
class SaddlePoint:
    """x_bullet = 1 (x) x_star, mu_bullet = -grad F at consensus."""

    x_bullet: np.ndarray
    mu_bullet: np.ndarray


def saddle_point(stack: ObjectiveStack, x_star) -> SaddlePoint:
    x_star = np.asarray(x_star, dtype=float)
    xb = np.tile(x_star, stack.n_nodes)
    return SaddlePoint(x_bullet=xb, mu_bullet=-grad_stack(stack, xb))


def saddle_residuals(stack: ObjectiveStack, net: NetworkModel, x, mu, rho):
    """Norms of the three stationarity equations at (x, mu):

    grad F(x) + mu + rho (L (x) I) x, (L (x) I) x, and the blockwise sum
    of mu.
    """
    d = stack.dimension
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    r1 = grad_stack(stack, x) + mu + rho * net.laplacian_apply(x, d)
    r2 = net.laplacian_apply(x, d)
    r3 = mu.reshape(stack.n_nodes, d).sum(axis=0)
    return (
        float(np.linalg.norm(r1)),
        float(np.linalg.norm(r2)),
        float(np.linalg.norm(r3)),
    )


def lyapunov_value(x, mu, saddle: SaddlePoint, spec, h_min) -> float:
    """max(primal error norm, (2/h_min) * transformed dual error norm).

    The dual error is projected onto the reduced Laplacian eigenbasis and
    scaled by LambdaHat^{-1/2}; this is the pair of quantities that the
    global rate contracts jointly.
    """
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    n = spec.q_reduced.shape[0]
    d = x.size // n
    primal = float(np.linalg.norm(x - saddle.x_bullet))
    mu_err = (mu - saddle.mu_bullet).reshape(n, d)
    proj = spec.q_reduced.T @ mu_err  # (N-1) x d
    scaled = proj / np.sqrt(spec.eigvals_reduced)[:, None]
    dual = 2.0 / h_min * float(np.linalg.norm(scaled))
    return max(primal, dual)
