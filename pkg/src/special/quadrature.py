"""Gauss-Jacobi rules for the weight (1 - x^2)^(d/2 - 1) on [-1, 1]."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import gammaln

from src.domain.errors import ConvergenceError, DomainError
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureRule:
    d: int
    q: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def weight_mass(d: int) -> float:
    """Integral of (1 - x^2)^(d/2 - 1) over [-1, 1], i.e. sigma_d / sigma_{d-1}."""
    lam = (d - 1) / 2.0
    return math.exp(0.5 * math.log(math.pi) + float(gammaln(lam + 0.5) - gammaln(lam + 1.0)))


def _recurrence_offdiagonal(lam: float, q: int) -> np.ndarray:
    # Monic Gegenbauer recurrence p_{k+1} = x p_k - beta_k p_{k-1}.
    k = np.arange(1, q, dtype=float)
    beta = np.empty_like(k)
    if q > 1:
        beta[0] = 1.0 / (2.0 * (1.0 + lam))
        rest = k[1:]
        beta[1:] = rest * (rest + 2.0 * lam - 1.0) / (4.0 * (rest + lam) * (rest + lam - 1.0))
    return np.sqrt(beta)


def build_rule(d: int, q: int) -> QuadratureRule:
    """q-point Gauss rule for exponents alpha = beta = d/2 - 1 (Golub-Welsch)."""
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"sphere dimension must be an integer >= 1; got {d!r}")
    if isinstance(q, bool) or int(q) != q or q < 1:
        raise DomainError(f"node count must be an integer >= 1; got {q!r}")
    d, q = int(d), int(q)
    lam = (d - 1) / 2.0
    if q == 1:
        return QuadratureRule(d=d, q=1, nodes=np.zeros(1), weights=np.array([weight_mass(d)]))

    try:
        nodes, vectors = eigh_tridiagonal(np.zeros(q), _recurrence_offdiagonal(lam, q))
    except LinAlgError as exc:
        raise ConvergenceError(f"Jacobi matrix eigen-solver failed for d={d}, q={q}: {exc}") from exc

    weights = weight_mass(d) * vectors[0, :] ** 2
    # Exact mirror symmetry about 0.
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(d=d, q=q, nodes=nodes, weights=weights)


def integrate(rule: QuadratureRule, g: Callable[[np.ndarray], np.ndarray]) -> complex | float:
    """sum_i w_i g(x_i). g is called once with the node array; complex results stay complex."""
    values = np.asarray(g(rule.nodes))
    total = np.tensordot(rule.weights, values, axes=(0, 0))
    if np.ndim(total) == 0:
        return complex(total) if np.iscomplexobj(total) else float(total)
    return total


def integrate_refined(
    d: int,
    g: Callable[[np.ndarray], np.ndarray],
    q_start: int,
    *,
    rel_tol: float | None = None,
    max_nodes: int | None = None,
) -> tuple[np.ndarray, QuadratureRule]:
    """
    Integrate with q doubled until two successive estimates agree to `rel_tol`.

    g may return an array of shape (q, ...); the comparison uses the largest entrywise change.
    Raises ConvergenceError when the cap is reached without agreement.
    """
    settings = numeric_settings()
    rel_tol = settings.ladder_rel_tol if rel_tol is None else rel_tol
    max_nodes = settings.max_nodes if max_nodes is None else max_nodes

    q = max(1, min(int(q_start), max_nodes))
    rule = build_rule(d, q)
    previous = np.asarray(integrate(rule, g))
    while True:
        if q >= max_nodes:
            raise ConvergenceError(
                f"quadrature did not reach relative tolerance {rel_tol:g} within {max_nodes} nodes (d={d})"
            )
        q = min(2 * q, max_nodes)
        rule = build_rule(d, q)
        current = np.asarray(integrate(rule, g))
        change = float(np.max(np.abs(current - previous))) if current.size else 0.0
        scale = float(np.max(np.abs(current))) if current.size else 0.0
        logger.debug("quadrature ladder d=%s q=%s change=%.3e scale=%.3e", d, q, change, scale)
        if change <= rel_tol * scale:
            return current, rule
        previous = current
