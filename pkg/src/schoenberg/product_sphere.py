"""
Kernels on products of spheres S^d x S^d' with no group factor:

    f(x, y) = sum_{n,m} f_{n,m} c_n(d, x) c_m(d', y),  f_{n,m} >= 0.

When the first factor is S^infinity the x-basis is x^n instead of c_n(d, x).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Union

import numpy as np

from src.domain.errors import ConvergenceError, DomainError, SpecError
from src.domain.models import Diagnostic
from src.kernels.spec import SeparableSum, SpatialFactor
from src.schoenberg.extraction import required_nodes
from src.schoenberg.sequence import INFINITY, basis_table, dimension_label
from src.special.functions import UltrasphericalBasis, _check_dimension
from src.special.quadrature import build_rule
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)

Bivariate = Union[SeparableSum, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class ProductSphereCoefficients:
    d: int | float
    d_prime: int
    matrix: np.ndarray
    total_mass: float
    tail_bound: float | None = None
    diagnostics: tuple[Diagnostic, ...] = field(default=())

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def m_max(self) -> int:
        return self.matrix.shape[1] - 1

    @property
    def certifying(self) -> bool:
        return not self.diagnostics

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": dimension_label(self.d),
            "d_prime": dimension_label(self.d_prime),
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "total_mass": float(self.total_mass),
            "tail_bound": self.tail_bound,
            "diagnostics": [diag.to_dict() for diag in self.diagnostics],
        }


def _degrees(f2: Bivariate) -> tuple[int | None, int | None]:
    if isinstance(f2, SeparableSum):
        return f2.degrees()
    return None, None


def _tensor_coefficients(
    f2: Bivariate,
    basis_x: UltrasphericalBasis,
    basis_y: UltrasphericalBasis,
    qx: int,
    qy: int,
) -> np.ndarray:
    rx = build_rule(basis_x.d, qx)
    ry = build_rule(basis_y.d, qy)
    values = np.asarray(f2(rx.nodes[:, None], ry.nodes[None, :]), dtype=float)
    values = np.broadcast_to(values, (qx, qy))
    ax = basis_x.table(rx.nodes) * rx.weights / np.asarray(basis_x.norm_constants)[:, None]
    ay = basis_y.table(ry.nodes) * ry.weights / np.asarray(basis_y.norm_constants)[:, None]
    return ax @ values @ ay.T


def _ladder(compute: Callable[[int], np.ndarray], q_start: int) -> tuple[np.ndarray, int]:
    settings = numeric_settings()
    q = max(1, min(q_start, settings.max_nodes))
    previous = compute(q)
    while q < settings.max_nodes:
        q = min(2 * q, settings.max_nodes)
        current = compute(q)
        change = float(np.max(np.abs(current - previous)))
        scale = float(np.max(np.abs(current)))
        logger.debug("product ladder q=%s change=%.3e scale=%.3e", q, change, scale)
        if change <= settings.ladder_rel_tol * scale:
            return current, q
        previous = current
    raise ConvergenceError(
        f"product-sphere quadrature did not reach relative tolerance {settings.ladder_rel_tol:g} "
        f"within {settings.max_nodes} nodes"
    )


def _y_coefficients(factor: SpatialFactor, basis_y: UltrasphericalBasis, q: int | None) -> np.ndarray:
    degree = factor.degree()
    extra = numeric_settings().extra_nodes

    def compute(qy: int) -> np.ndarray:
        ry = build_rule(basis_y.d, qy)
        ay = basis_y.table(ry.nodes) * ry.weights / np.asarray(basis_y.norm_constants)[:, None]
        return ay @ np.asarray(factor.values(ry.nodes), dtype=float)

    if degree is None:
        return _ladder(compute, q or basis_y.n_max + extra)[0]
    return compute(max(q or 0, basis_y.n_max + extra, required_nodes(basis_y.n_max, degree)))


def _diagnose(matrix: np.ndarray) -> tuple[Diagnostic, ...]:
    settings = numeric_settings()
    found = []
    for (n, m), value in np.ndenumerate(matrix):
        if value < -settings.certificate_tolerance:
            kind, tol = "nonmember", settings.certificate_tolerance
        elif value < -settings.coefficient_tolerance:
            kind, tol = "non_certifying", settings.coefficient_tolerance
        else:
            continue
        found.append(Diagnostic(kind=kind, degree=n, value=float(value), tolerance=tol, second_degree=m))
    return tuple(found)


def product_sphere_extract(
    f2: Bivariate,
    d: int | float,
    d_prime: int | float,
    n_max: int,
    m_max: int,
    q: int | None = None,
) -> ProductSphereCoefficients:
    """
    f_{n,m} for 0 <= n <= n_max, 0 <= m <= m_max by tensor Gauss-Jacobi quadrature.

    With d = INFINITY, f2 must be a SeparableSum whose x-factors are polynomials; their monomial
    coefficients are read off exactly and only the y-direction is integrated. S^d x S^infinity and
    S^infinity x S^infinity are not supported.
    """
    if d_prime == INFINITY:
        raise SpecError("the second factor of a product sphere must have finite dimension", "$.d_prime")
    d_prime = _check_dimension(d_prime)
    for name, value in (("n_max", n_max), ("m_max", m_max)):
        if isinstance(value, bool) or int(value) != value or value < 0:
            raise DomainError(f"{name} must be a nonnegative integer; got {value!r}")
    basis_y = UltrasphericalBasis(d_prime, int(m_max))

    if d == INFINITY:
        if not isinstance(f2, SeparableSum):
            raise SpecError("S^infinity products need a separable bivariate spec", "$.bivariate")
        matrix = np.zeros((int(n_max) + 1, int(m_max) + 1))
        for i, (weight, fx, fy) in enumerate(f2.terms):
            powers = fx.power_coefficients()
            if powers is None:
                raise SpecError("x-factor has no explicit monomial expansion", f"$.bivariate.terms[{i}].x")
            keep = powers[: int(n_max) + 1]
            matrix[: keep.size] += weight * np.outer(keep, _y_coefficients(fy, basis_y, q))
    else:
        d = _check_dimension(d)
        basis_x = UltrasphericalBasis(d, int(n_max))
        deg_x, deg_y = _degrees(f2)
        extra = numeric_settings().extra_nodes
        if deg_x is not None and deg_y is not None:
            qx = max(q or 0, int(n_max) + extra, required_nodes(int(n_max), deg_x))
            qy = max(q or 0, int(m_max) + extra, required_nodes(int(m_max), deg_y))
            matrix = _tensor_coefficients(f2, basis_x, basis_y, qx, qy)
        else:
            q_start = q or max(int(n_max), int(m_max)) + extra
            matrix, _ = _ladder(lambda qq: _tensor_coefficients(f2, basis_x, basis_y, qq, qq), q_start)

    total = float(np.sum(matrix))
    at_one = float(np.asarray(f2(np.array(1.0), np.array(1.0))))
    diagnostics = _diagnose(matrix)
    if diagnostics:
        logger.warning("product-sphere expansion has %s negative coefficient(s)", len(diagnostics))
    return ProductSphereCoefficients(
        d=d,
        d_prime=d_prime,
        matrix=matrix,
        total_mass=total,
        tail_bound=max(0.0, at_one - total),
        diagnostics=diagnostics,
    )


def product_sphere_synthesize(coeffs: ProductSphereCoefficients, x: Any, y: Any) -> Any:
    """sum_{n,m} f_{n,m} c_n(d, x) c_m(d', y); x^n replaces c_n(d, x) when d = INFINITY."""
    tx = basis_table(coeffs.d, coeffs.n_max, np.asarray(x, dtype=float))
    ty = basis_table(coeffs.d_prime, coeffs.m_max, np.asarray(y, dtype=float))
    out = np.einsum("nm,n...,m...->...", coeffs.matrix, tx, ty)
    return float(out) if np.ndim(out) == 0 else out
