"""
Extraction of d-Schoenberg functions

    phi_{n,d}(u) = (N_n(d) sigma_{d-1} / sigma_d) * int_{-1}^{1} f(x, u) c_n(d, x) (1 - x^2)^{d/2 - 1} dx

on a caller-chosen grid of group elements, plus synthesis of truncated expansions.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Sequence

import numpy as np

from src.domain.errors import DomainError, SpecError
from src.domain.models import Synthesis
from src.groups.models import GroupModel
from src.groups.pd_functions import Constant
from src.kernels.spec import KernelSpec, SpatialFactor, TensorProduct
from src.special.functions import UltrasphericalBasis, _check_dimension, clip_unit
from src.special.quadrature import build_rule, integrate, integrate_refined
from src.schoenberg.sequence import INFINITY, NumericProfile, SchoenbergSequence
from src.utils.config_loader import numeric_settings
from src.utils.parallel import chunked, ordered_map, worker_count

logger = logging.getLogger(__name__)


def required_nodes(n_max: int, degree: int) -> int:
    """Smallest Gauss rule exact for c_n(d, x) * f(x, .) with deg f = degree and n <= n_max."""
    return max(1, math.ceil((n_max + degree + 1) / 2))


def _node_count(spec: KernelSpec, n_max: int, q: int | None) -> int:
    degree = spec.degree()
    extra = numeric_settings().extra_nodes
    if degree is None:
        return q if q is not None else n_max + extra
    needed = required_nodes(n_max, degree)
    if q is None:
        return max(n_max + extra, needed)
    if q < needed:
        raise DomainError(
            f"q={q} nodes cannot integrate degree {degree} against c_n for n <= {n_max}; need q >= {needed}"
        )
    return q


def _coefficients_on_chunk(
    spec: KernelSpec,
    basis: UltrasphericalBasis,
    u_arr: np.ndarray,
    q: int,
    exact: bool,
) -> tuple[np.ndarray, int]:
    inv_norm = 1.0 / np.asarray(basis.norm_constants)
    m = u_arr.shape[0]

    def integrand(nodes: np.ndarray) -> np.ndarray:
        # (q, n_max+1, m): f(x_i, u_j) c_n(x_i)
        values = np.broadcast_to(spec.evaluate(nodes[:, None], u_arr[None, ...]), (nodes.size, m))
        table = basis.table(nodes)
        return table.T[:, :, None] * values[:, None, :]

    if exact:
        rule = build_rule(basis.d, q)
        raw = np.asarray(integrate(rule, integrand))
        used = q
    else:
        raw, rule = integrate_refined(basis.d, integrand, q)
        used = rule.q
    return raw * inv_norm[:, None], used


def extract(
    spec: KernelSpec,
    d: int,
    n_max: int,
    u_grid: Sequence[Any],
    q: int | None = None,
) -> SchoenbergSequence:
    """
    phi_{0,d}, ..., phi_{n_max,d} sampled on `u_grid` (which must contain the identity).

    Band-limited specs use one Gauss rule with at least ceil((n_max + deg + 1) / 2) nodes and are
    exact up to rounding. Closed forms go through the doubling ladder and raise ConvergenceError at
    the node cap. Negative identity-values are reported as diagnostics, never raised.
    """
    d = _check_dimension(d)
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a nonnegative integer; got {n_max!r}")
    n_max = int(n_max)
    group = spec.group
    grid = tuple(group.coerce(u) for u in u_grid)
    if not grid:
        raise DomainError("u_grid must not be empty")
    identity_key = group.key(group.identity())
    if identity_key not in {group.key(u) for u in grid}:
        raise DomainError("u_grid must contain the identity")

    q_used = _node_count(spec, n_max, q)
    exact = spec.degree() is not None
    basis = UltrasphericalBasis(d, n_max)

    chunks = chunked(grid, worker_count())
    results = ordered_map(
        lambda chunk: _coefficients_on_chunk(spec, basis, group.as_array(list(chunk)), q_used, exact),
        chunks,
    )
    coeffs = np.concatenate([values for values, _ in results], axis=1)
    nodes_used = max(used for _, used in results)

    profiles = tuple(NumericProfile(group=group, grid=grid, samples=coeffs[n]) for n in range(n_max + 1))
    at_one = complex(np.asarray(spec.evaluate(np.array([1.0]), group.as_array([group.identity()]))).reshape(-1)[0])
    mass = float(np.sum(coeffs[:, [group.key(u) for u in grid].index(identity_key)].real))
    seq = SchoenbergSequence(
        d=d,
        group=group,
        coefficients=profiles,
        tail_bound=max(0.0, at_one.real - mass),
    )

    logger.info(
        "extract d=%s n_max=%s grid=%s nodes=%s mass=%.6g f(1,e)=%.6g",
        d,
        n_max,
        len(grid),
        nodes_used,
        mass,
        at_one.real,
    )
    for diag in seq.diagnostics():
        if diag.kind == "nonmember":
            logger.warning(
                "phi_{%s,%s}(e) = %.3e: kernel is not positive definite on S^%s x G", diag.degree, d, diag.value, d
            )
    return seq


def schoenberg_coefficients(
    spatial: SpatialFactor | KernelSpec,
    d: int,
    n_max: int,
    q: int | None = None,
) -> np.ndarray:
    """b_{0,d}, ..., b_{n_max,d} of a purely spatial kernel (the one-element group case)."""
    if isinstance(spatial, SpatialFactor):
        spec: KernelSpec = TensorProduct(spatial, Constant(GroupModel.trivial(), 1.0))
    elif isinstance(spatial, KernelSpec):
        spec = spatial
    else:
        raise SpecError(f"expected a spatial factor or kernel spec; got {type(spatial).__name__}")
    seq = extract(spec, d, n_max, [spec.group.identity()], q=q)
    return seq.identity_values().real


def _check_point(seq: SchoenbergSequence, x: float, u: Any) -> tuple[np.ndarray, np.ndarray]:
    xs = clip_unit(np.array([x], dtype=float))
    return xs, seq.group.as_array([seq.group.coerce(u)])


def synthesize(seq: SchoenbergSequence, x: float, u: Any) -> Synthesis:
    """sum_{n <= n_max} phi_{n,d}(u) c_n(d, x) with the sequence's truncation bound."""
    xs, arr = _check_point(seq, x, u)
    value = complex(np.asarray(seq.evaluate(xs, arr)).reshape(-1)[0])
    return Synthesis(value=value, truncation_bound=seq.truncation_bound())


def synthesize_derivative(seq: SchoenbergSequence, x: float, u: Any) -> complex:
    """Term-wise x-derivative sum_n phi_{n,d}(u) c_n'(d, x) of the truncated expansion."""
    if seq.d == INFINITY:
        raise DomainError("synthesize_derivative needs a finite sphere dimension")
    xs, arr = _check_point(seq, x, u)
    basis = UltrasphericalBasis(int(seq.d), seq.n_max)
    total = 0j
    for n, fn in enumerate(seq.coefficients):
        if n == 0:
            continue
        total += complex(fn.values(arr)[0]) * float(basis.derivative(n, float(xs[0])))
    return total
