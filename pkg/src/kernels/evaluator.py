"""
Point evaluation and Gram assembly for kernel specs on S^d x G.
"""

from __future__ import annotations

import logging
from typing import Any, Sequence

import numpy as np

from src.domain.errors import DomainError
from src.kernels.spec import KernelSpec
from src.special.functions import clip_unit
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)


def kernel_eval(spec: KernelSpec, x: float, u: Any) -> complex:
    """f(x, u) for a single x in [-1, 1] and a single element of the spec's group."""
    xs = clip_unit(np.array([x], dtype=float))
    group = spec.group
    arr = group.as_array([group.coerce(u)])
    return complex(np.asarray(spec.evaluate(xs, arr)).reshape(-1)[0])


def spatial_degree(spec: KernelSpec) -> int | None:
    """Polynomial degree in x for band-limited specs, None otherwise."""
    return spec.degree()


def unit_vectors(vectors: Any, *, d: int | None = None, tol: float | None = None) -> np.ndarray:
    """Check rows are unit vectors within `tol` and renormalise them."""
    tol = numeric_settings().unit_norm_tolerance if tol is None else tol
    arr = np.atleast_2d(np.asarray(vectors, dtype=float))
    if d is not None and arr.shape[1] != d + 1:
        raise DomainError(f"points on S^{d} need {d + 1} coordinates; got {arr.shape[1]}")
    norms = np.linalg.norm(arr, axis=1)
    bad = np.abs(norms - 1.0) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"point {i} is not a unit vector (norm {norms[i]!r})")
    return arr / norms[:, None]


def gram_matrix(spec: KernelSpec, vectors: Any, elements: Sequence[Any]) -> np.ndarray:
    """[f(xi_k . xi_l, u_k^{-1} u_l)]_{k,l} as a complex (n, n) array."""
    xi = unit_vectors(vectors)
    if len(xi) != len(elements):
        raise DomainError(f"{len(xi)} sphere points but {len(elements)} group elements")
    group = spec.group
    x = clip_unit(xi @ xi.T)
    displacements = group.displacement_matrix(list(elements))
    out = np.asarray(spec.evaluate(x, displacements), dtype=complex)
    return np.broadcast_to(out, x.shape).copy()


def kernel_gram(spec: KernelSpec, points: Sequence[tuple[Any, Any]]) -> np.ndarray:
    """Gram matrix for a list of (sphere point, group element) pairs."""
    if not points:
        raise DomainError("kernel_gram needs at least one point")
    vectors = [xi for xi, _ in points]
    elements = [u for _, u in points]
    return gram_matrix(spec, vectors, elements)
