"""
Kernels on the Hilbert sphere S^infinity: f(x, u) = sum_n phi_n(u) x^n.

Monomial coefficients are only ever read from explicit expansions; nothing here infers them from
a black-box f.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from src.domain.errors import DomainError, SpecError
from src.groups.models import GroupModel
from src.kernels.spec import Expansion, KernelSpec, Scale, Sum, TensorProduct, ultraspherical_power_coefficients
from src.schoenberg.extraction import extract
from src.schoenberg.sequence import INFINITY, CoefficientFunction, SchoenbergSequence, combine
from src.special.functions import _check_dimension, connection_gamma

logger = logging.getLogger(__name__)


def _monomial_terms(spec: KernelSpec, weight: float, path: str) -> list[tuple[int, float, CoefficientFunction]]:
    if isinstance(spec, Scale):
        return _monomial_terms(spec.child, weight * float(spec.r), f"{path}.child")
    if isinstance(spec, Sum):
        out: list[tuple[int, float, CoefficientFunction]] = []
        for i, term in enumerate(spec.terms):
            out.extend(_monomial_terms(term, weight, f"{path}.terms[{i}]"))
        return out
    if isinstance(spec, TensorProduct):
        powers = spec.spatial.power_coefficients()
        if powers is None:
            raise SpecError("spatial factor has no explicit monomial expansion", f"{path}.spatial")
        return [(k, weight * float(a), spec.temporal) for k, a in enumerate(powers) if a != 0.0]
    if isinstance(spec, Expansion):
        seq = spec.seq
        if seq.d == INFINITY:
            return [(n, weight, fn) for n, fn in enumerate(seq.coefficients)]
        out = []
        for n, fn in enumerate(seq.coefficients):
            powers = ultraspherical_power_coefficients(int(seq.d), n)
            out.extend((k, weight * float(a), fn) for k, a in enumerate(powers) if a != 0.0)
        return out
    raise SpecError(f"{type(spec).__name__} node has no explicit monomial coefficients", path)


def monomial_coefficients(spec: KernelSpec) -> SchoenbergSequence:
    """phi_0, phi_1, ... with f(x, u) = sum_n phi_n(u) x^n, for finite monomial expansions."""
    terms = _monomial_terms(spec, 1.0, "$.kernel")
    group = spec.group
    n_max = max((n for n, _, _ in terms), default=0)
    buckets: list[list[tuple[float, CoefficientFunction]]] = [[] for _ in range(n_max + 1)]
    for n, w, fn in terms:
        buckets[n].append((w, fn))
    coefficients = tuple(combine(group, bucket) for bucket in buckets)
    return SchoenbergSequence(d=INFINITY, group=group, coefficients=coefficients, tail_bound=0.0)


def project_from_infty(power_seq: SchoenbergSequence, d_target: int | float) -> SchoenbergSequence:
    """
    phi_{n,d} = sum_j gamma^(d)(n + 2j, j) phi_{n+2j}, summed over the available entries.

    The truncation bound is max gamma times the dropped identity mass of `power_seq`.
    """
    if power_seq.d != INFINITY:
        raise DomainError(f"project_from_infty needs monomial coefficients (d = infinity); got d={power_seq.d!r}")
    if d_target == INFINITY:
        return power_seq
    d = _check_dimension(d_target)
    group: GroupModel = power_seq.group
    n_max = power_seq.n_max

    gamma_max = 0.0
    coefficients = []
    for n in range(n_max + 1):
        terms = []
        for j in range((n_max - n) // 2 + 1):
            g = connection_gamma(d, n + 2 * j, j)
            gamma_max = max(gamma_max, g)
            terms.append((g, power_seq.coefficient(n + 2 * j)))
        coefficients.append(combine(group, terms))

    tail = None if power_seq.tail_bound is None else gamma_max * power_seq.tail_bound
    return SchoenbergSequence(
        d=d,
        group=group,
        coefficients=tuple(coefficients),
        tail_bound=tail,
        check_grid=power_seq.check_grid,
    )


def infty_limit_gap(spec: KernelSpec, n: int, u: Any, d: int) -> float:
    """|phi_{n,d}(u) - phi_n(u)| with phi_{n,d} extracted at dimension d."""
    powers = monomial_coefficients(spec)
    group = spec.group
    u = group.coerce(u)
    n_max = max(n, powers.n_max)
    extracted = extract(spec, d, n_max, [group.identity(), u])
    return float(np.abs(extracted.value(n, u) - powers.value(n, u)))
