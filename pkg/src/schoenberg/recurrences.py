"""
Relations between Schoenberg sequences of neighbouring dimensions.

step_up maps phi_{., d} to phi_{., d+2}. The result is a genuine Schoenberg sequence only when the
kernel is positive definite on S^{d+2} x G; otherwise negative identity-values show up in the
diagnostics.
"""

from __future__ import annotations

import logging

from src.domain.errors import DomainError
from src.schoenberg.sequence import INFINITY, SchoenbergSequence, combine

logger = logging.getLogger(__name__)


def _step_up_weights(d: int, n: int) -> tuple[float, float]:
    """(a, b) with phi_{n,d+2} = a phi_{n,d} - b phi_{n+2,d}."""
    if d == 1:
        if n == 0:
            return 1.0, 0.5
        return 0.5 * (n + 1), 0.5 * (n + 1)
    a = (n + d - 1) * (n + d) / (d * (2 * n + d - 1))
    b = (n + 1) * (n + 2) / (d * (2 * n + d + 3))
    return a, b


def step_up(seq: SchoenbergSequence) -> SchoenbergSequence:
    """phi_{n,d+2} for n <= n_max - 2."""
    if seq.d == INFINITY:
        raise DomainError("step_up needs a finite sphere dimension")
    if seq.n_max < 2:
        raise DomainError(f"step_up needs coefficients up to degree >= 2; got n_max={seq.n_max}")
    d = int(seq.d)

    coefficients = []
    for n in range(seq.n_max - 1):
        a, b = _step_up_weights(d, n)
        coefficients.append(combine(seq.group, [(a, seq.coefficient(n)), (-b, seq.coefficient(n + 2))]))

    out = SchoenbergSequence(d=d + 2, group=seq.group, coefficients=tuple(coefficients), check_grid=seq.check_grid)
    for diag in out.diagnostics():
        if diag.kind == "nonmember":
            logger.warning(
                "step_up %s -> %s: phi_{%s,%s}(e) = %.3e, kernel is not in P(S^%s, G)",
                d,
                d + 2,
                diag.degree,
                d + 2,
                diag.value,
                d + 2,
            )
    return out


def derivative_weight(d: int, n: int) -> float:
    """kappa_n = n (n + d - 1) / (2n + d - 1), so (1 - x^2) c_n'(d, x) = kappa_n (c_{n-1} - c_{n+1})."""
    return n * (n + d - 1) / (2 * n + d - 1)


def derivative_split(seq: SchoenbergSequence) -> tuple[SchoenbergSequence, SchoenbergSequence]:
    """
    Two sequences over the same d with (1 - x^2) df/dx = f1 - f2.

    f1 carries kappa_{m+1} phi_{m+1} at degree m and f2 carries kappa_{m-1} phi_{m-1}; every weight
    is >= 0, so both are positive definite whenever the input sequence is.
    """
    if seq.d == INFINITY:
        raise DomainError("derivative_split needs a finite sphere dimension")
    d = int(seq.d)
    group = seq.group
    n_max = seq.n_max

    lower = [combine(group, [(derivative_weight(d, m + 1), seq.coefficient(m + 1))]) for m in range(max(n_max, 1))]
    upper = [combine(group, [])]
    upper += [combine(group, [(derivative_weight(d, m - 1), seq.coefficient(m - 1))]) for m in range(1, n_max + 2)]

    f1 = SchoenbergSequence(d=d, group=group, coefficients=tuple(lower), check_grid=seq.check_grid)
    f2 = SchoenbergSequence(d=d, group=group, coefficients=tuple(upper), check_grid=seq.check_grid)
    return f1, f2
