"""
Gegenbauer (ultraspherical) polynomials on [-1, 1] and the constants attached to S^d.

c_n(d, x) denotes the Gegenbauer polynomial of index lambda = (d - 1)/2 normalised to 1 at x = 1;
for d = 1 this is the Chebyshev polynomial T_n. Every evaluator accepts a scalar or an array of x
values and returns the same shape (a Python float for scalar input).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammaln

from src.domain.errors import DomainError
from src.domain.models import ConnectionRow
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def clip_unit(x: ArrayLike, *, tol: float | None = None) -> np.ndarray:
    """Clip x to [-1, 1] when within `tol` of the boundary; farther out is a DomainError."""
    tol = numeric_settings().boundary_clip if tol is None else tol
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    if np.any(np.abs(arr) > 1.0 + tol):
        worst = float(np.max(np.abs(arr)))
        raise DomainError(f"x must lie in [-1, 1]; got |x| = {worst!r}")
    return np.clip(arr, -1.0, 1.0)


def _out(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def _check_degree(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"degree must be a nonnegative integer; got {n!r}")
    return int(n)


def _check_dimension(d: int) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"sphere dimension must be an integer >= 1; got {d!r}")
    return int(d)


def sphere_lambda(d: int) -> float:
    return (_check_dimension(d) - 1) / 2.0


# ---------------------------------------------------------------------------
# Pochhammer symbols
# ---------------------------------------------------------------------------


def pochhammer(a: float, k: int) -> float:
    """(a)_k = a(a+1)...(a+k-1). Direct product for short runs, log-gamma above the threshold."""
    k = _check_degree(k)
    if k <= numeric_settings().log_space_threshold or a <= 0:
        return float(math.prod(a + i for i in range(k)))
    return float(np.exp(log_pochhammer(a, k)))


def log_pochhammer(a: float, k: int) -> float:
    """log (a)_k for a > 0."""
    if a <= 0:
        raise DomainError(f"log_pochhammer needs a > 0; got {a!r}")
    return float(gammaln(a + k) - gammaln(a))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _chebyshev(n: int, x: np.ndarray) -> np.ndarray:
    return np.cos(n * np.arccos(x))


def _normalized(lam: float, n: int, x: np.ndarray) -> np.ndarray:
    """C_n^(lam)(x) / C_n^(lam)(1) via the recurrence of the normalised sequence itself.

    c_k = (2(k+lam-1) x c_{k-1} - (k-1) c_{k-2}) / (k+2lam-1), c_0 = 1, c_1 = x.
    For lam = 0 this is the Chebyshev recurrence.
    """
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy()
    for k in range(2, n + 1):
        nxt = (2.0 * (k + lam - 1.0) * x * cur - (k - 1.0) * prev) / (k + 2.0 * lam - 1.0)
        prev, cur = cur, nxt
    return np.where(x == 1.0, 1.0, cur)


def _normalized_table(lam: float, n_max: int, x: np.ndarray) -> np.ndarray:
    """Rows c_0..c_{n_max} at x; shape (n_max+1,) + x.shape."""
    table = np.empty((n_max + 1,) + x.shape, dtype=float)
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for k in range(2, n_max + 1):
        table[k] = (2.0 * (k + lam - 1.0) * x * table[k - 1] - (k - 1.0) * table[k - 2]) / (k + 2.0 * lam - 1.0)
    return np.where(x == 1.0, 1.0, table)


def gegenbauer_eval(lam: float, n: int, x: ArrayLike) -> ArrayLike:
    """C_n^(lam)(x) by the three-term recurrence; lam = 0 gives T_n(x) = cos(n arccos x)."""
    if lam < 0:
        raise DomainError(f"lambda must be >= 0; got {lam!r}")
    n = _check_degree(n)
    xs = clip_unit(x)
    if lam == 0:
        return _out(_chebyshev(n, xs), x)

    prev = np.ones_like(xs)
    if n == 0:
        return _out(prev, x)
    cur = 2.0 * lam * xs
    for k in range(2, n + 1):
        nxt = (2.0 * (k + lam - 1.0) * xs * cur - (k + 2.0 * lam - 2.0) * prev) / k
        prev, cur = cur, nxt
    return _out(cur, x)


def normalized_gegenbauer(lam: float, n: int, x: ArrayLike) -> ArrayLike:
    """c_n^(lam)(x) = C_n^(lam)(x) / C_n^(lam)(1)."""
    if lam < 0:
        raise DomainError(f"lambda must be >= 0; got {lam!r}")
    n = _check_degree(n)
    xs = clip_unit(x)
    return _out(_normalized(float(lam), n, xs), x)


def ultraspherical(d: int, n: int, x: ArrayLike) -> ArrayLike:
    """c_n(d, x) without a basis object (any degree)."""
    return normalized_gegenbauer(sphere_lambda(d), n, x)


@dataclass(frozen=True)
class UltrasphericalBasis:
    """The normalised family c_0(d,.), ..., c_{n_max}(d,.) together with h_{n,d} = sigma_d / (N_n(d) sigma_{d-1})."""

    d: int
    n_max: int
    norm_constants: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        _check_dimension(self.d)
        _check_degree(self.n_max)
        ratio = sphere_surface(self.d) / sphere_surface(self.d - 1)
        object.__setattr__(
            self,
            "norm_constants",
            tuple(ratio / harmonic_dim(self.d, n) for n in range(self.n_max + 1)),
        )

    @property
    def lam(self) -> float:
        return (self.d - 1) / 2.0

    def _check(self, n: int) -> int:
        n = _check_degree(n)
        if n > self.n_max:
            raise DomainError(f"degree {n} outside basis range 0..{self.n_max}")
        return n

    def eval(self, n: int, x: ArrayLike) -> ArrayLike:
        n = self._check(n)
        xs = clip_unit(x)
        return _out(_normalized(self.lam, n, xs), x)

    def table(self, x: ArrayLike) -> np.ndarray:
        """All degrees at once, shape (n_max+1,) + shape(x)."""
        return _normalized_table(self.lam, self.n_max, clip_unit(x))

    def derivative(self, n: int, x: ArrayLike) -> ArrayLike:
        n = self._check(n)
        return _derivative(self.d, n, x)


def ultraspherical_eval(basis: UltrasphericalBasis, n: int, x: ArrayLike) -> ArrayLike:
    """c_n(d, x) with |c_n| <= 1 and c_n(d, 1) = 1."""
    return basis.eval(n, x)


def _derivative(d: int, n: int, x: ArrayLike) -> ArrayLike:
    xs = clip_unit(x)
    if n == 0:
        return _out(np.zeros_like(xs), x)
    lam_up = (d + 1) / 2.0
    scale = n * (n + d - 1) / d
    return _out(scale * _normalized(lam_up, n - 1, xs), x)


def ultraspherical_derivative(basis: UltrasphericalBasis, n: int, x: ArrayLike) -> ArrayLike:
    """c_n'(d, x) = n(n+d-1)/d * c_{n-1}(d+2, x); zero for n = 0."""
    return basis.derivative(n, x)


# ---------------------------------------------------------------------------
# Constants of S^d
# ---------------------------------------------------------------------------


def harmonic_dim(d: int, n: int) -> int:
    """N_n(d), the dimension of the degree-n spherical harmonics on S^d (exact integer)."""
    d = _check_dimension(d)
    n = _check_degree(n)
    if n == 0:
        return 1
    return (2 * n + d - 1) * math.factorial(n + d - 2) // (math.factorial(d - 1) * math.factorial(n))


def sphere_surface(d: int) -> float:
    """sigma_d = 2 pi^((d+1)/2) / Gamma((d+1)/2); sigma_0 = 2."""
    if isinstance(d, bool) or int(d) != d or d < 0:
        raise DomainError(f"sphere dimension must be an integer >= 0; got {d!r}")
    if d == 0:
        return 2.0
    h = (d + 1) / 2.0
    return float(2.0 * np.exp(h * math.log(math.pi) - gammaln(h)))


# ---------------------------------------------------------------------------
# Connection coefficients
# ---------------------------------------------------------------------------


def _signed_log_poch(a: float, k: int) -> tuple[float, float]:
    """(sign, log|.|) of (a)_k for any real a; sign 0 when the product vanishes."""
    sign = 1.0
    total = 0.0
    for i in range(k):
        t = a + i
        if t == 0:
            return 0.0, -math.inf
        if t < 0:
            sign = -sign
        total += math.log(abs(t))
    return sign, total


def gegenbauer_connection(lam: float, mu: float, n: int) -> ConnectionRow:
    """Coefficients of C_n^(lam) in the basis C_{n-2k}^(mu), k = 0..floor(n/2).

    coefficient_k = (lam)_{n-k} (lam-mu)_k (n+mu-2k) / ((mu)_{n-k+1} k!)
    """
    if lam <= 0 or mu <= 0:
        raise DomainError(f"lambda and mu must be > 0; got lambda={lam!r}, mu={mu!r}")
    n = _check_degree(n)
    direct = n <= numeric_settings().log_space_threshold

    coeffs: list[tuple[int, float]] = []
    for k in range(n // 2 + 1):
        m = n - 2 * k
        if direct:
            value = (
                pochhammer(lam, n - k)
                * pochhammer(lam - mu, k)
                * (n + mu - 2 * k)
                / (pochhammer(mu, n - k + 1) * math.factorial(k))
            )
        else:
            sign, log_diff = _signed_log_poch(lam - mu, k)
            if sign == 0.0:
                value = 0.0
            else:
                log_value = (
                    log_pochhammer(lam, n - k)
                    + log_diff
                    + math.log(n + mu - 2 * k)
                    - log_pochhammer(mu, n - k + 1)
                    - float(gammaln(k + 1))
                )
                value = sign * math.exp(log_value)
        coeffs.append((m, float(value)))
    return ConnectionRow(n=n, coeffs=tuple(coeffs))


def connection_gamma(d: int, n: int, k: int) -> float:
    """gamma^(d)(n, k): the coefficient of c_{n-2k}(d, .) in x^n."""
    d = _check_dimension(d)
    if k < 0 or 2 * k > n:
        return 0.0
    m = n - 2 * k
    if d == 1:
        n_m = 1 if m == 0 else 2
        return math.comb(n, k) * n_m / 2**n
    mu = (d - 1) / 2.0
    log_value = (
        float(gammaln(n + 1))
        + log_pochhammer(d - 1.0, m)
        + math.log(m + mu)
        - n * math.log(2.0)
        - float(gammaln(k + 1))
        - float(gammaln(m + 1))
        - log_pochhammer(mu, n - k + 1)
    )
    return math.exp(log_value)


def monomial_connection(d: int, n: int) -> ConnectionRow:
    """gamma^(d)(n, k), k = 0..floor(n/2), with x^n = sum_k gamma^(d)(n,k) c_{n-2k}(d, x)."""
    d = _check_dimension(d)
    n = _check_degree(n)
    return ConnectionRow(n=n, coeffs=tuple((n - 2 * k, connection_gamma(d, n, k)) for k in range(n // 2 + 1)))


def lambda_limit_gap(lam: float, n: int, x: ArrayLike) -> ArrayLike:
    """|c_n^(lam)(x) - x^n|; shrinks toward 0 as lam grows for fixed -1 < x < 1."""
    xs = clip_unit(x)
    values = np.abs(np.asarray(normalized_gegenbauer(lam, n, xs)) - xs**_check_degree(n))
    return _out(values, x)
