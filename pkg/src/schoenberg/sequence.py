"""
Truncated d-Schoenberg sequences.

A coefficient function is anything with `group`, `values(u_array)` and `value_at_identity()`:
a parametric PDFunctionSpec, a NumericProfile sampled on a grid, or a WeightedSum of either.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

from src.domain.errors import DomainError, GroupMismatchError, OffGridError
from src.domain.models import Diagnostic
from src.groups.models import REAL_VECTOR, Element, GroupModel
from src.groups.pd_functions import PDFunctionSpec
from src.special.functions import clip_unit, sphere_lambda
from src.special.functions import _normalized_table
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)

INFINITY = math.inf


def dimension_label(d: int | float) -> str:
    return "infinity" if d == INFINITY else str(int(d))


def _flat_elements(group: GroupModel, u: np.ndarray) -> tuple[list[Any], tuple[int, ...]]:
    arr = np.asarray(u)
    if group.kind == REAL_VECTOR:
        shape = arr.shape[:-1]
        rows = arr.reshape(-1, int(group.k))
        return [tuple(float(c) for c in row) for row in rows], shape
    shape = arr.shape
    flat = arr.reshape(-1)
    cast = float if group.kind == "real" else int
    return [cast(v) for v in flat], shape


@dataclass(frozen=True)
class NumericProfile:
    """Values of a coefficient function on a fixed grid of group elements (no interpolation)."""

    group: GroupModel
    grid: tuple[Element, ...]
    samples: np.ndarray
    _index: dict[Any, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        grid = tuple(self.group.coerce(u) for u in self.grid)
        samples = np.asarray(self.samples, dtype=complex).reshape(-1)
        if len(grid) != samples.size:
            raise DomainError(f"profile has {len(grid)} grid points but {samples.size} values")
        if not np.all(np.isfinite(samples)):
            raise DomainError("profile values must be finite")
        index = {self.group.key(u): i for i, u in enumerate(grid)}
        if self.group.key(self.group.identity()) not in index:
            raise DomainError("profile grid must contain the identity")
        samples.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_index", index)

    def index_of(self, u: Any) -> int:
        try:
            return self._index[self.group.key(u)]
        except KeyError:
            raise OffGridError(f"element {u!r} is not on the profile grid") from None

    def values(self, u: np.ndarray) -> np.ndarray:
        elements, shape = _flat_elements(self.group, u)
        idx = np.fromiter((self.index_of(v) for v in elements), dtype=np.int64, count=len(elements))
        return self.samples[idx].reshape(shape)

    def value_at_identity(self) -> complex:
        return complex(self.samples[self.index_of(self.group.identity())])

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "profile",
            "grid": [self.group.to_json(u) for u in self.grid],
            "re": [float(v.real) for v in self.samples],
            "im": [float(v.imag) for v in self.samples],
        }


@dataclass(frozen=True)
class WeightedSum:
    """sum_j w_j phi_j over coefficient functions on one group; the empty sum is zero."""

    group: GroupModel
    terms: tuple[tuple[float, Any], ...] = ()

    def values(self, u: np.ndarray) -> np.ndarray:
        shape = np.shape(u)[:-1] if self.group.kind == REAL_VECTOR else np.shape(u)
        out = np.zeros(shape, dtype=complex)
        for weight, fn in self.terms:
            out = out + weight * fn.values(u)
        return out

    def value_at_identity(self) -> complex:
        return complex(sum(weight * fn.value_at_identity() for weight, fn in self.terms))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "weighted_sum", "terms": [{"weight": w, "phi": fn.to_dict()} for w, fn in self.terms]}


CoefficientFunction = Union[PDFunctionSpec, NumericProfile, WeightedSum]


def zero_coefficient(group: GroupModel) -> WeightedSum:
    return WeightedSum(group=group, terms=())


def combine(group: GroupModel, terms: Sequence[tuple[float, CoefficientFunction]]) -> CoefficientFunction:
    """Linear combination of coefficient functions, collapsed where possible.

    Profiles on a common grid combine into one profile; nested weighted sums are flattened and
    zero weights dropped.
    """
    flat: list[tuple[float, Any]] = []
    for weight, fn in terms:
        if fn.group != group:
            raise GroupMismatchError(f"cannot combine coefficients on {fn.group.label} into {group.label}")
        if weight == 0:
            continue
        if isinstance(fn, WeightedSum):
            flat.extend((weight * w, inner) for w, inner in fn.terms)
        else:
            flat.append((float(weight), fn))

    profiles = [fn for _, fn in flat if isinstance(fn, NumericProfile)]
    if flat and len(profiles) == len(flat) and all(p.grid == profiles[0].grid for p in profiles):
        samples = sum(w * p.samples for w, p in flat)
        return NumericProfile(group=group, grid=profiles[0].grid, samples=samples)
    if len(flat) == 1 and flat[0][0] == 1.0:
        return flat[0][1]
    return WeightedSum(group=group, terms=tuple(flat))


def estimate_tail(identity_values: np.ndarray) -> float:
    """Decay-ratio estimate of the dropped identity mass: last * r / (1 - r), r = last / previous."""
    vals = np.asarray(identity_values, dtype=float)
    if vals.size == 0:
        return 0.0
    last = max(float(vals[-1]), 0.0)
    if vals.size < 2 or last == 0.0:
        return last
    prev = float(vals[-2])
    if prev <= 0.0:
        return last
    ratio = last / prev
    if ratio >= 1.0:
        return last
    return last * ratio / (1.0 - ratio)


def basis_table(d: int | float, n_max: int, x: np.ndarray) -> np.ndarray:
    """c_0..c_{n_max}(d, x), or 1, x, ..., x^{n_max} when d is infinite."""
    xs = clip_unit(x)
    if d == INFINITY:
        return np.stack([xs**n for n in range(n_max + 1)])
    return _normalized_table(sphere_lambda(int(d)), n_max, xs)


@dataclass(frozen=True)
class SchoenbergSequence:
    """phi_{0,d}, ..., phi_{n_max,d}; d = INFINITY tags monomial coefficients."""

    d: int | float
    group: GroupModel
    coefficients: tuple[CoefficientFunction, ...]
    tail_bound: float | None = None
    check_grid: tuple[Element, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.d == INFINITY or (int(self.d) == self.d and self.d >= 1)):
            raise DomainError(f"dimension tag must be an integer >= 1 or infinity; got {self.d!r}")
        if not self.coefficients:
            raise DomainError("a Schoenberg sequence needs at least the degree-0 coefficient")
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        for n, fn in enumerate(self.coefficients):
            if fn.group != self.group:
                raise GroupMismatchError(f"coefficient {n} lives on {fn.group.label}, sequence on {self.group.label}")

    @classmethod
    def from_entries(
        cls,
        d: int | float,
        group: GroupModel,
        entries: Sequence[tuple[int, CoefficientFunction]],
        *,
        n_max: int | None = None,
        tail_bound: float | None = None,
    ) -> SchoenbergSequence:
        """Build from sparse (degree, function) pairs; missing degrees are zero, repeated degrees add up."""
        top = max([n for n, _ in entries], default=0)
        n_max = top if n_max is None else n_max
        if top > n_max:
            raise DomainError(f"entry degree {top} exceeds n_max {n_max}")
        buckets: list[list[tuple[float, CoefficientFunction]]] = [[] for _ in range(n_max + 1)]
        for n, fn in entries:
            if n < 0:
                raise DomainError(f"degrees must be >= 0; got {n}")
            buckets[n].append((1.0, fn))
        coefficients = tuple(combine(group, bucket) for bucket in buckets)
        return cls(d=d, group=group, coefficients=coefficients, tail_bound=tail_bound)

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, n: int) -> CoefficientFunction:
        if 0 <= n <= self.n_max:
            return self.coefficients[n]
        return zero_coefficient(self.group)

    def identity_values(self) -> np.ndarray:
        return np.array([fn.value_at_identity() for fn in self.coefficients], dtype=complex)

    @property
    def tail_mass_at_identity(self) -> float:
        """Sum of the retained identity-values."""
        return float(np.sum(self.identity_values().real))

    def truncation_bound(self) -> float:
        if self.tail_bound is not None:
            return float(self.tail_bound)
        return estimate_tail(self.identity_values().real)

    def value(self, n: int, u: Any) -> complex:
        u = self.group.coerce(u)
        return complex(self.coefficient(n).values(self.group.as_array([u]))[0])

    def values_on(self, n: int, elements: Sequence[Any]) -> np.ndarray:
        return self.coefficient(n).values(self.group.as_array(elements))

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """sum_n phi_n(u) c_n(d, x) on arrays."""
        x = np.asarray(x, dtype=float)
        table = basis_table(self.d, self.n_max, x)
        out = np.zeros(np.broadcast_shapes(x.shape, self.coefficients[0].values(u).shape), dtype=complex)
        for n, fn in enumerate(self.coefficients):
            out = out + fn.values(u) * table[n]
        return out

    def diagnostics(
        self,
        *,
        coefficient_tolerance: float | None = None,
        certificate_tolerance: float | None = None,
    ) -> list[Diagnostic]:
        settings = numeric_settings()
        coef_tol = settings.coefficient_tolerance if coefficient_tolerance is None else coefficient_tolerance
        cert_tol = settings.certificate_tolerance if certificate_tolerance is None else certificate_tolerance

        found: list[Diagnostic] = []
        for n, fn in enumerate(self.coefficients):
            at_e = fn.value_at_identity()
            if abs(at_e.imag) > coef_tol:
                found.append(Diagnostic(kind="non_real", degree=n, value=float(at_e.imag), tolerance=coef_tol))
            if at_e.real < -cert_tol:
                found.append(Diagnostic(kind="nonmember", degree=n, value=float(at_e.real), tolerance=cert_tol))
            elif at_e.real < -coef_tol:
                found.append(Diagnostic(kind="non_certifying", degree=n, value=float(at_e.real), tolerance=coef_tol))

            grid = fn.grid if isinstance(fn, NumericProfile) else self.check_grid
            if grid:
                peak = float(np.max(np.abs(fn.values(self.group.as_array(grid)))))
                if peak > at_e.real + coef_tol:
                    found.append(Diagnostic(kind="bound", degree=n, value=peak, tolerance=coef_tol))
        return found

    @property
    def certifying(self) -> bool:
        """True when every identity-value is real and >= -tol and every bound holds."""
        return not self.diagnostics()

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": dimension_label(self.d),
            "group": self.group.to_dict(),
            "entries": [{"n": n, "phi": fn.to_dict()} for n, fn in enumerate(self.coefficients)],
            "tail_bound": self.tail_bound,
        }
