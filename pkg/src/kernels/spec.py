"""
KernelSpec: expression trees for f : [-1, 1] x G -> C.

Every node evaluates on arrays: `evaluate(x, u)` takes x of shape S and group elements of shape S
(S + (k,) for RealVector models) and returns a complex array of shape S.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.polynomial import polynomial as P

from src.domain.errors import DomainError, GroupMismatchError, SpecError
from src.groups.models import GroupModel
from src.groups.pd_functions import PDFunctionSpec
from src.kernels.catalog import space_time_form, spatial_form
from src.special.functions import sphere_lambda, ultraspherical

if TYPE_CHECKING:
    from src.schoenberg.sequence import SchoenbergSequence


# ---------------------------------------------------------------------------
# Spatial factors
# ---------------------------------------------------------------------------


class SpatialFactor(ABC):
    @abstractmethod
    def values(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def degree(self) -> int | None:
        """Polynomial degree, or None for closed forms."""

    @abstractmethod
    def power_coefficients(self) -> np.ndarray | None:
        """Monomial coefficients a_0..a_deg, or None for closed forms."""

    @abstractmethod
    def to_dict(self) -> dict[str, Any]: ...


def ultraspherical_power_coefficients(d: int, n: int) -> np.ndarray:
    """Monomial coefficients of c_n(d, x), built from the normalised recurrence."""
    lam = sphere_lambda(d)
    prev = np.array([1.0])
    if n == 0:
        return prev
    cur = np.array([0.0, 1.0])
    for k in range(2, n + 1):
        nxt = P.polysub(2.0 * (k + lam - 1.0) * P.polymulx(cur), (k - 1.0) * prev) / (k + 2.0 * lam - 1.0)
        prev, cur = cur, nxt
    return cur


@dataclass(frozen=True)
class Ultraspherical(SpatialFactor):
    d: int
    n: int

    def __post_init__(self) -> None:
        if self.d < 1 or self.n < 0:
            raise DomainError(f"ultraspherical factor needs d >= 1 and n >= 0; got d={self.d}, n={self.n}")

    def values(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(ultraspherical(self.d, self.n, np.asarray(x, dtype=float)))

    def degree(self) -> int:
        return self.n

    def power_coefficients(self) -> np.ndarray:
        return ultraspherical_power_coefficients(self.d, self.n)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "ultraspherical", "d": self.d, "n": self.n}


@dataclass(frozen=True)
class Monomial(SpatialFactor):
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DomainError(f"monomial degree must be >= 0; got {self.n}")

    def values(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) ** self.n

    def degree(self) -> int:
        return self.n

    def power_coefficients(self) -> np.ndarray:
        out = np.zeros(self.n + 1)
        out[self.n] = 1.0
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "monomial", "n": self.n}


@dataclass(frozen=True)
class ScaledShift(SpatialFactor):
    """(1 + x) / 2."""

    def values(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * (1.0 + np.asarray(x, dtype=float))

    def degree(self) -> int:
        return 1

    def power_coefficients(self) -> np.ndarray:
        return np.array([0.5, 0.5])

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "scaled_shift"}


@dataclass(frozen=True)
class RawSpatial(SpatialFactor):
    name: str
    params: dict[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", spatial_form(self.name).resolve(self.params))

    @property
    def membership(self) -> str:
        return spatial_form(self.name).membership

    def values(self, x: np.ndarray) -> np.ndarray:
        return spatial_form(self.name).func(np.asarray(x, dtype=float), self.params)

    def degree(self) -> None:
        return None

    def power_coefficients(self) -> None:
        return None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "raw", "name": self.name, "params": dict(self.params)}


# ---------------------------------------------------------------------------
# Kernel nodes
# ---------------------------------------------------------------------------


class KernelSpec(ABC):
    @property
    @abstractmethod
    def group(self) -> GroupModel: ...

    @abstractmethod
    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def degree(self) -> int | None:
        """Polynomial degree in x for band-limited specs, None otherwise."""

    def dimension_tags(self) -> set[Any]:
        """Dimension tags of the Expansion nodes underneath."""
        return set()

    @abstractmethod
    def to_dict(self) -> dict[str, Any]: ...


def _common_group(children: tuple[KernelSpec, ...], what: str) -> GroupModel:
    if not children:
        raise SpecError(f"{what} needs at least one child")
    group = children[0].group
    for child in children[1:]:
        if child.group != group:
            raise GroupMismatchError(f"{what} mixes group models {group.label} and {child.group.label}")
    tags = set().union(*(c.dimension_tags() for c in children))
    if len(tags) > 1:
        raise SpecError(f"{what} mixes expansion dimensions {sorted(map(str, tags))}")
    return group


@dataclass(frozen=True)
class TensorProduct(KernelSpec):
    spatial: SpatialFactor
    temporal: PDFunctionSpec

    @property
    def group(self) -> GroupModel:
        return self.temporal.group

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.spatial.values(x) * self.temporal.values(u)

    def degree(self) -> int | None:
        return self.spatial.degree()

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "tensor", "spatial": self.spatial.to_dict(), "temporal": self.temporal.to_dict()}


@dataclass(frozen=True)
class Sum(KernelSpec):
    terms: tuple[KernelSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        _common_group(self.terms, "sum")

    @property
    def group(self) -> GroupModel:
        return self.terms[0].group

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = self.terms[0].evaluate(x, u).astype(complex)
        for term in self.terms[1:]:
            out = out + term.evaluate(x, u)
        return out

    def degree(self) -> int | None:
        degrees = [t.degree() for t in self.terms]
        return None if any(deg is None for deg in degrees) else max(degrees)

    def dimension_tags(self) -> set[Any]:
        return set().union(*(t.dimension_tags() for t in self.terms))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}


@dataclass(frozen=True)
class Product(KernelSpec):
    factors: tuple[KernelSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        _common_group(self.factors, "product")

    @property
    def group(self) -> GroupModel:
        return self.factors[0].group

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = self.factors[0].evaluate(x, u).astype(complex)
        for factor in self.factors[1:]:
            out = out * factor.evaluate(x, u)
        return out

    def degree(self) -> int | None:
        degrees = [f.degree() for f in self.factors]
        return None if any(deg is None for deg in degrees) else sum(degrees)

    def dimension_tags(self) -> set[Any]:
        return set().union(*(f.dimension_tags() for f in self.factors))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True)
class Scale(KernelSpec):
    r: float
    child: KernelSpec

    def __post_init__(self) -> None:
        if isinstance(self.r, bool) or not float(self.r) >= 0:
            raise SpecError(f"scale factor must be >= 0; got {self.r!r}")

    @property
    def group(self) -> GroupModel:
        return self.child.group

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return float(self.r) * self.child.evaluate(x, u)

    def degree(self) -> int | None:
        return self.child.degree()

    def dimension_tags(self) -> set[Any]:
        return self.child.dimension_tags()

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "scale", "r": float(self.r), "child": self.child.to_dict()}


@dataclass(frozen=True)
class Expansion(KernelSpec):
    seq: SchoenbergSequence

    @property
    def group(self) -> GroupModel:
        return self.seq.group

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.seq.evaluate(x, u)

    def degree(self) -> int:
        return self.seq.n_max

    def dimension_tags(self) -> set[Any]:
        return {self.seq.d}

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "expansion", **self.seq.to_dict()}


@dataclass(frozen=True)
class RawForm(KernelSpec):
    name: str
    model: GroupModel
    params: dict[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", space_time_form(self.name).resolve(self.params))

    @property
    def group(self) -> GroupModel:
        return self.model

    @property
    def membership(self) -> str:
        return space_time_form(self.name).membership

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        t = self.model.magnitude(u)
        return space_time_form(self.name).func(np.asarray(x, dtype=float), t, self.params).astype(complex)

    def degree(self) -> None:
        return None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "raw", "name": self.name, "params": dict(self.params)}


# ---------------------------------------------------------------------------
# Bivariate spatial specs (product spheres)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparableSum:
    """f(x, y) = sum_j w_j a_j(x) b_j(y) with spatial factors a_j, b_j and weights w_j >= 0."""

    terms: tuple[tuple[float, SpatialFactor, SpatialFactor], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise SpecError("separable sum needs at least one term")
        for weight, _, _ in self.terms:
            if not weight >= 0:
                raise SpecError(f"separable sum weights must be >= 0; got {weight!r}")
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for weight, fx, fy in self.terms:
            out = out + weight * fx.values(x) * fy.values(y)
        return out

    def degrees(self) -> tuple[int | None, int | None]:
        dx = [fx.degree() for _, fx, _ in self.terms]
        dy = [fy.degree() for _, _, fy in self.terms]
        return (
            None if any(v is None for v in dx) else max(dx),
            None if any(v is None for v in dy) else max(dy),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "separable",
            "terms": [{"weight": w, "x": fx.to_dict(), "y": fy.to_dict()} for w, fx, fy in self.terms],
        }
