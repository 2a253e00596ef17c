"""
Concrete abelian locally compact groups, written additively.

Elements are plain Python values: float (real line), int (integers, cyclic residues) or a tuple
of floats (real vectors). Array helpers return numpy arrays whose trailing axis holds vector
coordinates for RealVector models.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence, Union

import numpy as np

from src.domain.errors import GroupMismatchError

Element = Union[float, int, tuple[float, ...]]

REAL = "real"
INTEGERS = "integers"
CYCLIC = "cyclic"
REAL_VECTOR = "real_vector"
KINDS = (REAL, INTEGERS, CYCLIC, REAL_VECTOR)

# Integer sampling window used for validation draws.
INTEGER_SAMPLE_RANGE = 50


@dataclass(frozen=True)
class GroupModel:
    kind: str
    m: int | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise GroupMismatchError(f"unknown group kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == CYCLIC and (not isinstance(self.m, int) or self.m < 1):
            raise GroupMismatchError(f"cyclic group needs an integer order m >= 1; got {self.m!r}")
        if self.kind == REAL_VECTOR and (not isinstance(self.k, int) or self.k < 1):
            raise GroupMismatchError(f"real_vector group needs an integer dimension k >= 1; got {self.k!r}")

    @classmethod
    def real_line(cls) -> GroupModel:
        return cls(REAL)

    @classmethod
    def integers(cls) -> GroupModel:
        return cls(INTEGERS)

    @classmethod
    def cyclic(cls, m: int) -> GroupModel:
        return cls(CYCLIC, m=m)

    @classmethod
    def real_vector(cls, k: int) -> GroupModel:
        return cls(REAL_VECTOR, k=k)

    @classmethod
    def trivial(cls) -> GroupModel:
        """The one-element group {e}, realised as Z_1."""
        return cls(CYCLIC, m=1)

    @property
    def label(self) -> str:
        if self.kind == CYCLIC:
            return f"cyclic({self.m})"
        if self.kind == REAL_VECTOR:
            return f"real_vector({self.k})"
        return self.kind

    # -- elements -----------------------------------------------------------

    def coerce(self, u: Any) -> Element:
        """Return u in canonical form, or raise GroupMismatchError if it is not an element."""
        if self.kind == REAL_VECTOR:
            if isinstance(u, (str, bytes)) or not isinstance(u, (Sequence, np.ndarray)):
                raise GroupMismatchError(f"{self.label} element must be a length-{self.k} vector; got {u!r}")
            if len(u) != self.k:
                raise GroupMismatchError(f"{self.label} element must have length {self.k}; got {len(u)}")
            if not all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in u):
                raise GroupMismatchError(f"{self.label} element must hold real coordinates; got {u!r}")
            return tuple(float(v) for v in u)

        if isinstance(u, bool) or not isinstance(u, numbers.Real):
            raise GroupMismatchError(f"{self.label} element must be a real scalar; got {u!r}")
        if self.kind == REAL:
            return float(u)
        if float(u) != int(u):
            raise GroupMismatchError(f"{self.label} element must be an integer; got {u!r}")
        value = int(u)
        if self.kind == CYCLIC and not (0 <= value < int(self.m)):
            raise GroupMismatchError(f"{self.label} element must lie in 0..{int(self.m) - 1}; got {value}")
        return value

    def identity(self) -> Element:
        if self.kind == REAL_VECTOR:
            return tuple(0.0 for _ in range(int(self.k)))
        return 0.0 if self.kind == REAL else 0

    def inverse(self, u: Any) -> Element:
        u = self.coerce(u)
        if self.kind == REAL_VECTOR:
            return tuple(-v for v in u)
        if self.kind == CYCLIC:
            return (-u) % int(self.m)
        return -u

    def compose(self, u: Any, v: Any) -> Element:
        u, v = self.coerce(u), self.coerce(v)
        if self.kind == REAL_VECTOR:
            return tuple(a + b for a, b in zip(u, v))
        if self.kind == CYCLIC:
            return (u + v) % int(self.m)
        return u + v

    def displacement(self, u: Any, v: Any) -> Element:
        """u^{-1} v."""
        return self.compose(self.inverse(u), v)

    def is_identity(self, u: Any) -> bool:
        return self.key(u) == self.key(self.identity())

    def key(self, u: Any) -> Any:
        """Hashable lookup key; real coordinates are rounded to 12 decimals."""
        u = self.coerce(u)
        if self.kind == REAL_VECTOR:
            return tuple(round(v, 12) + 0.0 for v in u)
        if self.kind == REAL:
            return round(u, 12) + 0.0
        return u

    # -- arrays -------------------------------------------------------------

    def as_array(self, elements: Sequence[Any]) -> np.ndarray:
        canon = [self.coerce(u) for u in elements]
        if self.kind == REAL_VECTOR:
            return np.asarray(canon, dtype=float).reshape(len(canon), int(self.k))
        dtype = float if self.kind == REAL else np.int64
        return np.asarray(canon, dtype=dtype)

    def displacement_matrix(self, elements: Sequence[Any]) -> np.ndarray:
        """D[k, l] = u_k^{-1} u_l, shape (n, n) or (n, n, k)."""
        arr = self.as_array(elements)
        diff = arr[None, ...] - arr[:, None, ...]
        if self.kind == CYCLIC:
            diff = np.mod(diff, int(self.m))
        return diff

    def magnitude(self, arr: np.ndarray) -> np.ndarray:
        """|u| for arrays of elements: absolute value, Euclidean norm, or cyclic distance."""
        a = np.asarray(arr)
        if self.kind == REAL_VECTOR:
            return np.linalg.norm(a.astype(float), axis=-1)
        if self.kind == CYCLIC:
            r = np.mod(a, int(self.m))
            return np.minimum(r, int(self.m) - r).astype(float)
        return np.abs(a).astype(float)

    def sample(self, rng: np.random.Generator, n: int) -> tuple[Element, ...]:
        """Validation draws: standard normal (real kinds), uniform -50..50 (integers), uniform residues (cyclic)."""
        if self.kind == REAL:
            return tuple(float(v) for v in rng.standard_normal(n))
        if self.kind == REAL_VECTOR:
            return tuple(tuple(float(c) for c in row) for row in rng.standard_normal((n, int(self.k))))
        if self.kind == INTEGERS:
            return tuple(int(v) for v in rng.integers(-INTEGER_SAMPLE_RANGE, INTEGER_SAMPLE_RANGE + 1, size=n))
        return tuple(int(v) for v in rng.integers(0, int(self.m), size=n))

    # -- serialisation ------------------------------------------------------

    def to_json(self, u: Any) -> Any:
        u = self.coerce(u)
        return list(u) if self.kind == REAL_VECTOR else u

    def from_json(self, value: Any) -> Element:
        return self.coerce(value)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == CYCLIC:
            out["m"] = int(self.m)
        if self.kind == REAL_VECTOR:
            out["k"] = int(self.k)
        return out


class GroupOps(NamedTuple):
    identity: Any
    inverse: Any
    compose: Any
    displacement: Any


def group_ops(model: GroupModel) -> GroupOps:
    """The group operations of `model` as plain callables."""
    return GroupOps(
        identity=model.identity,
        inverse=model.inverse,
        compose=model.compose,
        displacement=model.displacement,
    )
