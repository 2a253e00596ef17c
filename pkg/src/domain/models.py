from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from src.groups.models import Element, GroupModel


@dataclass(frozen=True)
class ConnectionRow:
    """Coefficients of a degree-n polynomial in a target basis of degrees n, n-2, n-4, ..."""

    n: int
    coeffs: tuple[tuple[int, float], ...]

    @property
    def nonnegative(self) -> bool:
        return all(v >= 0.0 for _, v in self.coeffs)

    def value(self, target_degree: int) -> float:
        for k, v in self.coeffs:
            if k == target_degree:
                return v
        return 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"n": int(self.n), "coeffs": [[int(k), float(v)] for k, v in self.coeffs]}


@dataclass(frozen=True)
class Diagnostic:
    """Machine-readable finding attached to a coefficient sequence.

    kind is one of "nonmember" (identity-value below -certificate tolerance),
    "non_certifying" (identity-value below -coefficient tolerance),
    "non_real" (identity-value with an imaginary part) or "bound" (|phi(u)| exceeds phi(e) on the grid).
    """

    kind: str
    degree: int
    value: float
    tolerance: float
    # second degree m of a product-sphere coefficient f_{n,m}
    second_degree: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "kind": self.kind,
            "degree": int(self.degree),
            "value": float(self.value),
            "tolerance": float(self.tolerance),
        }
        if self.second_degree is not None:
            out["second_degree"] = int(self.second_degree)
        return out


@dataclass(frozen=True)
class Synthesis:
    value: complex
    truncation_bound: float | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "truncation_bound": self.truncation_bound,
        }


@dataclass(frozen=True)
class Configuration:
    """Finite point set on S^d x G; `vectors` has shape (n, d+1)."""

    d: int
    vectors: np.ndarray
    elements: tuple[Element, ...]
    group: GroupModel
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.elements)

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": int(self.d),
            "group": self.group.to_dict(),
            "seed": self.seed,
            "points": [
                {"xi": [float(v) for v in xi], "u": self.group.to_json(u)}
                for xi, u in zip(self.vectors, self.elements)
            ],
        }


@dataclass(frozen=True)
class PsdReport:
    min_eig: float
    max_eig: float
    hermitian_gap: float
    passed: bool
    witness: Configuration | None = None
    reason: str | None = None
    trials: int = 1
    inconclusive: bool = False

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_eig": float(self.min_eig),
            "max_eig": float(self.max_eig),
            "hermitian_gap": float(self.hermitian_gap),
            "verdict": self.verdict,
            "reason": self.reason,
            "trials": int(self.trials),
            "inconclusive": bool(self.inconclusive),
            "witness": self.witness.to_dict() if self.witness is not None else None,
        }


@dataclass(frozen=True)
class SampleCheck:
    """Outcome of validating a positive definite function on G at random group elements."""

    min_eig: float
    max_eig: float
    hermitian_gap: float
    passed: bool
    reason: str | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_eig": float(self.min_eig),
            "max_eig": float(self.max_eig),
            "hermitian_gap": float(self.hermitian_gap),
            "verdict": self.verdict,
            "reason": self.reason,
        }
