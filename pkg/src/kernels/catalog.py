"""
Named closed-form kernels.

Spatial forms take x = cos(theta). Space-time forms also take |u| (the group magnitude).
`membership` records what is known about positive definiteness on every sphere: "member" or
"unknown". Unknown forms exist to exercise the verifier, not to assert anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from src.domain.errors import SpecError


@dataclass(frozen=True)
class CatalogForm:
    name: str
    func: Callable[..., np.ndarray]
    defaults: dict[str, float]
    membership: str
    check: Callable[[dict[str, float]], str | None]

    def resolve(self, params: dict[str, Any] | None, *, path: str = "$") -> dict[str, float]:
        merged = dict(self.defaults)
        for key, value in (params or {}).items():
            if key not in self.defaults:
                raise SpecError(f"unknown parameter {key!r} for {self.name!r}", f"{path}.params.{key}")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SpecError(f"parameter {key!r} must be a number", f"{path}.params.{key}")
            merged[key] = float(value)
        problem = self.check(merged)
        if problem:
            raise SpecError(problem, f"{path}.params")
        return merged


def _theta(x: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(x, -1.0, 1.0))


def _powered_exponential(x: np.ndarray, p: dict[str, float]) -> np.ndarray:
    return np.exp(-p["a"] * _theta(x) ** p["alpha"])


def _exp_inner(x: np.ndarray, p: dict[str, float]) -> np.ndarray:
    return np.exp(p["a"] * (x - 1.0))


def _gneiting(x: np.ndarray, t: np.ndarray, p: dict[str, float]) -> np.ndarray:
    psi = (1.0 + t ** (2.0 * p["alpha"])) ** p["beta"]
    return np.exp(-p["a"] * _theta(x) / psi) / psi


def _separable_powered(x: np.ndarray, t: np.ndarray, p: dict[str, float]) -> np.ndarray:
    return np.exp(-p["a"] * _theta(x) ** p["alpha"] - p["b"] * t ** p["gamma"])


def _check_powered(p: dict[str, float]) -> str | None:
    if p["a"] <= 0:
        return "a must be > 0"
    if not 0 < p["alpha"] <= 2:
        return "alpha must lie in (0, 2]"
    return None


SPATIAL_FORMS: dict[str, CatalogForm] = {
    "powered_exponential": CatalogForm(
        name="powered_exponential",
        func=_powered_exponential,
        defaults={"a": 1.0, "alpha": 1.0},
        membership="unknown",
        check=_check_powered,
    ),
    "exp_inner": CatalogForm(
        name="exp_inner",
        func=_exp_inner,
        defaults={"a": 1.0},
        membership="member",
        check=lambda p: None if p["a"] >= 0 else "a must be >= 0",
    ),
}

SPACE_TIME_FORMS: dict[str, CatalogForm] = {
    "gneiting": CatalogForm(
        name="gneiting",
        func=_gneiting,
        defaults={"a": 1.0, "alpha": 1.0, "beta": 1.0},
        membership="unknown",
        check=lambda p: (
            "a must be > 0"
            if p["a"] <= 0
            else "alpha must lie in (0, 1]"
            if not 0 < p["alpha"] <= 1
            else "beta must lie in [0, 1]"
            if not 0 <= p["beta"] <= 1
            else None
        ),
    ),
    "separable_powered": CatalogForm(
        name="separable_powered",
        func=_separable_powered,
        defaults={"a": 1.0, "alpha": 1.0, "b": 1.0, "gamma": 1.0},
        membership="unknown",
        check=lambda p: _check_powered(p)
        or ("b must be >= 0" if p["b"] < 0 else "gamma must lie in (0, 2]" if not 0 < p["gamma"] <= 2 else None),
    ),
}


def spatial_form(name: str, *, path: str = "$") -> CatalogForm:
    try:
        return SPATIAL_FORMS[name]
    except KeyError:
        raise SpecError(f"unknown spatial form {name!r}; known: {', '.join(sorted(SPATIAL_FORMS))}", path) from None


def space_time_form(name: str, *, path: str = "$") -> CatalogForm:
    try:
        return SPACE_TIME_FORMS[name]
    except KeyError:
        raise SpecError(
            f"unknown space-time form {name!r}; known: {', '.join(sorted(SPACE_TIME_FORMS))}", path
        ) from None
