"""
Continuous positive definite functions on the group models.

On Cyclic(m) the distance-based forms are periodisations sum_k phi(u + k m) of their real-line
versions, normalised to 1 at the identity; characters use integer frequencies j, u -> exp(2 pi i j u / m).
On RealVector(k) the triangular form is Askey's truncated power (1 - |u|/c)_+^nu, nu = max(1, (k+1)/2).
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import eigvalsh

from src.domain.errors import DomainError, GroupMismatchError
from src.domain.models import SampleCheck
from src.groups.models import CYCLIC, REAL_VECTOR, GroupModel
from src.utils.config_loader import numeric_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PDFunctionSpec(ABC):
    """A parametric continuous positive definite function phi on `group`."""

    group: GroupModel

    @property
    @abstractmethod
    def form(self) -> str: ...

    @abstractmethod
    def values(self, u: np.ndarray) -> np.ndarray:
        """phi evaluated on an array of elements (see GroupModel.as_array); complex result."""

    def params(self) -> dict[str, Any]:
        return {}

    def value_at_identity(self) -> complex:
        return complex(self.values(self.group.as_array([self.group.identity()]))[0])

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.form, **self.params()}


def _periodise(group: GroupModel, u: np.ndarray, profile, reach: float) -> np.ndarray:
    """Normalised sum_k profile(|r + k m|) over the shifts that reach within `reach` of 0."""
    m = int(group.m)
    r = np.mod(np.asarray(u, dtype=float), m)
    width = int(math.ceil(reach / m)) + 1
    shifts = np.arange(-width, width + 1, dtype=float) * m
    total = profile(np.abs(r[..., None] + shifts)).sum(axis=-1)
    at_zero = profile(np.abs(shifts)).sum()
    return total / at_zero


@dataclass(frozen=True)
class ExpDecay(PDFunctionSpec):
    a: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"exp_decay needs a > 0; got {self.a!r}")

    @property
    def form(self) -> str:
        return "exp_decay"

    def params(self) -> dict[str, Any]:
        return {"a": float(self.a)}

    def values(self, u: np.ndarray) -> np.ndarray:
        if self.group.kind == CYCLIC:
            m = int(self.group.m)
            r = np.mod(np.asarray(u, dtype=float), m)
            out = (np.exp(-self.a * r) + np.exp(-self.a * (m - r))) / (1.0 + np.exp(-self.a * m))
        else:
            out = np.exp(-self.a * self.group.magnitude(u))
        return out.astype(complex)


@dataclass(frozen=True)
class Gaussian(PDFunctionSpec):
    a: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"gaussian needs a > 0; got {self.a!r}")

    @property
    def form(self) -> str:
        return "gaussian"

    def params(self) -> dict[str, Any]:
        return {"a": float(self.a)}

    def values(self, u: np.ndarray) -> np.ndarray:
        if self.group.kind == CYCLIC:
            reach = math.sqrt(40.0 / self.a)
            out = _periodise(self.group, u, lambda t: np.exp(-self.a * t**2), reach)
        else:
            out = np.exp(-self.a * self.group.magnitude(u) ** 2)
        return out.astype(complex)


def _frequency_phase(group: GroupModel, omega: Any, u: np.ndarray) -> np.ndarray:
    """The real phase <omega, u> (2 pi j u / m on cyclic groups)."""
    if group.kind == REAL_VECTOR:
        w = np.asarray(omega, dtype=float)
        return np.asarray(u, dtype=float) @ w
    if group.kind == CYCLIC:
        return 2.0 * math.pi * int(omega) * np.asarray(u, dtype=float) / int(group.m)
    return float(omega) * np.asarray(u, dtype=float)


def _check_frequency(group: GroupModel, omega: Any) -> Any:
    if group.kind == REAL_VECTOR:
        w = tuple(float(v) for v in np.atleast_1d(np.asarray(omega, dtype=float)))
        if len(w) != int(group.k):
            raise GroupMismatchError(f"frequency for {group.label} must have length {group.k}; got {omega!r}")
        return w
    if group.kind == CYCLIC:
        if float(omega) != int(omega):
            raise GroupMismatchError(f"frequency on {group.label} must be an integer; got {omega!r}")
        return int(omega)
    return float(omega)


@dataclass(frozen=True)
class Cosine(PDFunctionSpec):
    omega: Any

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", _check_frequency(self.group, self.omega))

    @property
    def form(self) -> str:
        return "cosine"

    def params(self) -> dict[str, Any]:
        return {"omega": list(self.omega) if isinstance(self.omega, tuple) else self.omega}

    def values(self, u: np.ndarray) -> np.ndarray:
        return np.cos(_frequency_phase(self.group, self.omega, u)).astype(complex)


@dataclass(frozen=True)
class Triangular(PDFunctionSpec):
    c: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise DomainError(f"triangular needs c > 0; got {self.c!r}")

    @property
    def form(self) -> str:
        return "triangular"

    def params(self) -> dict[str, Any]:
        return {"c": float(self.c)}

    def _profile(self, t: np.ndarray) -> np.ndarray:
        nu = 1.0
        if self.group.kind == REAL_VECTOR:
            nu = max(1.0, (int(self.group.k) + 1) / 2.0)
        return np.clip(1.0 - t / self.c, 0.0, None) ** nu

    def values(self, u: np.ndarray) -> np.ndarray:
        if self.group.kind == CYCLIC:
            out = _periodise(self.group, u, self._profile, self.c)
        else:
            out = self._profile(self.group.magnitude(u))
        return out.astype(complex)


@dataclass(frozen=True)
class Constant(PDFunctionSpec):
    r: float

    def __post_init__(self) -> None:
        if not self.r >= 0:
            raise DomainError(f"constant needs r >= 0; got {self.r!r}")

    @property
    def form(self) -> str:
        return "constant"

    def params(self) -> dict[str, Any]:
        return {"r": float(self.r)}

    def values(self, u: np.ndarray) -> np.ndarray:
        shape = np.shape(u)[:-1] if self.group.kind == REAL_VECTOR else np.shape(u)
        return np.full(shape, float(self.r), dtype=complex)


@dataclass(frozen=True)
class CharacterMix(PDFunctionSpec):
    """sum_j w_j exp(i <omega_j, u>): a finitely supported spectral mixture."""

    terms: tuple[tuple[float, Any], ...]

    def __post_init__(self) -> None:
        terms = []
        for weight, omega in self.terms:
            if not weight >= 0:
                raise DomainError(f"character_mix weights must be >= 0; got {weight!r}")
            terms.append((float(weight), _check_frequency(self.group, omega)))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def form(self) -> str:
        return "character_mix"

    def params(self) -> dict[str, Any]:
        return {
            "terms": [
                {"weight": w, "frequency": list(om) if isinstance(om, tuple) else om} for w, om in self.terms
            ]
        }

    def values(self, u: np.ndarray) -> np.ndarray:
        shape = np.shape(u)[:-1] if self.group.kind == REAL_VECTOR else np.shape(u)
        out = np.zeros(shape, dtype=complex)
        for weight, omega in self.terms:
            out += weight * np.exp(1j * _frequency_phase(self.group, omega, u))
        return out


def pd_eval(phi: PDFunctionSpec, u: Any) -> complex:
    """phi(u) for a single element."""
    u = phi.group.coerce(u)
    return complex(phi.values(phi.group.as_array([u]))[0])


def _draw_elements(phi: Any, rng: np.random.Generator, n_points: int) -> tuple:
    """Random group elements; sampled profiles draw from their own grid."""
    grid = getattr(phi, "grid", None)
    if grid is None:
        return phi.group.sample(rng, n_points)
    picks = rng.integers(0, len(grid), size=n_points)
    return tuple(grid[int(i)] for i in picks)


def validate_pd_on_samples(
    phi: Any,
    n_points: int,
    seed: int,
    *,
    tol: float | None = None,
) -> SampleCheck:
    """
    Draw `n_points` elements, form [phi(u_k^{-1} u_l)] and eigen-test it.

    phi is a PDFunctionSpec or any coefficient function with `group`, `values` and
    `value_at_identity`. Profiles draw from their grid, so the grid must be closed under
    u^{-1} v for the draws (all residues of a cyclic group, say); otherwise OffGridError.

    Prechecks (each a fail with a reason): phi(e) real and >= 0, |phi(u)| <= phi(e) at every
    sampled displacement, Hermitian symmetry of the matrix.
    """
    if n_points < 1:
        raise DomainError(f"n_points must be >= 1; got {n_points!r}")
    settings = numeric_settings()
    tol = settings.psd_tolerance if tol is None else tol
    herm_tol = settings.hermitian_tolerance

    rng = np.random.default_rng(seed)
    elements = _draw_elements(phi, rng, n_points)
    matrix = phi.values(phi.group.displacement_matrix(elements))
    at_identity = phi.value_at_identity()

    hermitian_gap = float(np.max(np.abs(matrix - matrix.conj().T)))
    eigs = eigvalsh(0.5 * (matrix + matrix.conj().T))
    min_eig, max_eig = float(eigs[0]), float(eigs[-1])
    scale = max(1.0, abs(at_identity))

    reason = None
    if abs(at_identity.imag) > herm_tol * scale or at_identity.real < -herm_tol * scale:
        reason = f"phi(e) must be real and >= 0; got {at_identity!r}"
    elif float(np.max(np.abs(matrix))) > at_identity.real + herm_tol * scale:
        reason = "boundedness |phi(u)| <= phi(e) violated"
    elif hermitian_gap > herm_tol * scale:
        reason = f"Hermitian symmetry violated (gap {hermitian_gap:.3e})"
    elif min_eig < -tol * max(1.0, max_eig):
        reason = f"negative eigenvalue {min_eig:.3e}"

    if reason is not None:
        name = getattr(phi, "form", type(phi).__name__)
        logger.debug("validate_pd_on_samples %s on %s failed: %s", name, phi.group.label, reason)
    return SampleCheck(
        min_eig=min_eig,
        max_eig=max_eig,
        hermitian_gap=hermitian_gap,
        passed=reason is None,
        reason=reason,
    )
