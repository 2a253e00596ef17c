"""
Empirical positive-definiteness checks on S^d x G and Gaussian sampling at finite configurations.

Random draws are seeded per trial from one numpy SeedSequence, so results do not depend on the
thread count.
"""

from __future__ import annotations

import logging
from typing import Any, Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigvalsh

from src.domain.errors import DomainError, FactorizationError
from src.domain.models import Configuration, PsdReport
from src.groups.models import Element
from src.kernels.evaluator import gram_matrix, unit_vectors
from src.kernels.spec import KernelSpec
from src.special.functions import _check_dimension
from src.utils.config_loader import numeric_settings
from src.utils.parallel import ordered_map, worker_count

logger = logging.getLogger(__name__)

GroupSampler = Callable[[np.random.Generator, int], Sequence[Element]]


def sample_sphere(d: int, n: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    """n uniform points on S^d as rows of an (n, d+1) array (normalised standard Gaussians)."""
    d = _check_dimension(d)
    if n < 1:
        raise DomainError(f"n must be >= 1; got {n!r}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, d + 1))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def great_circle(xi: Any, eta: Any) -> float:
    """Geodesic distance arccos(xi . eta) in [0, pi]."""
    a = np.asarray(xi, dtype=float)
    b = np.asarray(eta, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError(f"points must be vectors of equal length; got shapes {a.shape} and {b.shape}")
    return float(np.arccos(np.clip(a @ b, -1.0, 1.0)))


def equator_embedding(vectors: Any) -> np.ndarray:
    """Points of S^{d-1} as points of S^d with last coordinate 0."""
    arr = np.atleast_2d(np.asarray(vectors, dtype=float))
    return np.hstack([arr, np.zeros((arr.shape[0], 1))])


def _eigen_report(spec: KernelSpec, config: Configuration, tol: float) -> PsdReport:
    gram = gram_matrix(spec, config.vectors, config.elements)
    hermitian_gap = float(np.max(np.abs(gram - gram.conj().T)))
    eigs = eigvalsh(0.5 * (gram + gram.conj().T))
    min_eig, max_eig = float(eigs[0]), float(eigs[-1])
    passed = min_eig >= -tol * max(1.0, max_eig)
    return PsdReport(
        min_eig=min_eig,
        max_eig=max_eig,
        hermitian_gap=hermitian_gap,
        passed=passed,
        witness=None if passed else config,
        reason=None if passed else f"negative eigenvalue {min_eig:.3e}",
    )


def _random_configuration(
    spec: KernelSpec,
    d: int,
    n_points: int,
    seed: np.random.SeedSequence,
    group_sampler: GroupSampler | None,
    provenance: int,
) -> Configuration:
    sphere_seed, group_seed = seed.spawn(2)
    vectors = sample_sphere(d, n_points, sphere_seed)
    rng = np.random.default_rng(group_seed)
    sampler = group_sampler or spec.group.sample
    elements = tuple(spec.group.coerce(u) for u in sampler(rng, n_points))
    return Configuration(d=d, vectors=vectors, elements=elements, group=spec.group, seed=provenance)


def _trial_seeds(seed: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(trials)


def _merge(reports: list[PsdReport], trials: int, *, inconclusive: bool = False) -> PsdReport:
    # Earliest trial wins ties.
    failing = [r for r in reports if not r.passed]
    pool = failing or reports
    worst = min(pool, key=lambda r: r.min_eig)
    return PsdReport(
        min_eig=worst.min_eig,
        max_eig=worst.max_eig,
        hermitian_gap=max(r.hermitian_gap for r in reports),
        passed=worst.passed,
        witness=worst.witness,
        reason=worst.reason,
        trials=trials,
        inconclusive=inconclusive and worst.passed,
    )


def membership_test(
    spec: KernelSpec,
    d: int,
    group_sampler: GroupSampler | None = None,
    trials: int = 50,
    n_points: int = 25,
    seed: int = 0,
    *,
    tol: float | None = None,
) -> PsdReport:
    """
    Eigen-test Gram matrices of `trials` random configurations and return the worst report.

    A failing report carries its configuration as the witness.
    """
    d = _check_dimension(d)
    if trials < 1:
        raise DomainError(f"trials must be >= 1; got {trials!r}")
    if n_points < 1:
        raise DomainError(f"n_points must be >= 1; got {n_points!r}")
    tol = numeric_settings().psd_tolerance if tol is None else tol

    def run(trial_seed: np.random.SeedSequence) -> PsdReport:
        config = _random_configuration(spec, d, n_points, trial_seed, group_sampler, seed)
        return _eigen_report(spec, config, tol)

    reports = ordered_map(run, _trial_seeds(seed, trials))
    report = _merge(reports, trials)
    logger.info(
        "membership_test d=%s trials=%s points=%s verdict=%s min_eig=%.3e",
        d,
        trials,
        n_points,
        report.verdict,
        report.min_eig,
    )
    return report


def find_witness(
    spec: KernelSpec,
    d: int,
    trials: int | None = None,
    seed: int = 0,
    *,
    group_sampler: GroupSampler | None = None,
    tol: float | None = None,
) -> PsdReport:
    """
    Search for a configuration with a negative Gram eigenvalue.

    Trial t draws its point count uniformly from the configured range. Returns the first failing
    report in trial order, else the worst passing report marked inconclusive.
    """
    d = _check_dimension(d)
    settings = numeric_settings()
    trials = settings.witness_trials if trials is None else int(trials)
    if trials < 1:
        raise DomainError(f"trials must be >= 1; got {trials!r}")
    tol = settings.psd_tolerance if tol is None else tol

    def run(trial_seed: np.random.SeedSequence) -> PsdReport:
        size_seed, config_seed = trial_seed.spawn(2)
        rng = np.random.default_rng(size_seed)
        n_points = int(rng.integers(settings.witness_min_points, settings.witness_max_points + 1))
        config = _random_configuration(spec, d, n_points, config_seed, group_sampler, seed)
        return _eigen_report(spec, config, tol)

    seeds = _trial_seeds(seed, trials)
    batch = worker_count()
    seen: list[PsdReport] = []
    for start in range(0, trials, batch):
        reports = ordered_map(run, seeds[start : start + batch])
        for offset, report in enumerate(reports):
            seen.append(report)
            if not report.passed:
                logger.info("witness found at trial %s with min_eig=%.3e", start + offset, report.min_eig)
                return _merge([report], start + offset + 1)
    logger.info("no witness in %s trials", trials)
    return _merge(seen, trials, inconclusive=True)


def _default_jitter(covariance: np.ndarray) -> float:
    n = covariance.shape[0]
    return numeric_settings().jitter_scale * float(np.trace(covariance)) / n


def gaussian_sample(
    spec: KernelSpec,
    config: Configuration,
    n_samples: int,
    seed: int,
    jitter: float | None = None,
) -> np.ndarray:
    """
    Mean-zero Gaussian draws with covariance Gram + jitter * I, shape (n_samples, n_points).

    The Cholesky factorisation is retried with the configured escalation factors; failure after the
    last one raises FactorizationError.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1; got {n_samples!r}")
    settings = numeric_settings()
    vectors = unit_vectors(config.vectors, d=config.d)
    gram = gram_matrix(spec, vectors, config.elements)
    scale = max(1.0, float(np.max(np.abs(gram))))
    if float(np.max(np.abs(gram.imag))) > settings.hermitian_tolerance * scale:
        raise DomainError("Gaussian sampling needs a real-valued kernel on the configuration")
    covariance = 0.5 * (gram.real + gram.real.T)

    base = _default_jitter(covariance) if jitter is None else float(jitter)
    if base < 0:
        raise DomainError(f"jitter must be >= 0; got {base!r}")
    n = covariance.shape[0]
    factor = None
    for level, multiplier in enumerate(settings.jitter_escalation):
        amount = base * multiplier
        try:
            factor = cholesky(covariance + amount * np.eye(n), lower=True)
            break
        except LinAlgError:
            log = logger.warning if level >= 1 else logger.debug
            log("Cholesky failed with jitter %.3e; escalating", amount)
    if factor is None:
        raise FactorizationError(
            f"covariance could not be factorised with jitter up to {base * settings.jitter_escalation[-1]:.3e}"
        )

    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_samples, n)) @ factor.T
