from __future__ import annotations

import logging
import os
import threading
from copy import deepcopy
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

logger = logging.getLogger(__name__)

_cache_lock = threading.Lock()
_cached: dict[str, Any] | None = None
_cached_path: str | None = None
_settings: NumericSettings | None = None


def _project_root() -> Path:
    # src/utils/config_loader.py -> src/utils -> src -> project root
    return Path(__file__).resolve().parents[2]


def default_config_path() -> Path:
    override = os.getenv("SPHERE_KERNELS_CONFIG")
    if override:
        return Path(override)
    return _project_root() / "config" / "config.yaml"


def _apply_env_overrides(cfg: dict[str, Any]) -> None:
    """Override selected YAML settings with environment variables."""
    runtime = cfg.setdefault("runtime", {})
    if os.getenv("SPHERE_KERNELS_THREADS"):
        runtime["threads"] = int(os.environ["SPHERE_KERNELS_THREADS"])

    log_cfg = cfg.setdefault("logging", {})
    if os.getenv("SPHERE_KERNELS_LOG_LEVEL"):
        log_cfg["level"] = os.environ["SPHERE_KERNELS_LOG_LEVEL"].upper()


def _require_positive(section: dict[str, Any], key: str, *, name: str) -> None:
    v = section.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ValueError(f"{name}.{key} must be a number")
    if float(v) <= 0:
        raise ValueError(f"{name}.{key} must be > 0")


def validate_config(cfg: dict[str, Any]) -> None:
    """
    Fail fast if the configuration is missing required sections or carries
    values that would make the numerics meaningless.
    """
    required_top = ["numerics", "quadrature", "pd_check", "runtime"]
    missing = [k for k in required_top if k not in cfg]
    if missing:
        raise ValueError(f"Missing required config sections: {', '.join(missing)}")

    numerics = cfg.get("numerics") or {}
    for k in [
        "boundary_clip",
        "unit_norm_tolerance",
        "coefficient_tolerance",
        "certificate_tolerance",
        "psd_tolerance",
        "hermitian_tolerance",
        "log_space_threshold",
    ]:
        _require_positive(numerics, k, name="numerics")

    quad = cfg.get("quadrature") or {}
    for k in ["extra_nodes", "ladder_rel_tol", "max_nodes"]:
        _require_positive(quad, k, name="quadrature")

    pd = cfg.get("pd_check") or {}
    for k in ["witness_trials", "witness_min_points", "witness_max_points", "jitter_scale"]:
        _require_positive(pd, k, name="pd_check")
    if int(pd["witness_min_points"]) > int(pd["witness_max_points"]):
        raise ValueError("pd_check.witness_min_points must be <= pd_check.witness_max_points")
    escalation = pd.get("jitter_escalation")
    if not isinstance(escalation, list) or not escalation:
        raise ValueError("pd_check.jitter_escalation must be a non-empty array")

    runtime = cfg.get("runtime") or {}
    threads = runtime.get("threads")
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ValueError("runtime.threads must be an integer >= 1")


def load_config(config_path: str | Path | None = None, *, force_reload: bool = False) -> dict[str, Any]:
    """
    Load the YAML config once and reuse it across the process.

    - Reads `config/config.yaml` by default (or `SPHERE_KERNELS_CONFIG`).
    - Applies environment overrides for the thread cap and log level.
    - Returns a deep copy so callers can safely mutate local copies.
    """
    global _cached, _cached_path, _settings

    path = Path(config_path) if config_path else default_config_path()
    path_str = str(path.resolve())

    with _cache_lock:
        if not force_reload and _cached is not None and _cached_path == path_str:
            return deepcopy(_cached)

        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")

        with path.open("r", encoding="utf-8") as f:
            cfg = yaml.safe_load(f) or {}

        if not isinstance(cfg, dict):
            raise ValueError(f"Config must be a YAML mapping (dict); got {type(cfg).__name__}")

        _apply_env_overrides(cfg)
        validate_config(cfg)

        _cached = cfg
        _cached_path = path_str
        _settings = None
        logger.info("Loaded config from %s", path_str)
        return deepcopy(cfg)


@dataclass(frozen=True)
class NumericSettings:
    boundary_clip: float
    unit_norm_tolerance: float
    coefficient_tolerance: float
    certificate_tolerance: float
    psd_tolerance: float
    hermitian_tolerance: float
    log_space_threshold: int
    extra_nodes: int
    ladder_rel_tol: float
    max_nodes: int
    witness_trials: int
    witness_min_points: int
    witness_max_points: int
    jitter_scale: float
    jitter_escalation: tuple[float, ...]
    threads: int
    log_level: str


def numeric_settings() -> NumericSettings:
    """Typed view of the loaded config; library defaults come from here."""
    global _settings
    with _cache_lock:
        if _settings is not None:
            return _settings
    cfg = load_config()
    with _cache_lock:
        if _settings is not None:
            return _settings
        n = cfg["numerics"]
        q = cfg["quadrature"]
        pd = cfg["pd_check"]
        _settings = NumericSettings(
            boundary_clip=float(n["boundary_clip"]),
            unit_norm_tolerance=float(n["unit_norm_tolerance"]),
            coefficient_tolerance=float(n["coefficient_tolerance"]),
            certificate_tolerance=float(n["certificate_tolerance"]),
            psd_tolerance=float(n["psd_tolerance"]),
            hermitian_tolerance=float(n["hermitian_tolerance"]),
            log_space_threshold=int(n["log_space_threshold"]),
            extra_nodes=int(q["extra_nodes"]),
            ladder_rel_tol=float(q["ladder_rel_tol"]),
            max_nodes=int(q["max_nodes"]),
            witness_trials=int(pd["witness_trials"]),
            witness_min_points=int(pd["witness_min_points"]),
            witness_max_points=int(pd["witness_max_points"]),
            jitter_scale=float(pd["jitter_scale"]),
            jitter_escalation=tuple(float(v) for v in pd["jitter_escalation"]),
            threads=int(cfg["runtime"]["threads"]),
            log_level=str((cfg.get("logging") or {}).get("level", "INFO")).upper(),
        )
        return _settings
