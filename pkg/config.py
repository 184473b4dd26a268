"""
Environment-driven settings
Loads an optional .env file and validates every FIXPOINT_* variable up front
"""

import os
from dataclasses import dataclass
from typing import List, Optional

from dotenv import load_dotenv

from errors import ConfigError

load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def safe_get_env(key: str, default: str = "") -> str:
    """Safely get environment variable"""
    return os.getenv(key, default).strip()


@dataclass(frozen=True)
class Settings:
    tol: float = 1e-10
    max_iter: int = 10_000
    cauchy_window: int = 2
    divergence_bound: float = 1e12
    check_tolerance: float = 1e-9
    sample_box: float = 10.0
    regularity_fraction: float = 0.5
    log_level: str = "WARNING"
    log_file: Optional[str] = None


def _parse(key: str, default: str, cast, problems: List[str]):
    raw = safe_get_env(key, default)
    try:
        return cast(raw)
    except ValueError:
        problems.append(f"{key}={raw!r} is not a valid {cast.__name__}")
        return cast(default)


def validate_config(settings: Settings) -> None:
    """Raise ConfigError listing every out-of-range setting"""
    problems = []
    if not settings.tol > 0:
        problems.append("FIXPOINT_TOL must be > 0")
    if settings.max_iter < 1:
        problems.append("FIXPOINT_MAX_ITER must be >= 1")
    if settings.cauchy_window < 1:
        problems.append("FIXPOINT_CAUCHY_WINDOW must be >= 1")
    if not settings.divergence_bound > 0:
        problems.append("FIXPOINT_DIVERGENCE_BOUND must be > 0")
    if settings.check_tolerance < 0:
        problems.append("FIXPOINT_CHECK_TOLERANCE must be >= 0")
    if not settings.sample_box > 0:
        problems.append("FIXPOINT_SAMPLE_BOX must be > 0")
    if not 0 < settings.regularity_fraction <= 1:
        problems.append("FIXPOINT_REGULARITY_FRACTION must lie in (0, 1]")
    if settings.log_level not in LOG_LEVELS:
        problems.append(f"FIXPOINT_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
    if problems:
        raise ConfigError("Invalid configuration: " + "; ".join(problems))


def load_settings() -> Settings:
    """Build Settings from the environment"""
    problems: List[str] = []
    settings = Settings(
        tol=_parse("FIXPOINT_TOL", "1e-10", float, problems),
        max_iter=_parse("FIXPOINT_MAX_ITER", "10000", int, problems),
        cauchy_window=_parse("FIXPOINT_CAUCHY_WINDOW", "2", int, problems),
        divergence_bound=_parse("FIXPOINT_DIVERGENCE_BOUND", "1e12", float, problems),
        check_tolerance=_parse("FIXPOINT_CHECK_TOLERANCE", "1e-9", float, problems),
        sample_box=_parse("FIXPOINT_SAMPLE_BOX", "10.0", float, problems),
        regularity_fraction=_parse("FIXPOINT_REGULARITY_FRACTION", "0.5", float, problems),
        log_level=safe_get_env("FIXPOINT_LOG_LEVEL", "WARNING").upper(),
        log_file=safe_get_env("FIXPOINT_LOG_FILE") or None,
    )
    if problems:
        raise ConfigError("Invalid configuration: " + "; ".join(problems))
    validate_config(settings)
    return settings


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, loaded on first use"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    """Forget cached settings so the next get_settings() re-reads the environment"""
    global _settings
    _settings = None
