"""
Runtime defaults, overridable from the environment or a .env file.
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

DEFAULT_ORDER = 24
DEFAULT_LAW_ORDER = 18
DEFAULT_GRID = 200
DEFAULT_PRECISION = 256
DEFAULT_TOL = 1e-12
DEFAULT_MAX_I = 12
DEFAULT_TAIL_I = 80


def _env_int(name: str, default: int) -> int:
    """Read a positive integer from the environment, falling back to default."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    if value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    return value


def get_default_order() -> int:
    """Truncation order for counting and kernel work (KREWERAS_ORDER)."""
    return _env_int("KREWERAS_ORDER", DEFAULT_ORDER)


def get_default_law_order() -> int:
    """Truncation order for the law closed forms (KREWERAS_LAW_ORDER)."""
    return _env_int("KREWERAS_LAW_ORDER", DEFAULT_LAW_ORDER)


def get_default_grid() -> int:
    """Side of the power-iteration grid (KREWERAS_GRID)."""
    return _env_int("KREWERAS_GRID", DEFAULT_GRID)


def get_default_precision() -> int:
    """mpmath working precision in bits (KREWERAS_PRECISION)."""
    return _env_int("KREWERAS_PRECISION", DEFAULT_PRECISION)
