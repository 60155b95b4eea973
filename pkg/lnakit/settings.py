"""
Runtime defaults for lnakit.

Values come from the environment (optionally a ``.env`` file next to the
working directory) so scan resolutions and substrate defaults can be tuned
without code changes.
"""
import os

from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def _float_env(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return float(raw)


LOG_LEVEL = os.environ.get("LNAKIT_LOG_LEVEL", "INFO").upper()

# Fallback load scan (conjugate load outside the stable region)
LOAD_SCAN_ANGLES = _int_env("LNAKIT_LOAD_SCAN_ANGLES", 720)
LOAD_SCAN_RADII = _int_env("LNAKIT_LOAD_SCAN_RADII", 50)

# Seed scan along the noise-circle boundary before golden-section refinement
SOURCE_SCAN_POINTS = _int_env("LNAKIT_SOURCE_SCAN_POINTS", 720)

DEFAULT_Z0 = _float_env("LNAKIT_DEFAULT_Z0", 50.0)
DEFAULT_STUB_KIND = os.environ.get("LNAKIT_STUB_KIND", "open").lower()

# Substrate used when a design asks for physical dimensions
SUBSTRATE_EPS_R = _float_env("LNAKIT_SUBSTRATE_EPS_R", 4.6)
SUBSTRATE_H_MM = _float_env("LNAKIT_SUBSTRATE_H_MM", 1.6)
BIAS_LINE_Z0 = _float_env("LNAKIT_BIAS_LINE_Z0", 100.0)
