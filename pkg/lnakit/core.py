"""
Complex-scalar and Smith-chart geometry primitives.

Reflection coefficients are plain Python ``complex`` values. Public angles are
in degrees, normalised to (-180, 180]; radians are used only inside this
module's trig calls.
"""
import cmath
import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import SingularPoint

ComplexScalar = complex

# |Gamma -/+ 1| below this is treated as the open / short singularity
TOL_SINGULAR = 1e-9

# "MAG<ANGLE" literal, whitespace allowed around "<"
GAMMA_LITERAL_PATTERN = re.compile(
    r'^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*<\s*'
    r'([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*$'
)


def ensure_finite(value: Union[complex, float], name: str = "value") -> None:
    """Raise ValueError when a real or complex value carries NaN/inf."""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {value!r}")


def normalize_angle_deg(angle_deg: float) -> float:
    """Map an angle in degrees onto (-180, 180]."""
    wrapped = math.fmod(angle_deg, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


def angle_deg(z: complex) -> float:
    """Argument of z in degrees, in (-180, 180]."""
    if z == 0:
        return 0.0
    return normalize_angle_deg(math.degrees(cmath.phase(z)))


@dataclass(frozen=True)
class PolarForm:
    """Magnitude / angle pair as printed in datasheets ("0.499 < 151.5")."""

    magnitude: float
    angle_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.magnitude) and math.isfinite(self.angle_deg)):
            raise ValueError(f"Non-finite polar value: {self.magnitude!r}<{self.angle_deg!r}")
        if self.magnitude < 0:
            raise ValueError(f"Polar magnitude must be >= 0, got {self.magnitude}")

    @classmethod
    def from_complex(cls, z: complex) -> "PolarForm":
        return cls(abs(z), angle_deg(z))

    def to_complex(self) -> complex:
        return polar_to_complex(self)


def polar_to_complex(p: PolarForm) -> complex:
    theta = math.radians(p.angle_deg)
    return complex(p.magnitude * math.cos(theta), p.magnitude * math.sin(theta))


def complex_to_polar(z: complex) -> PolarForm:
    return PolarForm.from_complex(complex(z))


def gamma_to_normalized_impedance(gamma: complex, tol: float = TOL_SINGULAR) -> complex:
    """z = (1 + Gamma) / (1 - Gamma)."""
    gamma = complex(gamma)
    if abs(gamma - 1.0) <= tol:
        raise SingularPoint(f"Gamma={gamma} is the open circuit; impedance is infinite")
    return (1.0 + gamma) / (1.0 - gamma)


def normalized_impedance_to_gamma(z: complex) -> complex:
    """Gamma = (z - 1) / (z + 1); the inverse of gamma_to_normalized_impedance."""
    z = complex(z)
    if abs(z + 1.0) <= TOL_SINGULAR:
        raise SingularPoint(f"z={z} maps to an infinite reflection coefficient")
    return (z - 1.0) / (z + 1.0)


def normalized_admittance(gamma: complex, tol: float = TOL_SINGULAR) -> complex:
    """y = (1 - Gamma) / (1 + Gamma)."""
    gamma = complex(gamma)
    if abs(gamma + 1.0) <= tol:
        raise SingularPoint(f"Gamma={gamma} is the short circuit; admittance is infinite")
    return (1.0 - gamma) / (1.0 + gamma)


def db10(ratio: float) -> float:
    """Power ratio to dB. Zero maps to -inf."""
    if ratio <= 0:
        return float("-inf")
    return 10.0 * math.log10(ratio)


def undb10(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class SmithCircle:
    """Circle in the reflection-coefficient plane."""

    center: complex
    radius: float

    def __post_init__(self):
        ensure_finite(self.center, "circle center")
        if not math.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"Circle radius must be finite and >= 0, got {self.radius!r}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def boundary_points(self, n: int = 360) -> np.ndarray:
        """n points spaced uniformly in parameter angle, starting at angle 0."""
        theta = np.arange(n) * (2.0 * np.pi / n)
        return self.center + self.radius * np.exp(1j * theta)

    def contains(self, point: complex) -> bool:
        """Strictly inside the circle."""
        return abs(complex(point) - self.center) < self.radius

    def encloses_origin(self) -> bool:
        return abs(self.center) < self.radius

    def unit_disc_clearance(self) -> float:
        """Distance between this circle's boundary and the closed unit disc.

        Positive when the boundary never touches the Smith chart: either the
        chart lies wholly outside the circle (|C| - r > 1) or wholly inside it
        (r - |C| > 1). Zero or negative otherwise.
        """
        d = abs(self.center)
        return max(d - self.radius - 1.0, self.radius - d - 1.0)

    def clear_of_unit_disc(self) -> bool:
        return self.unit_disc_clearance() > 0.0


def parse_gamma_literal(text: str) -> complex:
    """Parse "MAG<ANGLE" (angle in degrees) into a complex value."""
    match = GAMMA_LITERAL_PATTERN.match(text)
    if not match:
        raise ValueError(f"Invalid reflection literal {text!r}; expected MAG<ANGLE, e.g. 0.697<-157")
    return polar_to_complex(PolarForm(float(match.group(1)), float(match.group(2))))


def format_gamma_literal(z: complex, digits: int = 4) -> str:
    """Format a complex value as "MAG<ANGLE" with `digits` significant digits."""
    p = complex_to_polar(z)
    return f"{p.magnitude:.{digits}g}<{p.angle_deg:.{digits}g}"


def scalar_or_array(values: np.ndarray):
    """Unwrap 0-d numpy results to Python scalars; leave arrays alone."""
    arr = np.asarray(values)
    if arr.ndim == 0:
        return arr.item()
    return arr


_FREQUENCY_PATTERN = re.compile(
    r'^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(hz|khz|mhz|ghz)?\s*$', re.IGNORECASE
)
_FREQUENCY_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


def parse_frequency(text: str) -> float:
    """"3.0GHz" / "3000 MHz" / "3e9" (bare numbers are Hz) to hertz."""
    match = _FREQUENCY_PATTERN.match(str(text))
    if not match:
        raise ValueError(f"Invalid frequency {text!r}; expected e.g. 3.0GHz")
    value = float(match.group(1)) * _FREQUENCY_SCALE[(match.group(2) or "hz").lower()]
    if not value > 0:
        raise ValueError(f"Frequency must be > 0, got {text!r}")
    return value
