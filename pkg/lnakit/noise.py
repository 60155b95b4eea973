"""
Noise-figure evaluation, constant-noise circles and cascade noise.

Noise factors are linear (F >= 1) inside the library; NF in dB exists only at
the CLI / report boundary. The noise resistance r_n is normalised to z0.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    SmithCircle,
    normalized_admittance,
    parse_gamma_literal,
    scalar_or_array,
    undb10,
)
from .errors import (
    BelowMinimum,
    EmptyCascade,
    InvalidNoiseParameters,
    InvalidSource,
    SingularPoint,
    UndefinedParameter,
)

logger = logging.getLogger(__name__)

# "Rn=10ohm" / "Rn=10" (ohms) versus "rn=0.2" (normalised)
_OHMS_SUFFIX = re.compile(r'\s*(ohms?|Ω)\s*$', re.IGNORECASE)


@dataclass(frozen=True)
class NoiseParameters:
    """F_min (linear), r_n (normalised to z0) and Gamma_opt."""

    f_min: float
    r_n: float
    gamma_opt: complex

    def __post_init__(self):
        object.__setattr__(self, "gamma_opt", complex(self.gamma_opt))
        if not (math.isfinite(self.f_min) and self.f_min >= 1.0):
            raise InvalidNoiseParameters(f"F_min must be >= 1 (linear), got {self.f_min!r}")
        if not (math.isfinite(self.r_n) and self.r_n >= 0.0):
            raise InvalidNoiseParameters(f"r_n must be >= 0, got {self.r_n!r}")
        if not abs(self.gamma_opt) < 1.0:
            raise InvalidNoiseParameters(f"|Gamma_opt| must be < 1, got {abs(self.gamma_opt):.6g}")

    @classmethod
    def from_db(cls, nf_min_db: float, r_n: float, gamma_opt: complex) -> "NoiseParameters":
        return cls(f_min=undb10(nf_min_db), r_n=r_n, gamma_opt=gamma_opt)


def parse_noise_parameters(text: str, z0: float = 50.0) -> NoiseParameters:
    """Parse "fmin_db=<dB>, rn=<normalised>, gopt=<MAG<ANGLE>".

    ``Rn=<ohms>`` (optionally suffixed "ohm") is accepted instead of ``rn`` and
    divided by z0. ``fmin=<linear>`` is accepted instead of ``fmin_db``.
    """
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InvalidNoiseParameters(f"Expected key=value in noise parameters, got {part!r}")
        key, value = (p.strip() for p in part.split("=", 1))
        if key in fields:
            raise InvalidNoiseParameters(f"Duplicate noise parameter {key!r}")
        fields[key] = value

    try:
        if "fmin_db" in fields:
            f_min = undb10(float(fields.pop("fmin_db")))
        elif "fmin" in fields:
            f_min = float(fields.pop("fmin"))
        else:
            raise InvalidNoiseParameters("Noise parameters need fmin_db (or fmin)")

        if "rn" in fields:
            r_n = float(fields.pop("rn"))
        elif "Rn" in fields:
            r_n = float(_OHMS_SUFFIX.sub("", fields.pop("Rn"))) / z0
        else:
            raise InvalidNoiseParameters("Noise parameters need rn (normalised) or Rn (ohms)")

        if "gopt" not in fields:
            raise InvalidNoiseParameters("Noise parameters need gopt=MAG<ANGLE")
        gamma_opt = parse_gamma_literal(fields.pop("gopt"))
    except InvalidNoiseParameters:
        raise
    except ValueError as e:
        raise InvalidNoiseParameters(f"Invalid noise parameters {text!r}: {e}")

    if fields:
        raise InvalidNoiseParameters(f"Unknown noise parameter keys: {sorted(fields)}")
    return NoiseParameters(f_min=f_min, r_n=r_n, gamma_opt=gamma_opt)


def noise_figure(params: NoiseParameters, gamma_s):
    """F = F_min + 4 r_n |Gs - Gopt|^2 / ((1 - |Gs|^2) |1 + Gopt|^2)  (linear)."""
    gs = np.asarray(gamma_s, dtype=complex)
    if np.any(np.abs(gs) >= 1.0):
        raise InvalidSource("|Gamma_s| must be < 1 for a finite noise figure")
    excess = (
        4.0 * params.r_n * np.abs(gs - params.gamma_opt) ** 2
        / ((1.0 - np.abs(gs) ** 2) * abs(1.0 + params.gamma_opt) ** 2)
    )
    return scalar_or_array(params.f_min + excess)


def noise_figure_admittance_form(params: NoiseParameters, gamma_s: complex) -> float:
    """F = F_min + (r_n / g_s) |y_s - y_opt|^2 with y = (1 - Gamma)/(1 + Gamma)."""
    gamma_s = complex(gamma_s)
    if abs(gamma_s) >= 1.0:
        raise InvalidSource("|Gamma_s| must be < 1 for a finite noise figure")
    y_s = normalized_admittance(gamma_s)
    y_opt = normalized_admittance(params.gamma_opt)
    g_s = y_s.real
    if g_s <= 0:
        raise SingularPoint(f"Source conductance g_s = {g_s:.3g} is not positive")
    return params.f_min + params.r_n / g_s * abs(y_s - y_opt) ** 2


def noise_circle_parameter(params: NoiseParameters, f_i: float) -> float:
    """N_i = (F_i - F_min) |1 + Gopt|^2 / (4 r_n)."""
    if f_i < params.f_min:
        raise BelowMinimum(f"F_i = {f_i:.6g} is below F_min = {params.f_min:.6g}")
    if f_i == params.f_min:
        return 0.0
    if params.r_n == 0:
        raise UndefinedParameter(
            "r_n = 0: every source gives F_min, so no finite circle exists for F_i > F_min"
        )
    return (f_i - params.f_min) * abs(1.0 + params.gamma_opt) ** 2 / (4.0 * params.r_n)


def noise_circle(params: NoiseParameters, f_i: float) -> SmithCircle:
    """Locus of Gamma_s with noise factor f_i (linear)."""
    n_i = noise_circle_parameter(params, f_i)
    center = params.gamma_opt / (1.0 + n_i)
    radius = math.sqrt(n_i * n_i + n_i * (1.0 - abs(params.gamma_opt) ** 2)) / (1.0 + n_i)
    return SmithCircle(center, radius)


@dataclass(frozen=True)
class CascadeStage:
    """One stage of a receiver chain: noise factor and available gain (linear)."""

    f: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and self.f >= 1.0):
            raise InvalidNoiseParameters(f"Stage noise factor must be >= 1, got {self.f!r}")
        if not (math.isfinite(self.g) and self.g > 0.0):
            raise InvalidNoiseParameters(f"Stage gain must be > 0, got {self.g!r}")

    @classmethod
    def from_db(cls, nf_db: float, gain_db: float) -> "CascadeStage":
        return cls(f=undb10(nf_db), g=undb10(gain_db))


def cascade_contributions(stages: Sequence[CascadeStage]) -> list:
    """Per-stage terms of the cascade sum: F_1, then (F_i - 1) / (G_1 ... G_{i-1})."""
    if not stages:
        raise EmptyCascade("A cascade needs at least one stage")
    terms = [stages[0].f]
    gain = stages[0].g
    for stage in stages[1:]:
        terms.append((stage.f - 1.0) / gain)
        gain *= stage.g
    return terms


def friis_cascade(stages: Sequence[CascadeStage]) -> float:
    """Total noise factor of cascaded stages (linear)."""
    return math.fsum(cascade_contributions(stages))
