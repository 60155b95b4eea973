"""
Matching-network synthesis and microstrip realisation.

Networks are described from the device side outward: a series line of the
system impedance followed by a shunt stub across the z0 termination. Every
synthesized network is checked by cascading ABCD matrices before it is
returned. The line model is lossless and dispersion-free.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .core import angle_deg
from .errors import (
    ComplexTarget,
    InvalidTermination,
    OutOfModelRange,
    SynthesisError,
    UnreachableTarget,
)

logger = logging.getLogger(__name__)

# |Gamma| at or above 1 - this cannot be matched from a finite stub
REACH_TOL = 1e-9
VERIFY_TOL = 1e-6
# Two candidate series lines closer than this count as equal length
LENGTH_TIE_DEG = 1e-9

MICROSTRIP_Z0_RANGE = (10.0, 200.0)


class Topology(str, Enum):
    SERIES_LINE_SHUNT_STUB = "series_line_shunt_stub"
    QUARTER_WAVE = "quarter_wave"
    IDENTITY = "identity"


class StubKind(str, Enum):
    OPEN = "open"
    SHORT = "short"


@dataclass(frozen=True)
class MatchingNetwork:
    """Electrical description of a matching network (lengths in degrees)."""

    topology: Topology
    series_line_deg: float
    stub_deg: float
    stub_kind: Optional[StubKind]
    line_z0: float
    achieved_gamma: complex
    target_gamma: complex = 0j

    @property
    def error(self) -> float:
        return abs(self.achieved_gamma - self.target_gamma)


@dataclass(frozen=True)
class MicrostripLine:
    width_mm: float
    length_mm: float
    eps_r: float
    substrate_height_mm: float
    eps_eff: float
    z0: float

    def __post_init__(self):
        if not self.width_mm > 0:
            raise ValueError(f"Microstrip width must be > 0, got {self.width_mm!r}")
        if not self.length_mm > 0:
            raise ValueError(f"Microstrip length must be > 0, got {self.length_mm!r}")
        if not self.substrate_height_mm > 0:
            raise ValueError(f"Substrate height must be > 0, got {self.substrate_height_mm!r}")
        if not (1.0 <= self.eps_eff <= self.eps_r):
            raise ValueError(f"eps_eff {self.eps_eff!r} outside [1, eps_r={self.eps_r!r}]")


# ---------------------------------------------------------------------------
# ABCD cascade
# ---------------------------------------------------------------------------

def line_abcd(theta_deg: float, z0: float) -> np.ndarray:
    """Lossless line of characteristic impedance z0 and electrical length theta."""
    theta = math.radians(theta_deg)
    return np.array(
        [[math.cos(theta), 1j * z0 * math.sin(theta)],
         [1j * math.sin(theta) / z0, math.cos(theta)]],
        dtype=complex,
    )


def shunt_abcd(admittance: complex) -> np.ndarray:
    return np.array([[1.0, 0.0], [admittance, 1.0]], dtype=complex)


def stub_admittance(stub_deg: float, kind: StubKind, z0: float) -> complex:
    """Input admittance of a stub terminated open or short."""
    t = math.tan(math.radians(stub_deg))
    if StubKind(kind) is StubKind.OPEN:
        return 1j * t / z0
    if t == 0:
        raise SynthesisError("A zero-length short stub shorts the line")
    return -1j / (t * z0)


def input_reflection(abcd: np.ndarray, z_load: float, z_ref: float) -> complex:
    """Reflection looking into port 1 with port 2 terminated in z_load."""
    (a, b), (c, d) = abcd
    z_in = (a * z_load + b) / (c * z_load + d)
    return complex((z_in - z_ref) / (z_in + z_ref))


def _verify(network: MatchingNetwork, z0: float) -> complex:
    abcd = line_abcd(network.series_line_deg, z0)
    if network.topology is Topology.SERIES_LINE_SHUNT_STUB:
        abcd = abcd @ shunt_abcd(stub_admittance(network.stub_deg, network.stub_kind, z0))
    return input_reflection(abcd, z0, z0)


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def _stub_length(b: float, kind: StubKind) -> float:
    """Electrical length (deg, [0, 180)) giving normalised susceptance b."""
    if kind is StubKind.OPEN:
        return math.degrees(math.atan(b)) % 180.0
    return math.degrees(math.atan(-1.0 / b)) % 180.0


def single_stub_match(gamma_target: complex, z0: float = 50.0,
                      stub_kind: StubKind = StubKind.OPEN) -> MatchingNetwork:
    """Series line plus shunt stub presenting gamma_target to the device.

    The stub across the z0 termination gives y = 1 + jb with
    |(-jb)/(2 + jb)| = |Gamma|; the series line then rotates that
    reflection onto the target. Of the two susceptance solutions, the one
    with the shorter series line wins (ties: shorter stub).
    """
    gamma_target = complex(gamma_target)
    kind = StubKind(stub_kind)
    mag = abs(gamma_target)
    if mag >= 1.0 - REACH_TOL:
        raise UnreachableTarget(f"|Gamma| = {mag:.9g} cannot be reached by a lossless network")
    if not z0 > 0:
        raise InvalidTermination(f"System impedance must be > 0, got {z0!r}")

    if mag == 0.0:
        return MatchingNetwork(
            topology=Topology.IDENTITY,
            series_line_deg=0.0,
            stub_deg=0.0,
            stub_kind=None,
            line_z0=z0,
            achieved_gamma=0j,
            target_gamma=0j,
        )

    b_mag = 2.0 * mag / math.sqrt(1.0 - mag * mag)
    candidates = []
    for b in (b_mag, -b_mag):
        gamma_stub = -1j * b / (2.0 + 1j * b)
        line_deg = ((angle_deg(gamma_stub) - angle_deg(gamma_target)) / 2.0) % 180.0
        candidates.append((line_deg, _stub_length(b, kind)))

    (line_a, stub_a), (line_b, stub_b) = candidates
    if abs(line_a - line_b) <= LENGTH_TIE_DEG:
        line_deg, stub_deg = (line_a, stub_a) if stub_a <= stub_b else (line_b, stub_b)
    else:
        line_deg, stub_deg = min(candidates)

    network = MatchingNetwork(
        topology=Topology.SERIES_LINE_SHUNT_STUB,
        series_line_deg=line_deg,
        stub_deg=stub_deg,
        stub_kind=kind,
        line_z0=z0,
        achieved_gamma=0j,
        target_gamma=gamma_target,
    )
    achieved = _verify(network, z0)
    if abs(achieved - gamma_target) > VERIFY_TOL:
        raise SynthesisError(
            f"ABCD check failed: achieved {achieved:.6g}, target {gamma_target:.6g}"
        )
    logger.debug(f"single stub: line {line_deg:.3f} deg, {kind.value} stub {stub_deg:.3f} deg")
    return replace(network, achieved_gamma=achieved)


def quarter_wave_transformer(r_in, r_out) -> MatchingNetwork:
    """lambda/4 line of sqrt(r_in r_out) matching two real resistances."""
    resistances = []
    for name, value in (("r_in", r_in), ("r_out", r_out)):
        value = complex(value)
        if value.imag != 0:
            raise ComplexTarget(f"{name} = {value} is complex; a quarter-wave line matches real loads only")
        if not value.real > 0:
            raise InvalidTermination(f"{name} must be > 0, got {value.real!r}")
        resistances.append(value.real)
    r_in, r_out = resistances
    line_z0 = math.sqrt(r_in * r_out)
    achieved = input_reflection(line_abcd(90.0, line_z0), r_out, r_in)
    return MatchingNetwork(
        topology=Topology.QUARTER_WAVE,
        series_line_deg=90.0,
        stub_deg=0.0,
        stub_kind=None,
        line_z0=line_z0,
        achieved_gamma=achieved,
        target_gamma=0j,
    )


# ---------------------------------------------------------------------------
# Microstrip
# ---------------------------------------------------------------------------

def _eps_eff(w_over_h: float, eps_r: float) -> float:
    return (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / math.sqrt(1.0 + 12.0 / w_over_h)


def _check_substrate(eps_r: float, h_mm: float) -> None:
    if not (math.isfinite(eps_r) and eps_r >= 1.0):
        raise OutOfModelRange(f"eps_r must be >= 1, got {eps_r!r}")
    if not (math.isfinite(h_mm) and h_mm > 0):
        raise OutOfModelRange(f"Substrate height must be > 0 mm, got {h_mm!r}")


def microstrip_synthesis(z0: float, eps_r: float, h_mm: float):
    """Strip width (mm) and effective permittivity for a target impedance.

    Quasi-static Wheeler / Hammerstad synthesis: the exponential form for
    narrow strips (w/h < 2), the logarithmic form otherwise.
    """
    lo, hi = MICROSTRIP_Z0_RANGE
    if not (lo <= z0 <= hi):
        raise OutOfModelRange(f"z0 = {z0!r} ohm outside the model range [{lo:g}, {hi:g}]")
    _check_substrate(eps_r, h_mm)

    a = z0 / 60.0 * math.sqrt((eps_r + 1.0) / 2.0) + (eps_r - 1.0) / (eps_r + 1.0) * (0.23 + 0.11 / eps_r)
    w_over_h = 8.0 * math.exp(a) / (math.exp(2.0 * a) - 2.0)
    if not (0 < w_over_h < 2.0):
        b = 377.0 * math.pi / (2.0 * z0 * math.sqrt(eps_r))
        w_over_h = (2.0 / math.pi) * (
            b - 1.0 - math.log(2.0 * b - 1.0)
            + (eps_r - 1.0) / (2.0 * eps_r) * (math.log(b - 1.0) + 0.39 - 0.61 / eps_r)
        )
    return w_over_h * h_mm, _eps_eff(w_over_h, eps_r)


def microstrip_analysis(width_mm: float, h_mm: float, eps_r: float):
    """Characteristic impedance and effective permittivity of a strip."""
    _check_substrate(eps_r, h_mm)
    if not width_mm > 0:
        raise OutOfModelRange(f"Strip width must be > 0 mm, got {width_mm!r}")
    u = width_mm / h_mm
    eps_eff = _eps_eff(u, eps_r)
    if u <= 1.0:
        z0 = 60.0 / math.sqrt(eps_eff) * math.log(8.0 / u + u / 4.0)
    else:
        z0 = 120.0 * math.pi / (math.sqrt(eps_eff) * (u + 1.393 + 0.667 * math.log(u + 1.444)))
    return z0, eps_eff


def electrical_to_physical(length_deg: float, frequency_hz: float, eps_eff: float) -> float:
    """Physical length in mm of a line `length_deg` long at `frequency_hz`."""
    if not frequency_hz > 0:
        raise OutOfModelRange(f"Frequency must be > 0 Hz, got {frequency_hz!r}")
    if not eps_eff >= 1.0:
        raise OutOfModelRange(f"eps_eff must be >= 1, got {eps_eff!r}")
    wavelength_m = SPEED_OF_LIGHT / (frequency_hz * math.sqrt(eps_eff))
    return length_deg / 360.0 * wavelength_m * 1000.0


def microstrip_line(z0: float, length_deg: float, frequency_hz: float,
                    eps_r: float, h_mm: float) -> MicrostripLine:
    width_mm, eps_eff = microstrip_synthesis(z0, eps_r, h_mm)
    return MicrostripLine(
        width_mm=width_mm,
        length_mm=electrical_to_physical(length_deg, frequency_hz, eps_eff),
        eps_r=eps_r,
        substrate_height_mm=h_mm,
        eps_eff=eps_eff,
        z0=z0,
    )


@dataclass(frozen=True)
class BiasLine:
    """lambda/4 high-impedance feed; the radial stub is a named placeholder."""

    line: MicrostripLine
    termination: str = "radial_stub"


def bias_line(frequency_hz: float, line_z0: float, eps_r: float, h_mm: float) -> BiasLine:
    return BiasLine(line=microstrip_line(line_z0, 90.0, frequency_hz, eps_r, h_mm))


def realize_network(network: MatchingNetwork, frequency_hz: float,
                    eps_r: float, h_mm: float) -> Dict[str, MicrostripLine]:
    """Microstrip dimensions for each non-zero element, keyed "series_line" / "stub"."""
    lines = {}
    if network.series_line_deg > 0:
        lines["series_line"] = microstrip_line(
            network.line_z0, network.series_line_deg, frequency_hz, eps_r, h_mm
        )
    if network.topology is Topology.SERIES_LINE_SHUNT_STUB and network.stub_deg > 0:
        lines["stub"] = microstrip_line(network.line_z0, network.stub_deg, frequency_hz, eps_r, h_mm)
    return lines


def network_elements(network: MatchingNetwork,
                     realized: Optional[Dict[str, MicrostripLine]] = None) -> List[dict]:
    """Ordered element list, device side first."""
    realized = realized or {}
    elements = []
    if network.topology is Topology.IDENTITY:
        return elements
    line = {"type": "series_line", "z0": network.line_z0, "deg": network.series_line_deg}
    if "series_line" in realized:
        line["mm"] = realized["series_line"].length_mm
        line["width_mm"] = realized["series_line"].width_mm
    elements.append(line)
    if network.topology is Topology.SERIES_LINE_SHUNT_STUB:
        stub = {
            "type": f"shunt_stub_{network.stub_kind.value}",
            "z0": network.line_z0,
            "deg": network.stub_deg,
        }
        if "stub" in realized:
            stub["mm"] = realized["stub"].length_mm
            stub["width_mm"] = realized["stub"].width_mm
        elements.append(stub)
    return elements
