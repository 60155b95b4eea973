"""
Touchstone v1 two-port reader / writer and single-frequency sampling.

Supported option line: ``# <Hz|kHz|MHz|GHz> S <MA|RI|DB> R <z0>`` (tokens in
any order, case-insensitive, all optional). Data rows carry nine numbers:
f, S11, S21, S12, S22, each parameter as a pair in the declared format.
A trailing noise-parameter block (five-column rows) is skipped with a warning.
"""
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .core import angle_deg, ensure_finite
from .errors import (
    EmptySweep,
    NonMonotonicFrequency,
    OutOfRange,
    TouchstoneSyntaxError,
    UnsupportedFormat,
)

logger = logging.getLogger(__name__)

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
FORMATS = ("MA", "RI", "DB")
PARAMETER_TYPES = ("S", "Y", "Z", "H", "G")

DEFAULT_FREQ_UNIT = "GHZ"
DEFAULT_FORMAT = "MA"
DEFAULT_Z0 = 50.0

# A grid frequency within this distance of a query is returned as-is
EXACT_MATCH_HZ = 1.0

# Magnitude floor when writing DB format (0 would be -inf dB)
DB_FLOOR = -400.0

_SNP_SUFFIX = re.compile(r'^\.s(\d+)p$', re.IGNORECASE)


@dataclass(frozen=True)
class TwoPortS:
    """One frequency point's scattering matrix, referenced to z0 ohms."""

    s11: complex
    s12: complex
    s21: complex
    s22: complex
    z0: float = DEFAULT_Z0

    def __post_init__(self):
        for name in ("s11", "s12", "s21", "s22"):
            value = complex(getattr(self, name))
            ensure_finite(value, name)
            object.__setattr__(self, name, value)
        if not (math.isfinite(self.z0) and self.z0 > 0):
            raise ValueError(f"Reference impedance must be > 0, got {self.z0!r}")
        object.__setattr__(self, "z0", float(self.z0))

    @classmethod
    def from_matrix(cls, matrix, z0: float = DEFAULT_Z0) -> "TwoPortS":
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"Expected a 2x2 matrix, got shape {m.shape}")
        return cls(s11=m[0, 0], s12=m[0, 1], s21=m[1, 0], s22=m[1, 1], z0=z0)

    @classmethod
    def from_polar(
        cls,
        *,
        s11: Tuple[float, float],
        s21: Tuple[float, float],
        s12: Tuple[float, float],
        s22: Tuple[float, float],
        z0: float = DEFAULT_Z0,
    ) -> "TwoPortS":
        """Build from (magnitude, angle_deg) pairs, the datasheet notation."""
        def _c(pair):
            mag, deg = pair
            return mag * np.exp(1j * np.radians(deg))
        return cls(s11=_c(s11), s12=_c(s12), s21=_c(s21), s22=_c(s22), z0=z0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]], dtype=complex)


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Frequency-ordered two-port S-parameters sharing one reference impedance."""

    frequencies: np.ndarray  # Hz, shape (N,)
    s: np.ndarray            # shape (N, 2, 2), complex
    z0: float = DEFAULT_Z0

    def __post_init__(self):
        freqs = np.array(self.frequencies, dtype=float).reshape(-1)
        s = np.array(self.s, dtype=complex)
        if freqs.size == 0:
            raise EmptySweep("Sweep has no frequency points")
        if s.shape != (freqs.size, 2, 2):
            raise ValueError(f"S array shape {s.shape} does not match {freqs.size} frequencies")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(s))):
            raise ValueError("Sweep contains non-finite values")
        if np.any(freqs <= 0):
            raise ValueError("Frequencies must be > 0 Hz")
        if np.any(np.diff(freqs) <= 0):
            raise NonMonotonicFrequency("Frequencies must be strictly increasing")
        if not (math.isfinite(self.z0) and self.z0 > 0):
            raise ValueError(f"Reference impedance must be > 0, got {self.z0!r}")
        freqs.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "z0", float(self.z0))

    @classmethod
    def from_points(cls, points: Iterable[Tuple[float, TwoPortS]]) -> "SweepTable":
        points = list(points)
        if not points:
            raise EmptySweep("Sweep has no frequency points")
        z0 = points[0][1].z0
        if any(p.z0 != z0 for _, p in points):
            raise ValueError("All points of a sweep must share one reference impedance")
        return cls(
            frequencies=np.array([f for f, _ in points]),
            s=np.array([p.matrix for _, p in points]),
            z0=z0,
        )

    def __len__(self) -> int:
        return int(self.frequencies.size)

    @property
    def f_min(self) -> float:
        return float(self.frequencies[0])

    @property
    def f_max(self) -> float:
        return float(self.frequencies[-1])

    def point(self, index: int) -> TwoPortS:
        return TwoPortS.from_matrix(self.s[index], self.z0)

    @property
    def points(self) -> List[Tuple[float, TwoPortS]]:
        return [(float(f), self.point(i)) for i, f in enumerate(self.frequencies)]

    def to_dataframe(self) -> pd.DataFrame:
        """One row per frequency: magnitude / angle (deg) columns per parameter."""
        data = {"frequency_hz": self.frequencies}
        for name, (i, j) in (("s11", (0, 0)), ("s21", (1, 0)), ("s12", (0, 1)), ("s22", (1, 1))):
            values = self.s[:, i, j]
            data[f"{name}_mag"] = np.abs(values)
            data[f"{name}_deg"] = np.degrees(np.angle(values))
        return pd.DataFrame(data)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _parse_option_line(body: str, line_number: int) -> Tuple[float, str, float]:
    tokens = body.split()
    unit = fmt = None
    ptype = None
    z0 = None
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in FREQ_UNITS:
            if unit is not None:
                raise TouchstoneSyntaxError(f"duplicate frequency unit {tokens[i]!r}", line_number)
            unit = tok
        elif tok in FORMATS:
            if fmt is not None:
                raise TouchstoneSyntaxError(f"duplicate data format {tokens[i]!r}", line_number)
            fmt = tok
        elif tok in PARAMETER_TYPES:
            if ptype is not None:
                raise TouchstoneSyntaxError(f"duplicate parameter type {tokens[i]!r}", line_number)
            ptype = tok
        elif tok == "R":
            if z0 is not None:
                raise TouchstoneSyntaxError("duplicate reference impedance", line_number)
            if i + 1 >= len(tokens):
                raise TouchstoneSyntaxError("'R' must be followed by the reference impedance", line_number)
            try:
                z0 = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneSyntaxError(f"invalid reference impedance {tokens[i + 1]!r}", line_number)
            if not (math.isfinite(z0) and z0 > 0):
                raise TouchstoneSyntaxError(f"reference impedance must be > 0, got {tokens[i + 1]!r}", line_number)
            i += 1
        else:
            raise TouchstoneSyntaxError(f"unknown option token {tokens[i]!r}", line_number)
        i += 1

    if ptype is not None and ptype != "S":
        raise UnsupportedFormat(f"parameter type {ptype} is not supported; only S", line_number)
    return (
        FREQ_UNITS[unit or DEFAULT_FREQ_UNIT],
        fmt or DEFAULT_FORMAT,
        DEFAULT_Z0 if z0 is None else z0,
    )


def _pair_to_complex(a: float, b: float, fmt: str) -> complex:
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    theta = math.radians(b)
    return complex(mag * math.cos(theta), mag * math.sin(theta))


def parse_touchstone(source: Union[str, Iterable[str]]) -> SweepTable:
    """Parse Touchstone v1 two-port text (a string or an iterable of lines)."""
    lines = source.splitlines() if isinstance(source, str) else source

    scale, fmt, z0 = FREQ_UNITS[DEFAULT_FREQ_UNIT], DEFAULT_FORMAT, DEFAULT_Z0
    option_seen = False
    in_noise_block = False
    freqs: List[float] = []
    rows: List[np.ndarray] = []
    last_line = 0

    for line_number, raw in enumerate(lines, start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedFormat(
                f"Touchstone v2 keyword {line.split()[0]!r}; only v1 files are supported",
                line_number,
            )
        if line.startswith("#"):
            if option_seen:
                logger.warning(f"line {line_number}: repeated option line ignored")
                continue
            if freqs:
                raise TouchstoneSyntaxError("option line must precede the data", line_number)
            scale, fmt, z0 = _parse_option_line(line[1:], line_number)
            option_seen = True
            continue

        try:
            values = [float(tok) for tok in line.split()]
        except ValueError:
            raise TouchstoneSyntaxError(f"non-numeric value in {line!r}", line_number)

        if len(values) == 5 and freqs:
            if not in_noise_block:
                logger.warning(f"line {line_number}: noise-parameter block ignored")
                in_noise_block = True
            continue
        if in_noise_block:
            raise TouchstoneSyntaxError(
                f"expected a 5-value noise row after the noise block started, got {len(values)}",
                line_number,
            )
        if len(values) == 3:
            raise UnsupportedFormat("one-port data (3 values per row); only two-port is supported", line_number)
        if len(values) != 9:
            raise TouchstoneSyntaxError(f"expected 9 values per two-port row, got {len(values)}", line_number)

        f = values[0] * scale
        if not (math.isfinite(f) and f > 0):
            raise TouchstoneSyntaxError(f"frequency must be > 0, got {values[0]}", line_number)
        if freqs and f <= freqs[-1]:
            raise NonMonotonicFrequency(
                f"frequency {f:g} Hz does not increase (previous {freqs[-1]:g} Hz)", line_number
            )
        s11 = _pair_to_complex(values[1], values[2], fmt)
        s21 = _pair_to_complex(values[3], values[4], fmt)
        s12 = _pair_to_complex(values[5], values[6], fmt)
        s22 = _pair_to_complex(values[7], values[8], fmt)
        freqs.append(f)
        rows.append(np.array([[s11, s12], [s21, s22]], dtype=complex))
        last_line = line_number

    if not freqs:
        raise EmptySweep("no data rows found")

    logger.info(f"Parsed {len(freqs)} two-port points ({fmt}, z0={z0:g} ohm, last data line {last_line})")
    return SweepTable(frequencies=np.array(freqs), s=np.array(rows), z0=z0)


def parse_touchstone_file(path: Union[str, Path]) -> SweepTable:
    """Read a .s2p file. Other port counts and Touchstone v2 (.ts) are rejected."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ts":
        raise UnsupportedFormat(f"{path}: Touchstone v2 (.ts) files are not supported")
    match = _SNP_SUFFIX.match(suffix)
    if match and int(match.group(1)) != 2:
        raise UnsupportedFormat(f"{path}: {match.group(1)}-port file; only two-port (.s2p) is supported")
    with open(path, encoding="utf-8") as f:
        return parse_touchstone(f.read())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _complex_to_pair(z: complex, fmt: str) -> Tuple[float, float]:
    if fmt == "RI":
        return z.real, z.imag
    mag = abs(z)
    if fmt == "MA":
        return mag, angle_deg(z)
    db = 20.0 * math.log10(mag) if mag > 0 else DB_FLOOR
    return max(db, DB_FLOOR), angle_deg(z)


def serialize_touchstone(table: SweepTable, fmt: str = "MA", freq_unit: str = "GHz") -> str:
    """Write a Touchstone v1 document: one option line, one row per point."""
    fmt = fmt.upper()
    if fmt not in FORMATS:
        raise ValueError(f"Unknown Touchstone format {fmt!r}; use one of {FORMATS}")
    unit = freq_unit.upper()
    if unit not in FREQ_UNITS:
        raise ValueError(f"Unknown frequency unit {freq_unit!r}")
    scale = FREQ_UNITS[unit]

    out = [f"# {unit} S {fmt} R {table.z0:.15g}"]
    for f, m in zip(table.frequencies, table.s):
        values = [f / scale]
        for z in (m[0, 0], m[1, 0], m[0, 1], m[1, 1]):
            values.extend(_complex_to_pair(complex(z), fmt))
        out.append(" ".join(f"{v:.15g}" for v in values))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_at(table: SweepTable, frequency_hz: float) -> TwoPortS:
    """S-parameters at one frequency.

    A grid point within 1 Hz is returned exactly; otherwise each parameter is
    interpolated linearly in magnitude and in unwrapped phase. Unwrapping picks
    the nearest branch between adjacent points, so steps must change phase by
    less than 180 degrees.
    """
    freqs = table.frequencies
    idx = int(np.argmin(np.abs(freqs - frequency_hz)))
    if abs(freqs[idx] - frequency_hz) <= EXACT_MATCH_HZ:
        return table.point(idx)
    if frequency_hz < table.f_min or frequency_hz > table.f_max:
        raise OutOfRange(
            f"frequency {frequency_hz:g} Hz is outside the sweep "
            f"[{table.f_min:g}, {table.f_max:g}] Hz"
        )

    flat = table.s.reshape(len(table), 4)
    mags = np.abs(flat)
    phases = np.unwrap(np.angle(flat), axis=0)
    sampled = np.empty(4, dtype=complex)
    for k in range(4):
        mag = np.interp(frequency_hz, freqs, mags[:, k])
        phase = np.interp(frequency_hz, freqs, phases[:, k])
        sampled[k] = mag * np.exp(1j * phase)
    return TwoPortS.from_matrix(sampled.reshape(2, 2), table.z0)


def read_sweep(path: Optional[Union[str, Path]], stdin=None) -> SweepTable:
    """Path, or "-" / None for standard input."""
    if path is None or str(path) == "-":
        stdin = stdin or sys.stdin
        return parse_touchstone(stdin.read())
    return parse_touchstone_file(path)
