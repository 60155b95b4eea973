"""
Exception hierarchy for lnakit.

Every failure raised by the library derives from ``LnaError`` so the CLI and
the HTTP service can map a whole family to one exit code / status code.
Input-value failures also derive from ``ValueError``.
"""
from typing import Optional


class LnaError(Exception):
    """Base exception for lnakit errors."""
    def __init__(self, message: str, stage: Optional[str] = None):
        self.message = message
        self.stage = stage
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


# ---------------------------------------------------------------------------
# Geometry / two-port algebra
# ---------------------------------------------------------------------------
class GeometryError(LnaError, ValueError):
    """A Smith-chart or two-port expression has no finite value."""
    pass


class SingularPoint(GeometryError):
    """Gamma sits on the open (+1) or short (-1) singularity."""
    pass


class DegenerateCircle(GeometryError):
    """Circle denominator vanishes; the locus is a line."""
    pass


class DegenerateDenominator(GeometryError):
    """Both terms of a stability-factor denominator vanish."""
    pass


class SingularTermination(GeometryError):
    """1 - S_ii * Gamma vanishes for the given termination."""
    pass


class InvalidSource(GeometryError):
    """Source reflection coefficient outside the open unit disc."""
    pass


# ---------------------------------------------------------------------------
# Touchstone ingestion
# ---------------------------------------------------------------------------
class TouchstoneError(LnaError, ValueError):
    """Base for Touchstone parse / sampling failures."""
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class TouchstoneSyntaxError(TouchstoneError):
    """Malformed option or data line."""
    pass


class UnsupportedFormat(TouchstoneError):
    """Parameter type, version or port count that is not two-port S data."""
    pass


class NonMonotonicFrequency(TouchstoneError):
    """Frequencies are not strictly increasing."""
    pass


class EmptySweep(TouchstoneError):
    """No data rows were found."""
    pass


class OutOfRange(TouchstoneError):
    """Query frequency outside the sweep."""
    pass


# ---------------------------------------------------------------------------
# Gain
# ---------------------------------------------------------------------------
class GainError(LnaError, ValueError):
    pass


class ActiveMismatch(GainError):
    """|S11| or |S22| >= 1, the unilateral figure of merit is undefined."""
    pass


class UnreachableGain(GainError):
    """Requested available gain has no circle (negative discriminant)."""
    pass


class ConditionallyStable(GainError):
    """MAG undefined; the maximum stable gain is attached instead."""
    def __init__(self, message: str, msg_ratio: float, stage: Optional[str] = None):
        self.msg_ratio = msg_ratio
        super().__init__(message, stage)


class UnilateralDevice(GainError):
    """S12 == 0: MAG is unbounded in the bilateral formula."""
    def __init__(self, message: str, unilateral_gain: float, stage: Optional[str] = None):
        self.unilateral_gain = unilateral_gain
        super().__init__(message, stage)


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------
class NoiseError(LnaError, ValueError):
    pass


class BelowMinimum(NoiseError):
    pass


class UndefinedParameter(NoiseError):
    pass


class EmptyCascade(NoiseError):
    pass


class InvalidNoiseParameters(NoiseError):
    pass


# ---------------------------------------------------------------------------
# Design
# ---------------------------------------------------------------------------
class DesignError(LnaError, ValueError):
    pass


class NotUnconditionallyStable(DesignError):
    pass


class InfeasibleSpec(DesignError):
    pass


class NoStableLoad(DesignError):
    pass


class ConfigError(DesignError):
    pass


# ---------------------------------------------------------------------------
# Matching networks
# ---------------------------------------------------------------------------
class MatchingError(LnaError, ValueError):
    pass


class UnreachableTarget(MatchingError):
    pass


class ComplexTarget(MatchingError):
    pass


class InvalidTermination(MatchingError):
    pass


class OutOfModelRange(MatchingError):
    pass


class SynthesisError(MatchingError):
    """ABCD verification of a synthesized network failed."""
    pass
