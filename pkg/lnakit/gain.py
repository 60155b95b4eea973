"""
Gain quantities and constant-available-gain circles.

All gains are linear power ratios; dB conversion happens only when a report
is serialised. Functions taking a reflection coefficient also accept numpy
arrays of them and return arrays in that case.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import SmithCircle, db10, scalar_or_array
from .errors import (
    ActiveMismatch,
    ConditionallyStable,
    InvalidSource,
    SingularTermination,
    UnilateralDevice,
    UnreachableGain,
)
from .stability import UNILATERAL_TOL, determinant, rollett_k
from .touchstone import TwoPortS

logger = logging.getLogger(__name__)

SINGULAR_TERMINATION_TOL = 1e-12


def _check_denominator(denominator: np.ndarray, what: str) -> None:
    if np.any(np.abs(denominator) <= SINGULAR_TERMINATION_TOL):
        raise SingularTermination(f"{what} vanishes for the given termination")


def _check_passive(gamma: np.ndarray, name: str) -> None:
    if np.any(np.abs(gamma) >= 1.0):
        raise InvalidSource(f"|{name}| must be < 1")


def gamma_in(s: TwoPortS, gamma_l):
    """Input reflection: S11 + S12 S21 Gamma_L / (1 - S22 Gamma_L)."""
    gl = np.asarray(gamma_l, dtype=complex)
    denominator = 1.0 - s.s22 * gl
    _check_denominator(denominator, "1 - S22*Gamma_L")
    return scalar_or_array(s.s11 + s.s12 * s.s21 * gl / denominator)


def gamma_out(s: TwoPortS, gamma_s):
    """Output reflection: S22 + S12 S21 Gamma_S / (1 - S11 Gamma_S)."""
    gs = np.asarray(gamma_s, dtype=complex)
    denominator = 1.0 - s.s11 * gs
    _check_denominator(denominator, "1 - S11*Gamma_S")
    return scalar_or_array(s.s22 + s.s12 * s.s21 * gs / denominator)


def transducer_gain(s: TwoPortS, gamma_s, gamma_l):
    """G_T for the given source and load terminations (broadcasts)."""
    gs = np.asarray(gamma_s, dtype=complex)
    gl = np.asarray(gamma_l, dtype=complex)
    _check_passive(gs, "Gamma_S")
    _check_passive(gl, "Gamma_L")
    denominator = (1.0 - s.s11 * gs) * (1.0 - s.s22 * gl) - s.s12 * s.s21 * gs * gl
    _check_denominator(denominator, "transducer-gain denominator")
    g = (1.0 - np.abs(gs) ** 2) * abs(s.s21) ** 2 * (1.0 - np.abs(gl) ** 2) / np.abs(denominator) ** 2
    return scalar_or_array(g)


def unilateral_transducer_gain(s: TwoPortS, gamma_s, gamma_l):
    """G_TU: transducer gain with S12 set to zero."""
    gs = np.asarray(gamma_s, dtype=complex)
    gl = np.asarray(gamma_l, dtype=complex)
    _check_passive(gs, "Gamma_S")
    _check_passive(gl, "Gamma_L")
    d_in = 1.0 - s.s11 * gs
    d_out = 1.0 - s.s22 * gl
    _check_denominator(d_in, "1 - S11*Gamma_S")
    _check_denominator(d_out, "1 - S22*Gamma_L")
    g = (
        (1.0 - np.abs(gs) ** 2) / np.abs(d_in) ** 2
        * abs(s.s21) ** 2
        * (1.0 - np.abs(gl) ** 2) / np.abs(d_out) ** 2
    )
    return scalar_or_array(g)


def max_unilateral_gain(s: TwoPortS) -> float:
    """|S21|^2 / ((1 - |S11|^2)(1 - |S22|^2)), G_TU at Gamma_S = S11*, Gamma_L = S22*."""
    denominator = (1.0 - abs(s.s11) ** 2) * (1.0 - abs(s.s22) ** 2)
    if abs(s.s11) >= 1.0 or abs(s.s22) >= 1.0:
        raise ActiveMismatch("|S11| and |S22| must be < 1 for a finite unilateral gain")
    return abs(s.s21) ** 2 / denominator


@dataclass(frozen=True)
class UnilateralAssessment:
    """Unilateral figure of merit U and the G_T / G_TU error band."""

    u: float
    lower_bound: float
    upper_bound: float
    lower_db: float
    upper_db: float


def unilateral_assessment(s: TwoPortS) -> UnilateralAssessment:
    if abs(s.s11) >= 1.0 or abs(s.s22) >= 1.0:
        raise ActiveMismatch(
            f"U undefined: |S11|={abs(s.s11):.4g}, |S22|={abs(s.s22):.4g} (both must be < 1)"
        )
    u = (
        abs(s.s11) * abs(s.s12) * abs(s.s21) * abs(s.s22)
        / ((1.0 - abs(s.s11) ** 2) * (1.0 - abs(s.s22) ** 2))
    )
    lower = 1.0 / (1.0 + u) ** 2
    upper = 1.0 / (1.0 - u) ** 2 if u < 1.0 else math.inf
    return UnilateralAssessment(
        u=u,
        lower_bound=lower,
        upper_bound=upper,
        lower_db=db10(lower),
        upper_db=db10(upper) if math.isfinite(upper) else math.inf,
    )


def available_gain(s: TwoPortS, gamma_s):
    """G_A = |S21|^2 (1 - |Gs|^2) / ((1 - |(S22 - Delta Gs)/(1 - S11 Gs)|^2) |1 - S11 Gs|^2)."""
    gs = np.asarray(gamma_s, dtype=complex)
    _check_passive(gs, "Gamma_S")
    delta = determinant(s)
    d_in = 1.0 - s.s11 * gs
    _check_denominator(d_in, "1 - S11*Gamma_S")
    out_term = 1.0 - np.abs((s.s22 - delta * gs) / d_in) ** 2
    _check_denominator(out_term, "1 - |Gamma_out|^2")
    g = abs(s.s21) ** 2 * (1.0 - np.abs(gs) ** 2) / (out_term * np.abs(d_in) ** 2)
    return scalar_or_array(g)


def max_stable_gain(s: TwoPortS) -> float:
    if abs(s.s12) <= UNILATERAL_TOL:
        raise UnilateralDevice(
            "S12 = 0: maximum stable gain is unbounded", unilateral_gain=_unilateral_or_inf(s)
        )
    return abs(s.s21) / abs(s.s12)


def _unilateral_or_inf(s: TwoPortS) -> float:
    try:
        return max_unilateral_gain(s)
    except ActiveMismatch:
        return math.inf


def max_available_gain(s: TwoPortS) -> float:
    """MAG = |S21/S12| (K - sqrt(K^2 - 1)) for an unconditionally stable device."""
    if abs(s.s12) <= UNILATERAL_TOL:
        raise UnilateralDevice(
            "S12 = 0: bilateral MAG is undefined; use the unilateral maximum gain",
            unilateral_gain=_unilateral_or_inf(s),
        )
    k = rollett_k(s)
    delta = determinant(s)
    msg = abs(s.s21) / abs(s.s12)
    if k < 1.0 or abs(delta) >= 1.0:
        raise ConditionallyStable(
            f"MAG undefined for a potentially unstable device (K={k:.6g}, |Delta|={abs(delta):.6g}); "
            f"MSG = {msg:.6g} ({db10(msg):.2f} dB)",
            msg_ratio=msg,
        )
    return msg * (k - math.sqrt(k * k - 1.0))


def available_gain_circle(s: TwoPortS, g_target: float) -> SmithCircle:
    """Locus of Gamma_S giving G_A = g_target (linear)."""
    if not g_target > 0:
        raise UnreachableGain(f"Target gain must be > 0, got {g_target!r}")
    s21_sq = abs(s.s21) ** 2
    if s21_sq == 0:
        raise UnreachableGain("S21 = 0: no positive available gain is reachable")
    g_a = g_target / s21_sq
    delta = determinant(s)
    c1 = s.s11 - delta * s.s22.conjugate()
    loop = abs(s.s12 * s.s21)
    scale = 1.0 + g_a * (abs(s.s11) ** 2 - abs(delta) ** 2)
    if abs(scale) <= SINGULAR_TERMINATION_TOL:
        raise UnreachableGain(f"g_a = {g_a:.6g} puts the gain circle at infinity")
    # K |S12 S21| expanded, so a unilateral device needs no K sentinel
    k_loop = (1.0 - abs(s.s11) ** 2 - abs(s.s22) ** 2 + abs(delta) ** 2) / 2.0
    discriminant = 1.0 - 2.0 * k_loop * g_a + loop ** 2 * g_a ** 2
    if discriminant < 0:
        if discriminant > -1e-12:
            discriminant = 0.0
        else:
            raise UnreachableGain(
                f"G_A = {g_target:.6g} ({db10(g_target):.2f} dB) is not reachable "
                f"(discriminant {discriminant:.3g})"
            )
    center = g_a * c1.conjugate() / scale
    radius = math.sqrt(discriminant) / abs(scale)
    return SmithCircle(center, radius)
