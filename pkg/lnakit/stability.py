"""
Stability metrics and stability-circle geometry.

Covers the Rollett K / determinant test, the single-parameter mu test (and
its dual mu'), the load and source stability circles, and which side of each
circle is the stable one.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import SmithCircle
from .errors import DegenerateCircle, DegenerateDenominator
from .touchstone import TwoPortS

logger = logging.getLogger(__name__)

# |S12 S21| below this is a unilateral device: K is reported as +inf
UNILATERAL_TOL = 1e-15
# Stability-circle denominators below this describe a line, not a circle
CIRCLE_DENOMINATOR_TOL = 1e-12


class Port(str, Enum):
    LOAD = "load"
    SOURCE = "source"


class Region(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


def determinant(s: TwoPortS) -> complex:
    """Delta = S11 S22 - S12 S21."""
    return s.s11 * s.s22 - s.s12 * s.s21


def rollett_k(s: TwoPortS) -> float:
    loop = abs(s.s12 * s.s21)
    if loop < UNILATERAL_TOL:
        return math.inf
    delta = determinant(s)
    return (1.0 - abs(s.s11) ** 2 - abs(s.s22) ** 2 + abs(delta) ** 2) / (2.0 * loop)


def _mu(s_near: complex, s_far: complex, delta: complex, loop: float) -> float:
    denominator_terms = (abs(s_far - delta * s_near.conjugate()), loop)
    if all(t < UNILATERAL_TOL for t in denominator_terms):
        raise DegenerateDenominator(
            "mu is undefined: |S_jj - Delta S_ii*| and |S12 S21| both vanish"
        )
    return (1.0 - abs(s_near) ** 2) / sum(denominator_terms)


def mu_factor(s: TwoPortS) -> float:
    """mu = (1 - |S11|^2) / (|S22 - Delta S11*| + |S12 S21|); > 1 iff unconditionally stable."""
    return _mu(s.s11, s.s22, determinant(s), abs(s.s12 * s.s21))


def mu_prime(s: TwoPortS) -> float:
    """Dual criterion mu' = (1 - |S22|^2) / (|S11 - Delta S22*| + |S12 S21|)."""
    return _mu(s.s22, s.s11, determinant(s), abs(s.s12 * s.s21))


def stability_circle(s: TwoPortS, port: Port) -> SmithCircle:
    """Locus of terminations at `port` where the opposite port sees |Gamma| = 1.

    Load circle: |Gamma_in| = 1 in the Gamma_L plane.
    Source circle: |Gamma_out| = 1 in the Gamma_S plane.
    """
    port = Port(port)
    delta = determinant(s)
    if port is Port.LOAD:
        near, far = s.s22, s.s11
    else:
        near, far = s.s11, s.s22
    denominator = abs(near) ** 2 - abs(delta) ** 2
    if abs(denominator) <= CIRCLE_DENOMINATOR_TOL:
        raise DegenerateCircle(
            f"{port.value} stability boundary is a line: |S{'22' if port is Port.LOAD else '11'}|^2 "
            f"- |Delta|^2 = {denominator:.3g}"
        )
    center = (near - delta * far.conjugate()).conjugate() / denominator
    radius = abs(s.s12 * s.s21) / abs(denominator)
    return SmithCircle(center, radius)


def _classify(circle: SmithCircle, origin_stable: bool) -> Region:
    if circle.radius <= UNILATERAL_TOL:
        return Region.OUTSIDE
    if circle.encloses_origin():
        return Region.INSIDE if origin_stable else Region.OUTSIDE
    return Region.OUTSIDE if origin_stable else Region.INSIDE


def stable_region(s: TwoPortS, port: Port) -> Region:
    """Side of the stability circle holding the stable terminations.

    Gamma = 0 at the load gives Gamma_in = S11 (source: Gamma_out = S22), so
    the side containing the origin is stable iff that |S_ii| < 1.
    """
    port = Port(port)
    circle = stability_circle(s, port)
    s_ii = s.s11 if port is Port.LOAD else s.s22
    return _classify(circle, abs(s_ii) < 1.0)


@dataclass(frozen=True)
class StabilityReport:
    delta: complex
    k: float
    mu: float
    mu_prime: float
    unconditional: bool
    load_circle: Optional[SmithCircle]
    source_circle: Optional[SmithCircle]
    load_stable_region: Optional[Region]
    source_stable_region: Optional[Region]
    geometry_consistent: bool


def _mu_or_sentinel(fn, s: TwoPortS, numerator: float) -> float:
    try:
        return fn(s)
    except DegenerateDenominator:
        if numerator == 0:
            return 0.0
        return math.copysign(math.inf, numerator)


def _circle_or_none(s: TwoPortS, port: Port):
    try:
        circle = stability_circle(s, port)
    except DegenerateCircle as e:
        logger.debug(f"{port.value} stability circle omitted: {e}")
        return None, None
    s_ii = s.s11 if port is Port.LOAD else s.s22
    return circle, _classify(circle, abs(s_ii) < 1.0)


def stability_report(s: TwoPortS) -> StabilityReport:
    delta = determinant(s)
    k = rollett_k(s)
    unconditional = k > 1.0 and abs(delta) < 1.0
    mu = _mu_or_sentinel(mu_factor, s, 1.0 - abs(s.s11) ** 2)
    mu_p = _mu_or_sentinel(mu_prime, s, 1.0 - abs(s.s22) ** 2)

    load_circle, load_region = _circle_or_none(s, Port.LOAD)
    source_circle, source_region = _circle_or_none(s, Port.SOURCE)

    # An unconditionally stable device keeps both boundaries off the chart,
    # with the whole chart on the stable side.
    geometry_consistent = True
    if unconditional:
        for circle, region in ((load_circle, load_region), (source_circle, source_region)):
            if circle is None or circle.radius <= UNILATERAL_TOL:
                continue
            chart_side = Region.INSIDE if circle.radius - abs(circle.center) > 1.0 else Region.OUTSIDE
            if not circle.clear_of_unit_disc() or region is not chart_side:
                geometry_consistent = False
        if not geometry_consistent:
            logger.warning(f"K/Delta verdict and circle geometry disagree (K={k:.6g}, |Delta|={abs(delta):.6g})")

    if unconditional != (mu > 1.0):
        logger.warning(f"K/Delta and mu verdicts disagree at the margin (K={k:.9g}, mu={mu:.9g})")

    return StabilityReport(
        delta=delta,
        k=k,
        mu=mu,
        mu_prime=mu_p,
        unconditional=unconditional,
        load_circle=load_circle,
        source_circle=source_circle,
        load_stable_region=load_region,
        source_stable_region=source_region,
        geometry_consistent=geometry_consistent,
    )
