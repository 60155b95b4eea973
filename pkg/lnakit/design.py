"""
Single-frequency LNA design: choose Gamma_S, derive Gamma_L, check stability
and assemble the design report with its matching networks.
"""
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from scipy.optimize import minimize_scalar

from . import settings
from .core import parse_frequency, undb10
from .errors import (
    ConfigError,
    ConditionallyStable,
    InfeasibleSpec,
    LnaError,
    NoStableLoad,
    NotUnconditionallyStable,
    SingularTermination,
)
from .gain import (
    available_gain,
    gamma_in,
    gamma_out,
    max_available_gain,
    transducer_gain,
)
from .matching import (
    BiasLine,
    MatchingNetwork,
    MicrostripLine,
    StubKind,
    bias_line,
    realize_network,
    single_stub_match,
)
from .noise import NoiseParameters, noise_circle, noise_figure
from .stability import StabilityReport, determinant, rollett_k, stability_report
from .touchstone import SweepTable, TwoPortS, sample_at

logger = logging.getLogger(__name__)

SPEC_KEYS = ("freq", "objective", "nf_max_db", "gain_min_db", "z0", "stub_kind", "eps_r", "h_mm")

# Slack on the noise cap / gain floor checked after the design
CONSTRAINT_TOL = 1e-9


class Objective(str, Enum):
    MAX_GAIN = "max_gain"
    MIN_NOISE = "min_noise"
    GAIN_AT_NF_CAP = "gain_at_nf_cap"


@dataclass(frozen=True)
class DesignSpec:
    """Design targets. nf_max / gain_min are linear; None means unconstrained."""

    frequency_hz: float
    objective: Objective = Objective.MAX_GAIN
    nf_max: Optional[float] = None
    gain_min: Optional[float] = None
    z0: float = settings.DEFAULT_Z0
    stub_kind: StubKind = StubKind(settings.DEFAULT_STUB_KIND)
    eps_r: float = settings.SUBSTRATE_EPS_R
    h_mm: float = settings.SUBSTRATE_H_MM

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        object.__setattr__(self, "stub_kind", StubKind(self.stub_kind))
        if not self.frequency_hz > 0:
            raise ConfigError(f"Design frequency must be > 0 Hz, got {self.frequency_hz!r}")
        if self.nf_max is not None and not self.nf_max >= 1.0:
            raise ConfigError(f"nf_max must be >= 1 (linear), got {self.nf_max!r}")
        if self.gain_min is not None and not self.gain_min > 0:
            raise ConfigError(f"gain_min must be > 0, got {self.gain_min!r}")
        if not self.z0 > 0:
            raise ConfigError(f"z0 must be > 0, got {self.z0!r}")
        if self.objective is Objective.GAIN_AT_NF_CAP and self.nf_max is None:
            raise ConfigError("objective gain_at_nf_cap needs nf_max_db")


def _optional_float(values: dict, key: str) -> Optional[float]:
    raw = values.get(key)
    if raw is None or raw.strip() == "":
        return None
    return float(raw)


def load_design_spec(path: Union[str, Path]) -> DesignSpec:
    """Read a key=value design file (freq, objective, nf_max_db, gain_min_db, z0, ...)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Design spec file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(SPEC_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}; expected {list(SPEC_KEYS)}")
    if not values.get("freq"):
        raise ConfigError(f"{path}: freq is required")

    try:
        nf_max_db = _optional_float(values, "nf_max_db")
        gain_min_db = _optional_float(values, "gain_min_db")
        kwargs = dict(
            frequency_hz=parse_frequency(values["freq"]),
            objective=Objective((values.get("objective") or "max_gain").strip().lower()),
            nf_max=undb10(nf_max_db) if nf_max_db is not None else None,
            gain_min=undb10(gain_min_db) if gain_min_db is not None else None,
        )
        for key, target in (("z0", "z0"), ("eps_r", "eps_r"), ("h_mm", "h_mm")):
            value = _optional_float(values, key)
            if value is not None:
                kwargs[target] = value
        if values.get("stub_kind"):
            kwargs["stub_kind"] = StubKind(values["stub_kind"].strip().lower())
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"{path}: {e}")
    return DesignSpec(**kwargs)


# ---------------------------------------------------------------------------
# Termination membership
# ---------------------------------------------------------------------------

def load_is_stable(s: TwoPortS, gamma_l: complex) -> bool:
    """True when Gamma_L keeps |Gamma_in| < 1."""
    try:
        return abs(gamma_in(s, gamma_l)) < 1.0
    except SingularTermination:
        return False


def source_is_stable(s: TwoPortS, gamma_s: complex) -> bool:
    """True when Gamma_S keeps |Gamma_out| < 1."""
    try:
        return abs(gamma_out(s, gamma_s)) < 1.0
    except SingularTermination:
        return False


# ---------------------------------------------------------------------------
# Conjugate match
# ---------------------------------------------------------------------------

def _conjugate_root(b: float, c: complex) -> complex:
    discriminant = b * b - 4.0 * abs(c) ** 2
    if discriminant < 0:
        raise NotUnconditionallyStable(
            f"Conjugate-match discriminant is negative ({discriminant:.6g})"
        )
    root = math.copysign(math.sqrt(discriminant), b)
    if b + root == 0:
        raise NotUnconditionallyStable("Conjugate-match quadratic is degenerate (B = 0)")
    # rationalised minus root, finite at C = 0
    gamma = 2.0 * c.conjugate() / (b + root)
    if abs(gamma) < 1.0:
        return gamma
    if c != 0:
        other = (b + root) * c.conjugate() / (2.0 * abs(c) ** 2)
        if abs(other) < 1.0:
            return other
    raise NotUnconditionallyStable(f"No conjugate-match root inside the unit disc (|Gamma| = {abs(gamma):.6g})")


def simultaneous_conjugate_match(s: TwoPortS) -> Tuple[complex, complex]:
    """(Gamma_MS, Gamma_ML) for an unconditionally stable device."""
    k = rollett_k(s)
    delta = determinant(s)
    if not (k > 1.0 and abs(delta) < 1.0):
        failing = "K <= 1" if not k > 1.0 else "|Delta| >= 1"
        raise NotUnconditionallyStable(
            f"Device is not unconditionally stable ({failing}): K = {k:.6g}, |Delta| = {abs(delta):.6g}"
        )
    b1 = 1.0 + abs(s.s11) ** 2 - abs(s.s22) ** 2 - abs(delta) ** 2
    b2 = 1.0 + abs(s.s22) ** 2 - abs(s.s11) ** 2 - abs(delta) ** 2
    c1 = s.s11 - delta * s.s22.conjugate()
    c2 = s.s22 - delta * s.s11.conjugate()
    return _conjugate_root(b1, c1), _conjugate_root(b2, c2)


# ---------------------------------------------------------------------------
# Source selection
# ---------------------------------------------------------------------------

def _require_noise(noise: Optional[NoiseParameters], objective: Objective) -> NoiseParameters:
    if noise is None:
        raise InfeasibleSpec(f"noise parameters required for objective {objective.value}")
    return noise


def _noise_disc_is_stable(s: TwoPortS, circle, angles: int, radii: int = 64) -> bool:
    """True when every passive Gamma_S inside `circle` keeps |Gamma_out| < 1."""
    theta = np.arange(angles) * (2.0 * np.pi / angles)
    rho = np.linspace(0.0, 1.0, radii + 1)
    disc = circle.center + circle.radius * rho[:, np.newaxis] * np.exp(1j * theta[np.newaxis, :])
    disc = disc[np.abs(disc) < 1.0]
    if disc.size == 0:
        return True
    try:
        return bool(np.all(np.abs(gamma_out(s, disc)) < 1.0))
    except SingularTermination:
        return False


def _best_on_noise_circle(s: TwoPortS, noise: NoiseParameters, nf_max: float) -> complex:
    circle = noise_circle(noise, nf_max)
    n = settings.SOURCE_SCAN_POINTS
    theta = np.arange(n) * (2.0 * np.pi / n)
    points = circle.center + circle.radius * np.exp(1j * theta)

    feasible = np.abs(points) < 1.0
    feasible[feasible] = np.abs(gamma_out(s, points[feasible])) < 1.0
    if not feasible.any():
        raise InfeasibleSpec(
            f"The {10 * math.log10(nf_max):.3f} dB noise circle lies wholly in the unstable source region"
        )
    # G_A grows without bound towards |Gamma_out| = 1
    if not _noise_disc_is_stable(s, circle, n):
        raise InfeasibleSpec(
            f"The {10 * math.log10(nf_max):.3f} dB noise circle crosses the source stability circle; "
            f"available gain is unbounded inside the cap"
        )
    gains = np.full(n, -np.inf)
    gains[feasible] = available_gain(s, points[feasible])
    i = int(np.argmax(gains))
    best_theta, best_gain = float(theta[i]), float(gains[i])

    def objective(t):
        gs = circle.center + circle.radius * complex(math.cos(t), math.sin(t))
        if abs(gs) >= 1.0 or not source_is_stable(s, gs):
            return math.inf
        return -available_gain(s, gs)

    step = 2.0 * np.pi / n
    try:
        result = minimize_scalar(
            objective,
            bracket=(best_theta - step, best_theta, best_theta + step),
            method="golden",
            tol=1e-9,
        )
        if result.success and -result.fun >= best_gain:
            best_theta, best_gain = float(result.x), float(-result.fun)
    except ValueError as e:
        logger.debug(f"golden-section refinement skipped: {e}")

    logger.debug(f"noise-cap source: theta={math.degrees(best_theta):.6f} deg, G_A={best_gain:.6g}")
    return circle.center + circle.radius * complex(math.cos(best_theta), math.sin(best_theta))


def select_source_gamma(s: TwoPortS, noise: Optional[NoiseParameters], spec: DesignSpec) -> complex:
    objective = spec.objective
    if objective is Objective.MAX_GAIN:
        return simultaneous_conjugate_match(s)[0]

    noise = _require_noise(noise, objective)
    if objective is Objective.MIN_NOISE:
        if not source_is_stable(s, noise.gamma_opt):
            raise InfeasibleSpec("Gamma_opt lies in the unstable source region")
        return noise.gamma_opt

    nf_max = spec.nf_max
    if nf_max < noise.f_min:
        raise InfeasibleSpec(
            f"nf_max {10 * math.log10(nf_max):.3f} dB is below NF_min {10 * math.log10(noise.f_min):.3f} dB"
        )
    if nf_max == noise.f_min:
        if not source_is_stable(s, noise.gamma_opt):
            raise InfeasibleSpec("Gamma_opt lies in the unstable source region")
        return noise.gamma_opt
    if rollett_k(s) > 1.0 and abs(determinant(s)) < 1.0:
        gamma_ms = simultaneous_conjugate_match(s)[0]
        if noise_figure(noise, gamma_ms) <= nf_max:
            logger.info("noise cap inactive: using the simultaneous conjugate match")
            return gamma_ms
    else:
        logger.info("potentially unstable device: searching the noise circle inside the stable source region")
    return _best_on_noise_circle(s, noise, nf_max)


# ---------------------------------------------------------------------------
# Load selection
# ---------------------------------------------------------------------------

def transducer_gain_grid(s: TwoPortS, gamma_s: complex, angles: int, radii: int):
    """G_T over a polar grid of loads; NaN where the load is unstable.

    Returns (gamma_l, g_t), both shaped (angles, radii), angles ascending
    from 0 and radii shrinking from 0.99 down to the origin.
    """
    theta = np.arange(angles) * (2.0 * np.pi / angles)
    r = np.linspace(0.99, 0.0, radii)
    grid = r[np.newaxis, :] * np.exp(1j * theta[:, np.newaxis])

    denominator = 1.0 - s.s22 * grid
    usable = np.abs(denominator) > 1e-12
    g_in = np.full(grid.shape, np.inf, dtype=complex)
    g_in[usable] = s.s11 + s.s12 * s.s21 * grid[usable] / denominator[usable]
    stable = np.abs(g_in) < 1.0

    g_t = np.full(grid.shape, np.nan)
    if stable.any():
        g_t[stable] = transducer_gain(s, gamma_s, grid[stable])
    return grid, g_t


def conjugate_load(s: TwoPortS, gamma_s: complex) -> complex:
    """Gamma_out* when it is a stable load, else the best stable load on a scan."""
    gamma_s = complex(gamma_s)
    if abs(gamma_s) >= 1.0:
        raise InfeasibleSpec(f"|Gamma_S| = {abs(gamma_s):.6g} is not a passive source")
    gamma_l = complex(gamma_out(s, gamma_s)).conjugate()
    if abs(gamma_l) < 1.0 and load_is_stable(s, gamma_l):
        return gamma_l

    logger.warning(
        f"Gamma_out* = {gamma_l:.4g} is not a stable load; scanning "
        f"{settings.LOAD_SCAN_ANGLES}x{settings.LOAD_SCAN_RADII} loads"
    )
    grid, g_t = transducer_gain_grid(s, gamma_s, settings.LOAD_SCAN_ANGLES, settings.LOAD_SCAN_RADII)
    if np.all(np.isnan(g_t)):
        raise NoStableLoad("Every scanned load drives |Gamma_in| >= 1")
    # first maximum in angle-major order: lowest angle wins ties
    i = int(np.nanargmax(g_t))
    return complex(grid.flat[i])


# ---------------------------------------------------------------------------
# Full design
# ---------------------------------------------------------------------------

@contextmanager
def _stage(name: str):
    try:
        yield
    except LnaError as err:
        if err.stage is None:
            err.stage = name
        raise


def mismatch_factor(gamma_termination: complex, gamma_device: complex) -> float:
    """Fraction of available power delivered across a port, 1 at conjugate match."""
    return (
        (1.0 - abs(gamma_termination) ** 2) * (1.0 - abs(gamma_device) ** 2)
        / abs(1.0 - gamma_termination * gamma_device) ** 2
    )


@dataclass(frozen=True)
class DesignReport:
    spec: DesignSpec
    s: TwoPortS
    gamma_s: complex
    gamma_l: complex
    gt: float
    ga: float
    nf: Optional[float]
    stability: StabilityReport
    source_network: MatchingNetwork
    load_network: MatchingNetwork
    gamma_in: complex
    gamma_out: complex
    input_mismatch: float
    output_mismatch: float
    mag: Optional[float] = None
    bias: Optional[BiasLine] = None
    source_lines: Dict[str, MicrostripLine] = field(default_factory=dict)
    load_lines: Dict[str, MicrostripLine] = field(default_factory=dict)


def _mag_or_none(s: TwoPortS) -> Optional[float]:
    try:
        return max_available_gain(s)
    except ConditionallyStable as e:
        logger.info(f"MAG undefined; MSG = {e.msg_ratio:.6g}")
    except LnaError as e:
        logger.info(f"MAG undefined: {e}")
    return None


def design_amplifier(sweep: SweepTable, noise: Optional[NoiseParameters], spec: DesignSpec) -> DesignReport:
    with _stage("sample"):
        if sweep.z0 != spec.z0:
            raise ConfigError(f"Sweep is referenced to {sweep.z0:g} ohm but the design uses {spec.z0:g} ohm")
        s = sample_at(sweep, spec.frequency_hz)

    with _stage("stability"):
        stability = stability_report(s)
        logger.info(
            f"K={stability.k:.4f} mu={stability.mu:.4f} |Delta|={abs(stability.delta):.4f} "
            f"unconditional={stability.unconditional}"
        )

    with _stage("source"):
        gamma_s = select_source_gamma(s, noise, spec)

    with _stage("load"):
        gamma_l = conjugate_load(s, gamma_s)
    logger.info(f"Gamma_S={gamma_s:.4f}, Gamma_L={gamma_l:.4f}")

    with _stage("gain"):
        gt = transducer_gain(s, gamma_s, gamma_l)
        ga = available_gain(s, gamma_s)
        if spec.gain_min is not None and gt < spec.gain_min * (1.0 - CONSTRAINT_TOL):
            raise InfeasibleSpec(
                f"G_T = {10 * math.log10(gt):.3f} dB is below gain_min {10 * math.log10(spec.gain_min):.3f} dB"
            )

    with _stage("noise"):
        nf = noise_figure(noise, gamma_s) if noise is not None else None
        if nf is not None and spec.nf_max is not None and nf > spec.nf_max * (1.0 + CONSTRAINT_TOL):
            raise InfeasibleSpec(
                f"NF = {10 * math.log10(nf):.3f} dB exceeds nf_max {10 * math.log10(spec.nf_max):.3f} dB; "
                f"use objective gain_at_nf_cap"
            )

    with _stage("matching"):
        source_network = single_stub_match(gamma_s, spec.z0, spec.stub_kind)
        load_network = single_stub_match(gamma_l, spec.z0, spec.stub_kind)
        source_lines = realize_network(source_network, spec.frequency_hz, spec.eps_r, spec.h_mm)
        load_lines = realize_network(load_network, spec.frequency_hz, spec.eps_r, spec.h_mm)
        bias = bias_line(spec.frequency_hz, settings.BIAS_LINE_Z0, spec.eps_r, spec.h_mm)

    g_in = gamma_in(s, gamma_l)
    g_out = gamma_out(s, gamma_s)
    return DesignReport(
        spec=spec,
        s=s,
        gamma_s=gamma_s,
        gamma_l=gamma_l,
        gt=gt,
        ga=ga,
        nf=nf,
        stability=stability,
        source_network=source_network,
        load_network=load_network,
        gamma_in=g_in,
        gamma_out=g_out,
        input_mismatch=mismatch_factor(gamma_s, g_in),
        output_mismatch=mismatch_factor(gamma_l, g_out),
        mag=_mag_or_none(s),
        bias=bias,
        source_lines=source_lines,
        load_lines=load_lines,
    )
