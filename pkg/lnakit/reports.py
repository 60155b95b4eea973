"""
Report assembly for the CLI and the HTTP service.

Reports are plain dicts that serialise to JSON: complex values appear both as
a "MAG<ANGLE" literal (4 significant digits) and as full-precision numbers,
gains in linear and dB, and infinities as the strings "inf" / "-inf".
"""
import json
import logging
import math
from typing import List, Optional, Sequence

import pandas as pd

from .core import angle_deg, db10, format_gamma_literal
from .design import DesignReport
from .errors import ActiveMismatch, ConditionallyStable, UnilateralDevice
from .gain import max_available_gain, max_unilateral_gain, unilateral_assessment
from .matching import MatchingNetwork, MicrostripLine, network_elements
from .noise import CascadeStage, cascade_contributions
from .stability import stability_report
from .touchstone import SweepTable, TwoPortS

logger = logging.getLogger(__name__)


def number(value: Optional[float]):
    """JSON-safe float: infinities become strings, NaN becomes null."""
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def gamma_fields(z: complex) -> dict:
    z = complex(z)
    return {
        "literal": format_gamma_literal(z),
        "mag": abs(z),
        "angle_deg": angle_deg(z),
        "re": z.real,
        "im": z.imag,
    }


def gain_fields(linear: Optional[float]) -> Optional[dict]:
    if linear is None:
        return None
    return {"linear": number(linear), "db": number(db10(linear))}


def noise_fields(factor: Optional[float]) -> Optional[dict]:
    if factor is None:
        return None
    return {"linear": factor, "db": db10(factor)}


def _db_or_none(linear: Optional[float]):
    return None if linear is None else number(db10(linear))


def unilateral_fields(s: TwoPortS) -> dict:
    """Flat u / bound_low_db / bound_high_db keys; null when U is undefined."""
    try:
        u = unilateral_assessment(s)
    except ActiveMismatch as e:
        logger.info(f"Unilateral figure of merit skipped: {e}")
        return {"u": None, "bound_low_db": None, "bound_high_db": None}
    return {"u": u.u, "bound_low_db": number(u.lower_db), "bound_high_db": number(u.upper_db)}


def _circle_fields(circle, region) -> Optional[dict]:
    if circle is None:
        return None
    return {
        "center": gamma_fields(circle.center),
        "radius": circle.radius,
        "stable_region": region.value if region is not None else None,
        "chart_clearance": circle.unit_disc_clearance(),
    }


def analysis_report(s: TwoPortS, frequency_hz: float) -> dict:
    """Stability, gain bounds and circle geometry at one frequency."""
    stability = stability_report(s)
    report = {
        "frequency_hz": frequency_hz,
        "z0": s.z0,
        "s_parameters": {
            "s11": format_gamma_literal(s.s11),
            "s21": format_gamma_literal(s.s21),
            "s12": format_gamma_literal(s.s12),
            "s22": format_gamma_literal(s.s22),
        },
        "delta": format_gamma_literal(stability.delta),
        "delta_mag": abs(stability.delta),
        "delta_angle_deg": angle_deg(stability.delta),
        "k": number(stability.k),
        "mu": number(stability.mu),
        "mu_prime": number(stability.mu_prime),
        "unconditional": stability.unconditional,
        "geometry_consistent": stability.geometry_consistent,
        "mag": None,
        "msg": None,
        "unilateral": None,
        "circles": {
            "load": _circle_fields(stability.load_circle, stability.load_stable_region),
            "source": _circle_fields(stability.source_circle, stability.source_stable_region),
        },
    }

    mag = None
    try:
        mag = max_available_gain(s)
    except ConditionallyStable as e:
        report["msg"] = gain_fields(e.msg_ratio)
    except UnilateralDevice as e:
        mag = e.unilateral_gain
    report["mag"] = gain_fields(mag)
    report["mag_db"] = _db_or_none(mag)

    flat = unilateral_fields(s)
    report.update(flat)
    if flat["u"] is not None:
        report["unilateral"] = {
            "u": flat["u"],
            "max_unilateral_gain": gain_fields(max_unilateral_gain(s)),
            "error_db": [flat["bound_low_db"], flat["bound_high_db"]],
        }
    return report


def analyze_sweep(sweep: SweepTable) -> pd.DataFrame:
    """Stability and maximum-gain figures at every frequency of a sweep."""
    rows = []
    for frequency, s in sweep.points:
        stability = stability_report(s)
        row = {
            "frequency_hz": frequency,
            "k": stability.k,
            "mu": stability.mu,
            "mu_prime": stability.mu_prime,
            "delta_mag": abs(stability.delta),
            "unconditional": stability.unconditional,
            "mag_db": math.nan,
            "msg_db": math.nan,
        }
        try:
            row["mag_db"] = db10(max_available_gain(s))
        except ConditionallyStable as e:
            row["msg_db"] = db10(e.msg_ratio)
        except UnilateralDevice:
            pass
        rows.append(row)
    return pd.DataFrame(rows)


def _microstrip_fields(line: MicrostripLine) -> dict:
    return {
        "width_mm": line.width_mm,
        "length_mm": line.length_mm,
        "eps_r": line.eps_r,
        "substrate_height_mm": line.substrate_height_mm,
        "eps_eff": line.eps_eff,
        "z0": line.z0,
    }


def network_fields(network: MatchingNetwork, lines: Optional[dict] = None) -> dict:
    return {
        "topology": network.topology.value,
        "series_line_deg": network.series_line_deg,
        "stub_deg": network.stub_deg,
        "stub_kind": network.stub_kind.value if network.stub_kind is not None else None,
        "line_z0": network.line_z0,
        "achieved_gamma": gamma_fields(network.achieved_gamma),
        "elements": network_elements(network, lines),
    }


def design_report(report: DesignReport) -> dict:
    spec = report.spec
    return {
        "frequency_hz": spec.frequency_hz,
        "objective": spec.objective.value,
        "z0": spec.z0,
        "gamma_s": gamma_fields(report.gamma_s),
        "gamma_l": gamma_fields(report.gamma_l),
        "gamma_in": gamma_fields(report.gamma_in),
        "gamma_out": gamma_fields(report.gamma_out),
        "gt": gain_fields(report.gt),
        "ga": gain_fields(report.ga),
        "mag": gain_fields(report.mag),
        "gt_db": number(db10(report.gt)),
        "ga_db": number(db10(report.ga)),
        "mag_db": _db_or_none(report.mag),
        **unilateral_fields(report.s),
        "nf": noise_fields(report.nf),
        "input_mismatch": report.input_mismatch,
        "output_mismatch": report.output_mismatch,
        "stability": {
            "k": number(report.stability.k),
            "mu": number(report.stability.mu),
            "delta": format_gamma_literal(report.stability.delta),
            "unconditional": report.stability.unconditional,
        },
        "networks": {
            "source": network_fields(report.source_network, report.source_lines),
            "load": network_fields(report.load_network, report.load_lines),
        },
        "bias": None if report.bias is None else {
            "line": _microstrip_fields(report.bias.line),
            "termination": report.bias.termination,
        },
        "substrate": {"eps_r": spec.eps_r, "h_mm": spec.h_mm},
    }


def cascade_report(stages: Sequence[CascadeStage]) -> dict:
    terms = cascade_contributions(stages)
    total = math.fsum(terms)
    return {
        "stages": [
            {
                "index": i + 1,
                "nf_db": db10(stage.f),
                "gain_db": db10(stage.g),
                "contribution": term,
            }
            for i, (stage, term) in enumerate(zip(stages, terms))
        ],
        "total": {"linear": total, "db": db10(total)},
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False)


# ---------------------------------------------------------------------------
# Text views
# ---------------------------------------------------------------------------

def _g(value, digits: int = 4) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.{digits}g}"


def analysis_text(report: dict) -> str:
    lines = [
        f"Frequency      {report['frequency_hz'] / 1e9:.6g} GHz (z0 {report['z0']:g} ohm)",
        f"Delta          {report['delta']}",
        f"K              {_g(report['k'])}",
        f"mu / mu'       {_g(report['mu'])} / {_g(report['mu_prime'])}",
        f"Unconditional  {'yes' if report['unconditional'] else 'no'}",
    ]
    if report["mag"] is not None:
        lines.append(f"MAG            {_g(report['mag']['db'])} dB")
    if report["msg"] is not None:
        lines.append(f"MSG            {_g(report['msg']['db'])} dB")
    if report["unilateral"] is not None:
        low, high = report["unilateral"]["error_db"]
        lines.append(f"U              {_g(report['unilateral']['u'])} (G_T/G_TU {_g(low)} .. {_g(high)} dB)")
    for port in ("load", "source"):
        circle = report["circles"][port]
        if circle is None:
            lines.append(f"{port.title():<15}stability circle degenerate")
            continue
        lines.append(
            f"{port.title():<15}C = {circle['center']['literal']}, r = {_g(circle['radius'])}, "
            f"stable {circle['stable_region']}"
        )
    return "\n".join(lines)


def design_text(report: dict) -> str:
    lines = [
        f"Objective      {report['objective']} at {report['frequency_hz'] / 1e9:.6g} GHz",
        f"Gamma_S        {report['gamma_s']['literal']}",
        f"Gamma_L        {report['gamma_l']['literal']}",
        f"G_T            {_g(report['gt']['db'])} dB",
        f"G_A            {_g(report['ga']['db'])} dB",
    ]
    if report["nf"] is not None:
        lines.append(f"NF             {_g(report['nf']['db'])} dB")
    lines.append(
        f"Mismatch       in {_g(report['input_mismatch'])}, out {_g(report['output_mismatch'])}"
    )
    for side in ("source", "load"):
        net = report["networks"][side]
        parts = [
            f"{e['type']} {_g(e['deg'])} deg" + (f" ({_g(e['mm'])} mm)" if "mm" in e else "")
            for e in net["elements"]
        ]
        lines.append(f"{side.title() + ' match':<15}{', '.join(parts) or 'none (matched)'}")
    if report["bias"] is not None:
        bias = report["bias"]["line"]
        lines.append(
            f"Bias line      {_g(bias['z0'])} ohm, {_g(bias['length_mm'])} mm + {report['bias']['termination']}"
        )
    return "\n".join(lines)


def cascade_text(report: dict) -> str:
    lines = ["stage  NF (dB)  gain (dB)  contribution"]
    for stage in report["stages"]:
        lines.append(
            f"{stage['index']:>5}  {stage['nf_db']:>7.3f}  {stage['gain_db']:>9.3f}  {stage['contribution']:.6g}"
        )
    lines.append(f"total  F = {report['total']['linear']:.6g}, NF = {report['total']['db']:.3f} dB")
    return "\n".join(lines)


def circles_report(entries: List[tuple]) -> dict:
    """entries: (label, SmithCircle, stable_region or None)."""
    return {
        label: {
            "center": gamma_fields(circle.center),
            "radius": circle.radius,
            "stable_region": region.value if region is not None else None,
        }
        for label, circle, region in entries
    }
