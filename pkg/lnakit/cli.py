"""
Command-line front end.

Usage:
    python -m lnakit analyze devices/n420_3ghz.s2p --freq 3GHz --json
    python -m lnakit design devices/n420_3ghz.s2p --config config/n420_max_gain.cfg
    python -m lnakit circles devices/n420_3ghz.s2p --freq 3GHz --ga-db 14 --svg n420.svg
    python -m lnakit cascade --stage nf_db=3.01,gain_db=10 --stage nf_db=4.77,gain_db=10
    python -m lnakit match "0.697<-157" --freq 3GHz
    python -m lnakit --json --z0 75 analyze tuner_75ohm.s2p

--z0, --json, --svg, --png and -v are accepted before or after the command.
With --config, design flags given on the command line override the file.

Exit codes: 0 ok, 2 input/parse error, 3 analysis error, 4 design error.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import settings
from .core import parse_frequency, parse_gamma_literal, undb10
from .design import DesignSpec, Objective, design_amplifier, load_design_spec
from .errors import (
    ConfigError,
    DesignError,
    InvalidNoiseParameters,
    LnaError,
    MatchingError,
    OutOfRange,
    TouchstoneError,
)
from .gain import available_gain_circle
from .matching import StubKind, network_elements, realize_network, single_stub_match
from .noise import CascadeStage, noise_circle, parse_noise_parameters
from .reports import (
    analysis_report,
    analysis_text,
    analyze_sweep,
    cascade_report,
    cascade_text,
    circles_report,
    design_report,
    design_text,
    network_fields,
    to_json,
)
from .smith_chart import (
    PlotCircle,
    PlotPoint,
    SmithPlotSpec,
    render_smith_png,
    render_smith_svg,
    stability_plot,
)
from .stability import stability_report
from .touchstone import SweepTable, read_sweep, sample_at

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ANALYSIS = 3
EXIT_DESIGN = 4


def parse_stage(text: str) -> CascadeStage:
    """"nf_db=3.01,gain_db=10" to a cascade stage."""
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise InvalidNoiseParameters(f"Malformed stage {text!r}; expected nf_db=X,gain_db=Y")
        fields[key.strip()] = value.strip()
    if set(fields) != {"nf_db", "gain_db"}:
        raise InvalidNoiseParameters(f"Malformed stage {text!r}; expected nf_db=X,gain_db=Y")
    try:
        return CascadeStage.from_db(float(fields["nf_db"]), float(fields["gain_db"]))
    except ValueError as e:
        raise InvalidNoiseParameters(f"Malformed stage {text!r}: {e}")


def exit_code_for(err: Exception, command: str) -> int:
    if isinstance(err, OutOfRange):
        return EXIT_ANALYSIS
    if isinstance(err, (TouchstoneError, ConfigError, InvalidNoiseParameters, OSError)):
        return EXIT_PARSE
    if isinstance(err, (DesignError, MatchingError)) or command == "design":
        return EXIT_DESIGN if isinstance(err, LnaError) else EXIT_PARSE
    if isinstance(err, LnaError):
        return EXIT_ANALYSIS
    return EXIT_PARSE


def _frequency(sweep: SweepTable, freq: Optional[str]) -> float:
    if freq is not None:
        return parse_frequency(freq)
    if len(sweep) == 1:
        return sweep.f_min
    raise ConfigError(
        f"--freq is required for a {len(sweep)}-point sweep "
        f"({sweep.f_min:g} .. {sweep.f_max:g} Hz)"
    )


def _z0(args) -> float:
    return args.z0 if args.z0 is not None else settings.DEFAULT_Z0


def _check_sweep_z0(args, sweep: SweepTable) -> None:
    """An explicit --z0 must agree with the reference impedance of the data."""
    if args.z0 is not None and args.z0 != sweep.z0:
        raise ConfigError(
            f"--z0 {args.z0:g} ohm differs from the sweep reference {sweep.z0:g} ohm; "
            f"re-reference the S-parameters first"
        )


def _emit(args, report: dict, text: str) -> None:
    print(to_json(report) if args.json else text)


def _render(args, plot: SmithPlotSpec) -> None:
    if args.svg:
        render_smith_svg(plot, args.svg)
    if args.png:
        render_smith_png(plot, args.png)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    sweep = read_sweep(args.s2p)
    _check_sweep_z0(args, sweep)
    frequency = _frequency(sweep, args.freq)
    s = sample_at(sweep, frequency)
    report = analysis_report(s, frequency)
    if args.csv:
        analyze_sweep(sweep).to_csv(args.csv, index=False)
        logger.info(f"Sweep table written to {args.csv}")
    if args.svg or args.png:
        _render(args, stability_plot(stability_report(s)))
    _emit(args, report, analysis_text(report))
    return EXIT_OK


def _spec_overrides(args) -> dict:
    """DesignSpec fields for the design flags actually given."""
    overrides = {}
    if args.freq is not None:
        overrides["frequency_hz"] = parse_frequency(args.freq)
    if args.objective is not None:
        overrides["objective"] = Objective(args.objective)
    if args.nf_max_db is not None:
        overrides["nf_max"] = undb10(args.nf_max_db)
    if args.gain_min_db is not None:
        overrides["gain_min"] = undb10(args.gain_min_db)
    if args.z0 is not None:
        overrides["z0"] = args.z0
    if args.stub_kind is not None:
        overrides["stub_kind"] = StubKind(args.stub_kind)
    if args.eps_r is not None:
        overrides["eps_r"] = args.eps_r
    if args.h_mm is not None:
        overrides["h_mm"] = args.h_mm
    return overrides


def _design_spec(args) -> DesignSpec:
    overrides = _spec_overrides(args)
    if args.config:
        spec = load_design_spec(args.config)
        if overrides:
            logger.info(f"Overriding {args.config} with {', '.join(sorted(overrides))} from the command line")
            spec = replace(spec, **overrides)
        return spec
    if "frequency_hz" not in overrides:
        raise ConfigError("design needs --config or --freq")
    return DesignSpec(**overrides)


def cmd_design(args) -> int:
    spec = _design_spec(args)
    noise = parse_noise_parameters(args.noise, spec.z0) if args.noise else None
    sweep = read_sweep(args.s2p)
    report = design_amplifier(sweep, noise, spec)
    data = design_report(report)
    if args.networks:
        Path(args.networks).write_text(json.dumps(data["networks"], indent=2), encoding="utf-8")
        logger.info(f"Matching networks written to {args.networks}")
    if args.svg or args.png:
        plot = stability_plot(
            report.stability,
            [PlotPoint(report.gamma_s, "Gamma_S"), PlotPoint(report.gamma_l, "Gamma_L")],
        )
        _render(args, plot)
    _emit(args, data, design_text(data))
    return EXIT_OK


def cmd_circles(args) -> int:
    sweep = read_sweep(args.s2p)
    _check_sweep_z0(args, sweep)
    frequency = _frequency(sweep, args.freq)
    s = sample_at(sweep, frequency)
    stability = stability_report(s)
    entries = []
    if stability.load_circle is not None:
        entries.append(("load stability", stability.load_circle, stability.load_stable_region))
    if stability.source_circle is not None:
        entries.append(("source stability", stability.source_circle, stability.source_stable_region))
    for ga_db in args.ga_db or []:
        entries.append((f"G_A {ga_db:g} dB", available_gain_circle(s, undb10(ga_db)), None))
    if args.nf_db:
        if not args.noise:
            raise InvalidNoiseParameters("--nf-db needs --noise")
        noise = parse_noise_parameters(args.noise, s.z0)
        for nf_db in args.nf_db:
            entries.append((f"NF {nf_db:g} dB", noise_circle(noise, undb10(nf_db)), None))

    report = circles_report(entries)
    if args.svg or args.png:
        _render(args, SmithPlotSpec(circles=[PlotCircle(c, label, region) for label, c, region in entries]))
    text = "\n".join(
        f"{label:<18}C = {item['center']['literal']}, r = {item['radius']:.4g}"
        + (f", stable {item['stable_region']}" if item["stable_region"] else "")
        for label, item in report.items()
    )
    _emit(args, report, text)
    return EXIT_OK


def cmd_cascade(args) -> int:
    stages = [parse_stage(text) for text in args.stage]
    ignored = [flag for flag, value in (("--z0", args.z0), ("--svg", args.svg), ("--png", args.png)) if value is not None]
    if ignored:
        logger.warning(f"cascade works on noise factors and gains only; ignoring {', '.join(ignored)}")
    report = cascade_report(stages)
    _emit(args, report, cascade_text(report))
    return EXIT_OK


def cmd_match(args) -> int:
    gamma = parse_gamma_literal(args.gamma)
    stub_kind = StubKind(args.stub_kind or settings.DEFAULT_STUB_KIND)
    network = single_stub_match(gamma, _z0(args), stub_kind)
    lines = None
    if args.freq:
        eps_r = args.eps_r if args.eps_r is not None else settings.SUBSTRATE_EPS_R
        h_mm = args.h_mm if args.h_mm is not None else settings.SUBSTRATE_H_MM
        lines = realize_network(network, parse_frequency(args.freq), eps_r, h_mm)
    if args.svg or args.png:
        _render(args, SmithPlotSpec(points=[PlotPoint(gamma, "target")]))
    report = network_fields(network, lines)
    text = "\n".join(
        f"{e['type']:<18}z0 {e['z0']:g} ohm, {e['deg']:.4g} deg"
        + (f", {e['mm']:.4g} mm long, {e['width_mm']:.4g} mm wide" if "mm" in e else "")
        for e in network_elements(network, lines)
    ) or "identity (already matched)"
    _emit(args, report, text + f"\nachieved Gamma {report['achieved_gamma']['literal']}")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "design": cmd_design,
    "circles": cmd_circles,
    "cascade": cmd_cascade,
    "match": cmd_match,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_global_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    """The flags every command takes; subcommand copies only set what was given."""
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    parser.add_argument("--z0", type=float, **kw,
                        help=f"System impedance in ohms (default: the sweep's, or {settings.DEFAULT_Z0:g})")
    parser.add_argument("--json", action="store_true", **kw, help="Machine-readable JSON output")
    parser.add_argument("--svg", type=Path, metavar="PATH", **kw, help="Write a Smith chart SVG")
    parser.add_argument("--png", type=Path, metavar="PATH", **kw, help="Write a Smith chart PNG")
    parser.add_argument("-v", "--verbose", action="store_true", **kw, help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, defaults=False)

    substrate = argparse.ArgumentParser(add_help=False)
    substrate.add_argument("--stub-kind", choices=[k.value for k in StubKind],
                           help=f"default: {settings.DEFAULT_STUB_KIND}")
    substrate.add_argument("--eps-r", type=float, help=f"default: {settings.SUBSTRATE_EPS_R:g}")
    substrate.add_argument("--h-mm", type=float, help=f"default: {settings.SUBSTRATE_H_MM:g}")

    parser = argparse.ArgumentParser(
        prog="lnakit",
        description="Low-noise amplifier analysis and single-frequency design",
    )
    _add_global_flags(parser, defaults=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="Stability, MAG and circles at one frequency")
    p.add_argument("s2p", help="Touchstone .s2p file, or - for stdin")
    p.add_argument("--freq", help="Analysis frequency, e.g. 3GHz")
    p.add_argument("--csv", type=Path, metavar="PATH", help="Write per-frequency stability table")

    p = sub.add_parser("design", parents=[common, substrate], help="Design source and load matching")
    p.add_argument("s2p", help="Touchstone .s2p file, or - for stdin")
    p.add_argument("--config", type=Path, help="key=value design spec file")
    p.add_argument("--freq", help="Design frequency when no --config is given")
    p.add_argument("--objective", choices=[o.value for o in Objective],
                   help=f"default: {Objective.MAX_GAIN.value}")
    p.add_argument("--nf-max-db", type=float)
    p.add_argument("--gain-min-db", type=float)
    p.add_argument("--noise", help='Noise parameters: "fmin_db=0.5,rn=0.2,gopt=0.5<120"')
    p.add_argument("--networks", type=Path, metavar="PATH", help="Write matching-network element lists (JSON)")

    p = sub.add_parser("circles", parents=[common], help="Stability, gain and noise circles")
    p.add_argument("s2p", help="Touchstone .s2p file, or - for stdin")
    p.add_argument("--freq")
    p.add_argument("--ga-db", type=float, action="append", help="Available-gain circle level (repeatable)")
    p.add_argument("--nf-db", type=float, action="append", help="Noise circle level (repeatable)")
    p.add_argument("--noise", help='Noise parameters: "fmin_db=0.5,rn=0.2,gopt=0.5<120"')

    p = sub.add_parser("cascade", parents=[common], help="Cascade noise figure")
    p.add_argument("--stage", action="append", required=True, help="nf_db=X,gain_db=Y (in chain order)")

    p = sub.add_parser("match", parents=[common, substrate], help="Single-stub match for a reflection")
    p.add_argument("gamma", help='Target reflection "MAG<ANGLE"')
    p.add_argument("--freq", help="Give lengths in mm at this frequency")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)

    try:
        return COMMANDS[args.command](args)
    except (LnaError, ValueError, OSError) as e:
        code = exit_code_for(e, args.command)
        print(f"lnakit {args.command}: {e}", file=sys.stderr)
        logger.debug("failure detail", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
