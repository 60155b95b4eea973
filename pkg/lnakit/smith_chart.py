"""
Smith-chart rendering: SVG through drawsvg, PNG through matplotlib.

The reflection plane maps onto a fixed 500x500 px viewport: Gamma = 0 at
(250, 250), |Gamma| = 1 at 240 px, positive imaginary up. Coordinates are
rounded to 1/1000 px so the same plot always produces the same bytes.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import drawsvg as draw
import matplotlib
matplotlib.use("Agg")  # Non-interactive backend
import matplotlib.pyplot as plt
from matplotlib.patches import Circle as CirclePatch, Wedge

from .core import SmithCircle
from .stability import Region, StabilityReport

logger = logging.getLogger(__name__)

VIEWPORT_PX = 500
CENTER_PX = 250.0
RADIUS_PX = 240.0
MARKER_PX = 4.0
SHADE_OPACITY = 0.2

RESISTANCE_GUIDES = (0.2, 0.5, 1.0, 2.0, 5.0)
REACTANCE_GUIDES = (0.2, 0.5, 1.0, 2.0, 5.0)

CHART_INK = "#333333"
GUIDE_INK = "#b0b0b0"
SHADE_FILL = "#808080"
PALETTE = ("#ef4444", "#2563eb", "#22c55e", "#e5a50a", "#9333ea", "#0891b2")


@dataclass(frozen=True)
class PlotCircle:
    circle: SmithCircle
    label: str
    stable_side: Optional[Region] = None


@dataclass(frozen=True)
class PlotPoint:
    gamma: complex
    label: str


@dataclass(frozen=True)
class SmithPlotSpec:
    circles: List[PlotCircle] = field(default_factory=list)
    points: List[PlotPoint] = field(default_factory=list)
    show_unit_chart: bool = True

    def __post_init__(self):
        labels = [c.label for c in self.circles] + [p.label for p in self.points]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"Plot labels must be unique, repeated: {duplicates}")


def to_px(gamma: complex) -> Tuple[float, float]:
    """Reflection plane to viewport pixels."""
    gamma = complex(gamma)
    return (
        round(CENTER_PX + RADIUS_PX * gamma.real, 3),
        round(CENTER_PX - RADIUS_PX * gamma.imag, 3),
    )


def _circle_path_data(cx: float, cy: float, r: float) -> str:
    return (
        f"M{cx + r:.3f},{cy:.3f} "
        f"A{r:.3f},{r:.3f} 0 1 0 {cx - r:.3f},{cy:.3f} "
        f"A{r:.3f},{r:.3f} 0 1 0 {cx + r:.3f},{cy:.3f} Z"
    )


def _guide_arcs(d: draw.Drawing) -> None:
    disc = draw.ClipPath()
    disc.append(draw.Path(d=_circle_path_data(CENTER_PX, CENTER_PX, RADIUS_PX)))
    guides = draw.Group(clip_path=disc, fill="none", stroke=GUIDE_INK, stroke_width=0.6)
    for r in RESISTANCE_GUIDES:
        cx, cy = to_px(r / (1.0 + r))
        guides.append(draw.Path(d=_circle_path_data(cx, cy, round(RADIUS_PX / (1.0 + r), 3))))
    for x in REACTANCE_GUIDES:
        for sign in (1.0, -1.0):
            cx, cy = to_px(complex(1.0, sign / x))
            guides.append(draw.Path(d=_circle_path_data(cx, cy, round(RADIUS_PX / x, 3))))
    left, mid = to_px(-1.0)
    right, _ = to_px(1.0)
    guides.append(draw.Line(left, mid, right, mid))
    d.append(guides)


def _shade(group: draw.Group, cx: float, cy: float, r: float, side: Region) -> None:
    if side is Region.INSIDE:
        group.append(draw.Path(d=_circle_path_data(cx, cy, r), fill=SHADE_FILL, fill_opacity=SHADE_OPACITY))
        return
    frame = f"M0,0 H{VIEWPORT_PX} V{VIEWPORT_PX} H0 Z "
    group.append(
        draw.Path(
            d=frame + _circle_path_data(cx, cy, r),
            fill=SHADE_FILL,
            fill_opacity=SHADE_OPACITY,
            fill_rule="evenodd",
        )
    )


def build_svg(plot: SmithPlotSpec) -> draw.Drawing:
    d = draw.Drawing(VIEWPORT_PX, VIEWPORT_PX)
    d.append(draw.Rectangle(0, 0, VIEWPORT_PX, VIEWPORT_PX, fill="#ffffff"))

    if plot.show_unit_chart:
        _guide_arcs(d)
        d.append(draw.Circle(CENTER_PX, CENTER_PX, RADIUS_PX, fill="none", stroke=CHART_INK, stroke_width=1.5))

    viewport = draw.ClipPath()
    viewport.append(draw.Rectangle(0, 0, VIEWPORT_PX, VIEWPORT_PX))
    layer = draw.Group(clip_path=viewport)
    for i, item in enumerate(plot.circles):
        colour = PALETTE[i % len(PALETTE)]
        cx, cy = to_px(item.circle.center)
        r = round(RADIUS_PX * item.circle.radius, 3)
        if item.stable_side is not None:
            _shade(layer, cx, cy, r, Region(item.stable_side))
        layer.append(draw.Circle(cx, cy, r, fill="none", stroke=colour, stroke_width=1.2))
        label_x, label_y = to_px(item.circle.center + item.circle.radius * 0.7071 * (1 + 1j))
        layer.append(draw.Text(item.label, 11, label_x, label_y, fill=colour))
    d.append(layer)

    for item in plot.points:
        cx, cy = to_px(item.gamma)
        d.append(draw.Circle(cx, cy, MARKER_PX, fill=CHART_INK))
        d.append(draw.Text(item.label, 11, round(cx + 6, 3), round(cy - 6, 3), fill=CHART_INK))
    return d


def render_smith_svg(plot: SmithPlotSpec, out_path: Optional[Union[str, Path]] = None) -> str:
    """Render to an SVG string, also writing it to out_path when given."""
    svg = build_svg(plot).as_svg()
    if out_path is not None:
        Path(out_path).write_text(svg, encoding="utf-8")
        logger.info(f"Smith chart written to {out_path}")
    return svg


def render_smith_png(plot: SmithPlotSpec, out_path: Union[str, Path]) -> Path:
    """Same chart as render_smith_svg, rasterised with matplotlib."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_aspect("equal")
    ax.set_xlim(-CENTER_PX / RADIUS_PX, CENTER_PX / RADIUS_PX)
    ax.set_ylim(-CENTER_PX / RADIUS_PX, CENTER_PX / RADIUS_PX)
    ax.axis("off")

    if plot.show_unit_chart:
        unit = CirclePatch((0, 0), 1.0, fill=False, color=CHART_INK, linewidth=1.5)
        ax.add_patch(unit)
        for r in RESISTANCE_GUIDES:
            ax.add_patch(CirclePatch((r / (1 + r), 0), 1 / (1 + r), fill=False, color=GUIDE_INK, linewidth=0.6))
        for x in REACTANCE_GUIDES:
            for sign in (1.0, -1.0):
                arc = CirclePatch((1.0, sign / x), 1 / x, fill=False, color=GUIDE_INK, linewidth=0.6)
                ax.add_patch(arc)
                arc.set_clip_path(unit)
        ax.plot([-1, 1], [0, 0], color=GUIDE_INK, linewidth=0.6)

    for i, item in enumerate(plot.circles):
        colour = PALETTE[i % len(PALETTE)]
        centre = (item.circle.center.real, item.circle.center.imag)
        if item.stable_side is Region.INSIDE:
            ax.add_patch(CirclePatch(centre, item.circle.radius, color=SHADE_FILL, alpha=SHADE_OPACITY))
        elif item.stable_side is Region.OUTSIDE:
            # annulus reaching past the plot corners
            outer = abs(item.circle.center) + item.circle.radius + 3.0
            ring = Wedge(centre, outer, 0, 360, width=outer - item.circle.radius)
            ring.set(color=SHADE_FILL, alpha=SHADE_OPACITY)
            ax.add_patch(ring)
        ax.add_patch(CirclePatch(centre, item.circle.radius, fill=False, color=colour, linewidth=1.2, label=item.label))

    for item in plot.points:
        ax.plot(item.gamma.real, item.gamma.imag, "o", color=CHART_INK, markersize=4)
        ax.annotate(item.label, (item.gamma.real, item.gamma.imag), xytext=(5, 5), textcoords="offset points")

    if plot.circles:
        ax.legend(loc="upper right", fontsize=8)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    logger.info(f"Smith chart written to {out_path}")
    return out_path


def stability_plot(report: StabilityReport, points: Optional[List[PlotPoint]] = None) -> SmithPlotSpec:
    """Both stability circles (with their stable sides) plus optional markers."""
    circles = []
    if report.load_circle is not None:
        circles.append(PlotCircle(report.load_circle, "load stability", report.load_stable_region))
    if report.source_circle is not None:
        circles.append(PlotCircle(report.source_circle, "source stability", report.source_stable_region))
    return SmithPlotSpec(circles=circles, points=list(points or []))
