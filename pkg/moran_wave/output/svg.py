"""
SVG scatter plot of adaptation rate against ln N, no plotting dependency
"""

import math
from html import escape as html_escape
from typing import Dict, List, Optional, Sequence, Tuple

from moran_wave.models import SweepResult

SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


class SvgCanvas:
    """Accumulates SVG elements as text"""

    def __init__(self, width: int, height: int) -> None:
        self.width = width
        self.height = height
        self.parts: List[str] = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n',
            f'<svg version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" xmlns="http://www.w3.org/2000/svg">\n',
        ]

    @staticmethod
    def _attrs(extra: Dict[str, object]) -> str:
        return "".join(f' {k.replace("_", "-")}="{html_escape(str(v))}"' for k, v in extra.items())

    def group_start(self, **attrs: object) -> None:
        self.parts.append(f"<g{self._attrs(attrs)}>\n")

    def group_end(self) -> None:
        self.parts.append("</g>\n")

    def line(self, x1: float, y1: float, x2: float, y2: float, **attrs: object) -> None:
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"{self._attrs(attrs)}/>\n'
        )

    def circle(self, cx: float, cy: float, r: float, **attrs: object) -> None:
        self.parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.1f}"{self._attrs(attrs)}/>\n')

    def rect(self, x: float, y: float, w: float, h: float, **attrs: object) -> None:
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}"{self._attrs(attrs)}/>\n'
        )

    def text(self, x: float, y: float, content: str, **attrs: object) -> None:
        self.parts.append(f'<text x="{x:.2f}" y="{y:.2f}"{self._attrs(attrs)}>{html_escape(content, quote=False)}</text>\n')

    def get_svg(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _padded(lo: float, hi: float) -> Tuple[float, float]:
    if hi == lo:
        pad = max(abs(lo) * 0.1, 1e-3)
    else:
        pad = 0.08 * (hi - lo)
    return lo - pad, hi + pad


def render_sweep_plot(
    result: SweepResult, width: int = 720, height: int = 480, title: Optional[str] = None
) -> str:
    """
    One circle per completed replicate (class "replicate"), one per grid
    point for the replicate mean (class "cell-mean") with a one-SD bar, one
    colour per q value.
    """
    done = [r for r in result.rows if not r.failed and r.adaptation_rate is not None]
    cells = [c for c in result.cells if c.mean_rate is not None]
    xs = [math.log(r.params.pop_size) for r in done]
    ys = [float(r.adaptation_rate) for r in done]  # type: ignore[arg-type]
    for c in cells:
        sd = c.rate_sd or 0.0
        ys.extend([c.mean_rate - sd, c.mean_rate + sd])  # type: ignore[operator]
    x_lo, x_hi = _padded(min(xs, default=0.0), max(xs, default=1.0))
    y_lo, y_hi = _padded(min(ys, default=0.0), max(ys, default=1.0))

    left, right, top, bottom = 80, 150, 40, 60
    plot_w = width - left - right
    plot_h = height - top - bottom

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    qs: Sequence[float] = sorted({r.params.q for r in result.rows}, reverse=True)
    color = {q: SERIES_COLORS[i % len(SERIES_COLORS)] for i, q in enumerate(qs)}

    svg = SvgCanvas(width, height)
    svg.rect(0, 0, width, height, fill="white")
    svg.text(width / 2, 24, title or "Adaptation rate against population size", text_anchor="middle", font_size=16)

    svg.group_start(**{"class": "axes"})
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, stroke="black")
    svg.line(left, top, left, top + plot_h, stroke="black")
    for t in _nice_ticks(x_lo, x_hi):
        svg.line(px(t), top + plot_h, px(t), top + plot_h + 5, stroke="black")
        svg.text(px(t), top + plot_h + 20, f"{t:g}", text_anchor="middle", font_size=12)
    for t in _nice_ticks(y_lo, y_hi):
        svg.line(left - 5, py(t), left, py(t), stroke="black")
        svg.text(left - 8, py(t) + 4, f"{t:g}", text_anchor="end", font_size=12)
    if y_lo < 0 < y_hi:
        svg.line(left, py(0), left + plot_w, py(0), stroke="#999999", stroke_dasharray="4 3")
    svg.text(left + plot_w / 2, height - 15, "ln N", text_anchor="middle", font_size=13)
    svg.text(20, top + plot_h / 2, "adaptation rate", text_anchor="middle", font_size=13,
             transform=f"rotate(-90 20 {top + plot_h / 2:.2f})")
    svg.group_end()

    for q in qs:
        svg.group_start(**{"class": "series", "data-q": f"{q:g}"})
        for r in done:
            if r.params.q != q:
                continue
            svg.circle(
                px(math.log(r.params.pop_size)),
                py(float(r.adaptation_rate)),  # type: ignore[arg-type]
                2.5,
                fill=color[q],
                fill_opacity=0.45,
                **{"class": "replicate", "data-grid-index": r.grid_index, "data-replicate": r.replicate},
            )
        for c in cells:
            if c.params.q != q:
                continue
            x = px(math.log(c.params.pop_size))
            mean = float(c.mean_rate)  # type: ignore[arg-type]
            if c.rate_sd:
                svg.line(x, py(mean - c.rate_sd), x, py(mean + c.rate_sd), stroke=color[q], stroke_width=1.5)
                svg.line(x - 4, py(mean - c.rate_sd), x + 4, py(mean - c.rate_sd), stroke=color[q])
                svg.line(x - 4, py(mean + c.rate_sd), x + 4, py(mean + c.rate_sd), stroke=color[q])
            svg.circle(x, py(mean), 4.5, fill=color[q], stroke="black",
                       **{"class": "cell-mean", "data-grid-index": c.grid_index})
        svg.group_end()

    svg.group_start(**{"class": "legend"})
    for i, q in enumerate(qs):
        y = top + 10 + 20 * i
        svg.circle(width - right + 20, y, 5, fill=color[q])
        svg.text(width - right + 32, y + 4, f"q = {q * 100:g}%", font_size=12)
    svg.group_end()
    return svg.get_svg()
