"""
Static SVG log-log plot of a rate experiment.

Per-trial distances are drawn as faint dots, per-n medians as filled circles,
and the fitted line plus the two band-edge slopes through the first median
as reference lines.
"""

import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple, Union

from lxml import etree

from wassquant.core.rates import RateResult

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
WIDTH, HEIGHT = 480, 360
MARGIN = 56


def _decade_ticks(lo: float, hi: float) -> List[float]:
    exponents = range(math.floor(lo), math.ceil(hi) + 1)
    return [10.0**e for e in exponents if lo <= e <= hi]


class _Frame:
    """Maps (log10 x, log10 y) into pixel coordinates."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]) -> None:
        lx = [math.log10(v) for v in xs]
        ly = [math.log10(v) for v in ys]
        pad_x = 0.05 * (max(lx) - min(lx) or 1.0)
        pad_y = 0.05 * (max(ly) - min(ly) or 1.0)
        self.x0, self.x1 = min(lx) - pad_x, max(lx) + pad_x
        self.y0, self.y1 = min(ly) - pad_y, max(ly) + pad_y

    def px(self, x: float) -> float:
        frac = (math.log10(x) - self.x0) / (self.x1 - self.x0)
        return MARGIN + frac * (WIDTH - 2 * MARGIN)

    def py(self, y: float) -> float:
        frac = (math.log10(y) - self.y0) / (self.y1 - self.y0)
        return HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)


def _el(
    parent: etree._Element, tag: str, **attrs: Union[str, float]
) -> etree._Element:
    named = {k.replace("_", "-"): str(v) for k, v in attrs.items()}
    return etree.SubElement(parent, tag, named)


def _line(
    root: etree._Element,
    start: Tuple[float, float],
    end: Tuple[float, float],
    **style: str,
) -> etree._Element:
    return _el(root, "line", x1=start[0], y1=start[1], x2=end[0], y2=end[1], **style)


def _slope_line(
    root: etree._Element,
    frame: _Frame,
    anchor: Tuple[float, float],
    slope: float,
    n_max: float,
    **style: str,
) -> None:
    n0, v0 = anchor
    v1 = v0 * (n_max / n0) ** slope
    start = (frame.px(n0), frame.py(v0))
    _line(root, start, (frame.px(n_max), frame.py(v1)), **style)


def build_loglog_svg(result: RateResult) -> etree._Element:
    """Build the plot as an lxml element tree."""
    medians = result.medians()
    ns = [float(n) for n in medians]
    distances = [rec.distance for rec in result.records if rec.distance > 0]
    frame = _Frame(ns, distances + list(medians.values()))

    root = etree.Element(
        "svg", nsmap={None: SVG_NS}, width=str(WIDTH), height=str(HEIGHT)
    )
    _el(root, "rect", width=WIDTH, height=HEIGHT, fill="#ffffff")
    title = _el(
        root,
        "text",
        x=WIDTH / 2,
        y=20,
        text_anchor="middle",
        font_size=13,
        font_family="sans-serif",
    )
    title.text = (
        f"{result.config.sampler.name} ({result.config.mode.value}): "
        f"slope {result.slope:.3f}, band [{result.band[0]:.3f}, {result.band[1]:.3f}]"
    )
    bottom = HEIGHT - MARGIN
    _line(root, (MARGIN, bottom), (WIDTH - MARGIN, bottom), stroke="#333")
    _line(root, (MARGIN, MARGIN), (MARGIN, bottom), stroke="#333")
    for tick in _decade_ticks(frame.x0, frame.x1):
        x = frame.px(tick)
        label = _el(
            root, "text", x=x, y=bottom + 16, text_anchor="middle", font_size=10
        )
        label.text = f"{tick:g}"
    for tick in _decade_ticks(frame.y0, frame.y1):
        y = frame.py(tick) + 3
        label = _el(root, "text", x=MARGIN - 6, y=y, text_anchor="end", font_size=10)
        label.text = f"{tick:g}"
    x_label = _el(
        root, "text", x=WIDTH / 2, y=HEIGHT - 12, text_anchor="middle", font_size=11
    )
    x_label.text = "n"
    y_label = _el(root, "text", x=14, y=HEIGHT / 2, text_anchor="middle", font_size=11)
    y_label.text = "W2"

    for rec in result.records:
        if rec.distance > 0:
            cx, cy = frame.px(rec.n), frame.py(rec.distance)
            _el(root, "circle", cx=cx, cy=cy, r=1.5, fill="#9bb7d4")
    for n, v in medians.items():
        _el(root, "circle", cx=frame.px(n), cy=frame.py(v), r=3.5, fill="#1f4e79")

    anchor = (ns[0], medians[int(ns[0])])
    fitted = math.exp(result.intercept)
    start = (frame.px(ns[0]), frame.py(fitted * ns[0] ** result.slope))
    end = (frame.px(ns[-1]), frame.py(fitted * ns[-1] ** result.slope))
    _line(root, start, end, stroke="#1f4e79")
    for edge in result.band:
        _slope_line(
            root, frame, anchor, edge, ns[-1], stroke="#c0504d", stroke_dasharray="4 3"
        )
    return root


def render_loglog_svg(path: Union[str, Path], result: RateResult) -> Path:
    """Write the log-log plot of ``result`` to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    content = etree.tostring(
        build_loglog_svg(result), encoding="unicode", pretty_print=True
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write('<?xml version="1.0" encoding="UTF-8"?>\n' + content)
    logger.info("Wrote %s", path)
    return path
