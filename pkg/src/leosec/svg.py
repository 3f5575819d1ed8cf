"""Hand-written SVG line chart for training traces (accuracy vs simulated
time). Output depends only on the input CSVs, so reruns are byte-identical."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

from .fedsim import TrainingTrace

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]

WIDTH, HEIGHT = 800, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 40, 60


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(traces: Sequence[TrainingTrace], title: str = "Accuracy vs simulated time") -> str:
    if not traces:
        raise ValueError("need at least one trace to plot")
    for t in traces:
        if not t.records:
            raise ValueError(f"trace {t.label!r} is empty")
    xs = [r.elapsed_ms for t in traces for r in t.records]
    x_max = max(xs) or 1.0
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def px(x: float) -> float:
        return LEFT + x / x_max * plot_w

    def py(y: float) -> float:
        return TOP + (1.0 - y) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{_escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
    ]
    for tick in _nice_ticks(0.0, x_max):
        x = px(tick)
        out.append(f'<line x1="{_fmt(x)}" y1="{TOP + plot_h}" x2="{_fmt(x)}" y2="{TOP + plot_h + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(x)}" y="{TOP + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:g}</text>'
        )
    for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        y = py(tick)
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.1f}</text>'
        )
    out.append(
        f'<text x="{LEFT + plot_w / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">elapsed_ms (simulated)</text>'
    )
    out.append(
        f'<text x="18" y="{TOP + plot_h / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {TOP + plot_h / 2:.0f})">accuracy</text>'
    )
    for i, t in enumerate(traces):
        color = COLORS[i % len(COLORS)]
        points = " ".join(f"{_fmt(px(r.elapsed_ms))},{_fmt(py(r.accuracy))}" for r in t.records)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        ly = TOP + 10 + 20 * i
        lx = LEFT + plot_w + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{lx + 26}" y="{ly + 4}" font-family="sans-serif" font-size="12">{_escape(t.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_curve(trace_files: Sequence[str | Path], output_path: str | Path) -> Path:
    """Plot each trace CSV as one polyline, labelled by file stem."""
    if not trace_files:
        raise ValueError("need at least one trace CSV")
    traces = []
    for f in trace_files:
        f = Path(f)
        trace = TrainingTrace.from_csv(f.read_text(), label=f.stem)
        if not trace.records:
            raise ValueError(f"trace file {f} has no rows")
        traces.append(trace)
    output_path = Path(output_path)
    tmp = output_path.with_name(output_path.name + ".tmp")
    tmp.write_text(render_svg(traces))
    tmp.replace(output_path)
    return output_path
