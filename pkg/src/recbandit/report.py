"""CSV emission/parsing and a dependency-free SVG line chart."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .agents import AgentKind
from .simulator import SeriesPoint

CSV_HEADER = (
    "scenario",
    "agent",
    "day",
    "mean_watch_rate",
    "se_watch_rate",
    "mean_human_reward",
    "se_human_reward",
)

METRIC_LABELS = {
    "mean_watch_rate": "Watch rate (agent success)",
    "mean_human_reward": "Human reward (incl. opportunity cost)",
}

# one fixed colour per agent so charts are comparable across scenarios
AGENT_COLOURS = {
    AgentKind.IGNORANT: "#1f3a93",
    AgentKind.KNOWS_PREFERENCES: "#f28e2b",
    AgentKind.KNOWS_IRRATIONALITIES: "#8c8c8c",
    AgentKind.OMNISCIENT: "#e6b800",
    AgentKind.ALIGNED: "#6baed6",
    AgentKind.GROUNDED: "#2ca02c",
}

SVG_WIDTH, SVG_HEIGHT = 800, 500


def fmt(x: float) -> str:
    """Six significant digits; negative zero is printed as 0."""
    s = format(x, ".6g")
    return "0" if s == "-0" else s


def csv_text(scenario: str, points: Sequence[SeriesPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow(
            [
                scenario,
                str(p.agent),
                p.day,
                fmt(p.mean_watch_rate),
                fmt(p.se_watch_rate),
                fmt(p.mean_human_reward),
                fmt(p.se_human_reward),
            ]
        )
    return buf.getvalue()


def read_csv(path: str | Path) -> tuple[str | None, list[SeriesPoint]]:
    """Parse a CSV written by :func:`csv_text` back into series points."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        scenario = None
        points = []
        for row in reader:
            scenario = row[0]
            points.append(
                SeriesPoint(
                    day=int(row[2]),
                    agent=AgentKind(row[1]),
                    mean_watch_rate=float(row[3]),
                    se_watch_rate=float(row[4]),
                    mean_human_reward=float(row[5]),
                    se_human_reward=float(row[6]),
                )
            )
    return scenario, points


def atomic_write(path: str | Path, text: str) -> Path:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12:
        ticks.append(round(t, 10))
        t += step
    return ticks


def svg_chart(points: Sequence[SeriesPoint], metric: str, title: str) -> str:
    """One polyline per agent, day on x, ``metric`` on y, legend at the right."""
    series: dict[AgentKind, list[tuple[int, float]]] = {}
    for p in points:
        series.setdefault(p.agent, []).append((p.day, getattr(p, metric)))
    for values in series.values():
        values.sort()

    left, right, top, bottom = 70, 190, 40, 50
    plot_w = SVG_WIDTH - left - right
    plot_h = SVG_HEIGHT - top - bottom
    days = [d for values in series.values() for d, _ in values] or [1]
    ys = [y for values in series.values() for _, y in values] or [0.0]
    x_lo, x_hi = min(days), max(days)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else max(abs(y_lo) * 0.05, 0.05)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(d: float) -> float:
        return left + (d - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{left + plot_w / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>',
    ]
    for t in _nice_ticks(y_lo, y_hi):
        y = sy(t)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + plot_w}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{fmt(t)}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" y2="{top + plot_h + 5}" stroke="#333"/>')
        out.append(f'<text x="{x:.2f}" y="{top + plot_h + 18}" text-anchor="middle">{fmt(t)}</text>')
    out.append(f'<text x="{left + plot_w / 2:.1f}" y="{SVG_HEIGHT - 12}" text-anchor="middle">Day</text>')
    out.append(
        f'<text transform="translate(18 {top + plot_h / 2:.1f}) rotate(-90)" text-anchor="middle">'
        f"{escape(METRIC_LABELS.get(metric, metric))}</text>"
    )
    for i, (agent, values) in enumerate(series.items()):
        colour = AGENT_COLOURS.get(agent, "#000000")
        coords = " ".join(f"{sx(d):.2f},{sy(y):.2f}" for d, y in values)
        out.append(
            f'<polyline id="line-{agent}" class="agent-line" fill="none" stroke="{colour}" '
            f'stroke-width="2" points="{coords}"/>'
        )
        ly = top + 10 + 20 * i
        lx = left + plot_w + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{colour}" stroke-width="3"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(str(agent))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
