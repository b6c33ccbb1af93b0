"""Minimal standalone SVG line charts.

No fonts, scripts or external assets; coordinates are printed with a fixed
number of decimals so identical input gives identical bytes.
"""

import math
from pathlib import Path

WIDTH, HEIGHT = 640, 400
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _escape(text):
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(series, title="", xlabel="", ylabel="", logy=False):
    """SVG text for ``series``: a mapping name -> list of (x, y) pairs."""
    if not series or not any(len(v) for v in series.values()):
        raise ValueError("cannot plot an empty series")
    pts = [(float(x), float(y)) for v in series.values() for x, y in v]
    if logy:
        pts = [(x, y) for x, y in pts if y > 0]
        if not pts:
            raise ValueError("no positive values for a log axis")

    def ty(y):
        return math.log10(y) if logy else y

    xs = [p[0] for p in pts]
    ys = [ty(p[1]) for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return HEIGHT - MARGIN - (ty(y) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(
            f'<text x="{_fmt(sx(t))}" y="{HEIGHT - MARGIN + 16}" font-size="11" '
            f'text-anchor="middle">{t:.4g}</text>'
        )
    for t in _ticks(y0, y1):
        label = f"1e{t:.2g}" if logy else f"{t:.4g}"
        ypix = HEIGHT - MARGIN - (t - y0) / (y1 - y0) * ph
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(ypix + 4)}" font-size="11" text-anchor="end">{label}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="24" font-size="14" text-anchor="middle">{_escape(title)}</text>')
    if xlabel:
        out.append(
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{_escape(xlabel)}</text>'
        )
    if ylabel:
        out.append(
            f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 14 {HEIGHT / 2})">{_escape(ylabel)}</text>'
        )
    for k, (name, data) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        data = [(float(x), float(y)) for x, y in data if not logy or y > 0]
        if not data:
            continue
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in data)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for x, y in data:
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2" fill="{color}"/>')
        out.append(
            f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 * (k + 1)}" font-size="11" '
            f'text-anchor="end" fill="{color}">{_escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path, **labels):
    """Write ``series`` as an SVG chart to ``path``.

    ``series`` is a list of (x, y) pairs or a mapping name -> such lists.
    An empty series raises ``ValueError`` before anything is written.
    """
    if not isinstance(series, dict):
        series = {"": list(series)}
    text = render_svg(series, **labels)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc.strerror}") from exc
    return path
