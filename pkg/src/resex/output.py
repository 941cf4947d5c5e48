"""CSV tables and a small SVG line-plot emitter."""

import csv
import io
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape


@dataclass
class Table:
    """Named table; ``columns`` carry units, e.g. ``"t [s]"``.

    ``plot`` holds SVG hints: ``logx``, ``logy`` and ``markers``, a list of
    ``(label, x)`` vertical lines.
    """

    name: str
    columns: list
    rows: list
    plot: dict = field(default_factory=dict)


def format_cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def table_to_csv(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(table, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_to_csv(table))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# SVG

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 150, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f")


def _to_float(s):
    try:
        return float(s)
    except ValueError:
        return math.nan


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [float(e) for e in range(a, b + 1)]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / 5)) if span > 0 else 1.0
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def svg_from_csv(header, rows, title="", logx=False, logy=False, markers=(), x=0):
    """Render every numeric column against column ``x`` as line series."""
    cols = list(zip(*rows)) if rows else [[] for _ in header]
    xs = [_to_float(v) for v in cols[x]]
    series = []
    for i, name in enumerate(header):
        if i == x:
            continue
        ys = [_to_float(v) for v in cols[i]]
        if any(math.isfinite(y) for y in ys):
            series.append((name, ys))

    def tx(v, log):
        if log:
            return math.log10(v) if v > 0 else math.nan
        return v

    px = [tx(v, logx) for v in xs]
    pys = [[tx(v, logy) for v in ys] for _, ys in series]
    finite_x = [v for v in px if math.isfinite(v)] + [tx(m, logx) for _, m in markers]
    finite_y = [v for ys in pys for v in ys if math.isfinite(v)]
    x0, x1 = (min(finite_x), max(finite_x)) if finite_x else (0.0, 1.0)
    y0, y1 = (min(finite_y), max(finite_y)) if finite_y else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _MT + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
           f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{_ML}" y="18">{escape(title)}</text>')
    for v in _ticks(x0, x1, logx):
        if x0 <= v <= x1:
            label = f"1e{int(v)}" if logx else f"{v:.3g}"
            out.append(f'<line x1="{sx(v):.2f}" y1="{_MT + ph}" x2="{sx(v):.2f}" y2="{_MT + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{sx(v):.2f}" y="{_MT + ph + 18}" text-anchor="middle">{label}</text>')
    for v in _ticks(y0, y1, logy):
        if y0 <= v <= y1:
            label = f"1e{int(v)}" if logy else f"{v:.3g}"
            out.append(f'<line x1="{_ML - 5}" y1="{sy(v):.2f}" x2="{_ML}" y2="{sy(v):.2f}" stroke="black"/>')
            out.append(f'<text x="{_ML - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{_ML + pw / 2}" y="{_H - 10}" text-anchor="middle">{escape(header[x])}</text>')
    for idx, ((name, _), ys) in enumerate(zip(series, pys)):
        color = _COLORS[idx % len(_COLORS)]
        pts = []
        segs = []
        for a, b in zip(px, ys):
            if math.isfinite(a) and math.isfinite(b):
                pts.append(f"{sx(a):.2f},{sy(b):.2f}")
            elif pts:
                segs.append(pts)
                pts = []
        if pts:
            segs.append(pts)
        for pts in segs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        ly = _MT + 14 * idx + 10
        out.append(f'<line x1="{_W - _MR + 10}" y1="{ly}" x2="{_W - _MR + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR + 34}" y="{ly + 4}">{escape(name)}</text>')
    for label, m in markers:
        v = tx(m, logx)
        if math.isfinite(v) and x0 <= v <= x1:
            out.append(f'<line x1="{sx(v):.2f}" y1="{_MT}" x2="{sx(v):.2f}" y2="{_MT + ph}" '
                       'stroke="gray" stroke-dasharray="4,3"/>')
            out.append(f'<text x="{sx(v) + 3:.2f}" y="{_MT + 12}" fill="gray">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg_for_csv(csv_path, svg_path, **hints):
    header, rows = read_csv(csv_path)
    with open(svg_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg_from_csv(header, rows, **hints))
