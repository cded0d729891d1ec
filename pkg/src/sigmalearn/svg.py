"""Minimal SVG line/scatter plots for experiment outputs.

CSV files are the canonical artifacts; these plots are a convenience for
eyeballing results without a plotting stack.
"""

import math

_WIDTH, _HEIGHT = 640, 420
_MARGIN = 56
_COLORS = ("#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085")


def _finite(values):
    return [v for v in values if math.isfinite(v)]


def _axis_range(values):
    vals = _finite(values)
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Scale:
    def __init__(self, xs, ys):
        self.x0, self.x1 = _axis_range(xs)
        self.y0, self.y1 = _axis_range(ys)

    def px(self, x):
        frac = (x - self.x0) / (self.x1 - self.x0)
        return _MARGIN + frac * (_WIDTH - 2 * _MARGIN)

    def py(self, y):
        frac = (y - self.y0) / (self.y1 - self.y0)
        return _HEIGHT - _MARGIN - frac * (_HEIGHT - 2 * _MARGIN)


def _ticks(lo, hi, n=5):
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return out


def _fmt(v):
    return f"{v:.4g}"


def render_plot(series, title="", x_label="", y_label=""):
    """Render named (x, y) series to an SVG document string.

    ``series`` is a list of (label, xs, ys) triples; each series is drawn as
    a polyline with point markers. Non-finite points are dropped.
    """
    all_x = [x for _, xs, _ in series for x in xs if math.isfinite(x)]
    all_y = [y for _, _, ys in series for y in ys if math.isfinite(y)]
    sc = _Scale(all_x, all_y)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    # axes
    x_axis_y = _HEIGHT - _MARGIN
    parts.append(f'<line x1="{_MARGIN}" y1="{x_axis_y}" x2="{_WIDTH - _MARGIN}" '
                 f'y2="{x_axis_y}" stroke="black"/>')
    parts.append(f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
                 f'y2="{x_axis_y}" stroke="black"/>')
    for t in _ticks(sc.x0, sc.x1):
        px = sc.px(t)
        parts.append(f'<line x1="{px:.1f}" y1="{x_axis_y}" x2="{px:.1f}" '
                     f'y2="{x_axis_y + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.1f}" y="{x_axis_y + 18}" font-size="11" '
                     f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(sc.y0, sc.y1):
        py = sc.py(t)
        parts.append(f'<line x1="{_MARGIN - 5}" y1="{py:.1f}" x2="{_MARGIN}" '
                     f'y2="{py:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN - 8}" y="{py + 4:.1f}" font-size="11" '
                     f'text-anchor="end">{_fmt(t)}</text>')
    if title:
        parts.append(f'<text x="{_WIDTH / 2}" y="24" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    if x_label:
        parts.append(f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 12}" font-size="12" '
                     f'text-anchor="middle">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="16" y="{_HEIGHT / 2}" font-size="12" '
                     f'text-anchor="middle" '
                     f'transform="rotate(-90 16 {_HEIGHT / 2})">{y_label}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = [(sc.px(x), sc.py(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)]
        if len(pts) > 1:
            d = " ".join(f"{px:.1f},{py:.1f}" for px, py in pts)
            parts.append(f'<polyline points="{d}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        for px, py in pts:
            parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="2.5" '
                         f'fill="{color}"/>')
        if label:
            ly = _MARGIN + 16 * i
            parts.append(f'<line x1="{_WIDTH - _MARGIN - 90}" y1="{ly}" '
                         f'x2="{_WIDTH - _MARGIN - 70}" y2="{ly}" '
                         f'stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_WIDTH - _MARGIN - 64}" y="{ly + 4}" '
                         f'font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def write_plot(path, series, title="", x_label="", y_label=""):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_plot(series, title=title, x_label=x_label,
                             y_label=y_label))
