"""Deterministic SVG emitters for formations, trajectories, and curves.

Pure string assembly with fixed "%.3f" coordinate formatting: identical
inputs give byte-identical files, so plots can be golden-tested like any
other artifact. No plotting dependency.
"""

from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .config import ScenarioConfig
from .motion import slot_cell

PALETTE = ("#1f6fb2", "#c0392b", "#1e8449", "#8e44ad", "#b7950b", "#2c3e50")
NULL_ARROW_LEN_M = 12.0


def _f(v: float) -> str:
    return "%.3f" % float(v)


class _Canvas:
    """Maps world coordinates into an SVG viewport, y flipped."""

    def __init__(self, x_range, y_range, width=640, margin=40):
        self.x0, self.x1 = float(x_range[0]), float(x_range[1])
        self.y0, self.y1 = float(y_range[0]), float(y_range[1])
        span_x = max(self.x1 - self.x0, 1e-9)
        span_y = max(self.y1 - self.y0, 1e-9)
        self.scale = (width - 2 * margin) / span_x
        self.width = width
        self.height = int(2 * margin + span_y * self.scale)
        self.margin = margin
        self.parts = []

    def px(self, x: float) -> float:
        return self.margin + (x - self.x0) * self.scale

    def py(self, y: float) -> float:
        return self.height - self.margin - (y - self.y0) * self.scale

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def rect(self, x, y, w, h, stroke, fill="none", dash=None):
        extra = ' stroke-dasharray="%s"' % dash if dash else ""
        self.add(
            '<rect x="%s" y="%s" width="%s" height="%s" stroke="%s" fill="%s"%s/>'
            % (
                _f(self.px(x)),
                _f(self.py(y + h)),
                _f(w * self.scale),
                _f(h * self.scale),
                stroke,
                fill,
                extra,
            )
        )

    def line(self, x1, y1, x2, y2, stroke, width=1.0):
        self.add(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" stroke-width="%s"/>'
            % (_f(self.px(x1)), _f(self.py(y1)), _f(self.px(x2)), _f(self.py(y2)), stroke, _f(width))
        )

    def polyline(self, points, stroke, width=1.5):
        coords = " ".join("%s,%s" % (_f(self.px(x)), _f(self.py(y))) for x, y in points)
        self.add(
            '<polyline points="%s" fill="none" stroke="%s" stroke-width="%s"/>'
            % (coords, stroke, _f(width))
        )

    def circle(self, x, y, r_px, fill, stroke="none"):
        self.add(
            '<circle cx="%s" cy="%s" r="%s" fill="%s" stroke="%s"/>'
            % (_f(self.px(x)), _f(self.py(y)), _f(r_px), fill, stroke)
        )

    def cross(self, x, y, half_px, stroke):
        cx, cy = self.px(x), self.py(y)
        self.add(
            '<path d="M %s %s L %s %s M %s %s L %s %s" stroke="%s" stroke-width="2"/>'
            % (
                _f(cx - half_px), _f(cy - half_px), _f(cx + half_px), _f(cy + half_px),
                _f(cx - half_px), _f(cy + half_px), _f(cx + half_px), _f(cy - half_px),
                stroke,
            )
        )

    def text(self, x, y, s, size=12, anchor="start", color="#333333"):
        self.add(
            '<text x="%s" y="%s" font-size="%d" text-anchor="%s" fill="%s" '
            'font-family="sans-serif">%s</text>'
            % (_f(self.px(x)), _f(self.py(y)), size, anchor, color, s)
        )

    def render(self) -> str:
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
            'viewBox="0 0 %d %d">\n' % (self.width, self.height, self.width, self.height)
        )
        body = "\n".join(self.parts)
        return head + '<rect width="100%" height="100%" fill="#ffffff"/>\n' + body + "\n</svg>\n"


def _world_bounds(blocks, jammer, cfg: ScenarioConfig, epochs: int):
    xs = [0.0, cfg.cell_size_m]
    ys = [0.0]
    for e in range(max(epochs, 1)):
        cell = slot_cell(e, cfg.scored_slots, cfg)
        ys.append(cell.y_max)
    pts = np.concatenate([np.asarray(b, dtype=float).reshape(-1, 2) for b in blocks])
    xs += [pts[:, 0].min(), pts[:, 0].max(), jammer[0]]
    ys += [pts[:, 1].min(), pts[:, 1].max(), jammer[1]]
    pad = 0.05 * max(max(xs) - min(xs), max(ys) - min(ys))
    return (min(xs) - pad, max(xs) + pad), (min(ys) - pad, max(ys) + pad)


def plan_svg(
    blocks: Sequence[np.ndarray],
    jammer,
    cfg: ScenarioConfig,
    null_angles_deg: Optional[np.ndarray] = None,
    include_jammer: bool = True,
) -> str:
    """Corridor cells, per-UAV paths, jammer marker, optional null arrows."""
    blocks = [np.asarray(b, dtype=float) for b in blocks]
    epochs = len(blocks)
    jam = np.asarray(jammer, dtype=float)
    bound_blocks = blocks
    xr, yr = _world_bounds(
        bound_blocks, jam if include_jammer else bound_blocks[0][0, 0], cfg, epochs
    )
    canvas = _Canvas(xr, yr)

    for e in range(epochs):
        for s in range(cfg.scored_slots + 1):
            cell = slot_cell(e, s, cfg)
            canvas.rect(
                cell.x_min,
                cell.y_min,
                cell.x_max - cell.x_min,
                cell.y_max - cell.y_min,
                stroke="#cccccc",
                dash="4,3",
            )

    n = blocks[0].shape[0]
    for i in range(n):
        color = PALETTE[i % len(PALETTE)]
        path = np.concatenate([b[i] for b in blocks])
        canvas.polyline(path, stroke=color)
        canvas.circle(path[0, 0], path[0, 1], 3.0, fill="none", stroke=color)
        canvas.circle(path[-1, 0], path[-1, 1], 3.5, fill=color)
        if null_angles_deg is not None:
            ang = np.radians(float(null_angles_deg[i]))
            tip = path[-1] + NULL_ARROW_LEN_M * np.array([np.cos(ang), np.sin(ang)])
            canvas.line(path[-1, 0], path[-1, 1], tip[0], tip[1], stroke=color, width=1.0)

    if include_jammer:
        canvas.cross(jam[0], jam[1], 6.0, stroke="#d35400")
        canvas.text(jam[0] + 3.0 / canvas.scale, jam[1], "jammer", size=11)
    return canvas.render()


def curve_svg(
    series: Iterable[Tuple[str, Sequence[float], Sequence[float]]],
    x_label: str = "",
    y_label: str = "",
    width: int = 640,
    height: int = 360,
) -> str:
    """Simple line chart; series = iterable of (label, xs, ys)."""
    series = [(str(lbl), np.asarray(xs, float), np.asarray(ys, float)) for lbl, xs, ys in series]
    if not series or any(xs.size == 0 for _, xs, _ in series):
        raise ValueError("series must be non-empty")
    all_x = np.concatenate([xs for _, xs, _ in series])
    all_y = np.concatenate([ys for _, _, ys in series])
    margin = 50
    x0, x1 = float(all_x.min()), float(all_x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="0 0 %d %d">'
        % (width, height, width, height),
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#333333"/>'
        % (_f(margin), _f(height - margin), _f(width - margin), _f(height - margin)),
        '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#333333"/>'
        % (_f(margin), _f(margin), _f(margin), _f(height - margin)),
    ]
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join("%s,%s" % (_f(px(x)), _f(py(y))) for x, y in zip(xs, ys))
        parts.append(
            '<polyline points="%s" fill="none" stroke="%s" stroke-width="1.5"/>'
            % (coords, color)
        )
        if label:
            parts.append(
                '<text x="%s" y="%s" font-size="11" fill="%s" font-family="sans-serif">%s</text>'
                % (_f(width - margin - 120), _f(margin + 14 * (k + 1)), color, label)
            )
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="middle" fill="#555555" '
            'font-family="sans-serif">%.3g</text>' % (_f(px(xv)), _f(height - margin + 14), xv)
        )
        parts.append(
            '<text x="%s" y="%s" font-size="10" text-anchor="end" fill="#555555" '
            'font-family="sans-serif">%.3g</text>' % (_f(margin - 6), _f(py(yv) + 3), yv)
        )
    if x_label:
        parts.append(
            '<text x="%s" y="%s" font-size="12" text-anchor="middle" fill="#333333" '
            'font-family="sans-serif">%s</text>' % (_f(width / 2), _f(height - 10), x_label)
        )
    if y_label:
        parts.append(
            '<text x="14" y="%s" font-size="12" text-anchor="middle" fill="#333333" '
            'font-family="sans-serif" transform="rotate(-90 14 %s)">%s</text>'
            % (_f(height / 2), _f(height / 2), y_label)
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
