"""Deterministic SVG scatter plots of joint embeddings.

Output is plain text assembled with fixed float formatting, so identical
inputs produce byte-identical files (suitable for golden-file tests).
"""

from __future__ import annotations

import numpy as np

_VIRIDIS_STOPS = (
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
)

TARGET_COLOR = "#1f77b4"
BACKGROUND_COLOR = "#ff7f0e"

_WIDTH, _HEIGHT = 640, 480
_MARGIN_LEFT, _MARGIN_RIGHT, _MARGIN_TOP, _MARGIN_BOTTOM = 60, 150, 20, 50


def sequential_color(t: float) -> str:
    """Map ``t`` in [0, 1] onto a sequential (viridis-like) color scale."""
    t = min(1.0, max(0.0, float(t)))
    pos = t * (len(_VIRIDIS_STOPS) - 1)
    i = min(int(pos), len(_VIRIDIS_STOPS) - 2)
    frac = pos - i
    rgb = [round(a + (b - a) * frac) for a, b in zip(_VIRIDIS_STOPS[i], _VIRIDIS_STOPS[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _axis_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def scatter_svg(points_target: np.ndarray, points_background: np.ndarray,
                color_values: np.ndarray | None = None, color_network: str = "T",
                color_label: str | None = None) -> str:
    """SVG scatter of the first two embedding columns of both networks.

    Target nodes are circles, background nodes squares. When ``color_values``
    is given (one value per node of ``color_network``), those markers follow a
    sequential color scale with a min/max legend.
    """
    pt = np.asarray(points_target, dtype=np.float64)[:, :2]
    pb = np.asarray(points_background, dtype=np.float64)[:, :2]
    if pt.shape[1] < 2 or pb.shape[1] < 2:
        raise ValueError("scatter needs at least two embedding columns")

    all_pts = np.vstack([pt, pb])
    x_lo, x_hi = _axis_range(all_pts[:, 0])
    y_lo, y_hi = _axis_range(all_pts[:, 1])
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def sx(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    colors_t = [TARGET_COLOR] * len(pt)
    colors_b = [BACKGROUND_COLOR] * len(pb)
    legend_minmax = None
    if color_values is not None:
        color_values = np.asarray(color_values, dtype=np.float64)
        side = pt if color_network == "T" else pb
        if len(color_values) != len(side):
            raise ValueError(
                f"got {len(color_values)} color values for {len(side)} '{color_network}' nodes")
        lo, hi = float(color_values.min()), float(color_values.max())
        span = hi - lo if hi > lo else 1.0
        mapped = [sequential_color((v - lo) / span) for v in color_values]
        if color_network == "T":
            colors_t = mapped
        else:
            colors_b = mapped
        legend_minmax = (lo, hi)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    ax_bottom = _HEIGHT - _MARGIN_BOTTOM
    ax_right = _WIDTH - _MARGIN_RIGHT
    lines.append(f'<line x1="{_MARGIN_LEFT}" y1="{ax_bottom}" x2="{ax_right}" y2="{ax_bottom}" '
                 'stroke="black" stroke-width="1"/>')
    lines.append(f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" y2="{ax_bottom}" '
                 'stroke="black" stroke-width="1"/>')
    mid_x = (_MARGIN_LEFT + ax_right) / 2
    mid_y = (_MARGIN_TOP + ax_bottom) / 2
    lines.append(f'<text x="{mid_x:.1f}" y="{_HEIGHT - 12}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="14">cPC 1</text>')
    lines.append(f'<text x="16" y="{mid_y:.1f}" text-anchor="middle" font-family="sans-serif" '
                 f'font-size="14" transform="rotate(-90 16 {mid_y:.1f})">cPC 2</text>')
    for value, anchor_x in ((x_lo, _MARGIN_LEFT), (x_hi, ax_right)):
        lines.append(f'<text x="{anchor_x}" y="{ax_bottom + 16}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{value:.3g}</text>')
    for value, anchor_y in ((y_lo, ax_bottom), (y_hi, _MARGIN_TOP)):
        lines.append(f'<text x="{_MARGIN_LEFT - 6}" y="{anchor_y}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{value:.3g}</text>')

    for (x, y), color in zip(pb, colors_b):
        lines.append(f'<rect class="marker" x="{sx(x) - 2.5:.2f}" y="{sy(y) - 2.5:.2f}" '
                     f'width="5" height="5" fill="{color}" fill-opacity="0.8"/>')
    for (x, y), color in zip(pt, colors_t):
        lines.append(f'<circle class="marker" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     f'fill="{color}" fill-opacity="0.8"/>')

    lx = ax_right + 14
    lines.append(f'<circle cx="{lx}" cy="30" r="3" fill="{TARGET_COLOR}"/>')
    lines.append(f'<text x="{lx + 8}" y="34" font-family="sans-serif" font-size="12">target</text>')
    lines.append(f'<rect x="{lx - 2.5}" y="47.5" width="5" height="5" fill="{BACKGROUND_COLOR}"/>')
    lines.append(f'<text x="{lx + 8}" y="54" font-family="sans-serif" font-size="12">background</text>')
    if legend_minmax is not None:
        lo, hi = legend_minmax
        lines.append('<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">')
        for i, stop in enumerate(np.linspace(0, 1, 5)):
            lines.append(f'<stop offset="{stop:.2f}" stop-color="{sequential_color(stop)}"/>')
        lines.append('</linearGradient></defs>')
        lines.append(f'<rect x="{lx}" y="80" width="12" height="120" fill="url(#scale)"/>')
        lines.append(f'<text x="{lx + 16}" y="90" font-family="sans-serif" font-size="10">{hi:.3g}</text>')
        lines.append(f'<text x="{lx + 16}" y="200" font-family="sans-serif" font-size="10">{lo:.3g}</text>')
        if color_label:
            label = color_label.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            lines.append(f'<text x="{lx}" y="72" font-family="sans-serif" font-size="10">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
