"""Deterministic SVG heatmaps of two-axis sweep grids.

Layout and colors are fixed constants so a given grid always renders to
byte-identical SVG.  The colormap is diverging and centered at rho* = 1:
a cell's shade is the log2 of its rho* clipped to [-1, 1], blended from
pure blue (#2166ac, Laplacian preferred, rho* <= 1/2) through white
(rho* = 1) to pure red (#b2182b, adjacency preferred, rho* >= 2).
Excluded cells are left blank, which reproduces the empty degenerate
diagonals of the reference surfaces.
"""

from __future__ import annotations

import numpy as np

CELL_PX = 6
MARGIN_LEFT = 64
MARGIN_RIGHT = 24
MARGIN_TOP = 34
MARGIN_BOTTOM = 48

COLOR_LOW = (33, 102, 172)    # #2166ac
COLOR_MID = (255, 255, 255)
COLOR_HIGH = (178, 24, 43)    # #b2182b


def diverging_color(rho: float) -> str:
    """Hex color for one rho* value under the documented log2 colormap."""
    s = float(np.clip(np.log2(rho), -1.0, 1.0))
    anchor = COLOR_HIGH if s >= 0 else COLOR_LOW
    w = abs(s)
    rgb = tuple(round((1.0 - w) * m + w * a) for m, a in zip(COLOR_MID, anchor))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_heatmap_svg(grid) -> str:
    """Render a two-axis SweepGrid as an SVG string."""
    xs, ys = grid.axis_values
    nx, ny = len(xs), len(ys)
    width = MARGIN_LEFT + nx * CELL_PX + MARGIN_RIGHT
    height = MARGIN_TOP + ny * CELL_PX + MARGIN_BOTTOM
    x_name, y_name = grid.axes[0].name, grid.axes[1].name
    fixed = " ".join(f"{k}={v:g}" for k, v in sorted(grid.fixed.items()))
    title = f"{grid.family}" + (f" ({fixed})" if fixed else "")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{MARGIN_LEFT + nx * CELL_PX // 2}" y="20" font-family="monospace" '
        f'font-size="12" text-anchor="middle">{title}</text>',
    ]
    for i in range(nx):
        for j in range(ny):
            if grid.excluded[i, j]:
                continue
            x = MARGIN_LEFT + i * CELL_PX
            y = MARGIN_TOP + (ny - 1 - j) * CELL_PX
            color = diverging_color(float(grid.rho[i, j]))
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL_PX}" height="{CELL_PX}" '
                f'fill="{color}"/>'
            )
    frame_w, frame_h = nx * CELL_PX, ny * CELL_PX
    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{frame_w}" '
        f'height="{frame_h}" fill="none" stroke="black" stroke-width="1"/>'
    )
    # axis names and end-point tick labels
    label_y = MARGIN_TOP + frame_h + 16
    parts.extend([
        f'<text x="{MARGIN_LEFT}" y="{label_y}" font-family="monospace" '
        f'font-size="10" text-anchor="middle">{xs[0]:g}</text>',
        f'<text x="{MARGIN_LEFT + frame_w}" y="{label_y}" font-family="monospace" '
        f'font-size="10" text-anchor="middle">{xs[-1]:g}</text>',
        f'<text x="{MARGIN_LEFT + frame_w // 2}" y="{label_y + 18}" '
        f'font-family="monospace" font-size="12" text-anchor="middle">{x_name}</text>',
        f'<text x="{MARGIN_LEFT - 8}" y="{MARGIN_TOP + frame_h}" font-family="monospace" '
        f'font-size="10" text-anchor="end">{ys[0]:g}</text>',
        f'<text x="{MARGIN_LEFT - 8}" y="{MARGIN_TOP + 10}" font-family="monospace" '
        f'font-size="10" text-anchor="end">{ys[-1]:g}</text>',
        f'<text x="{MARGIN_LEFT - 36}" y="{MARGIN_TOP + frame_h // 2}" '
        f'font-family="monospace" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 {MARGIN_LEFT - 36} {MARGIN_TOP + frame_h // 2})">'
        f'{y_name}</text>',
        "</svg>",
    ])
    return "\n".join(parts) + "\n"
