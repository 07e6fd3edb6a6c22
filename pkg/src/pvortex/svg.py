"""Self-contained SVG heatmaps for cell rasters and polar parameter surfaces.

No plotting dependency: the files are assembled from rect/path elements
with a fixed color ramp so identical data always produces identical bytes.

Color ramp (dark blue to yellow, 7 anchor stops, linear RGB interpolation):

    0.000  (13,  8, 135)
    0.167  (84,  2, 163)
    0.333  (139, 10, 165)
    0.500  (185, 50, 137)
    0.667  (219, 92, 104)
    0.833  (244, 136, 73)
    1.000  (240, 249, 33)

Values map to [0, 1] either linearly or through log10 (zeros and negatives
clamp to the smallest positive value); the chosen scale and the data range
are printed in the image footer.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .lattice import Grid2D

_RAMP = np.array([
    (13, 8, 135),
    (84, 2, 163),
    (139, 10, 165),
    (185, 50, 137),
    (219, 92, 104),
    (244, 136, 73),
    (240, 249, 33),
], dtype=float)


def ramp_color(t) -> NDArray:
    """RGB triple(s) of ramp position(s) t in [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    pos = t * (len(_RAMP) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_RAMP) - 1)
    frac = (pos - lo)[..., None]
    return np.rint(_RAMP[lo] * (1.0 - frac) + _RAMP[hi] * frac).astype(int)


def _normalize(values: NDArray, mask: NDArray, scale: str):
    v = np.asarray(values, dtype=float)
    sel = mask & np.isfinite(v)
    if not sel.any():
        raise ValueError("no finite cells to draw")
    if scale == "log":
        pos = v[sel & (v > 0.0)]
        if pos.size == 0:
            raise ValueError("log scale needs at least one positive cell")
        floor = pos.min()
        w = np.log10(np.maximum(v, floor))
        lo, hi = np.log10(floor), np.log10(max(pos.max(), floor))
    elif scale == "linear":
        w = v.copy()
        lo, hi = v[sel].min(), v[sel].max()
    else:
        raise ValueError(f"unknown scale {scale!r}")
    span = hi - lo if hi > lo else 1.0
    return (w - lo) / span, float(v[sel].min()), float(v[sel].max())


def _block_average(values: NDArray, mask: NDArray, limit: int):
    """Coarsen a cell raster so neither axis exceeds limit cells."""
    nx, ny = values.shape
    bx = -(-nx // limit)
    by = -(-ny // limit)
    b = max(bx, by, 1)
    if b == 1:
        return values, mask
    px = (-nx) % b
    py = (-ny) % b
    v = np.pad(values * mask, ((0, px), (0, py)))
    m = np.pad(mask.astype(float), ((0, px), (0, py)))
    v = v.reshape(v.shape[0] // b, b, v.shape[1] // b, b).sum(axis=(1, 3))
    m = m.reshape(m.shape[0] // b, b, m.shape[1] // b, b).sum(axis=(1, 3))
    out = np.where(m > 0, v / np.maximum(m, 1.0), 0.0)
    return out, m > 0


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _footer_legend(parts: list[str], width: int, y: float, lo: float,
                   hi: float, scale: str) -> None:
    bar_w, bar_h, x0 = 200, 10, 10
    n = 64
    for i in range(n):
        c = ramp_color(i / (n - 1))
        parts.append(
            f'<rect x="{x0 + i * bar_w / n:.2f}" y="{y:.2f}" '
            f'width="{bar_w / n + 0.5:.2f}" height="{bar_h}" '
            f'fill="rgb({c[0]},{c[1]},{c[2]})"/>')
    parts.append(
        f'<text x="{x0 + bar_w + 8}" y="{y + bar_h - 1:.2f}" '
        f'font-family="monospace" font-size="11">'
        f'{lo:.4g} .. {hi:.4g} ({scale})</text>')


def cell_heatmap(grid: Grid2D, values: NDArray, title: str = "",
                 scale: str = "log", width: int = 640,
                 max_cells: int = 160) -> str:
    """SVG raster of one scalar per cell; inactive cells stay white.

    Rasters finer than max_cells per axis are block-averaged first to keep
    files small.
    """
    mask = np.asarray(grid.active_cells(), dtype=bool)
    vals, mask = _block_average(np.asarray(values, dtype=float), mask,
                                max_cells)
    nx, ny = vals.shape
    norm, lo, hi = _normalize(vals, mask, scale)
    cell = width / nx
    plot_h = cell * ny
    height = int(plot_h) + 30
    parts = _header(width, height, title or "cell heatmap")
    colors = ramp_color(norm)
    for i in range(nx):
        for j in range(ny):
            if not mask[i, j]:
                continue
            c = colors[i, j]
            # j indexes upward, SVG y runs downward
            parts.append(
                f'<rect x="{i * cell:.2f}" y="{(ny - 1 - j) * cell:.2f}" '
                f'width="{cell + 0.1:.2f}" height="{cell + 0.1:.2f}" '
                f'fill="rgb({c[0]},{c[1]},{c[2]})"/>')
    _footer_legend(parts, width, plot_h + 8, lo, hi, scale)
    parts.append("</svg>")
    return "\n".join(parts)


def polar_heatmap(ys: NDArray, values: NDArray, title: str = "",
                  scale: str = "linear", width: int = 640) -> str:
    """SVG of a polar parameter surface: one wedge per sample of a polar
    grid over the unit disk (radius-0 sample drawn as a small disk)."""
    ys = np.asarray(ys, dtype=float)
    values = np.asarray(values, dtype=float)
    radii = np.hypot(ys[:, 0], ys[:, 1])
    angles = np.mod(np.arctan2(ys[:, 1], ys[:, 0]), 2.0 * np.pi)
    rlevels = np.unique(np.round(radii, 12))
    alevels = np.unique(np.round(angles[radii > 1e-12], 12))
    n_ang = len(alevels) if len(alevels) else 1
    astep = 2.0 * np.pi / n_ang
    norm, lo, hi = _normalize(values, np.ones(len(values), dtype=bool), scale)
    colors = ramp_color(norm)

    cx = cy = width / 2.0
    rad = width / 2.0 - 4.0
    height = width + 30
    parts = _header(width, height, title or "parameter surface")

    def pt(rho, ang):
        return (cx + rad * rho * np.cos(ang), cy - rad * rho * np.sin(ang))

    for idx in range(len(ys)):
        c = colors[idx]
        fill = f'fill="rgb({c[0]},{c[1]},{c[2]})"'
        rho = radii[idx]
        if rho <= 1e-12:
            k = np.searchsorted(rlevels, 1e-12)
            r_out = rad * (rlevels[min(k, len(rlevels) - 1)]
                           if len(rlevels) > 1 else 0.5) * 0.5
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" '
                         f'r="{max(r_out, 2.0):.2f}" {fill}/>')
            continue
        k = int(np.searchsorted(rlevels, rho - 1e-12))
        r_in = 0.5 * (rlevels[k - 1] + rho) if k > 0 else 0.5 * rho
        r_out = 0.5 * (rho + rlevels[k + 1]) if k + 1 < len(rlevels) else rho
        a0 = angles[idx] - astep / 2.0
        a1 = angles[idx] + astep / 2.0
        x0o, y0o = pt(r_out, a0)
        x1o, y1o = pt(r_out, a1)
        x1i, y1i = pt(r_in, a1)
        x0i, y0i = pt(r_in, a0)
        ro, ri = rad * r_out, rad * r_in
        parts.append(
            f'<path d="M {x0o:.2f} {y0o:.2f} '
            f'A {ro:.2f} {ro:.2f} 0 0 0 {x1o:.2f} {y1o:.2f} '
            f'L {x1i:.2f} {y1i:.2f} '
            f'A {ri:.2f} {ri:.2f} 0 0 1 {x0i:.2f} {y0i:.2f} Z" {fill}/>')
    _footer_legend(parts, width, width + 2.0, lo, hi, scale)
    parts.append("</svg>")
    return "\n".join(parts)
