"""Minimal self-contained SVG line plots for trajectories.

Written by hand so the output is byte-stable across platforms and library
versions (the test suite pins a hash of one plot).
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
WIDTH, PANEL_H = 640, 240
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 30, 40


def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if not np.isfinite(lo) or not np.isfinite(hi):
        return 0.0, 1.0
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = max(abs(hi) * 0.05, 0.5)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _panel(y0: float, title: str, t: np.ndarray, series: list[tuple[str, np.ndarray]], ylabel: str,
           hlines: list[tuple[float, str]] = ()) -> list[str]:
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = PANEL_H - MARGIN_T - MARGIN_B
    x0, top = MARGIN_L, y0 + MARGIN_T
    ys = np.concatenate([s for _, s in series] + [np.array([h for h, _ in hlines])])
    ylo, yhi = _nice_range(float(np.min(ys)), float(np.max(ys)))
    tlo, thi = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

    def px(tv):
        return x0 + (tv - tlo) / (thi - tlo) * pw

    def py(yv):
        return top + ph - (yv - ylo) / (yhi - ylo) * ph

    out = [
        f'<text x="{x0 + pw / 2:.2f}" y="{y0 + 18:.2f}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{x0}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        f'<text x="{x0 + pw / 2:.2f}" y="{top + ph + 32:.2f}" text-anchor="middle" font-size="11">t</text>',
        f'<text x="{x0 - 52}" y="{top + ph / 2:.2f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 {x0 - 52} {top + ph / 2:.2f})">{escape(ylabel)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        tv = tlo + frac * (thi - tlo)
        yv = ylo + frac * (yhi - ylo)
        out.append(f'<text x="{px(tv):.2f}" y="{top + ph + 14:.2f}" text-anchor="middle" font-size="10">{tv:.4g}</text>')
        out.append(f'<text x="{x0 - 6}" y="{py(yv) + 3:.2f}" text-anchor="end" font-size="10">{yv:.4g}</text>')
    for h, label in hlines:
        out.append(f'<line x1="{x0}" y1="{py(h):.2f}" x2="{x0 + pw}" y2="{py(h):.2f}" stroke="#999" stroke-dasharray="4 3"/>')
    for k, (label, s) in enumerate(series):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(tv):.2f},{py(yv):.2f}" for tv, yv in zip(t, s))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 12 + 14 * k
        out.append(f'<line x1="{x0 + pw + 10}" y1="{ly - 4}" x2="{x0 + pw + 28}" y2="{ly - 4}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{x0 + pw + 32}" y="{ly}" font-size="10">{escape(label)}</text>')
    return out


def trajectory_svg(header: list[str], rows: np.ndarray, *, equilibrium=None, costs=None, budgets=None,
                   max_points: int = 600) -> str:
    """Render opinions, optional total allocations c_i'z_i(t) and optional
    error ||z(t) - z*|| as stacked panels."""
    if rows.shape[0] > max_points:
        keep = np.unique(np.linspace(0, rows.shape[0] - 1, max_points).round().astype(int))
        rows = rows[keep]
    t = rows[:, 0]
    Z = rows[:, 1:-2]
    labels = header[1:-2]
    panels = [("Opinions", [(lab, Z[:, k]) for k, lab in enumerate(labels)], "z", [])]
    if costs is not None:
        C = np.asarray(costs, dtype=float)
        n, m = C.shape
        alloc = [(f"agent {i + 1}", Z[:, i * m:(i + 1) * m] @ C[i]) for i in range(n)]
        hl = [(float(b), f"B_{i + 1}") for i, b in enumerate(budgets)] if budgets is not None else []
        panels.append(("Total allocation", alloc, "c_i'z_i", hl))
    if equilibrium is not None:
        zs = np.ravel(np.asarray(equilibrium, dtype=float))
        err = np.linalg.norm(Z - zs[None, :], axis=1)
        panels.append(("Distance to equilibrium", [("||z(t)-z*||", err)], "error", []))
    height = PANEL_H * len(panels)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
    ]
    for k, (title, series, ylabel, hl) in enumerate(panels):
        out.extend(_panel(k * PANEL_H, title, t, series, ylabel, hl))
    out.append("</svg>")
    return "\n".join(out) + "\n"
