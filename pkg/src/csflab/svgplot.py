"""Deterministic SVG emission: fixed canvas, 12-significant-digit path data.

No plotting library and no randomness; identical inputs give byte-identical
files. Three plot kinds cover the lab's needs: curve overlays, time series
with an optional guide slope, and log-scale mode-ratio plots with an
exponential envelope.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH = 1024
HEIGHT = 768
MARGIN = 72
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


class SvgCanvas:
    def __init__(self, x_range, y_range, title=""):
        self.x0, self.x1 = map(float, x_range)
        self.y0, self.y1 = map(float, y_range)
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#888888" stroke-width="1"/>',
        ]
        if title:
            self.parts.append(
                f'<text x="{WIDTH // 2}" y="{MARGIN - 24}" text-anchor="middle" '
                f'font-family="monospace" font-size="18">{title}</text>')

    def to_px(self, x, y):
        px = MARGIN + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) \
            * (WIDTH - 2 * MARGIN)
        py = HEIGHT - MARGIN - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0) \
            * (HEIGHT - 2 * MARGIN)
        return px, py

    def polyline(self, x, y, color, width=1.5, dash=None):
        px, py = self.to_px(x, y)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
            f'{dash_attr} points="{pts}"/>')

    def marker(self, x, y, color, r=4.0):
        px, py = self.to_px(x, y)
        self.parts.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}" fill="{color}"/>')

    def label(self, text, i):
        y = MARGIN + 20 + 20 * i
        self.parts.append(
            f'<rect x="{WIDTH - MARGIN - 220}" y="{y - 12}" width="14" height="14" '
            f'fill="{PALETTE[i % len(PALETTE)]}"/>')
        self.parts.append(
            f'<text x="{WIDTH - MARGIN - 200}" y="{y}" font-family="monospace" '
            f'font-size="14">{text}</text>')

    def axis_labels(self, xlab, ylab):
        self.parts.append(
            f'<text x="{WIDTH // 2}" y="{HEIGHT - MARGIN + 40}" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{xlab}</text>')
        self.parts.append(
            f'<text x="{MARGIN - 40}" y="{HEIGHT // 2}" text-anchor="middle" '
            f'font-family="monospace" font-size="14" '
            f'transform="rotate(-90 {MARGIN - 40} {HEIGHT // 2})">{ylab}</text>')

    def write(self, path):
        Path(path).write_text("\n".join(self.parts + ["</svg>"]) + "\n", encoding="ascii")


def _padded_range(lo, hi, pad=0.05):
    span = hi - lo
    if span <= 0:
        span = max(abs(hi), 1.0)
    return lo - pad * span, hi + pad * span


def plot_curves(path, curves, labels=None, title="curves", markers=None):
    """Overlay polylines with equal-aspect framing."""
    all_pts = np.vstack([c.points for c in curves])
    x_lo, x_hi = _padded_range(all_pts[:, 0].min(), all_pts[:, 0].max())
    y_lo, y_hi = _padded_range(all_pts[:, 1].min(), all_pts[:, 1].max())
    # equalize aspect on the fixed canvas
    span_x = (x_hi - x_lo) / (WIDTH - 2 * MARGIN)
    span_y = (y_hi - y_lo) / (HEIGHT - 2 * MARGIN)
    if span_x > span_y:
        mid = 0.5 * (y_lo + y_hi)
        half = 0.5 * span_x * (HEIGHT - 2 * MARGIN)
        y_lo, y_hi = mid - half, mid + half
    else:
        mid = 0.5 * (x_lo + x_hi)
        half = 0.5 * span_y * (WIDTH - 2 * MARGIN)
        x_lo, x_hi = mid - half, mid + half
    canvas = SvgCanvas((x_lo, x_hi), (y_lo, y_hi), title)
    for i, c in enumerate(curves):
        pts = c.points
        if c.closed:
            pts = np.vstack([pts, pts[:1]])
        canvas.polyline(pts[:, 0], pts[:, 1], PALETTE[i % len(PALETTE)])
        if labels:
            canvas.label(labels[i], i)
    for mx, my in markers or []:
        canvas.marker(mx, my, "#000000")
    canvas.axis_labels("x1", "x2")
    canvas.write(path)


def plot_series(path, series, labels=None, title="series", guide_slope=None,
                xlab="t", ylab="value"):
    """Time series overlay with an optional dashed guide line of given slope."""
    xs = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    canvas = SvgCanvas(_padded_range(xs.min(), xs.max()),
                       _padded_range(ys.min(), ys.max()), title)
    for i, (x, y) in enumerate(series):
        canvas.polyline(np.asarray(x), np.asarray(y), PALETTE[i % len(PALETTE)])
        if labels:
            canvas.label(labels[i], i)
    if guide_slope is not None:
        x = np.asarray(series[0][0], dtype=float)
        y = np.asarray(series[0][1], dtype=float)
        anchor_x, anchor_y = x[len(x) // 2], y[len(y) // 2]
        gx = np.array([x.min(), x.max()])
        gy = anchor_y + guide_slope * (gx - anchor_x)
        canvas.polyline(gx, gy, "#555555", width=1.0, dash="6,4")
    canvas.axis_labels(xlab, ylab)
    canvas.write(path)


def plot_mode_ratios(path, taus, ratios, labels, mu=0.4, title="mode ratios"):
    """log10 of mode-energy ratios against tau, with the e^{mu tau/2} envelope."""
    taus = np.asarray(taus, dtype=float)
    logs = [np.log10(np.maximum(np.asarray(r, dtype=float), 1e-300)) for r in ratios]
    env = (mu * taus / 2.0) / np.log(10.0)
    lo = min(min(l.min() for l in logs), env.min())
    hi = max(max(l.max() for l in logs), env.max())
    canvas = SvgCanvas(_padded_range(taus.min(), taus.max()),
                       _padded_range(lo, hi), title)
    for i, l in enumerate(logs):
        canvas.polyline(taus, l, PALETTE[i % len(PALETTE)])
        canvas.label(labels[i], i)
    canvas.polyline(taus, env, "#555555", width=1.0, dash="6,4")
    canvas.label(f"envelope mu={mu:g}", len(logs))
    canvas.axis_labels("tau", "log10 ratio")
    canvas.write(path)
