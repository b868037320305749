"""Minimal native SVG renderings: line plots and heat maps. CSV stays the canonical output."""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_W, _H = 640, 420
_L, _R, _T, _B = 70, 20, 30, 50
_COLORS = ("#1f4e9c", "#c0392b", "#27864a", "#8e44ad", "#d68910", "#117a8b", "#555555")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def _fmt(v):
    return f"{v:.4g}"


class _Frame:
    def __init__(self, xlim, ylim, logy=False):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.logy = logy

    def px(self, x):
        return _L + (x - self.x0) / (self.x1 - self.x0) * (_W - _L - _R)

    def py(self, y):
        return _H - _B - (y - self.y0) / (self.y1 - self.y0) * (_H - _T - _B)


def _axes(fr: _Frame, title, xlabel, ylabel):
    out = [f'<rect x="{_L}" y="{_T}" width="{_W - _L - _R}" height="{_H - _T - _B}" fill="none" stroke="#000"/>']
    for x in _ticks(fr.x0, fr.x1):
        X = fr.px(x)
        out.append(f'<line x1="{X:.1f}" y1="{_H - _B}" x2="{X:.1f}" y2="{_H - _B + 5}" stroke="#000"/>')
        out.append(f'<text x="{X:.1f}" y="{_H - _B + 18}" font-size="11" text-anchor="middle">{_fmt(x)}</text>')
    for y in _ticks(fr.y0, fr.y1):
        Y = fr.py(y)
        label = f"1e{int(round(y))}" if fr.logy else _fmt(y)
        if fr.logy and abs(y - round(y)) > 1e-9:
            continue
        out.append(f'<line x1="{_L - 5}" y1="{Y:.1f}" x2="{_L}" y2="{Y:.1f}" stroke="#000"/>')
        out.append(f'<text x="{_L - 8}" y="{Y + 4:.1f}" font-size="11" text-anchor="end">{label}</text>')
    out.append(f'<text x="{_W / 2}" y="{_T - 10}" font-size="13" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{_W / 2}" y="{_H - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{_H / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {_H / 2})">{escape(ylabel)}</text>')
    return out


def _doc(body, path):
    text = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">\n'
            f'<rect width="100%" height="100%" fill="#fff"/>\n' + "\n".join(body) + "\n</svg>\n")
    if path is not None:
        Path(path).write_text(text)
    return text


def line_plot(series: dict, path=None, title="", xlabel="", ylabel="", logy=False, logx=False, floor=1e-30):
    """``series`` maps a label to (x, y). Log axes drop non-positive points."""
    cleaned = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logy:
            ok &= y > floor
        if logx:
            ok &= x > 0
        x, y = x[ok], y[ok]
        cleaned[name] = (np.log10(x) if logx else x, np.log10(y) if logy else y)
    xs = np.concatenate([v[0] for v in cleaned.values()] or [np.zeros(1)])
    ys = np.concatenate([v[1] for v in cleaned.values()] or [np.zeros(1)])
    if xs.size == 0:
        xs = ys = np.zeros(1)
    pad = 0.05 * (ys.max() - ys.min() or 1.0)
    fr = _Frame((xs.min(), xs.max() if xs.max() > xs.min() else xs.min() + 1),
                (ys.min() - pad, ys.max() + pad), logy)
    body = _axes(fr, title, ("log10 " if logx else "") + xlabel, ylabel)
    for n, (name, (x, y)) in enumerate(cleaned.items()):
        c = _COLORS[n % len(_COLORS)]
        if x.size:
            pts = " ".join(f"{fr.px(a):.1f},{fr.py(b):.1f}" for a, b in zip(x, y))
            body.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
            if x.size < 40:
                body.extend(f'<circle cx="{fr.px(a):.1f}" cy="{fr.py(b):.1f}" r="2.5" fill="{c}"/>'
                            for a, b in zip(x, y))
        body.append(f'<text x="{_W - _R - 8}" y="{_T + 16 + 15 * n}" font-size="11" text-anchor="end" '
                    f'fill="{c}">{escape(str(name))}</text>')
    return _doc(body, path)


def _color(v):
    # blue - white - red diverging ramp on [-1, 1]
    v = max(-1.0, min(1.0, v))
    if v >= 0:
        r, g, b = 255, int(255 * (1 - v)), int(255 * (1 - v))
    else:
        r, g, b = int(255 * (1 + v)), int(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(x, y, z, path=None, title="", xlabel="", ylabel="", max_cells=200):
    """z[i, j] at (x[j], y[i]); colour is z scaled by max |z| (diverging, zero is white)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    sy = max(1, z.shape[0] // max_cells)
    sx = max(1, z.shape[1] // max_cells)
    x, y, z = x[::sx], y[::sy], z[::sy, ::sx]
    scale = np.nanmax(np.abs(z)) if np.any(np.isfinite(z)) else 1.0
    scale = scale or 1.0
    fr = _Frame((x.min(), x.max() if x.size > 1 else x.min() + 1), (y.min(), y.max() if y.size > 1 else y.min() + 1))
    wx = (_W - _L - _R) / max(x.size, 1)
    wy = (_H - _T - _B) / max(y.size, 1)
    body = []
    for i in range(y.size):
        for k in range(x.size):
            v = z[i, k]
            if not np.isfinite(v):
                continue
            X = _L + k * wx
            Y = _H - _B - (i + 1) * wy
            body.append(f'<rect x="{X:.2f}" y="{Y:.2f}" width="{wx + 0.3:.2f}" height="{wy + 0.3:.2f}" '
                        f'fill="{_color(v / scale)}"/>')
    body += _axes(fr, title + f" (|max| = {scale:.3g})", xlabel, ylabel)
    return _doc(body, path)
