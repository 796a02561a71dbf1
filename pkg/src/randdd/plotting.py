"""
Figure output from fidelity CSV files.

Two renderers, both driven only by the CSV: a gnuplot script and a small
self-contained SVG writer.  Each protocol is drawn as its mean curve with a
shaded mean +/- stderr band.
"""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def gnuplot_script(csv_path, traces, out_name="fidelity.svg", title="") -> str:
    """gnuplot commands that read ``csv_path`` and plot every protocol in it."""
    csv_path = str(csv_path)
    lines = [
        "set terminal svg size 800,520 dynamic",
        f"set output '{out_name}'",
        "set datafile separator ','",
        "set key outside right",
        "set xlabel 'J t'",
        "set ylabel '<<F_e>>'",
        "set yrange [0:1.02]",
        "set style fill transparent solid 0.25 noborder",
    ]
    if title:
        lines.append(f"set title '{title}'")
    parts = []
    for k, tr in enumerate(traces):
        color = PALETTE[k % len(PALETTE)]
        sel = f'(strcol(1) eq "{tr.label}"'
        parts.append(f"'{csv_path}' every ::1 using 4:{sel} ? $5-$6 : 1/0):"
                     f"{sel} ? $5+$6 : 1/0) with filledcurves lc rgb '{color}' notitle")
        parts.append(f"'{csv_path}' every ::1 using 4:{sel} ? $5 : 1/0) "
                     f"with lines lw 1.5 lc rgb '{color}' title '{tr.label}'")
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def write_gnuplot(path, csv_path, traces, out_name=None):
    out_name = out_name or Path(path).with_suffix(".svg").name
    Path(path).write_text(gnuplot_script(csv_path, traces, out_name))


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def svg_figure(traces, width=800, height=520, title="") -> str:
    """Standalone SVG with one band-and-line per trace."""
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom
    t_max = max(float(np.max(tr.t)) for tr in traces)
    t_min = min(0.0, min(float(np.min(tr.t)) for tr in traces))
    y_lo, y_hi = 0.0, 1.0

    def sx(t):
        return left + (t - t_min) / (t_max - t_min) * pw

    def sy(y):
        return top + (1 - (min(max(y, y_lo), y_hi) - y_lo) / (y_hi - y_lo)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for x in _ticks(t_min, t_max):
        px = sx(x)
        out.append(f'<line x1="{px:.1f}" y1="{top + ph}" x2="{px:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{top + ph + 18}" text-anchor="middle">{x:g}</text>')
    for y in _ticks(y_lo, y_hi):
        py = sy(y)
        out.append(f'<line x1="{left - 5}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.1f}" text-anchor="end">{y:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">J t</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2})">&lt;&lt;F_e&gt;&gt;</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="24" text-anchor="middle">{escape(title)}</text>')
    for k, tr in enumerate(traces):
        color = PALETTE[k % len(PALETTE)]
        upper = [f"{sx(t):.2f},{sy(m + s):.2f}" for t, m, s in zip(tr.t, tr.mean, tr.stderr)]
        lower = [f"{sx(t):.2f},{sy(m - s):.2f}" for t, m, s in zip(tr.t, tr.mean, tr.stderr)]
        if np.any(tr.stderr > 0):
            out.append(f'<polygon points="{" ".join(upper + lower[::-1])}" '
                       f'fill="{color}" fill-opacity="0.25" stroke="none"/>')
        pts = " ".join(f"{sx(t):.2f},{sy(m):.2f}" for t, m in zip(tr.t, tr.mean))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 14 + 18 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(tr.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, traces, title=""):
    Path(path).write_text(svg_figure(traces, title=title))
