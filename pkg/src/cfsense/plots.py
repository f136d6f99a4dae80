"""Minimal deterministic SVG plotting for analysis reports.

Hand-rolled on purpose: the output must be byte-identical for identical
inputs (no library version drift, no embedded timestamps or random ids).
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
_W, _H = 460.0, 320.0
_ML, _MR, _MT, _MB = 64.0, 16.0, 34.0, 46.0


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


class _Panel:
    """One x/y axes panel with polyline series and markers."""

    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.series: list[tuple[str, list[float], list[float], bool]] = []

    def add(self, label: str, x: list[float], y: list[float], markers: bool = True) -> None:
        pts = [(a, b) for a, b in zip(x, y) if math.isfinite(a) and math.isfinite(b)]
        if pts:
            self.series.append((label, [p[0] for p in pts], [p[1] for p in pts], markers))

    def render(self, ox: float, oy: float) -> str:
        xs = [v for _, x, _, _ in self.series for v in x]
        ys = [v for _, _, y, _ in self.series for v in y]
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if xhi == xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi == ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        pad_y = 0.05 * (yhi - ylo)
        ylo, yhi = ylo - pad_y, yhi + pad_y

        pw, ph = _W - _ML - _MR, _H - _MT - _MB

        def px(v: float) -> float:
            return ox + _ML + (v - xlo) / (xhi - xlo) * pw

        def py(v: float) -> float:
            return oy + _MT + (yhi - v) / (yhi - ylo) * ph

        out = [
            f'<rect x="{_fmt(ox + _ML)}" y="{_fmt(oy + _MT)}" width="{_fmt(pw)}" '
            f'height="{_fmt(ph)}" fill="none" stroke="#444"/>',
            f'<text x="{_fmt(ox + _W / 2)}" y="{_fmt(oy + 18)}" text-anchor="middle" '
            f'font-size="13">{self.title}</text>',
            f'<text x="{_fmt(ox + _ML + pw / 2)}" y="{_fmt(oy + _H - 8)}" '
            f'text-anchor="middle" font-size="11">{self.xlabel}</text>',
            f'<text x="{_fmt(ox + 14)}" y="{_fmt(oy + _MT + ph / 2)}" font-size="11" '
            f'text-anchor="middle" transform="rotate(-90 {_fmt(ox + 14)} '
            f'{_fmt(oy + _MT + ph / 2)})">{self.ylabel}</text>',
        ]
        for tx in _ticks(xlo, xhi):
            out.append(
                f'<text x="{_fmt(px(tx))}" y="{_fmt(oy + _MT + ph + 14)}" '
                f'text-anchor="middle" font-size="9">{_fmt(tx)}</text>'
            )
        for ty in _ticks(ylo, yhi):
            out.append(
                f'<text x="{_fmt(ox + _ML - 4)}" y="{_fmt(py(ty) + 3)}" '
                f'text-anchor="end" font-size="9">{_fmt(ty)}</text>'
            )
        for i, (label, x, y, markers) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>')
            if markers:
                for a, b in zip(x, y):
                    out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2.4" fill="{color}"/>')
            out.append(
                f'<text x="{_fmt(ox + _ML + 6)}" y="{_fmt(oy + _MT + 14 + 13 * i)}" '
                f'font-size="10" fill="{color}">{label}</text>'
            )
        return "\n".join(out)


def svg_document(panels: list[_Panel], per_row: int = 2) -> str:
    rows = (len(panels) + per_row - 1) // per_row
    width = _W * min(per_row, max(len(panels), 1))
    height = _H * max(rows, 1)
    body = []
    for i, p in enumerate(panels):
        body.append(p.render((i % per_row) * _W, (i // per_row) * _H))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}" '
        f'font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def report_svg(report: dict) -> str:
    """Break-in curve plots: gauge factor and baseline resistance vs strain."""
    k_panel = _Panel("Gauge factor vs break-in strain", "max |strain|", "k")
    r_panel = _Panel("Baseline resistance vs break-in strain", "max |strain|", "R (ohm)")
    for curve in report.get("breakin_curves", []):
        label = f"g{curve['gauge']} {curve['orientation']}"
        pts = curve["points"]
        x = [p["breakin_strain"] for p in pts]
        k_panel.add(label, x, [p["k"] for p in pts])
        r_panel.add(label, x, [p["R_unstrained"] for p in pts])
    return svg_document([k_panel, r_panel])


def window_fit_panel(eps_avg, R, k: float, R0_fit: float, title: str) -> _Panel:
    """Resistance against strain for one window, with the fitted line."""
    panel = _Panel(title, "average strain", "R (ohm)")
    order = sorted(range(len(eps_avg)), key=lambda i: eps_avg[i])
    panel.add("data", [float(eps_avg[i]) for i in order], [float(R[i]) for i in order])
    lo, hi = float(min(eps_avg)), float(max(eps_avg))
    panel.add(f"fit k={k:.4g}", [lo, hi], [R0_fit * (1 + k * lo), R0_fit * (1 + k * hi)])
    return panel


def window_fit_svg(eps_avg, R, k: float, R0_fit: float, title: str) -> str:
    return svg_document([window_fit_panel(eps_avg, R, k, R0_fit, title)], per_row=1)
