"""Standalone SVG rendering of an observed series and its fitted S-curve.

Output is assembled by hand (no plotting backend) so identical inputs give
identical bytes.
"""

from __future__ import annotations

import math
from typing import BinaryIO
from xml.sax.saxutils import escape

from .corpus import TimeSeries
from .errors import SinkWriteFailure
from .lifecycle import GrowthFit

WIDTH, HEIGHT = 720, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 40, 56
MAX_CURVE_YEARS = 200


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            return mult * mag
    return 10 * mag


def _num(x: float) -> str:
    return f"{x:.2f}"


def _tick_label(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


def curve_end_year(series: TimeSeries, fit: GrowthFit | None, through_year: int | None = None) -> int:
    """Last year the fitted curve is drawn for.

    Defaults to the saturation year (capped), never earlier than the last
    observation.
    """
    last = series.years[-1]
    if fit is None:
        return last
    if through_year is None:
        sat = fit.saturation_year()
        through_year = math.ceil(sat) if math.isfinite(sat) else last
        through_year = min(through_year, last + MAX_CURVE_YEARS)
    return max(last, int(through_year))


def scurve_svg(
    series: TimeSeries,
    fit: GrowthFit | None,
    through_year: int | None = None,
    title: str = "Cumulative patents and fitted growth curve",
) -> str:
    if not len(series):
        raise ValueError("cannot render an empty series")
    first = series.years[0]
    last_curve = curve_end_year(series, fit, through_year)
    curve_years = list(range(first, last_curve + 1))
    curve_vals = [float(v) for v in fit.predict(curve_years)] if fit is not None else []

    x_lo, x_hi = first, max(last_curve, series.years[-1])
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_top = max(list(series.values) + curve_vals + ([fit.L] if fit is not None else []))
    y_top = y_top if y_top > 0 else 1.0
    y_step = _nice_step(y_top)
    y_hi = math.ceil(y_top / y_step) * y_step
    x_step = max(1, int(round(_nice_step(x_hi - x_lo))))

    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(year: float) -> float:
        return MARGIN_L + (year - x_lo) / (x_hi - x_lo) * pw

    def sy(value: float) -> float:
        return MARGIN_T + ph - value / y_hi * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    # axes and ticks
    x0, y0 = MARGIN_L, MARGIN_T + ph
    out.append('<g id="axes" stroke="black" stroke-width="1">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}"/>')
    out.append("</g>")
    out.append('<g id="ticks" fill="black">')
    tick = x_lo
    while tick <= x_hi:
        x = sx(tick)
        out.append(f'<line x1="{_num(x)}" y1="{y0}" x2="{_num(x)}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{_num(x)}" y="{y0 + 18}" text-anchor="middle">{tick}</text>')
        tick += x_step
    k = 0
    while k * y_step <= y_hi + 1e-9 * y_hi:
        v = k * y_step
        y = sy(v)
        out.append(f'<line x1="{x0 - 5}" y1="{_num(y)}" x2="{x0}" y2="{_num(y)}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{_num(y + 4)}" text-anchor="end">{_tick_label(v)}</text>')
        k += 1
    out.append("</g>")
    out.append(f'<text x="{_num(MARGIN_L + pw / 2)}" y="{HEIGHT - 12}" text-anchor="middle">Year</text>')
    out.append(
        f'<text x="16" y="{_num(MARGIN_T + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_num(MARGIN_T + ph / 2)})">Cumulative patents</text>'
    )

    if fit is not None:
        pts = " ".join(f"{_num(sx(yr))},{_num(sy(v))}" for yr, v in zip(curve_years, curve_vals))
        out.append(
            f'<polyline id="fitted" fill="none" stroke="#1f77b4" stroke-width="2" points="{pts}"/>'
        )
        infl = fit.inflection_year
        if x_lo <= infl <= x_hi:
            yv = float(fit.predict([infl])[0])
            out.append(
                f'<g id="inflection"><line x1="{_num(sx(infl))}" y1="{MARGIN_T}" x2="{_num(sx(infl))}" '
                f'y2="{y0}" stroke="#888888" stroke-dasharray="4 3"/>'
                f'<circle cx="{_num(sx(infl))}" cy="{_num(sy(yv))}" r="4" fill="#d62728"/>'
                f'<text x="{_num(sx(infl) + 6)}" y="{_num(sy(yv) - 6)}">inflection {infl:.1f}</text></g>'
            )
        out.append(
            f'<text x="{x0 + pw}" y="{MARGIN_T - 6}" text-anchor="end" fill="#1f77b4">'
            f"{fit.model.value}: L={fit.L:.1f} a={fit.a:.4g} b={fit.b:.4g}</text>"
        )

    out.append('<g id="observed" fill="#ff7f0e">')
    for yr, v in series.points:
        out.append(f'<circle cx="{_num(sx(yr))}" cy="{_num(sy(v))}" r="3"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_scurve_svg(series: TimeSeries, fit: GrowthFit | None, out: BinaryIO, through_year: int | None = None) -> None:
    """Write :func:`scurve_svg` output to a binary sink."""
    data = scurve_svg(series, fit, through_year).encode("utf-8")
    try:
        out.write(data)
        if hasattr(out, "flush"):
            out.flush()
    except (OSError, ValueError) as exc:
        raise SinkWriteFailure(f"could not write SVG: {exc}") from exc
