"""Deterministic report rendering: JSON, horizon CSV and horizon SVG."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .analysis.horizons import HorizonBranch

FLOAT_FORMAT = ".17g"


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, FLOAT_FORMAT)


def to_json(obj, indent: int = 2) -> str:
    """JSON text with sorted keys and every float written with 17 significant digits.

    Non-finite floats become the strings "nan", "inf" and "-inf".
    """
    pad = " " * indent

    def enc(o, depth: int) -> str:
        here, inner = pad * depth, pad * (depth + 1)
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if o is None:
            return "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), depth)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(str(k))}: {enc(o[k], depth + 1)}"
                     for k in sorted(o, key=str)]
            return "{\n" + ",\n".join(items) + "\n" + here + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in o):
                return "[" + ", ".join(enc(v, depth + 1) for v in o) + "]"
            return "[\n" + ",\n".join(inner + enc(v, depth + 1) for v in o) + "\n" + here + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


CSV_COLUMNS = ("case", "k", "arc", "r", "t", "f_residual")


def _branch_key(b: HorizonBranch):
    return (b.case, b.k, b.arc)


def horizon_csv(branches: Iterable[HorizonBranch], notices: Sequence[str] = ()) -> str:
    """One row per sample, ordered by (case, k, arc, r). Notices become leading
    ``#`` comment lines."""
    buf = io.StringIO()
    for note in notices:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for b in sorted(branches, key=_branch_key):
        for r, t, f in zip(b.r, b.t, b.residual):
            w.writerow([b.case, b.k, b.arc, format(r, FLOAT_FORMAT), format(t, FLOAT_FORMAT),
                        format(f, FLOAT_FORMAT)])
    return buf.getvalue()


# -- SVG ------------------------------------------------------------------------------

_W, _H, _PAD = 640, 480, 56
_COLORS = {"principal": "#1f4e9c", "conjugate": "#c0504d"}


def _fmt_coord(x: float) -> str:
    return f"{x:.3f}"


def horizon_svg(branches: Sequence[HorizonBranch], markers: Sequence[tuple[str, float]],
                title: str, notices: Sequence[str] = ()) -> str:
    """Polylines of t against r, with dashed verticals at the labelled r values."""
    branches = sorted(branches, key=_branch_key)
    rs = [x for b in branches for x in (b.r_lo, b.r_hi)] + [v for _, v in markers]
    ts = [x for b in branches for x in b.t]
    r0, r1 = (min(rs), max(rs)) if rs else (0.0, 1.0)
    t0, t1 = (min(ts), max(ts)) if ts else (0.0, 1.0)
    if r1 - r0 < 1e-12:
        r1 = r0 + 1.0
    if t1 - t0 < 1e-12:
        t1 = t0 + 1.0
    dr, dt = 0.05 * (r1 - r0), 0.05 * (t1 - t0)
    r0, r1, t0, t1 = r0 - dr, r1 + dr, t0 - dt, t1 + dt

    def sx(r):
        return _PAD + (r - r0) / (r1 - r0) * (_W - 2 * _PAD)

    def sy(t):
        return _H - _PAD - (t - t0) / (t1 - t0) * (_H - 2 * _PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<title>{title}</title>',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 16}" text-anchor="middle" font-size="14">r</text>',
        f'<text x="18" y="{_H // 2}" text-anchor="middle" font-size="14">t</text>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 16}" font-size="10">{_fmt_coord(r0)}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 16}" text-anchor="end" font-size="10">'
        f'{_fmt_coord(r1)}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" text-anchor="end" font-size="10">'
        f'{_fmt_coord(t0)}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 8}" text-anchor="end" font-size="10">'
        f'{_fmt_coord(t1)}</text>',
    ]
    for i, note in enumerate(notices):
        out.append(f'<text x="{_PAD + 8}" y="{_PAD + 16 + 14 * i}" font-size="11">{note}</text>')
    for label, r in markers:
        x = _fmt_coord(sx(r))
        out.append(f'<line x1="{x}" y1="{_PAD}" x2="{x}" y2="{_H - _PAD}" stroke="gray" '
                   f'stroke-dasharray="6,4"/>')
        out.append(f'<text x="{x}" y="{_PAD - 6}" text-anchor="middle" font-size="11">{label}</text>')
    for b in branches:
        pts = " ".join(f"{_fmt_coord(sx(r))},{_fmt_coord(sy(t))}" for r, t in zip(b.r, b.t))
        out.append(f'<polyline fill="none" stroke="{_COLORS[b.arc]}" stroke-width="1.5" '
                   f'data-case="{b.case}" data-k="{b.k}" data-arc="{b.arc}" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
