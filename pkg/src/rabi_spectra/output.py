"""CSV / JSON / SVG serialization with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SIG_DIGITS = 12


def fmt(value) -> str:
    """Numbers with 12 significant digits; everything else via str()."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{SIG_DIGITS}g}"
    if hasattr(value, "__float__") and not isinstance(value, str):
        return fmt(float(value))
    return str(value)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping[str, object]) -> str:
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={value if isinstance(value, str) else json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path: str | os.PathLike) -> tuple[dict, list[str], list[list[str]]]:
    """(meta, header, rows) of a file written by ``csv_text``."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition("=")
                meta[key] = value
            else:
                body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return float(fmt(obj))
        return fmt(obj)
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return _jsonable(obj.item())
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(files: Mapping[Path, str]) -> list[Path]:
    """Write every file via temp-file + rename; nothing is written if rendering already failed."""
    written = []
    for path, text in files.items():
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# minimal SVG

_PALETTE = ("#000000", "#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


def svg_plot(series: Sequence[Mapping], title: str = "", xlabel: str = "", ylabel: str = "",
             width: int = 640, height: int = 480, ylim: tuple[float, float] | None = None) -> str:
    """Polylines and markers on linear axes.

    Each series is a mapping with ``points`` (list of (x, y)), ``style``
    ("line" or "marker") and optional ``color`` / ``label``. Non-finite y
    values break polylines.
    """
    pad_l, pad_r, pad_t, pad_b = 60, 20, 30, 45
    xs = [x for s in series for x, y in s["points"] if math.isfinite(y)]
    ys = [y for s in series for x, y in s["points"] if math.isfinite(y)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = ylim if ylim is not None else ((min(ys), max(ys)) if ys else (0.0, 1.0))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{pad_t + ph}" x2="{px(t):.2f}" y2="{pad_t + ph + 5}" stroke="#444"/>')
        out.append(f'<text x="{px(t):.2f}" y="{pad_t + ph + 17}" text-anchor="middle" font-size="10">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{pad_l - 5}" y1="{py(t):.2f}" x2="{pad_l}" y2="{py(t):.2f}" stroke="#444"/>')
        out.append(f'<text x="{pad_l - 8}" y="{py(t) + 3:.2f}" text-anchor="end" font-size="10">{t:g}</text>')
    if xlabel:
        out.append(f'<text x="{pad_l + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{pad_t + ph / 2:.1f}" text-anchor="middle" font-size="12" '
                   f'transform="rotate(-90 14 {pad_t + ph / 2:.1f})">{_esc(ylabel)}</text>')
    out.append(f'<clipPath id="plot"><rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g clip-path="url(#plot)">')
    for i, s in enumerate(series):
        color = s.get("color", _PALETTE[i % len(_PALETTE)])
        if s.get("style", "line") == "line":
            run: list[str] = []
            for x, y in list(s["points"]) + [(math.nan, math.nan)]:
                if math.isfinite(y) and math.isfinite(x):
                    run.append(f"{px(x):.2f},{py(y):.2f}")
                    continue
                if len(run) > 1:
                    out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{" ".join(run)}"/>')
                run = []
        else:
            for x, y in s["points"]:
                if math.isfinite(y):
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="none" stroke="{color}"/>')
    out.append("</g>")
    for i, s in enumerate(series):
        if s.get("label"):
            color = s.get("color", _PALETTE[i % len(_PALETTE)])
            out.append(f'<text x="{pad_l + 8}" y="{pad_t + 14 + 13 * i}" font-size="10" fill="{color}">'
                       f'{_esc(s["label"])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
