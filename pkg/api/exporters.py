# api/exporters.py
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from rest_framework.utils.encoders import JSONEncoder

from analytic.curve import CURVE_COLUMNS, CurvePoint

# ------------------------------------------------------------------------------
# JSON / CSV
# ------------------------------------------------------------------------------
def render_json(payload: Mapping[str, Any]) -> str:
    """JSON estável (chaves ordenadas), mesmo encoder do DRF para tipos numpy."""
    return json.dumps(payload, cls=JSONEncoder, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render_curve_csv(points: Sequence[CurvePoint], config: Mapping[str, Any]) -> str:
    """
    CSV da curva. O eco da configuração vai em linhas de comentário (#)
    antes do cabeçalho; floats em repr, sem perda.
    """
    buf = io.StringIO()
    for key in sorted(config):
        buf.write(f"# {key}={config[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for p in points:
        row = p.as_dict()
        writer.writerow([repr(float(row[c])) for c in CURVE_COLUMNS])
    return buf.getvalue()


def read_curve_csv(text: str) -> List[Dict[str, float]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(lines)]


# ------------------------------------------------------------------------------
# SVG (dois painéis: R×S e e×b)
# ------------------------------------------------------------------------------
PANEL_W, PANEL_H = 420, 320
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 30, 45
TICKS = 5


def _ticks(lo: float, hi: float) -> np.ndarray:
    return np.linspace(lo, hi, TICKS)


def _scale(values, lo: float, hi: float, start: float, length: float, flip: bool = False):
    span = hi - lo if hi > lo else 1.0
    t = (np.asarray(values, dtype=float) - lo) / span
    if flip:
        t = 1.0 - t
    return start + t * length


def _panel(
    x: np.ndarray,
    y: np.ndarray,
    *,
    offset_x: float,
    title: str,
    x_label: str,
    y_label: str,
    marks: Sequence[Tuple[float, float, str]] = (),
) -> str:
    xs = np.concatenate([x, [m[0] for m in marks]])
    ys = np.concatenate([y, [m[1] for m in marks]])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())

    left = offset_x + MARGIN_L
    top = MARGIN_T
    width = PANEL_W - MARGIN_L - MARGIN_R
    height = PANEL_H - MARGIN_T - MARGIN_B
    bottom = top + height

    px = _scale(x, x_lo, x_hi, left, width)
    py = _scale(y, y_lo, y_hi, top, height, flip=True)
    poly = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))

    out = [
        '<g class="panel">',
        f'<text x="{left + width / 2:.1f}" y="{top - 10}" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{left + width}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
    ]
    for tv, tp in zip(_ticks(x_lo, x_hi), _scale(_ticks(x_lo, x_hi), x_lo, x_hi, left, width)):
        out.append(f'<line x1="{tp:.2f}" y1="{bottom}" x2="{tp:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(
            f'<text x="{tp:.2f}" y="{bottom + 18}" text-anchor="middle" font-size="10">{tv:.3g}</text>'
        )
    for tv, tp in zip(_ticks(y_lo, y_hi), _scale(_ticks(y_lo, y_hi), y_lo, y_hi, top, height, flip=True)):
        out.append(f'<line x1="{left - 5}" y1="{tp:.2f}" x2="{left}" y2="{tp:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{tp + 3:.2f}" text-anchor="end" font-size="10">{tv:.3g}</text>'
        )
    out.append(
        f'<text x="{left + width / 2:.1f}" y="{bottom + 36}" text-anchor="middle" font-size="11">{x_label}</text>'
    )
    out.append(
        f'<text x="{offset_x + 14}" y="{top + height / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 {offset_x + 14} {top + height / 2:.1f})">{y_label}</text>'
    )
    out.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{poly}"/>')
    for mx, my, label in marks:
        cx = float(_scale([mx], x_lo, x_hi, left, width)[0])
        cy = float(_scale([my], y_lo, y_hi, top, height, flip=True)[0])
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="firebrick"/>')
        out.append(f'<text x="{cx - 6:.2f}" y="{cy - 6:.2f}" text-anchor="end" font-size="10">{label}</text>')
    out.append("</g>")
    return "\n".join(out)


def render_curve_svg(
    points: Sequence[CurvePoint],
    config: Mapping[str, Any],
    marks: Sequence[Tuple[float, float, str]] = ((2.0, 1.0, "teleporte"),),
) -> str:
    """R₁ contra S à esquerda; e contra b à direita, com o ponto do teleporte marcado."""
    s = np.array([p.entropy_bits for p in points])
    r = np.array([p.rate_bits for p in points])
    b = np.array([p.b_bits for p in points])
    e = np.array([p.e_ebits for p in points])

    echo = json.dumps(dict(config), cls=JSONEncoder, sort_keys=True).replace("--", "- -")
    width = 2 * PANEL_W
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" '
        f'viewBox="0 0 {width} {PANEL_H}">',
        f"<!-- config: {echo} -->",
        f'<rect width="{width}" height="{PANEL_H}" fill="white"/>',
        _panel(s, r, offset_x=0, title="R(S)", x_label="S (bits)", y_label="R (bits)"),
        _panel(
            b, e, offset_x=PANEL_W, title="(b, e)", x_label="b (bits)", y_label="e (ebits)",
            marks=marks,
        ),
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


# ------------------------------------------------------------------------------
# Gravação
# ------------------------------------------------------------------------------
def write_atomic(path, text: str) -> Path:
    """Grava num temporário no mesmo diretório e troca com os.replace."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return target


def render_result(result, fmt: Optional[str] = None) -> str:
    """Texto de saída de um CommandResult; só a curva aceita csv/svg."""
    fmt = fmt or "json"
    if result.command == "curve" and fmt == "csv":
        return render_curve_csv(result.points, result.config)
    if result.command == "curve" and fmt == "svg":
        return render_curve_svg(result.points, result.config)
    return render_json(result.payload)
