"""Tabular experiment reports with byte-reproducible serialization.

Reports carry a metadata block (config echo, seed, code version) and a fixed
column schema.  CSV output follows RFC 4180 (header row, CRLF line endings,
``.`` decimal separator) with floats printed at 17 significant digits so that
re-running a seeded experiment reproduces files byte for byte.  SVG output is
built from bare polyline/rect/text primitives, no plotting dependency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ExperimentReport",
    "format_value",
    "polyline_svg",
    "heatmap_svg",
]


def format_value(v) -> str:
    """Deterministic text form: 17 significant digits for floats."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _csv_escape(text: str) -> str:
    if any(c in text for c in (',', '"', '\n', '\r')):
        return '"' + text.replace('"', '""') + '"'
    return text


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class ExperimentReport:
    """Named columns of scalars plus a metadata echo."""

    name: str
    metadata: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row width {len(row)} does not match {len(self.columns)} columns"
                )

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width does not match columns")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def row_dicts(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv_text(self) -> str:
        lines = [",".join(_csv_escape(str(c)) for c in self.columns)]
        for row in self.rows:
            lines.append(",".join(_csv_escape(format_value(v)) for v in row))
        return "\r\n".join(lines) + "\r\n"

    def to_json_text(self) -> str:
        payload = {
            "name": self.name,
            "metadata": _jsonable(self.metadata),
            "columns": list(self.columns),
            "rows": [[_jsonable(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def metadata_json_text(self) -> str:
        payload = {"name": self.name, "metadata": _jsonable(self.metadata)}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ----------------------------------------------------------------------
# minimal SVG primitives


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _axes(width: int, height: int, pad: int) -> list[str]:
    return [
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    ]


def polyline_svg(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    title: str = "",
    width: int = 640,
    height: int = 400,
) -> str:
    """Line plot of (label, x, y) series with a framed axis box."""
    pad = 40
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["black", "#1f6fb2", "#b23a1f", "#3a8f3a", "#8f3a8f", "#8f8f3a"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="{pad - 12}" font-size="14">{title}</text>',
    ]
    parts += _axes(width, height, pad)
    for i, (label, x, y) in enumerate(series):
        color = colors[i % len(colors)]
        pts = " ".join(
            f"{_fmt(sx(float(a)))},{_fmt(sy(float(b)))}" for a, b in zip(x, y)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - pad - 150}" y="{pad + 16 + 16 * i}" font-size="12" '
            f'fill="{color}">{label}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(
            f'<text x="{_fmt(sx(xv))}" y="{height - pad + 16}" font-size="11" '
            f'text-anchor="middle">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{pad - 6}" y="{_fmt(sy(yv))}" font-size="11" '
            f'text-anchor="end">{yv:.4g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap_svg(
    values: np.ndarray,
    title: str = "",
    width: int = 520,
    height: int = 520,
) -> str:
    """Grayscale cell heatmap of a 2-d array."""
    vals = np.asarray(values, dtype=float)
    pad = 40
    rows, cols = vals.shape
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo if hi > lo else 1.0
    cw = (width - 2 * pad) / cols
    ch = (height - 2 * pad) / rows
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="{pad - 12}" font-size="14">{title} '
        f"[{lo:.4g}, {hi:.4g}]</text>",
    ]
    for i in range(rows):
        for j in range(cols):
            level = int(round(255 * (1.0 - (vals[i, j] - lo) / span)))
            parts.append(
                f'<rect x="{_fmt(pad + j * cw)}" y="{_fmt(pad + i * ch)}" '
                f'width="{_fmt(cw + 0.5)}" height="{_fmt(ch + 0.5)}" '
                f'fill="rgb({level},{level},{level})"/>'
            )
    parts += _axes(width, height, pad)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
