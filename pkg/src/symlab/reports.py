"""Machine-readable run reports: canonical JSON, CSV tables and small SVG plots.

JSON is UTF-8 with two-space indent and sorted keys. Floats are rounded to
ten significant digits so that reports are byte-identical across repeated
runs on one platform; non-finite floats become the strings "nan", "inf"
and "-inf".
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

import numpy as np
import scipy

SCHEMA_VERSION = 1
DIGITS = 10


def _float(x: float) -> float | str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = float(f"{x:.{DIGITS}g}")
    # rounding up near the float maximum would overflow
    return r if math.isfinite(r) else math.copysign(1.797693134e308, x)


def canonical(obj: Any) -> Any:
    """Plain JSON types with rounded floats; complex numbers become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, Path):
        return obj.as_posix()
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(canonical(obj), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def fmt(x) -> str:
    """Locale-free CSV cell."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = _float(float(x))
        return v if isinstance(v, str) else f"{v:.{DIGITS}g}"
    return str(x)


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match header")
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    Path(path).write_text(csv_text(header, rows), encoding="utf-8")


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# SVG line plots, built from CSV only


def _ticks(lo: float, hi: float) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def svg_from_csv(csv_path: Path, svg_path: Path, x: str, ys: Sequence[str], logx: bool = False,
                 logy: bool = False, title: str = "", fit: tuple[float, float] | None = None) -> None:
    """Line plot of columns ``ys`` against ``x``.

    ``fit = (p, g)`` overlays the power law g x^p (dashed). Non-positive
    values are dropped on log axes.
    """
    header, rows = read_csv(csv_path)
    cols = {h: i for i, h in enumerate(header)}
    for c in (x, *ys):
        if c not in cols:
            raise KeyError(f"column {c!r} not in {csv_path}")

    def tr(v: float, log: bool) -> float | None:
        if not math.isfinite(v) or (log and v <= 0):
            return None
        return math.log10(v) if log else v

    series = []
    for name in ys:
        pts = []
        for r in rows:
            px, py = tr(float(r[cols[x]]), logx), tr(float(r[cols[name]]), logy)
            if px is not None and py is not None:
                pts.append((px, py))
        series.append((name, pts))
    if fit is not None:
        p, g = fit
        xs = sorted(px for _, pts in series for px, _ in pts)
        fitpts = []
        for px in xs:
            xv = 10 ** px if logx else px
            yv = tr(g * xv ** p, logy) if xv > 0 else None
            if yv is not None:
                fitpts.append((px, yv))
        series.append((f"fit {g:.4g} x^{p:.4g}", fitpts))
    allpts = [q for _, pts in series for q in pts]
    if not allpts:
        allpts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(q[0] for q in allpts), max(q[0] for q in allpts)
    y0, y1 = min(q[1] for q in allpts), max(q[1] for q in allpts)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    W, H, m = 640, 420, 60

    def sx(v):
        return m + (v - x0) / (x1 - x0) * (W - 2 * m)

    def sy(v):
        return H - m - (v - y0) / (y1 - y0) * (H - 2 * m)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
           f'<rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        lab = f"1e{t:g}" if logx else f"{t:g}"
        out.append(f'<text x="{sx(t):.1f}" y="{H - m + 16}" text-anchor="middle" font-size="11">{lab}</text>')
    for t in _ticks(y0, y1):
        lab = f"1e{t:g}" if logy else f"{t:g}"
        out.append(f'<text x="{m - 6}" y="{sy(t) + 4:.1f}" text-anchor="end" font-size="11">{lab}</text>')
    out.append(f'<text x="{W / 2:.1f}" y="{H - 14}" text-anchor="middle" font-size="12">{x}</text>')
    for k, (name, pts) in enumerate(series):
        col = colors[k % len(colors)]
        dash = ' stroke-dasharray="6 4"' if fit is not None and k == len(series) - 1 else ""
        if pts:
            path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="1.5"{dash}/>')
            for a, b in pts:
                out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2.5" fill="{col}"/>')
        out.append(f'<text x="{W - m - 4}" y="{m + 16 + 15 * k}" text-anchor="end" font-size="12" '
                   f'fill="{col}">{name}</text>')
    out.append("</svg>")
    Path(svg_path).write_text("\n".join(out) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# reports


def environment() -> dict:
    """Platform fingerprint. Deliberately free of hostnames and clocks."""
    from . import __version__

    return {
        "python": platform.python_version(),
        "implementation": platform.python_implementation(),
        "machine": platform.machine(),
        "system": platform.system(),
        "byteorder": sys.byteorder,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "symlab": __version__,
    }


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "environment": environment(),
            "results": self.results,
            "evidence": self.evidence,
            "checks": [{"name": c.name, "pass": c.passed, "detail": c.detail} for c in self.checks],
            "pass": self.passed,
            "files": sorted(self.files),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


# ---------------------------------------------------------------------------
# bounded worker pools


@contextmanager
def worker_map(workers: int) -> Iterator[Callable]:
    """``map`` for one worker, otherwise a process pool's ordered ``map``."""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield pool.map
