"""Dump PR curves to CSV, one file per class plus the combined-class curve."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

from .metrics import EvalReport, PRPoint

HEADER = "recall,precision,confidence"


def _slug(label: str) -> str:
    s = re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")
    return s or "class"


def _write_curve(path: Path, points: Sequence[PRPoint]) -> None:
    lines = [HEADER]
    lines += [f"{p.recall!r},{p.precision!r},{p.confidence!r}" for p in points]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_pr_plot_data(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write per-class and combined PR curves; returns the paths written.

    Full-precision floats (repr) so a re-integration of an exported curve
    reproduces the report's AP bit for bit.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    seen: dict[str, int] = {}
    for cls in report.per_class:
        name = _slug(cls.label)
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            name = f"{name}-{seen[name]}"
        path = out / f"{name}.csv"
        _write_curve(path, cls.pr_points)
        written.append(path)
    combined = out / "combined.csv"
    _write_curve(combined, report.combined_pr_points)
    written.append(combined)
    return written


def read_pr_csv(path: str | Path) -> list[PRPoint]:
    points = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != HEADER:
        raise ValueError(f"{path}: missing {HEADER!r} header")
    for line in lines[1:]:
        if not line:
            continue
        r, p, c = line.split(",")
        points.append(PRPoint(float(r), float(p), float(c)))
    return points
