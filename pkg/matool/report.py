"""Branch tables, branch diagrams and JSON run reports."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from matool.branch import Branch
from matool.bvp import INF, threshold
from matool.errors import BranchError

BRANCH_COLUMNS = ("s", "lambda", "sup_norm", "morse_index", "principal_eig", "stable")

SVG_WIDTH = 800
SVG_HEIGHT = 600
SVG_MARGIN = 60


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.12g}"


def branch_rows(branch: Branch) -> list[list[str]]:
    if not branch.points:
        raise BranchError("Refusing to emit an empty branch")
    return [
        [_fmt(p.s), _fmt(p.lam), _fmt(p.sup_norm), _fmt(p.morse_index),
         _fmt(p.principal_eig), _fmt(p.stable)]
        for p in branch.points
    ]


def emit_branch_csv(branch: Branch, path: Path) -> Path:
    """Write the branch table; same branch, same bytes."""
    rows = branch_rows(branch)
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(BRANCH_COLUMNS)
        writer.writerows(rows)
    return path


def emit_branch_json(branch: Branch, path: Path) -> Path:
    rows = branch_rows(branch)
    records = [dict(zip(BRANCH_COLUMNS, row, strict=True)) for row in rows]
    path = Path(path)
    path.write_text(json.dumps(records, indent=2) + "\n")
    return path


def emit_branch_svg(branch: Branch, path: Path, lambda1: float | None = None) -> Path:
    """Diagram with lambda horizontal and log10(s) vertical.

    Turning points are circled and, when lambda1 is given, finite bifurcation
    loads lambda1 f0^(-1/N) and lambda1 finf^(-1/N) are drawn as dashed guides.
    """
    if not branch.points:
        raise BranchError("Refusing to draw an empty branch")
    lams = branch.lambdas
    if not np.all(branch.amplitudes > 0):
        raise BranchError("Refusing to draw amplitudes s <= 0 on a log axis")
    log_s = np.log10(branch.amplitudes)

    guides = []
    if lambda1 is not None:
        for name, limit in (("f0", branch.spec.f0), ("finf", branch.spec.finf)):
            value = threshold(lambda1, limit, branch.spec.N)
            if 0 < value < INF:
                guides.append((name, value))

    x_hi = max([float(lams.max())] + [g for _, g in guides]) * 1.1
    x_lo = 0.0
    y_lo, y_hi = float(log_s.min()), float(log_s.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    plot_w = SVG_WIDTH - 2 * SVG_MARGIN
    plot_h = SVG_HEIGHT - 2 * SVG_MARGIN

    def x(lam: float) -> float:
        return SVG_MARGIN + (lam - x_lo) / (x_hi - x_lo) * plot_w

    def y(ls: float) -> float:
        return SVG_HEIGHT - SVG_MARGIN - (ls - y_lo) / (y_hi - y_lo) * plot_h

    points = " ".join(f"{x(a):.2f},{y(b):.2f}" for a, b in zip(lams, log_s, strict=True))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{SVG_MARGIN}" y1="{SVG_HEIGHT - SVG_MARGIN}" x2="{SVG_WIDTH - SVG_MARGIN}" '
        f'y2="{SVG_HEIGHT - SVG_MARGIN}" stroke="black"/>',
        f'<line x1="{SVG_MARGIN}" y1="{SVG_MARGIN}" x2="{SVG_MARGIN}" '
        f'y2="{SVG_HEIGHT - SVG_MARGIN}" stroke="black"/>',
        f'<text x="{SVG_WIDTH / 2}" y="{SVG_HEIGHT - 15}" text-anchor="middle">lambda '
        f'(0 to {x_hi:.4g})</text>',
        f'<text x="15" y="{SVG_HEIGHT / 2}" transform="rotate(-90 15 {SVG_HEIGHT / 2})" '
        f'text-anchor="middle">log10 s ({y_lo:.3g} to {y_hi:.3g})</text>',
        f'<text x="{SVG_WIDTH / 2}" y="30" text-anchor="middle">{branch.spec.label()}, '
        f'N={branch.spec.N}, case {branch.case_id}</text>',
    ]
    for name, value in guides:
        parts.append(
            f'<line class="asymptote {name}" x1="{x(value):.2f}" y1="{SVG_MARGIN}" '
            f'x2="{x(value):.2f}" y2="{SVG_HEIGHT - SVG_MARGIN}" stroke="gray" '
            f'stroke-dasharray="6,4"/>'
        )
    parts.append(f'<polyline points="{points}" fill="none" stroke="steelblue" stroke-width="2"/>')
    for tp in branch.turning_points:
        parts.append(
            f'<circle class="turning-point {tp.kind}" cx="{x(tp.lam):.2f}" '
            f'cy="{y(math.log10(tp.s)):.2f}" r="6" fill="none" stroke="crimson" stroke-width="2"/>'
        )
    parts.append("</svg>")

    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


# =============================================================================
# Run reports
# =============================================================================


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings inf, -inf and nan."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return jsonable(value.item())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, bool | int | float | str) or value is None:
        return value
    return str(value)


@dataclass
class RunReport:
    """What one subcommand computed, with the configuration that produced it."""

    command: str
    config: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    passed: bool | None = None
    failures: list[str] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(jsonable(dataclasses.asdict(self)), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.command}.report.json"
        path.write_text(self.to_json())
        return path
