"""One-pass evaluation: precision and success curves plus comparison tables."""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import LengthMismatch
from .imaging import BBox
from .ioutil import atomic_write_text

PRECISION = "PRECISION"
SUCCESS = "SUCCESS"

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 51)
PRECISION_AT = 20.0
SUCCESS_AT = 0.5


@dataclass(frozen=True)
class EvalCurve:
    kind: str
    thresholds: np.ndarray
    values: np.ndarray
    representative: float
    auc: float = float("nan")
    n_frames: int = 0

    def to_csv(self) -> str:
        lines = ["threshold,value"]
        lines += [f"{t:.6g},{v:.12g}" for t, v in zip(self.thresholds, self.values)]
        return "\n".join(lines) + "\n"


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # rounding in the edge differences can push identical boxes just past 1
    return min(inter / (a.w * a.h + b.w * b.h - inter), 1.0)


def center_error(a: BBox, b: BBox) -> float:
    ax, ay = a.center()
    bx, by = b.center()
    return math.hypot(ax - bx, ay - by)


def _pairs(results, truth):
    if len(results) != len(truth):
        raise LengthMismatch(f"{len(results)} results vs {len(truth)} ground-truth rows")
    # frames with absent ground truth are excluded
    return [(r, t) for r, t in zip(results, truth) if t is not None]


def _value_at(thresholds, values, at):
    k = int(np.argmin(np.abs(thresholds - at)))
    return float(values[k])


def precision_curve(results: Sequence[BBox], truth: Sequence[Optional[BBox]],
                    thresholds=PRECISION_THRESHOLDS) -> EvalCurve:
    """Fraction of frames whose center error is within each pixel threshold."""
    thresholds = np.asarray(thresholds, dtype=np.float64)
    pairs = _pairs(results, truth)
    errs = np.array([center_error(r, t) for r, t in pairs])
    if len(pairs):
        values = (errs[None, :] <= thresholds[:, None]).mean(axis=1)
    else:
        values = np.zeros_like(thresholds)
    return EvalCurve(PRECISION, thresholds, values,
                     _value_at(thresholds, values, PRECISION_AT), n_frames=len(pairs))


def success_curve(results: Sequence[BBox], truth: Sequence[Optional[BBox]],
                  thresholds=SUCCESS_THRESHOLDS) -> EvalCurve:
    """Fraction of frames whose IoU is strictly larger than each threshold."""
    thresholds = np.asarray(thresholds, dtype=np.float64)
    pairs = _pairs(results, truth)
    ious = np.array([iou(r, t) for r, t in pairs])
    if len(pairs):
        values = (ious[None, :] > thresholds[:, None]).mean(axis=1)
    else:
        values = np.zeros_like(thresholds)
    auc = float(np.trapezoid(values, thresholds)) if len(thresholds) > 1 else float("nan")
    return EvalCurve(SUCCESS, thresholds, values,
                     _value_at(thresholds, values, SUCCESS_AT), auc=auc, n_frames=len(pairs))


@dataclass(frozen=True)
class TableRow:
    name: str
    success: float
    precision: float
    fps: float
    auc: float


def compare_table(entries, truth) -> list[TableRow]:
    """``entries`` holds ``(name, results)`` or ``(name, results, fps)`` tuples."""
    if not entries:
        raise ValueError("no entries to compare")
    rows = []
    for entry in entries:
        name, results = entry[0], entry[1]
        fps = float(entry[2]) if len(entry) > 2 and entry[2] is not None else float("nan")
        s = success_curve(results, truth)
        p = precision_curve(results, truth)
        rows.append(TableRow(name, s.representative, p.representative, fps, s.auc))
    return rows


TABLE_HEADER = ("name", "success@0.5", "precision@20px", "fps", "success_auc")


def table_csv(rows: Sequence[TableRow]) -> str:
    lines = [",".join(TABLE_HEADER)]
    for r in rows:
        lines.append(f"{r.name},{r.success:.6f},{r.precision:.6f},{r.fps:.2f},{r.auc:.6f}")
    return "\n".join(lines) + "\n"


def table_text(rows: Sequence[TableRow]) -> str:
    cells = [TABLE_HEADER] + [
        (r.name, f"{r.success:.4f}", f"{r.precision:.4f}", f"{r.fps:.1f}", f"{r.auc:.4f}")
        for r in rows
    ]
    widths = [max(len(c[i]) for c in cells) for i in range(len(TABLE_HEADER))]
    out = []
    for k, c in enumerate(cells):
        out.append("  ".join(v.ljust(w) if i == 0 else v.rjust(w)
                             for i, (v, w) in enumerate(zip(c, widths))))
        if k == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def read_groundtruth(path) -> list[Optional[BBox]]:
    """``x,y,w,h`` per line; ``nan`` rows (or degenerate boxes) mark absence."""
    boxes = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        vals = [float(v) for v in line.replace("\t", ",").replace(" ", ",").split(",") if v]
        if len(vals) != 4:
            raise ValueError(f"bad ground-truth line {line!r}")
        if any(math.isnan(v) for v in vals) or vals[2] <= 0 or vals[3] <= 0:
            boxes.append(None)
        else:
            boxes.append(BBox(*vals))
    return boxes


def write_groundtruth(path, boxes: Sequence[Optional[BBox]]) -> None:
    lines = []
    for b in boxes:
        lines.append("nan,nan,nan,nan" if b is None else ",".join(f"{v:.10g}" for v in b.as_tuple()))
    atomic_write_text(path, "\n".join(lines) + "\n")
