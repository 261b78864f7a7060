"""Detector that replays a detections CSV with seeded dropout and jitter."""

import csv
from collections import defaultdict
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import MissingDetectionsFile
from ..imaging import BBox, Frame
from .base import Detection, Detector, roi_contains


def load_detections(path) -> dict[int, list[Detection]]:
    """Parse ``frame_index,class_id,confidence,x,y,w,h`` rows."""
    path = Path(path)
    if not path.is_file():
        raise MissingDetectionsFile(f"detections file not found: {path}")
    rows = defaultdict(list)
    with path.open(newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                idx = int(rec[0])
            except ValueError:
                continue  # header
            cls, conf = int(rec[1]), float(rec[2])
            x, y, w, h = (float(v) for v in rec[3:7])
            rows[idx].append(Detection(BBox(x, y, w, h), cls, conf))
    return dict(rows)


class OracleDetector(Detector):
    """Ground-truth detections, each dropped with ``p_drop`` and jittered by up
    to ``jitter_px`` in center and size. Randomness is keyed on (seed, frame
    index) so repeated runs and repeated calls agree."""

    def __init__(self, detections, p_drop: float = 0.0, jitter_px: float = 0.0,
                 seed: int = 0):
        if not isinstance(detections, dict):
            detections = load_detections(detections)
        self._rows = detections
        self.p_drop = float(p_drop)
        self.jitter_px = float(jitter_px)
        self.seed = int(seed)

    def detect(self, frame: Frame, roi: Optional[BBox] = None,
               class_id: Optional[int] = None) -> list[Detection]:
        rows = self._rows.get(frame.index, [])
        rng = np.random.default_rng([self.seed, frame.index])
        out = []
        for det in rows:
            # draw for every row so filtering does not shift the stream
            drop = rng.random() < self.p_drop
            dcx, dcy, dw, dh = rng.uniform(-1.0, 1.0, 4) * self.jitter_px
            if drop or (class_id is not None and det.class_id != class_id):
                continue
            b = det.bbox
            if self.jitter_px > 0:
                cx, cy = b.center()
                w = max(b.w + dw, 1.0)
                h = max(b.h + dh, 1.0)
                b = BBox.from_center(cx + dcx, cy + dcy, w, h)
            b = b.clamp(frame.width, frame.height)
            if b is None or not roi_contains(roi, b):
                continue
            out.append(Detection(b, det.class_id, det.confidence))
        return out
