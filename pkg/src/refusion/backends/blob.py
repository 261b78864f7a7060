"""Classical color-range detector: connected components of in-range pixels."""

from typing import Optional

import numpy as np
from scipy import ndimage

from ..imaging import RGB8, BBox, Frame, box_window
from .base import Detection, Detector

_EIGHT = np.ones((3, 3), dtype=bool)


class ColorBlobDetector(Detector):
    def __init__(self, lo=(80, 0, 0), hi=(255, 60, 60), class_id: int = 0,
                 min_area: int = 4):
        self.lo = np.asarray(lo, dtype=np.uint8)
        self.hi = np.asarray(hi, dtype=np.uint8)
        self.class_id = int(class_id)
        self.min_area = int(min_area)

    def detect(self, frame: Frame, roi: Optional[BBox] = None,
               class_id: Optional[int] = None) -> list[Detection]:
        if class_id is not None and class_id != self.class_id:
            return []
        data = frame.data
        if frame.channels != RGB8:
            data = np.repeat(data[:, :, None], 3, axis=2)
        ox = oy = 0
        if roi is not None:
            ox, oy, x1, y1 = box_window(frame, roi)
            data = data[oy:y1, ox:x1]
        mask = np.all((data >= self.lo) & (data <= self.hi), axis=2)
        labels, count = ndimage.label(mask, structure=_EIGHT)
        if count == 0:
            return []
        areas = np.bincount(labels.ravel())[1:]
        frame_area = float(frame.width * frame.height)
        found = []
        for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
            area = int(areas[lab - 1])
            if sl is None or area < self.min_area:
                continue
            ys, xs = sl
            box = BBox(float(xs.start + ox), float(ys.start + oy),
                       float(xs.stop - xs.start), float(ys.stop - ys.start))
            conf = min(max(area / frame_area, 0.0), 1.0)
            found.append((area, Detection(box, self.class_id, conf)))
        found.sort(key=lambda t: (-t[0], t[1].bbox.y, t[1].bbox.x))
        return [d for _, d in found]
