"""Deterministic NCC template tracker used in place of a learned tracker."""

import math

import numpy as np

from .. import kernels
from ..errors import NotInitialized
from ..imaging import BBox, Frame, box_window, crop_window, gray_array
from .base import Tracker

DEFAULT_SEARCH_RADIUS = 16


class NccTemplateTracker(Tracker):
    """Matches the init-time gray patch within a disk of ``search_radius`` px.

    The template is never updated between inits, so a target that jumps
    further than the radius (or hides under an occluder and reappears
    elsewhere) is not followed.
    """

    def __init__(self, search_radius: int = DEFAULT_SEARCH_RADIUS):
        self.search_radius = int(search_radius)
        self._template = None
        self._box = None
        r = self.search_radius
        yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
        self._outside_disk = (xx * xx + yy * yy) > r * r

    @property
    def box(self):
        return self._box

    def init(self, frame: Frame, bbox: BBox) -> None:
        x0, y0, x1, y1 = box_window(frame, bbox)
        self._template = np.ascontiguousarray(gray_array(frame)[y0:y1, x0:x1])
        self._box = bbox

    def track(self, frame: Frame) -> BBox:
        if self._template is None:
            raise NotInitialized("track() called before init()")
        fh, fw = frame.height, frame.width
        th, tw = self._template.shape
        if th > fh or tw > fw:
            return self._box
        r = self.search_radius
        # template anchor for the previous box, kept fully inside the frame
        ax = min(max(int(math.floor(self._box.x + 0.5)), 0), fw - tw)
        ay = min(max(int(math.floor(self._box.y + 0.5)), 0), fh - th)
        rx0 = max(ax - r, 0)
        ry0 = max(ay - r, 0)
        rx1 = min(ax + r + tw, fw)
        ry1 = min(ay + r + th, fh)
        region = gray_array(crop_window(frame, rx0, ry0, rx1, ry1))
        scores = kernels.ncc_map(region, self._template)
        # mask offsets outside the search disk
        ox0, oy0 = rx0 - (ax - r), ry0 - (ay - r)
        mask = self._outside_disk[oy0:oy0 + scores.shape[0], ox0:ox0 + scores.shape[1]]
        scores = np.where(mask, -np.inf, scores)
        # prefer zero displacement on ties
        zy, zx = ay - ry0, ax - rx0
        best = scores.max()
        if scores[zy, zx] >= best:
            dy, dx = 0, 0
        else:
            iy, ix = np.unravel_index(int(np.argmax(scores)), scores.shape)
            dy, dx = ry0 + iy - ay, rx0 + ix - ax
        self._box = self._box.translate(float(dx), float(dy))
        return self._box
