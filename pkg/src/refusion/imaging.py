"""Frames, boxes and the small raster toolkit the tracker is built on."""

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from PIL import Image

from . import kernels
from .errors import InvalidBBox

GRAY8 = "GRAY8"
RGB8 = "RGB8"

FRAME_SUFFIXES = (".png", ".ppm", ".pgm")
_NUMBERED = re.compile(r"^(\d+)$")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in top-left form."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBBox(f"non-finite box {vals}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidBBox(f"box must have positive size, got w={self.w}, h={self.h}")

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "BBox":
        return cls(cx - w / 2.0, cy - h / 2.0, w, h)

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)

    @property
    def area(self) -> float:
        return self.w * self.h

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x + dx, self.y + dy, self.w, self.h)

    def intersects_frame(self, width: int, height: int) -> bool:
        return self.x < width and self.y < height and self.x + self.w > 0 and self.y + self.h > 0

    def clamp(self, width: int, height: int) -> Optional["BBox"]:
        """Clip to ``[0, width] x [0, height]``; None when nothing is left."""
        x0 = min(max(self.x, 0.0), width)
        y0 = min(max(self.y, 0.0), height)
        x1 = min(max(self.x + self.w, 0.0), width)
        y1 = min(max(self.y + self.h, 0.0), height)
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            return None
        return BBox(x0, y0, x1 - x0, y1 - y0)

    @classmethod
    def parse(cls, text: str) -> "BBox":
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        if len(parts) != 4:
            raise InvalidBBox(f"expected x,y,w,h, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as exc:
            raise InvalidBBox(f"bad box {text!r}") from exc


@dataclass(frozen=True, eq=False)
class Frame:
    """Immutable 8-bit raster. ``data`` is (H, W) for gray, (H, W, 3) for RGB."""

    data: np.ndarray
    index: int = 1
    path: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise ValueError(f"frame data must be uint8, got {data.dtype}")
        if data.ndim == 3 and data.shape[2] == 1:
            data = data[:, :, 0]
        if not (data.ndim == 2 or (data.ndim == 3 and data.shape[2] == 3)):
            raise ValueError(f"unsupported frame shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("frame must be at least 1x1")
        if data.flags.writeable:
            data = data.copy()
            data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> str:
        return GRAY8 if self.data.ndim == 2 else RGB8

    def with_data(self, data: np.ndarray) -> "Frame":
        return Frame(data, index=self.index, path=self.path)


def to_gray(frame: Frame) -> Frame:
    if frame.channels == GRAY8:
        return frame
    rgb = frame.data.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    gray = np.floor(luma + 0.5)
    return Frame(np.clip(gray, 0, 255).astype(np.uint8), index=frame.index, path=frame.path)


def gray_array(frame: Frame) -> np.ndarray:
    return to_gray(frame).data


def _span(center: float, half: float, limit: int) -> tuple[int, int]:
    size = max(1, int(math.floor(2.0 * half)))
    lo = int(math.floor(center - half + 0.5))
    hi = lo + size
    lo = min(max(lo, 0), limit - 1)
    hi = min(max(hi, lo + 1), limit)
    return lo, hi


def roi_window(frame: Frame, bbox: BBox) -> tuple[int, int, int, int]:
    """Pixel bounds ``(x0, y0, x1, y1)`` of the 2W x 2H region about the box center."""
    cx, cy = bbox.center()
    x0, x1 = _span(cx, bbox.w, frame.width)
    y0, y1 = _span(cy, bbox.h, frame.height)
    return x0, y0, x1, y1


def crop_roi(frame: Frame, bbox: BBox) -> Frame:
    """Crop a region twice the box size, centered on the box, clamped to the frame."""
    if not (bbox.w > 0 and bbox.h > 0):
        raise InvalidBBox("box must have positive size")
    x0, y0, x1, y1 = roi_window(frame, bbox)
    return frame.with_data(frame.data[y0:y1, x0:x1])


def box_window(frame: Frame, bbox: BBox) -> tuple[int, int, int, int]:
    """Integer pixel bounds of the box itself, clamped and never empty."""
    x0 = int(math.floor(bbox.x + 0.5))
    y0 = int(math.floor(bbox.y + 0.5))
    x1 = x0 + max(1, int(math.floor(bbox.w + 0.5)))
    y1 = y0 + max(1, int(math.floor(bbox.h + 0.5)))
    x0 = min(max(x0, 0), frame.width - 1)
    y0 = min(max(y0, 0), frame.height - 1)
    x1 = min(max(x1, x0 + 1), frame.width)
    y1 = min(max(y1, y0 + 1), frame.height)
    return x0, y0, x1, y1


def crop_window(frame: Frame, x0: int, y0: int, x1: int, y1: int) -> Frame:
    return frame.with_data(frame.data[y0:y1, x0:x1])


def crop_box(frame: Frame, bbox: BBox) -> Frame:
    x0, y0, x1, y1 = box_window(frame, bbox)
    return frame.with_data(frame.data[y0:y1, x0:x1])


def convolve3x3(frame: Frame, kernel) -> np.ndarray:
    if frame.channels != GRAY8:
        raise ValueError("convolve3x3 expects a GRAY8 frame")
    return kernels.conv3x3(frame.data, np.asarray(kernel, dtype=np.float64))


def resize_bilinear(frame: Frame, out_w: int, out_h: int) -> Frame:
    """Bilinear resample with pixel-center alignment; output rounded to uint8."""
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be at least 1x1")
    h, w = frame.height, frame.width
    if (w, h) == (out_w, out_h):
        return frame
    src = frame.data.astype(np.float64)
    sy = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1)
    sx = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = sy - y0
    fx = sx - x0
    if src.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    return frame.with_data(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# file IO
# ---------------------------------------------------------------------------


def read_frame(path, index: int = 1) -> Frame:
    with Image.open(path) as im:
        if im.mode in ("L", "I", "I;16", "1"):
            arr = np.asarray(im.convert("L"))
        else:
            arr = np.asarray(im.convert("RGB"))
    return Frame(arr, index=index, path=str(path))


def write_frame(frame: Frame, path) -> None:
    """Write PNG, PPM (P6) or PGM (P5) depending on the suffix."""
    path = Path(path)
    data = frame.data
    if path.suffix.lower() == ".pgm" and data.ndim == 3:
        data = to_gray(frame).data
    mode = "L" if data.ndim == 2 else "RGB"
    tmp = path.with_name(path.name + ".tmp")
    fmt = {".png": "PNG", ".ppm": "PPM", ".pgm": "PPM"}[path.suffix.lower()]
    Image.fromarray(np.ascontiguousarray(data), mode=mode).save(tmp, format=fmt)
    os.replace(tmp, path)


def list_frame_files(seq_dir) -> list[Path]:
    seq_dir = Path(seq_dir)
    found = []
    for p in seq_dir.iterdir():
        if p.suffix.lower() in FRAME_SUFFIXES and _NUMBERED.match(p.stem):
            found.append((int(p.stem), p))
    found.sort()
    return [p for _, p in found]


def iter_sequence(seq_dir) -> Iterator[Frame]:
    """Yield frames of a numbered-file sequence directory, indexed from 1."""
    for i, p in enumerate(list_frame_files(seq_dir), start=1):
        yield read_frame(p, index=i)
