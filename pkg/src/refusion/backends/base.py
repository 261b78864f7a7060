"""Backend contracts shared by trackers and detectors."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from ..imaging import BBox, Frame


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    class_id: int = 0
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


class Tracker(ABC):
    """Motion tracker: ``init`` fully resets state, ``track`` returns the new box."""

    @abstractmethod
    def init(self, frame: Frame, bbox: BBox) -> None: ...

    @abstractmethod
    def track(self, frame: Frame) -> BBox: ...


class Detector(ABC):
    @abstractmethod
    def detect(self, frame: Frame, roi: Optional[BBox] = None,
               class_id: Optional[int] = None) -> list[Detection]: ...


def roi_contains(roi: Optional[BBox], bbox: BBox) -> bool:
    if roi is None:
        return True
    cx, cy = bbox.center()
    return roi.x <= cx <= roi.x + roi.w and roi.y <= cy <= roi.y + roi.h
