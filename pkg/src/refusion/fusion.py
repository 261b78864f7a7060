"""Per-frame state machine fusing a motion tracker with an object detector.

Familiar targets (the detector recognised them at init) get the detector
every ``detector_interval`` frames, or early when the target neighbourhood
is blurry; the tracker fills the frames in between. A failed detection
marks the track lost, after which every frame is scanned with the detector
and candidates are re-identified against the stored templates. Unfamiliar
targets only ever use the tracker.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .backends.base import Detection, Detector, Tracker
from .blur import BlurConfig, is_image_blurry
from .errors import BackendError, EmptySequence, InvalidBBox
from .evaluation import iou
from .imaging import BBox, Frame, crop_box, roi_window
from .ioutil import atomic_write_text
from .reid import ReidConfig, TemplateStore, reidentify

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    TRACKED = "TRACKED"
    DETECTED = "DETECTED"
    REIDENTIFIED = "REIDENTIFIED"
    LOST = "LOST"


@dataclass(frozen=True)
class FusionConfig:
    detector_interval: int = 10
    target_class: Optional[int] = None
    assoc_iou_min: float = 0.3
    blur: BlurConfig = field(default_factory=BlurConfig)
    reid: ReidConfig = field(default_factory=ReidConfig)

    def __post_init__(self):
        if self.detector_interval < 2:
            raise ValueError("detector_interval must be >= 2")
        if not 0.0 < self.assoc_iou_min < 1.0:
            raise ValueError("assoc_iou_min must lie in (0, 1)")


@dataclass
class FusionState:
    config: FusionConfig
    tracker: Tracker
    detector: Detector
    current_bbox: BBox
    template_store: TemplateStore
    known: bool
    target_class: Optional[int]
    frame_counter: int = 0
    lost_track: bool = False
    mode: Mode = Mode.TRACKED
    reid_score: Optional[float] = None


@dataclass(frozen=True)
class FrameResult:
    frame_index: int
    bbox: BBox
    mode: Mode


def region_box(frame: Frame, bbox: BBox) -> BBox:
    x0, y0, x1, y1 = roi_window(frame, bbox)
    return BBox(x0, y0, x1 - x0, y1 - y0)


def initialize(first_frame: Frame, user_bbox: BBox, cfg: FusionConfig,
               tracker: Tracker, detector: Detector) -> FusionState:
    """Init the tracker, probe the detector around the box, seed the templates.

    Backend errors propagate here; during ``step`` they degrade instead.
    """
    if not user_bbox.intersects_frame(first_frame.width, first_frame.height):
        raise InvalidBBox(f"initial box {user_bbox} lies outside the frame")
    tracker.init(first_frame, user_bbox)
    dets = detector.detect(first_frame, roi=region_box(first_frame, user_bbox),
                           class_id=cfg.target_class)
    best = _associate(dets, user_bbox, cfg.assoc_iou_min, cfg.target_class)
    known = best is not None
    target_class = cfg.target_class
    if known and target_class is None:
        target_class = best.class_id
    store = TemplateStore.from_config(cfg.reid)
    store.add(crop_box(first_frame, user_bbox))
    logger.debug("init: known=%s target_class=%s", known, target_class)
    return FusionState(cfg, tracker, detector, user_bbox, store, known, target_class)


def _associate(dets: list[Detection], ref: BBox, iou_min: float,
               target_class: Optional[int]) -> Optional[Detection]:
    best, best_iou = None, -1.0
    for d in dets:
        if target_class is not None and d.class_id != target_class:
            continue
        v = iou(d.bbox, ref)
        if v > best_iou:
            best, best_iou = d, v
    if best is None or best_iou < iou_min:
        return None
    return best


def _track(state: FusionState, frame: Frame) -> BBox:
    try:
        return state.tracker.track(frame)
    except BackendError as exc:
        logger.warning("tracker failed on frame %d: %s", frame.index, exc)
        return state.current_bbox


def _detect(state: FusionState, frame: Frame) -> list[Detection]:
    try:
        return state.detector.detect(frame, None, state.target_class)
    except BackendError as exc:
        logger.warning("detector failed on frame %d: %s", frame.index, exc)
        return []


def _reinit(state: FusionState, frame: Frame, bbox: BBox) -> None:
    try:
        state.tracker.init(frame, bbox)
    except BackendError as exc:
        logger.warning("tracker re-init failed on frame %d: %s", frame.index, exc)


def step(state: FusionState, frame: Frame) -> tuple[FusionState, BBox, Mode]:
    cfg = state.config
    state.frame_counter += 1
    n = state.frame_counter
    prev = state.current_bbox
    state.reid_score = None

    if not state.known:
        box, mode = _track(state, frame), Mode.TRACKED
    elif state.lost_track:
        dets = _detect(state, frame)
        if dets:
            cands = [(d.bbox, crop_box(frame, d.bbox)) for d in dets]
            found = reidentify(cands, state.template_store, cfg.reid)
            if found is not None:
                box, state.reid_score = found
                _reinit(state, frame, box)
                state.lost_track = False
                mode = Mode.REIDENTIFIED
            else:
                box, mode = prev, Mode.LOST
        else:
            box, mode = _track(state, frame), Mode.LOST
    elif n % cfg.detector_interval == 0 or is_image_blurry(frame, prev, cfg.blur):
        hit = _associate(_detect(state, frame), prev, cfg.assoc_iou_min, state.target_class)
        if hit is not None:
            box, mode = hit.bbox, Mode.DETECTED
            _reinit(state, frame, box)
        else:
            state.lost_track = True
            box, mode = prev, Mode.LOST
    else:
        box, mode = _track(state, frame), Mode.TRACKED

    if (state.known and mode in (Mode.TRACKED, Mode.DETECTED)
            and n <= cfg.reid.k and not state.template_store.frozen):
        state.template_store.add(crop_box(frame, box))

    state.current_bbox = box
    state.mode = mode
    return state, box, mode


def iter_sequence_results(frames: Iterable[Frame], user_bbox: BBox, cfg: FusionConfig,
                          tracker: Tracker, detector: Detector) -> Iterator[FrameResult]:
    it = iter(frames)
    first = next(it, None)
    if first is None:
        raise EmptySequence("sequence has no frames")
    state = initialize(first, user_bbox, cfg, tracker, detector)
    for frame in _chain(first, it):
        _, box, mode = step(state, frame)
        yield FrameResult(frame.index, box, mode)


def _chain(first, rest):
    yield first
    yield from rest


def run_sequence(frames: Iterable[Frame], user_bbox: BBox, cfg: FusionConfig,
                 tracker: Tracker, detector: Detector) -> list[FrameResult]:
    """Initialize on the first frame, then step every frame (the first included)."""
    return list(iter_sequence_results(frames, user_bbox, cfg, tracker, detector))


def results_csv(rows: Iterable[FrameResult]) -> str:
    return "".join(
        f"{r.frame_index},{r.bbox.x:.6f},{r.bbox.y:.6f},{r.bbox.w:.6f},{r.bbox.h:.6f},{r.mode.value}\n"
        for r in rows)


def write_results(path, rows: Iterable[FrameResult]) -> None:
    atomic_write_text(path, results_csv(rows))


def read_results(path) -> list[FrameResult]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"bad result line {line!r}")
        box = BBox(*(float(v) for v in parts[1:5]))
        rows.append(FrameResult(int(parts[0]), box, Mode(parts[5].strip())))
    return rows
