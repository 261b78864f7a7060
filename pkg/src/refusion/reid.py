"""Template store and re-identification by NCC plus color histogram intersection."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import EmptyStore, EmptyTemplateHistogram, TemplateLargerThanRegion
from .imaging import RGB8, BBox, Frame, resize_bilinear, to_gray

DEFAULT_EPSILON = 1.2


def default_template_count(fps: float = 30.0) -> int:
    """One second of frames, clamped to [5, 60]."""
    return int(min(max(round(fps), 5), 60))


@dataclass(frozen=True)
class ReidConfig:
    epsilon: float = DEFAULT_EPSILON
    k: int = 30
    n_bins: int = 8
    patch_size: int = 64

    def __post_init__(self):
        if not -1.0 < self.epsilon <= 2.0:
            raise ValueError("epsilon must lie in (-1, 2]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 2 <= self.n_bins <= 16:
            raise ValueError("n_bins must lie in [2, 16]")
        if self.patch_size < 1:
            raise ValueError("patch_size must be >= 1")


def _as_rgb(frame: Frame) -> np.ndarray:
    if frame.channels == RGB8:
        return frame.data
    return np.repeat(frame.data[:, :, None], 3, axis=2)


def build_histogram(patch: Frame, n_bins_per_channel: int = 8) -> np.ndarray:
    """Joint RGB histogram with ``n**3`` bins of raw pixel counts."""
    if not 2 <= n_bins_per_channel <= 16:
        raise ValueError("n_bins_per_channel must lie in [2, 16]")
    return kernels.joint_histogram(_as_rgb(patch), n_bins_per_channel)


def histogram_intersection(i: np.ndarray, m: np.ndarray) -> float:
    """Normalized intersection: sum(min(i, m)) / sum(m)."""
    i = np.asarray(i, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if i.shape != m.shape:
        raise ValueError(f"bin count mismatch: {i.shape} vs {m.shape}")
    total = m.sum()
    if total <= 0:
        raise EmptyTemplateHistogram("template histogram is empty")
    return float(np.minimum(i, m).sum() / total)


def ncc(frame_region: Frame, template: Frame) -> float:
    """Best correlation coefficient of ``template`` over all offsets in the region."""
    region = to_gray(frame_region).data
    tmpl = to_gray(template).data
    if tmpl.shape[0] > region.shape[0] or tmpl.shape[1] > region.shape[1]:
        raise TemplateLargerThanRegion(
            f"template {tmpl.shape} does not fit in region {region.shape}")
    return float(kernels.ncc_map(region, tmpl).max())


@dataclass(frozen=True)
class Template:
    patch: Frame
    gray_patch: Frame
    histogram: np.ndarray

    @classmethod
    def from_crop(cls, crop: Frame, patch_size: int, n_bins: int) -> "Template":
        patch = resize_bilinear(crop, patch_size, patch_size)
        return cls(patch, to_gray(patch), build_histogram(patch, n_bins))


class TemplateStore:
    """The first ``k`` target crops; frozen once full."""

    def __init__(self, k: int = 30, patch_size: int = 64, n_bins: int = 8):
        self.k = k
        self.patch_size = patch_size
        self.n_bins = n_bins
        self._templates: list[Template] = []

    @classmethod
    def from_config(cls, cfg: ReidConfig) -> "TemplateStore":
        return cls(cfg.k, cfg.patch_size, cfg.n_bins)

    @property
    def templates(self) -> tuple[Template, ...]:
        return tuple(self._templates)

    @property
    def frozen(self) -> bool:
        return len(self._templates) >= self.k

    def __len__(self) -> int:
        return len(self._templates)

    def add(self, crop: Frame) -> bool:
        """Store a crop; returns False (and stores nothing) once frozen."""
        if self.frozen:
            return False
        self._templates.append(Template.from_crop(crop, self.patch_size, self.n_bins))
        return True

    def prepare(self, candidate: Frame) -> Template:
        return Template.from_crop(candidate, self.patch_size, self.n_bins)


def _require(store: TemplateStore) -> None:
    if len(store) == 0:
        raise EmptyStore("template store is empty")


def ncc_score(candidate: Frame, store: TemplateStore) -> float:
    _require(store)
    return _ncc_score(store.prepare(candidate), store)


def _ncc_score(cand: Template, store: TemplateStore) -> float:
    return max(ncc(cand.gray_patch, t.gray_patch) for t in store.templates)


def _hist_score(cand: Template, store: TemplateStore) -> float:
    return max(histogram_intersection(cand.histogram, t.histogram) for t in store.templates)


def reid_score(candidate: Frame, store: TemplateStore) -> float:
    """Histogram intersection plus NCC, each maximized over the stored templates."""
    _require(store)
    cand = store.prepare(candidate)
    return _hist_score(cand, store) + _ncc_score(cand, store)


def reidentify(candidates: Sequence[tuple[BBox, Frame]], store: TemplateStore,
               cfg: ReidConfig = ReidConfig()) -> Optional[tuple[BBox, float]]:
    """Best-scoring candidate if its score beats ``cfg.epsilon``, else None."""
    _require(store)
    best = None
    for bbox, crop in candidates:
        score = reid_score(crop, store)
        if best is None or score > best[1]:
            best = (bbox, score)
    if best is not None and best[1] > cfg.epsilon:
        return best
    return None
