"""Variance-of-Laplacian sharpness and the blurry-target check."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .imaging import GRAY8, BBox, Frame, crop_roi, to_gray

# Midpoint between the sharpest blurred ROI and the blurriest sharp ROI on
# the synthetic calibration set (scripts/calibrate_blur.py), normalized mode.
DEFAULT_BLUR_THRESH = 11.87


@dataclass(frozen=True)
class BlurConfig:
    blur_thresh: float = DEFAULT_BLUR_THRESH
    normalize: bool = True

    def __post_init__(self):
        if not self.blur_thresh > 0:
            raise ValueError("blur_thresh must be positive")


def laplacian_mask() -> np.ndarray:
    return np.array([[0.0, -1.0, 0.0],
                     [-1.0, 4.0, -1.0],
                     [0.0, -1.0, 0.0]]) / 6.0


def lap_var(image: Frame, normalize: bool = True) -> float:
    """Sum of squared deviations of |Laplacian| from its mean.

    With ``normalize`` the sum is divided by the pixel count, which makes the
    statistic comparable across ROI sizes.
    """
    if image.channels != GRAY8:
        image = to_gray(image)
    return kernels.lap_var(image.data, normalize)


def is_image_blurry(frame: Frame, bbox: BBox, cfg: BlurConfig = BlurConfig()) -> bool:
    """True when the neighbourhood of ``bbox`` is less sharp than the threshold."""
    roi = to_gray(crop_roi(frame, bbox))
    return lap_var(roi, cfg.normalize) < cfg.blur_thresh
