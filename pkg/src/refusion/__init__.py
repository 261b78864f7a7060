"""Single-target tracking that fuses a motion tracker with an object detector,
with blur-triggered re-detection and template re-identification."""

from .imaging import BBox, Frame

__version__ = "0.1.0"

__all__ = ["BBox", "Frame", "__version__"]
