from .base import Detection, Detector, Tracker
from .blob import ColorBlobDetector
from .bridge import ExternalDetector, ExternalTracker, LineBridge
from .lstm import LstmParams, LstmState, lstm_cell_forward
from .oracle import OracleDetector, load_detections
from .reference import NccTemplateTracker

__all__ = [
    "ColorBlobDetector",
    "Detection",
    "Detector",
    "ExternalDetector",
    "ExternalTracker",
    "LineBridge",
    "LstmParams",
    "LstmState",
    "NccTemplateTracker",
    "OracleDetector",
    "Tracker",
    "load_detections",
    "lstm_cell_forward",
]
