"""People counting from overhead low-resolution thermal door sensors."""

from .background import BackgroundModel, BackgroundParams, init_background, subtract
from .classification import DoorEvent, Verdict, aggregate_doors, classify, run_pipeline
from .config import Config, load_config
from .detection import DetectionParams, extract_blobs, track_events
from .frames_io import AnnotationTrack, CountSeries, EntryDirection, Recording, cumulative_counts
from .metrics import MetricsReport, ccr_wcc, evaluate, mae, mae_pp

__version__ = "0.1.0"

__all__ = [
    "BackgroundModel",
    "BackgroundParams",
    "init_background",
    "subtract",
    "DoorEvent",
    "Verdict",
    "aggregate_doors",
    "classify",
    "run_pipeline",
    "Config",
    "load_config",
    "DetectionParams",
    "extract_blobs",
    "track_events",
    "AnnotationTrack",
    "CountSeries",
    "EntryDirection",
    "Recording",
    "cumulative_counts",
    "MetricsReport",
    "ccr_wcc",
    "evaluate",
    "mae",
    "mae_pp",
]
