"""ablatrack: time-resolved recession and shock-standoff tracking from
plasma wind tunnel test videos.
"""

from .analysis import Calibration, LinearFitResult, TimeSeriesBundle, build_time_series, compute_standoff, export_csv, linear_fit
from .colorseg import (
    HsvRange,
    PixelClass,
    PixelClassMask,
    SegmentationConfig,
    SegMethod,
    classify_auto_hsv,
    classify_gray,
    classify_hsv,
    hsv_to_rgb,
    largest_component,
    rgb_to_hsv,
)
from .edges import EdgeTrace, Roi, auto_roi, detect_flow_direction, extract_leading_edge, mark_sample_edge
from .frames import FlowDirection, Frame, FrameSource, GroundTruth, SynthVideoConfig, generate_synthetic_video, open_frame_source
from .outliers import FeatureVector, LofConfig, filter_frames, lof_scores
from .pipeline import EDGES_SCHEMA, META_SCHEMA, ProcessingMeta, analyze, auto_configure, process
from .timeseg import (
    BrightnessTrace,
    Conv1DNet,
    SyntheticSignalConfig,
    TimeSegClass,
    TrainConfig,
    compute_brightness_trace,
    generate_synthetic_signal,
    infer_interest_window,
    load_model,
    net_forward,
    save_model,
    train,
)
from .version import __version__

__all__ = [
    "__version__",
    "Calibration",
    "LinearFitResult",
    "TimeSeriesBundle",
    "build_time_series",
    "compute_standoff",
    "export_csv",
    "linear_fit",
    "HsvRange",
    "PixelClass",
    "PixelClassMask",
    "SegmentationConfig",
    "SegMethod",
    "classify_auto_hsv",
    "classify_gray",
    "classify_hsv",
    "hsv_to_rgb",
    "largest_component",
    "rgb_to_hsv",
    "EdgeTrace",
    "Roi",
    "auto_roi",
    "detect_flow_direction",
    "extract_leading_edge",
    "mark_sample_edge",
    "FlowDirection",
    "Frame",
    "FrameSource",
    "GroundTruth",
    "SynthVideoConfig",
    "generate_synthetic_video",
    "open_frame_source",
    "FeatureVector",
    "LofConfig",
    "filter_frames",
    "lof_scores",
    "EDGES_SCHEMA",
    "META_SCHEMA",
    "ProcessingMeta",
    "analyze",
    "auto_configure",
    "process",
    "BrightnessTrace",
    "Conv1DNet",
    "SyntheticSignalConfig",
    "TimeSegClass",
    "TrainConfig",
    "compute_brightness_trace",
    "generate_synthetic_signal",
    "infer_interest_window",
    "load_model",
    "net_forward",
    "save_model",
    "train",
]
