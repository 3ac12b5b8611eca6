"""Batch orchestration: metadata, the per-frame processing loop, edges-file
emission and the analyze step.

The durable artifacts are three JSON/CSV files: the processing metadata
("arcjetcv-meta/1"), the intermediate edge data ("arcjetcv-edges/1") and
the exported series/fit CSVs. Reruns with identical metadata produce
byte-identical edges files except for provenance timestamps.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import colorseg
from .analysis import (
    DEFAULT_STATIONS,
    Calibration,
    build_time_series,
    export_csv,
    fit_channels,
)
from .colorseg import PixelClass, SegMethod, SegmentationConfig, luminance
from .edges import Roi, auto_roi, detect_flow_direction, extract_leading_edge, mark_sample_edge
from .errors import (
    AblatrackError,
    ConfigInvalid,
    IoFailure,
    NothingSegmented,
    NoOnRegion,
    SchemaMismatch,
)
from .frames import FlowDirection, FrameSource, open_frame_source
from .outliers import FeatureVector, LofConfig, filter_frames
from .timeseg import Conv1DNet, compute_brightness_trace, infer_interest_window, load_model
from .version import __version__

META_SCHEMA = "arcjetcv-meta/1"
EDGES_SCHEMA = "arcjetcv-edges/1"


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ProcessingMeta:
    source: str
    first_frame: int = 0
    last_frame: int = 0
    frame_stride: int = 10
    roi: Roi | None = None
    flow: FlowDirection = FlowDirection.LEFT
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    lof: LofConfig = field(default_factory=LofConfig)
    calibration: Calibration | None = None
    model_path: str | None = None
    width: int = 0
    height: int = 0
    fps: float = 0.0
    flags: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def validate(self, source: FrameSource | None = None):
        if self.frame_stride < 1:
            raise ConfigInvalid("frame_stride must be >= 1")
        if not 0 <= self.first_frame <= self.last_frame:
            raise ConfigInvalid(f"frame window [{self.first_frame}, {self.last_frame}] invalid")
        if source is not None and self.last_frame >= source.frame_count:
            raise ConfigInvalid(f"last_frame {self.last_frame} >= frame count {source.frame_count}")
        self.segmentation.validate()
        self.lof.validate()
        return self

    def stamp_provenance(self, seed=None):
        self.provenance = {
            "tool": "ablatrack",
            "version": __version__,
            "created_utc": _utc_now(),
            "seed": seed,
        }
        return self

    def to_json(self):
        return {
            "schema": META_SCHEMA,
            "source": str(self.source),
            "first_frame": self.first_frame,
            "last_frame": self.last_frame,
            "frame_stride": self.frame_stride,
            "roi": self.roi.to_json() if self.roi else None,
            "flow": self.flow.value,
            "segmentation": self.segmentation.to_json(),
            "lof": self.lof.to_json(),
            "calibration": self.calibration.to_json() if self.calibration else None,
            "model_path": self.model_path,
            "width": self.width,
            "height": self.height,
            "fps": self.fps,
            "flags": self.flags,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj):
        if obj.get("schema", META_SCHEMA) != META_SCHEMA:
            raise SchemaMismatch(f"expected meta schema {META_SCHEMA!r}, got {obj.get('schema')!r}")
        return cls(
            source=obj["source"],
            first_frame=int(obj.get("first_frame", 0)),
            last_frame=int(obj.get("last_frame", 0)),
            frame_stride=int(obj.get("frame_stride", 10)),
            roi=Roi.from_json(obj["roi"]) if obj.get("roi") else None,
            flow=FlowDirection(obj.get("flow", "left")),
            segmentation=SegmentationConfig.from_json(obj.get("segmentation", {})),
            lof=LofConfig.from_json(obj.get("lof", {})),
            calibration=Calibration.from_json(obj["calibration"]) if obj.get("calibration") else None,
            model_path=obj.get("model_path"),
            width=int(obj.get("width", 0)),
            height=int(obj.get("height", 0)),
            fps=float(obj.get("fps", 0.0)),
            flags=dict(obj.get("flags", {})),
            provenance=dict(obj.get("provenance", {})),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path):
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaMismatch(f"unreadable meta file {path}: {exc}") from None


def _auto_trace_stride(frame_count: int) -> int:
    # every 10th frame for long videos, denser for short fixtures
    return max(1, min(10, frame_count // 64))


def auto_configure(source: FrameSource, model_path=None, net: Conv1DNet | None = None,
                   method: SegMethod = SegMethod.AUTO_HSV) -> ProcessingMeta:
    """Fill the window, flow direction and ROI automatically.

    Steps that cannot be deduced fall back to full-frame/full-video values
    and are marked in meta.flags so a caller (or the UI) can ask for manual
    input instead of silently trusting them.
    """
    meta = ProcessingMeta(
        source=str(source.manifest_path),
        segmentation=SegmentationConfig(method=method),
        width=source.width,
        height=source.height,
        fps=source.fps,
        model_path=str(model_path) if model_path else None,
    )
    if net is None and model_path is not None:
        net = load_model(model_path)

    meta.first_frame, meta.last_frame = 0, source.frame_count - 1
    if net is None:
        meta.flags["window"] = "manual"
    else:
        trace = compute_brightness_trace(source, _auto_trace_stride(source.frame_count))
        try:
            meta.first_frame, meta.last_frame, _ = infer_interest_window(net, trace)
        except NoOnRegion:
            meta.flags["window"] = "manual"

    flow_stride = max(1, (meta.last_frame - meta.first_frame) // 10)
    meta.flow = detect_flow_direction(source, meta.first_frame, meta.last_frame, flow_stride)

    try:
        meta.roi = auto_roi(source, meta.first_frame, meta.last_frame, meta.segmentation)
    except NothingSegmented:
        meta.flags["roi"] = "manual"
        meta.roi = Roi(0, 0, source.width, source.height)
    return meta.stamp_provenance()


def _frame_features(frame, mask, sample_trace) -> dict:
    sample_px = (mask.labels == int(PixelClass.SAMPLE)) | (mask.labels == int(PixelClass.SAMPLE_EDGE))
    ox, oy = mask.roi_offset
    lum = luminance(frame.pixels[oy : oy + mask.height, ox : ox + mask.width])
    y_mid = 0.5 * (sample_trace.ys[0] + sample_trace.ys[-1])
    return {
        "centerline_x": float(sample_trace.interp_x(y_mid)),
        "edge_point_count": float(len(sample_trace)),
        "sample_area_px": float(np.count_nonzero(sample_px)),
        "mean_sample_luminance": float(lum[sample_px].mean()),
    }


def process(meta: ProcessingMeta, out_path=None, progress=None) -> dict:
    """Run steps classify -> cleanup -> edge extraction -> features over the
    configured frame window, LOF-filter the result and assemble the edges
    file. Per-frame failures are recorded on the frame entry, never fatal.

    `progress`, when given, is called as progress(done, total) after each
    frame.
    """
    source = open_frame_source(meta.source)
    meta.validate(source)
    meta.width, meta.height, meta.fps = source.width, source.height, source.fps
    if not meta.provenance:
        meta.stamp_provenance()
    roi = meta.roi.clamped(source.width, source.height) if meta.roi else None
    want_shock = meta.segmentation.method != SegMethod.GRAY

    frame_ids = list(range(meta.first_frame, meta.last_frame + 1, meta.frame_stride))
    entries = []
    feature_rows: list[FeatureVector] = []
    for idx in frame_ids:
        entry = {
            "index": idx,
            "time_s": idx / source.fps,
            "sample_edge": [],
            "shock_edge": None,
            "features": None,
            "rejected": False,
        }
        entries.append(entry)
        try:
            frame = source.get_frame(idx)
            mask = colorseg.classify(frame, roi, meta.segmentation)
            mask = colorseg.largest_component(mask, PixelClass.SAMPLE)
            if want_shock:
                mask = colorseg.largest_component(mask, PixelClass.SHOCK)
            sample_trace = extract_leading_edge(mask, PixelClass.SAMPLE, meta.flow, frame)
            if len(sample_trace) == 0:
                raise NothingSegmented("no sample pixels")
            shock_trace = (
                extract_leading_edge(mask, PixelClass.SHOCK, meta.flow, frame) if want_shock else None
            )
            mask = mark_sample_edge(mask, sample_trace)
            entry["sample_edge"] = sample_trace.to_json()
            if shock_trace is not None and len(shock_trace):
                entry["shock_edge"] = shock_trace.to_json()
            entry["features"] = _frame_features(frame, mask, sample_trace)
            feature_rows.append(FeatureVector(idx, np.array([entry["features"][k] for k in meta.lof.feature_names])))
        except AblatrackError as exc:
            entry["rejected"] = True
            entry["reason"] = f"{type(exc).__name__}: {exc}"
        if progress is not None:
            progress(len(entries), len(frame_ids))

    if feature_rows:
        keep = filter_frames(feature_rows, meta.lof)
        for fv, ok in zip(feature_rows, keep):
            if not ok:
                for entry in entries:
                    if entry["index"] == fv.frame_index:
                        entry["rejected"] = True
                        entry.setdefault("reason", "lof_outlier")

    edges = {
        "schema": EDGES_SCHEMA,
        "meta": meta.to_json(),
        "frames": entries,
        "rejected_frames": [e["index"] for e in entries if e["rejected"]],
    }
    if out_path is not None:
        try:
            Path(out_path).write_text(json.dumps(edges, indent=1))
        except OSError as exc:
            raise IoFailure(f"cannot write edges file {out_path}: {exc}") from None
    return edges


def load_edges_file(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise IoFailure(f"no edges file at {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"unreadable edges file {path}: {exc}") from None
    if not isinstance(obj, dict) or obj.get("schema") != EDGES_SCHEMA:
        raise SchemaMismatch(f"{path}: expected schema {EDGES_SCHEMA!r}, got {obj.get('schema')!r}")
    return obj


def analyze(
    edges_paths,
    calibration: Calibration,
    stations=DEFAULT_STATIONS,
    out_prefix=None,
    render: bool = True,
) -> dict:
    """Merge edges files, build the calibrated bundle, fit every channel and
    export CSVs (plus a summary figure unless render=False).

    Returns {"bundle", "fits", "series_csv", "fits_csv", "figure"}.
    """
    if not edges_paths:
        raise ConfigInvalid("at least one edges file is required")
    files = [load_edges_file(p) if not isinstance(p, dict) else p for p in edges_paths]
    bundle = build_time_series(files, calibration, tuple(stations))
    fits = fit_channels(bundle)
    summary = {"bundle": bundle, "fits": fits, "series_csv": None, "fits_csv": None, "figure": None}
    if out_prefix is not None:
        series_csv, fits_csv = export_csv(bundle, fits, out_prefix)
        summary["series_csv"] = series_csv
        summary["fits_csv"] = fits_csv
        if render:
            from .report import render_timeseries_figure

            summary["figure"] = render_timeseries_figure(bundle, fits, str(out_prefix) + "_timeseries.png")
    return summary


def estimate_diameter_px(edges_file: dict) -> float:
    """Sample-trace row extent (2R) of the first kept frame, for calibration."""
    for entry in edges_file.get("frames", []):
        if not entry.get("rejected") and entry.get("sample_edge"):
            ys = [p[1] for p in entry["sample_edge"]]
            return float(max(ys) - min(ys))
    raise NothingSegmented("no kept frame with a sample edge")
