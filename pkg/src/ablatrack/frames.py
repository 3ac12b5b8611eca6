"""Frame ingestion from a PNG-sequence manifest, plus a synthetic
plasma-tunnel video generator used as the ground-truth fixture.

Real footage is transcoded outside this package (see README) into
numbered PNG frames plus a small JSON manifest:

    {"fps": 30.0, "width": 512, "height": 384, "frames": ["f000000.png", ...]}

File names are relative to the manifest directory and the frame index is
the array position. Entries may alternatively be {"index": i, "file": name}
objects, in which case indices must be dense 0..n-1.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .colorseg import hsv_to_rgb
from .errors import (
    ConfigInvalid,
    DecodeFailure,
    DimensionMismatch,
    IndexOutOfRange,
    IoFailure,
    MalformedManifest,
    MissingManifest,
)

MIN_DIM = 8


class FlowDirection(str, enum.Enum):
    """Side of the frame the flow arrives from; the leading edge faces it."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Frame:
    index: int
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, row-major RGB
    timestamp_s: float

    def __post_init__(self):
        if self.width < MIN_DIM or self.height < MIN_DIM:
            raise DimensionMismatch(f"frame {self.index}: {self.width}x{self.height} below {MIN_DIM}px minimum")
        if self.pixels.shape != (self.height, self.width, 3):
            raise DimensionMismatch(
                f"frame {self.index}: pixel buffer {self.pixels.shape} != ({self.height}, {self.width}, 3)"
            )


class FrameSource:
    """Validated handle on a manifest; pixel data is loaded lazily."""

    def __init__(self, manifest_path, fps, width, height, frame_files):
        self.manifest_path = Path(manifest_path)
        self.fps = float(fps)
        self.width = int(width)
        self.height = int(height)
        self.frame_files = list(frame_files)

    @property
    def frame_count(self) -> int:
        return len(self.frame_files)

    def get_frame(self, index: int) -> Frame:
        if not 0 <= index < self.frame_count:
            raise IndexOutOfRange(f"frame {index} outside 0..{self.frame_count - 1}")
        path = self.frame_files[index]
        try:
            with Image.open(path) as img:
                img = img.convert("RGB")  # alpha dropped if present
                pixels = np.asarray(img, dtype=np.uint8)
        except FileNotFoundError:
            raise DecodeFailure(f"frame file missing: {path}") from None
        except (UnidentifiedImageError, OSError) as exc:
            raise DecodeFailure(f"cannot decode {path}: {exc}") from None
        if pixels.shape[:2] != (self.height, self.width):
            raise DimensionMismatch(
                f"{path}: decoded {pixels.shape[1]}x{pixels.shape[0]}, manifest says {self.width}x{self.height}"
            )
        return Frame(index, self.width, self.height, pixels, index / self.fps)

    def __repr__(self):
        return f"FrameSource({self.manifest_path}, {self.frame_count} frames @ {self.fps} fps)"


def open_frame_source(manifest_path) -> FrameSource:
    """Parse and validate a manifest. Frame pixel data is not touched."""
    path = Path(manifest_path)
    if not path.is_file():
        raise MissingManifest(f"no manifest at {path}")
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedManifest(f"{path}: {exc}") from None

    for key in ("fps", "width", "height", "frames"):
        if key not in obj:
            raise MalformedManifest(f"{path}: missing key {key!r}")
    fps = obj["fps"]
    if not isinstance(fps, (int, float)) or fps <= 0:
        raise MalformedManifest(f"{path}: fps must be > 0, got {fps!r}")
    width, height = obj["width"], obj["height"]
    if not (isinstance(width, int) and isinstance(height, int)) or width < MIN_DIM or height < MIN_DIM:
        raise MalformedManifest(f"{path}: bad dimensions {width!r}x{height!r}")
    entries = obj["frames"]
    if not isinstance(entries, list) or not entries:
        raise MalformedManifest(f"{path}: frames must be a non-empty list")

    files: list[str | None] = [None] * len(entries)
    for pos, entry in enumerate(entries):
        if isinstance(entry, str):
            idx, name = pos, entry
        elif isinstance(entry, dict) and "index" in entry and "file" in entry:
            idx, name = entry["index"], entry["file"]
        else:
            raise MalformedManifest(f"{path}: frame entry {entry!r} not a name or index/file object")
        if not isinstance(idx, int) or not 0 <= idx < len(entries) or files[idx] is not None:
            raise MalformedManifest(f"{path}: frame indices not dense 0..{len(entries) - 1}")
        files[idx] = str(path.parent / name)
    return FrameSource(path, fps, width, height, files)


# ---------------------------------------------------------------------------
# Synthetic video generator
# ---------------------------------------------------------------------------

# Rendering constants shared with the ground truth.
SHOCK_BAND_PX = 3.0           # radial thickness of the drawn shock band
SHOCK_RADIUS_FACTOR = 2.2     # shock curvature radius / sample radius
SHOCK_ARC_FACTOR = 1.3        # arc half-span / sample radius
PLUME_HALF_FACTOR = 1.15      # plume half-height / sample radius
IGNITION_BOOST = 25.0         # gray levels added to the first two ON frames
IGNITION_FRAMES = 2


@dataclass
class SynthVideoConfig:
    frame_count: int = 100
    width: int = 512
    height: int = 384
    flow_direction: FlowDirection = FlowDirection.RIGHT
    initial_edge_x: float = 300.0
    recession_rate: float = 0.5          # px/frame, >= 0
    sample_radius: float = 80.0
    shock_standoff0: float = 25.0
    shock_standoff_rate: float = 0.05    # px/frame
    on_window: tuple[int, int] = (20, 80)
    background_level: int = 12
    sample_brightness: int = 230
    shock_brightness: int = 160
    noise_sigma: float = 2.0
    seed: int = 0
    fps: float = 30.0
    # Optional piecewise recession schedule [(duration_frames, rate), ...];
    # overrides recession_rate when set. The last rate continues past the
    # listed durations.
    rate_schedule: list[tuple[int, float]] | None = None

    def validate(self):
        first_on, last_on = self.on_window
        if self.frame_count < 1:
            raise ConfigInvalid("frame_count must be >= 1")
        if self.width < MIN_DIM or self.height < MIN_DIM:
            raise ConfigInvalid(f"dimensions below {MIN_DIM}px minimum")
        if not 0 <= first_on <= last_on < self.frame_count:
            raise ConfigInvalid(f"on_window {self.on_window} must satisfy 0 <= first <= last < {self.frame_count}")
        if self.recession_rate < 0:
            raise ConfigInvalid("recession_rate must be >= 0")
        if self.sample_radius < 2:
            raise ConfigInvalid("sample_radius must be >= 2 px")
        for name in ("background_level", "sample_brightness", "shock_brightness"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ConfigInvalid(f"{name} {v} outside 0..255")
        if self.noise_sigma < 0:
            raise ConfigInvalid("noise_sigma must be >= 0")
        if self.fps <= 0:
            raise ConfigInvalid("fps must be > 0")
        if self.rate_schedule is not None:
            if not self.rate_schedule or any(n < 1 or r < 0 for n, r in self.rate_schedule):
                raise ConfigInvalid("rate_schedule needs positive durations and non-negative rates")
        final_edge = self.edge_x_at(last_on)
        if not 1.0 <= min(self.initial_edge_x, final_edge) <= max(self.initial_edge_x, final_edge) <= self.width - 2:
            raise ConfigInvalid(f"leading edge leaves the frame (initial {self.initial_edge_x}, final {final_edge})")
        if self.standoff_at(last_on) <= SHOCK_BAND_PX:
            raise ConfigInvalid("shock standoff collapses below the band thickness inside the ON window")
        return self

    def recession_px(self, frames_on: float) -> float:
        """Total material loss after `frames_on` frames of exposure."""
        if self.rate_schedule is None:
            return self.recession_rate * frames_on
        total, t = 0.0, frames_on
        for duration, rate in self.rate_schedule:
            step = min(t, duration)
            total += rate * step
            t -= step
            if t <= 0:
                return total
        return total + self.rate_schedule[-1][1] * t

    def edge_x_at(self, frame: int) -> float:
        first_on, last_on = self.on_window
        dt = min(max(frame, first_on), last_on) - first_on
        loss = self.recession_px(dt)
        if self.flow_direction == FlowDirection.RIGHT:
            return self.initial_edge_x - loss
        return self.initial_edge_x + loss

    def standoff_at(self, frame: int) -> float:
        first_on, last_on = self.on_window
        dt = min(max(frame, first_on), last_on) - first_on
        return self.shock_standoff0 + self.shock_standoff_rate * dt

    def to_json(self):
        d = {
            "frame_count": self.frame_count,
            "width": self.width,
            "height": self.height,
            "flow_direction": self.flow_direction.value,
            "initial_edge_x": self.initial_edge_x,
            "recession_rate": self.recession_rate,
            "sample_radius": self.sample_radius,
            "shock_standoff0": self.shock_standoff0,
            "shock_standoff_rate": self.shock_standoff_rate,
            "on_window": list(self.on_window),
            "background_level": self.background_level,
            "sample_brightness": self.sample_brightness,
            "shock_brightness": self.shock_brightness,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "fps": self.fps,
        }
        if self.rate_schedule is not None:
            d["rate_schedule"] = [[int(n), float(r)] for n, r in self.rate_schedule]
        return d

    @classmethod
    def from_json(cls, obj):
        kwargs = dict(obj)
        if "flow_direction" in kwargs:
            kwargs["flow_direction"] = FlowDirection(kwargs["flow_direction"])
        if "on_window" in kwargs:
            kwargs["on_window"] = tuple(kwargs["on_window"])
        if kwargs.get("rate_schedule") is not None:
            kwargs["rate_schedule"] = [(int(n), float(r)) for n, r in kwargs["rate_schedule"]]
        return cls(**kwargs)


@dataclass
class GroundTruth:
    """Per-frame true edge positions written next to the synthetic frames.

    edge_x / shock_x are (frame_count, height) float arrays with NaN where
    the structure does not cover a row (or the arc is off).
    """

    first_on: int
    last_on: int
    edge_x: np.ndarray
    shock_x: np.ndarray
    config: SynthVideoConfig | None = None

    def sample_edge_at(self, frame: int, row: int) -> float:
        return float(self.edge_x[frame, row])

    def standoff_at(self, frame: int) -> float:
        if self.config is not None:
            return self.config.standoff_at(frame)
        yc = self.edge_x.shape[1] / 2
        return abs(self.edge_x[frame, int(yc)] - self.shock_x[frame, int(yc)])

    def to_json(self):
        def row(arr):
            return [None if math.isnan(v) else v for v in arr.tolist()]

        return {
            "first_on": self.first_on,
            "last_on": self.last_on,
            "per_frame": [
                {"index": i, "edge_x": row(self.edge_x[i]), "shock_x": row(self.shock_x[i])}
                for i in range(self.edge_x.shape[0])
            ],
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path):
        obj = json.loads(Path(path).read_text())
        frames = obj["per_frame"]
        height = len(frames[0]["edge_x"])
        edge = np.full((len(frames), height), np.nan)
        shock = np.full((len(frames), height), np.nan)
        for entry in frames:
            i = entry["index"]
            edge[i] = [np.nan if v is None else v for v in entry["edge_x"]]
            shock[i] = [np.nan if v is None else v for v in entry["shock_x"]]
        return cls(obj["first_on"], obj["last_on"], edge, shock)


def _blend(canvas: np.ndarray, color, alpha: np.ndarray):
    a = alpha[..., None]
    canvas *= 1.0 - a
    canvas += np.asarray(color, dtype=np.float64) * a


def generate_synthetic_video(cfg: SynthVideoConfig, out_dir) -> tuple[FrameSource, GroundTruth]:
    """Render the fixture video and its ground truth into `out_dir`.

    Geometry uses the pixel-center convention: pixel (ix, iy) covers the
    unit square centered on (ix, iy), and 1-px anti-aliasing makes the
    50%-coverage luminance crossing coincide with the true edge position.
    Deterministic: identical configs (incl. seed) give byte-identical files.
    """
    cfg.validate()
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from None

    first_on, last_on = cfg.on_window
    w, h, r = cfg.width, cfg.height, cfg.sample_radius
    y_c = (h - 1) / 2.0
    shock_radius = SHOCK_RADIUS_FACTOR * r
    arc_half = SHOCK_ARC_FACTOR * r
    plume_half = PLUME_HALF_FACTOR * r
    to_right = cfg.flow_direction == FlowDirection.RIGHT

    sample_rgb = hsv_to_rgb(30.0, 0.45, cfg.sample_brightness / 255.0)
    shock_rgb = hsv_to_rgb(270.0, 0.60, cfg.shock_brightness / 255.0)
    # plume value stays below the auto-HSV shock floor (0.35*255) even with
    # the ignition boost and several sigma of noise on top
    plume_level = min(cfg.background_level + 40, 52)
    plume_rgb = hsv_to_rgb(270.0, 0.50, plume_level / 255.0)

    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]
    dy = ys - y_c
    abs_dy = np.abs(dy)

    rng = np.random.default_rng(cfg.seed)
    edge_gt = np.full((cfg.frame_count, h), np.nan)
    shock_gt = np.full((cfg.frame_count, h), np.nan)
    edge_rows = abs_dy[:, 0] <= math.sqrt(max(r * r - 1.0, 0.0))
    arc_rows = abs_dy[:, 0] <= arc_half - 0.5

    names = []
    for t in range(cfg.frame_count):
        canvas = np.full((h, w, 3), float(cfg.background_level))
        if first_on <= t <= last_on:
            edge_x = cfg.edge_x_at(t)
            standoff = cfg.standoff_at(t)
            apex = edge_x + standoff if to_right else edge_x - standoff
            center_x = apex - shock_radius if to_right else apex + shock_radius
            dist_c = np.sqrt((xs - center_x) ** 2 + dy**2)
            upstream = xs >= center_x if to_right else xs <= center_x

            # plume: dim glow filling the region upstream of the shock surface
            cov_plume = (
                np.clip(dist_c - shock_radius + 0.5, 0.0, 1.0)
                * np.clip(plume_half - abs_dy + 0.5, 0.0, 1.0)
                * upstream
            )
            _blend(canvas, plume_rgb, cov_plume)

            # shock: thin band just downstream of the ideal surface
            cov_shock = (
                np.clip(shock_radius - dist_c + 0.5, 0.0, 1.0)
                * np.clip(dist_c - (shock_radius - SHOCK_BAND_PX) + 0.5, 0.0, 1.0)
                * upstream
                * (abs_dy <= arc_half)
            )
            _blend(canvas, shock_rgb, cov_shock)

            # sample: half-disc, flat face toward the flow
            cov_face = (
                np.clip(edge_x - xs + 0.5, 0.0, 1.0)
                if to_right
                else np.clip(xs - edge_x + 0.5, 0.0, 1.0)
            )
            dist_s = np.sqrt((xs - edge_x) ** 2 + dy**2)
            cov_sample = cov_face * np.clip(r - dist_s + 0.5, 0.0, 1.0)
            _blend(canvas, sample_rgb, cov_sample)

            if t - first_on < IGNITION_FRAMES:
                canvas += IGNITION_BOOST

            edge_gt[t, edge_rows] = edge_x
            sqrt_term = np.sqrt(np.maximum(shock_radius**2 - dy[arc_rows, 0] ** 2, 0.0))
            shock_gt[t, arc_rows] = center_x + sqrt_term if to_right else center_x - sqrt_term

        if cfg.noise_sigma > 0:
            canvas += rng.normal(0.0, cfg.noise_sigma, (h, w))[..., None]
        frame8 = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        name = f"f{t:06d}.png"
        try:
            Image.fromarray(frame8, "RGB").save(out / name, compress_level=1)
        except OSError as exc:
            raise IoFailure(f"cannot write {out / name}: {exc}") from None
        names.append(name)

    manifest = {"fps": cfg.fps, "width": w, "height": h, "frames": names}
    manifest_path = out / "manifest.json"
    try:
        manifest_path.write_text(json.dumps(manifest, indent=1))
    except OSError as exc:
        raise IoFailure(f"cannot write manifest: {exc}") from None

    truth = GroundTruth(first_on, last_on, edge_gt, shock_gt, config=cfg)
    truth.save(out / "gt.json")
    return open_frame_source(manifest_path), truth
