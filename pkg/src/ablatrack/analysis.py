"""Post-processing: calibration to physical units, per-frame measurement
channels from edge traces, ordinary least-squares fits with parameter
standard errors, and CSV export.

Channel conventions: recession is positive for material loss, the sign
resolved from the flow direction; rejected frames are excluded (never
interpolated); absent values are NaN in memory and empty cells in CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colorseg import PixelClass
from .edges import EdgeTrace
from .errors import (
    ConfigInvalid,
    DegenerateAbscissa,
    InconsistentDimensions,
    IoFailure,
    MissingEdge,
    NoKeptFrames,
)
from .frames import FlowDirection

DEFAULT_STATIONS = (-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75)


@dataclass(frozen=True)
class Calibration:
    model_diameter_mm: float
    measured_diameter_px: float

    def __post_init__(self):
        if self.model_diameter_mm <= 0 or self.measured_diameter_px <= 0:
            raise ConfigInvalid("calibration inputs must be > 0")

    @property
    def mm_per_px(self) -> float:
        return self.model_diameter_mm / self.measured_diameter_px

    def to_json(self):
        return {"model_diameter_mm": self.model_diameter_mm, "measured_diameter_px": self.measured_diameter_px}

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["model_diameter_mm"]), float(obj["measured_diameter_px"]))


@dataclass
class LinearFitResult:
    slope: float
    intercept: float
    slope_stderr: float
    intercept_stderr: float
    r_squared: float
    n_points: int

    def to_json(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "intercept_stderr": self.intercept_stderr,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass
class TimeSeriesBundle:
    """Calibrated channels over the kept frames.

    recession_mm maps station fraction -> array; NaN marks values that
    could not be measured on a particular frame.
    """

    time_s: np.ndarray
    frame_indices: np.ndarray
    stations: tuple[float, ...]
    recession_mm: dict[float, np.ndarray]
    sample_area_mm2: np.ndarray
    shock_standoff_mm: np.ndarray
    vertical_position_mm: np.ndarray
    y_center_px: float = field(default=float("nan"))
    radius_px: float = field(default=float("nan"))

    def __len__(self):
        return len(self.time_s)

    def channels(self):
        """Ordered (name, values) pairs matching the CSV layout."""
        out = [(f"recession_mm@{f:g}", self.recession_mm[f]) for f in self.stations]
        out.append(("area_mm2", self.sample_area_mm2))
        out.append(("standoff_mm", self.shock_standoff_mm))
        out.append(("vertical_mm", self.vertical_position_mm))
        return out

    def to_json(self):
        def arr(a):
            return [None if math.isnan(v) else float(v) for v in a.tolist()]

        return {
            "time_s": self.time_s.tolist(),
            "frame_indices": self.frame_indices.tolist(),
            "stations": list(self.stations),
            "channels": {name: arr(vals) for name, vals in self.channels()},
            "y_center_px": self.y_center_px,
            "radius_px": self.radius_px,
        }


def compute_standoff(sample_trace: EdgeTrace, shock_trace: EdgeTrace, y_center: float) -> float:
    """|x_sample - x_shock| at y_center, linearly interpolated between rows."""
    xs = sample_trace.interp_x(y_center)
    xh = shock_trace.interp_x(y_center)
    if math.isnan(xs) or math.isnan(xh):
        raise MissingEdge(f"no edge straddles y = {y_center}")
    return abs(xs - xh)


def _parse_edge_frames(edges_files: list[dict]):
    """Merge per-frame entries from one or more edges files.

    Frames must be non-overlapping or identical across files; later files
    win on conflict. Returns (meta of first file, merged entries by index).
    """
    if not edges_files:
        raise ConfigInvalid("no edges files given")
    dims = None
    merged: dict[int, dict] = {}
    for obj in edges_files:
        meta = obj.get("meta", {})
        d = (meta.get("width"), meta.get("height"))
        if dims is None:
            dims = d
        elif d != dims:
            raise InconsistentDimensions(f"edges files disagree on frame size: {dims} vs {d}")
        for entry in obj.get("frames", []):
            merged[int(entry["index"])] = entry
    return edges_files[0].get("meta", {}), [merged[i] for i in sorted(merged)]


def build_time_series(
    edges_files: list[dict],
    calibration: Calibration,
    stations: tuple[float, ...] = DEFAULT_STATIONS,
    keep_flags: dict[int, bool] | None = None,
) -> TimeSeriesBundle:
    """Assemble calibrated channels from edges-file dicts.

    The sample centerline y_c and radius R are fixed from the first kept
    frame (midpoint and half-extent of its trace's row span); stations sit
    at y_c + f*R. keep_flags overrides the files' rejected flags by index.
    """
    meta, entries = _parse_edge_frames(edges_files)
    s = calibration.mm_per_px
    flow = FlowDirection(meta.get("flow", "left"))

    def kept(entry):
        if keep_flags is not None and int(entry["index"]) in keep_flags:
            return keep_flags[int(entry["index"])]
        return not entry.get("rejected", False)

    frames = [e for e in entries if kept(e) and e.get("sample_edge")]
    if not frames:
        raise NoKeptFrames("no kept frames with a sample edge")

    def trace_of(entry, key):
        pts = entry.get(key)
        if not pts:
            return None
        kind = PixelClass.SAMPLE if key == "sample_edge" else PixelClass.SHOCK
        return EdgeTrace.from_json(int(entry["index"]), kind, pts)

    first = trace_of(frames[0], "sample_edge")
    y0, y1 = float(first.ys[0]), float(first.ys[-1])
    y_c = 0.5 * (y0 + y1)
    radius = 0.5 * (y1 - y0)

    n = len(frames)
    time_s = np.array([float(e["time_s"]) for e in frames])
    idx = np.array([int(e["index"]) for e in frames])
    recession = {f: np.full(n, np.nan) for f in stations}
    area = np.full(n, np.nan)
    standoff = np.full(n, np.nan)
    vertical = np.full(n, np.nan)

    sign = 1.0 if flow == FlowDirection.LEFT else -1.0
    base_x = {f: first.interp_x(y_c + f * radius) for f in stations}
    base_y_centroid = float(np.mean(first.ys))

    for i, entry in enumerate(frames):
        trace = trace_of(entry, "sample_edge")
        for f in stations:
            x = trace.interp_x(y_c + f * radius)
            if not (math.isnan(x) or math.isnan(base_x[f])):
                recession[f][i] = sign * s * (x - base_x[f])
        feats = entry.get("features") or {}
        if feats.get("sample_area_px") is not None:
            area[i] = s * s * float(feats["sample_area_px"])
        vertical[i] = s * (float(np.mean(trace.ys)) - base_y_centroid)
        shock = trace_of(entry, "shock_edge")
        if shock is not None and len(shock):
            try:
                standoff[i] = s * compute_standoff(trace, shock, y_c)
            except MissingEdge:
                pass

    return TimeSeriesBundle(
        time_s=time_s,
        frame_indices=idx,
        stations=tuple(stations),
        recession_mm=recession,
        sample_area_mm2=area,
        shock_standoff_mm=standoff,
        vertical_position_mm=vertical,
        y_center_px=y_c,
        radius_px=radius,
    )


def linear_fit(t: np.ndarray, y: np.ndarray) -> LinearFitResult:
    """Ordinary least squares y = slope*t + intercept with exact stderrs.

    slope_stderr = sqrt(sigma^2 / Sxx), intercept_stderr =
    sqrt(sigma^2 * (1/n + tbar^2 / Sxx)), sigma^2 = SSR / (n - 2)
    (zero when n == 2); r^2 = 1 - SSR/SST, defined as 1 when SST == 0.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.shape != y.shape or t.ndim != 1:
        raise ConfigInvalid("t and y must be matching 1-D arrays")
    if len(t) < 2:
        raise ConfigInvalid(f"need at least 2 points, got {len(t)}")
    tbar = t.mean()
    sxx = float(((t - tbar) ** 2).sum())
    if sxx == 0.0:
        raise DegenerateAbscissa("all abscissa values are equal")
    ybar = y.mean()
    slope = float(((t - tbar) * (y - ybar)).sum() / sxx)
    intercept = float(ybar - slope * tbar)
    resid = y - (slope * t + intercept)
    ssr = float((resid**2).sum())
    sst = float(((y - ybar) ** 2).sum())
    n = len(t)
    sigma2 = 0.0 if n == 2 else ssr / (n - 2)
    slope_stderr = math.sqrt(sigma2 / sxx)
    intercept_stderr = math.sqrt(sigma2 * (1.0 / n + tbar * tbar / sxx))
    r_squared = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    return LinearFitResult(slope, intercept, slope_stderr, intercept_stderr, r_squared, n)


def fit_channels(bundle: TimeSeriesBundle) -> dict[str, LinearFitResult]:
    """Linear fit of every channel over its finite points (skips channels
    with fewer than 2, or a degenerate time axis)."""
    fits = {}
    for name, values in bundle.channels():
        ok = np.isfinite(values)
        if ok.sum() < 2:
            continue
        try:
            fits[name] = linear_fit(bundle.time_s[ok], values[ok])
        except DegenerateAbscissa:
            continue
    return fits


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_csv(bundle: TimeSeriesBundle, fits: dict[str, LinearFitResult], path_prefix) -> tuple[Path, Path]:
    """Write <prefix>_series.csv and <prefix>_fits.csv (UTF-8, ',' separator,
    '.' decimal, LF line endings). Absent values become empty cells.
    """
    if len(bundle) == 0:
        raise ConfigInvalid("empty bundle")
    prefix = Path(path_prefix)
    series_path = prefix.parent / (prefix.name + "_series.csv")
    fits_path = prefix.parent / (prefix.name + "_fits.csv")
    channels = bundle.channels()

    lines = ["time_s," + ",".join(name for name, _ in channels)]
    for i in range(len(bundle)):
        row = [_cell(float(bundle.time_s[i]))] + [_cell(float(vals[i])) for _, vals in channels]
        lines.append(",".join(row))
    fit_lines = ["channel,slope,slope_stderr,intercept,intercept_stderr,r_squared,n_points"]
    for name, _ in channels:
        fit = fits.get(name)
        if fit is None:
            continue
        fit_lines.append(
            ",".join(
                [
                    name,
                    _cell(fit.slope),
                    _cell(fit.slope_stderr),
                    _cell(fit.intercept),
                    _cell(fit.intercept_stderr),
                    _cell(fit.r_squared),
                    str(fit.n_points),
                ]
            )
        )
    try:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        series_path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
        fits_path.write_bytes(("\n".join(fit_lines) + "\n").encode("utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot write CSVs under {prefix}: {exc}") from None
    return series_path, fits_path
