"""Flow-direction and ROI inference plus leading-edge extraction.

The leading edge of a class is, per mask row, the first pixel of that
class met when scanning from the upstream side. When the source frame is
available the edge is refined to sub-pixel resolution by locating the
luminance crossing between the upstream and interior plateaus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import colorseg
from .colorseg import PixelClass, PixelClassMask, luminance
from .errors import ConfigInvalid, EmptyRange, NothingSegmented, RoiOutOfBounds
from .frames import FlowDirection

# Sub-pixel estimates stay within this distance of the first classified
# pixel so that round(x) always lands on it.
_SUBPIXEL_CLAMP = 0.499


@dataclass(frozen=True)
class Roi:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 4 or self.h < 4:
            raise ConfigInvalid(f"ROI {self.w}x{self.h} below the 4px minimum")
        if self.x < 0 or self.y < 0:
            raise ConfigInvalid("ROI origin must be non-negative")

    def clamped(self, width, height) -> "Roi":
        x = min(self.x, width - 4)
        y = min(self.y, height - 4)
        return Roi(x, y, min(self.w, width - x), min(self.h, height - y))

    def to_json(self):
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_json(cls, obj):
        return cls(*[int(v) for v in obj])


@dataclass
class EdgeTrace:
    """Leading-edge points of one class in one frame, full-frame coords.

    xs are float pixels (sub-pixel when refined), ys strictly increasing
    integer rows. Empty arrays mean the class is absent.
    """

    frame_index: int
    kind: PixelClass
    xs: np.ndarray
    ys: np.ndarray

    def __len__(self):
        return len(self.xs)

    @property
    def points(self):
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def interp_x(self, y: float) -> float:
        """x at row y, linearly interpolated; NaN outside the row span."""
        if len(self.xs) == 0 or y < self.ys[0] or y > self.ys[-1]:
            return float("nan")
        return float(np.interp(y, self.ys, self.xs))

    def to_json(self):
        return [[float(x), int(y)] for x, y in zip(self.xs, self.ys)]

    @classmethod
    def from_json(cls, frame_index, kind, obj):
        pts = np.asarray(obj, dtype=np.float64).reshape(-1, 2)
        return cls(frame_index, kind, pts[:, 0].copy(), pts[:, 1].astype(int))


def detect_flow_direction(source, first: int, last: int, stride: int = 10) -> FlowDirection:
    """Compare mean luminance of the left vs right third of columns over
    sampled frames; the brighter third is the upstream side. Ties -> LEFT.
    """
    if not 0 <= first <= last < source.frame_count:
        raise EmptyRange(f"frame range [{first}, {last}] invalid for {source.frame_count} frames")
    if stride < 1:
        raise ConfigInvalid("stride must be >= 1")
    col_sum = np.zeros(source.width)
    for idx in range(first, last + 1, stride):
        col_sum += luminance(source.get_frame(idx).pixels).mean(axis=0)
    third = max(1, source.width // 3)
    left = col_sum[:third].mean()
    right = col_sum[-third:].mean()
    return FlowDirection.RIGHT if right > left else FlowDirection.LEFT


def auto_roi(source, first: int, last: int, seg_config) -> Roi:
    """Bounding box of non-background pixels in the first and last frames,
    buffered by 10% of each dimension per side and clamped to the frame.
    """
    if not 0 <= first <= last < source.frame_count:
        raise EmptyRange(f"frame range [{first}, {last}] invalid for {source.frame_count} frames")
    hit = np.zeros((source.height, source.width), dtype=bool)
    for idx in {first, last}:
        mask = colorseg.classify(source.get_frame(idx), None, seg_config)
        hit |= mask.labels != int(PixelClass.BACKGROUND)
    if not hit.any():
        raise NothingSegmented("first and last frames are entirely background")
    rows = np.flatnonzero(hit.any(axis=1))
    cols = np.flatnonzero(hit.any(axis=0))
    x0, x1 = int(cols[0]), int(cols[-1])
    y0, y1 = int(rows[0]), int(rows[-1])
    pad_x = int(round(0.1 * (x1 - x0 + 1)))
    pad_y = int(round(0.1 * (y1 - y0 + 1)))
    x0 = max(0, x0 - pad_x)
    y0 = max(0, y0 - pad_y)
    x1 = min(source.width - 1, x1 + pad_x)
    y1 = min(source.height - 1, y1 + pad_y)
    w = max(4, x1 - x0 + 1)
    h = max(4, y1 - y0 + 1)
    return Roi(x0, y0, w, h).clamped(source.width, source.height)


def _subpixel_refine(lum, xs_full, ys_full, step):
    """Refine integer edge columns against the luminance image.

    For each point, the crossing of the midpoint between the plateau 2 px
    upstream and 2 px downstream is located in the adjacent pixel pairs and
    linearly interpolated; rows without a crossing keep the integer column.
    `step` is +1 when upstream is to the left, -1 when to the right.
    """
    h, w = lum.shape
    offsets = step * np.array([-2, -1, 0, 1, 2])
    cols = np.clip(xs_full[:, None] + offsets[None, :], 0, w - 1)
    win = lum[ys_full[:, None], cols]  # (n, 5) ordered upstream -> downstream
    target = 0.5 * (win[:, 0] + win[:, 4])

    refined = xs_full.astype(np.float64)
    pending = np.ones(len(xs_full), dtype=bool)
    # adjacent pairs first, outer pairs as fallback for crossings that
    # noise pushes just past a window boundary
    for lo, hi, base in ((1, 2, -1.0), (2, 3, 0.0), (0, 1, -2.0), (3, 4, 1.0)):
        d0 = win[:, lo] - target
        d1 = win[:, hi] - target
        hit = pending & (d0 * d1 <= 0) & (win[:, hi] != win[:, lo])
        denom = np.where(hit, win[:, lo] - win[:, hi], 1.0)
        frac = np.where(hit, d0 / denom, 0.0)
        refined = np.where(hit, xs_full + step * (base + frac), refined)
        pending &= ~hit
    return np.clip(refined, xs_full - _SUBPIXEL_CLAMP, xs_full + _SUBPIXEL_CLAMP)


def extract_leading_edge(mask: PixelClassMask, cls: PixelClass, flow: FlowDirection, frame=None) -> EdgeTrace:
    """Per-row first pixel of `cls` scanning from the upstream side.

    Sample edges include SAMPLE_EDGE-labeled pixels, so extraction is
    stable whether or not the mask was already edge-marked. Coordinates
    are full-frame; an empty trace means the class is absent.
    """
    if cls not in (PixelClass.SAMPLE, PixelClass.SHOCK):
        raise ConfigInvalid(f"extract_leading_edge expects SAMPLE or SHOCK, got {cls}")
    wanted = mask.labels == int(cls)
    if cls == PixelClass.SAMPLE:
        wanted |= mask.labels == int(PixelClass.SAMPLE_EDGE)
    scan = wanted if flow == FlowDirection.LEFT else wanted[:, ::-1]
    has = scan.any(axis=1)
    rows = np.flatnonzero(has)
    frame_index = frame.index if frame is not None else -1
    if len(rows) == 0:
        return EdgeTrace(frame_index, cls, np.empty(0), np.empty(0, dtype=int))
    first = scan[rows].argmax(axis=1)
    if flow == FlowDirection.RIGHT:
        first = mask.width - 1 - first

    ox, oy = mask.roi_offset
    xs_full = first + ox
    ys_full = rows + oy
    if frame is not None:
        step = 1 if flow == FlowDirection.LEFT else -1
        xs = _subpixel_refine(luminance(frame.pixels), xs_full, ys_full, step)
    else:
        xs = xs_full.astype(np.float64)
    return EdgeTrace(frame_index, cls, xs, ys_full)


def mark_sample_edge(mask: PixelClassMask, trace: EdgeTrace) -> PixelClassMask:
    """Relabel traced pixels (plus one-pixel dilation along the scan axis)
    from SAMPLE to SAMPLE_EDGE. Pixels of other classes are untouched.
    """
    if trace.kind != PixelClass.SAMPLE:
        raise ConfigInvalid("mark_sample_edge needs a SAMPLE trace")
    out = mask.copy()
    if len(trace) == 0:
        return out
    ox, oy = mask.roi_offset
    px = np.rint(trace.xs).astype(int) - ox
    py = trace.ys - oy
    inside = (py >= 0) & (py < mask.height)
    for dx in (-1, 0, 1):
        qx = px + dx
        ok = inside & (qx >= 0) & (qx < mask.width)
        hit = out.labels[py[ok], qx[ok]] == int(PixelClass.SAMPLE)
        out.labels[py[ok][hit], qx[ok][hit]] = int(PixelClass.SAMPLE_EDGE)
    return out
