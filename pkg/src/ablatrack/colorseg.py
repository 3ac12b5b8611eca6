"""Pixel classification of frame regions into background / sample /
sample-edge / shock.

Classification is done by HSV thresholding (manual ranges or the shipped
presets) or by a plain grayscale threshold. A plugin hook exists for
learned segmenters. Masks are numpy uint8 label images plus the ROI
offset that places them inside the full frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigInvalid, EmptyRangeList, RoiOutOfBounds


class PixelClass(enum.IntEnum):
    """Class codes are fixed for file interchange."""

    BACKGROUND = 0
    SAMPLE = 1
    SAMPLE_EDGE = 2
    SHOCK = 3


class SegMethod(str, enum.Enum):
    AUTO_HSV = "auto-hsv"
    HSV = "hsv"
    GRAY = "gray"
    PLUGIN = "plugin"


# ITU-R 601 luma weights.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV box. h in degrees [0, 360); h_lo > h_hi wraps through 0."""

    h_lo: float
    h_hi: float
    s_lo: float = 0.0
    s_hi: float = 1.0
    v_lo: float = 0.0
    v_hi: float = 1.0

    def __post_init__(self):
        for h in (self.h_lo, self.h_hi):
            if not 0.0 <= h < 360.0:
                raise ConfigInvalid(f"hue bound {h} outside [0, 360)")
        if not (0.0 <= self.s_lo <= self.s_hi <= 1.0):
            raise ConfigInvalid("saturation bounds must satisfy 0 <= s_lo <= s_hi <= 1")
        if not (0.0 <= self.v_lo <= self.v_hi <= 1.0):
            raise ConfigInvalid("value bounds must satisfy 0 <= v_lo <= v_hi <= 1")

    def contains(self, h, s, v):
        if self.h_lo <= self.h_hi:
            h_ok = (h >= self.h_lo) & (h <= self.h_hi)
        else:  # wrap through 0
            h_ok = (h >= self.h_lo) | (h <= self.h_hi)
        return h_ok & (s >= self.s_lo) & (s <= self.s_hi) & (v >= self.v_lo) & (v <= self.v_hi)

    def to_json(self):
        return [self.h_lo, self.h_hi, self.s_lo, self.s_hi, self.v_lo, self.v_hi]

    @classmethod
    def from_json(cls, obj):
        return cls(*[float(x) for x in obj])


# Preset ranges for the automatic HSV method. Tunable defaults, not ground
# truth: glowing material is white-to-orange (hue wraps 330..360..70), the
# plasma sheath violet/blue.
AUTO_SAMPLE_RANGES = (HsvRange(330.0, 70.0, 0.0, 1.0, 0.6, 1.0),)
AUTO_SHOCK_RANGES = (HsvRange(240.0, 330.0, 0.1, 1.0, 0.35, 1.0),)


@dataclass
class SegmentationConfig:
    method: SegMethod = SegMethod.AUTO_HSV
    sample_ranges: list[HsvRange] = field(default_factory=lambda: list(AUTO_SAMPLE_RANGES))
    shock_ranges: list[HsvRange] = field(default_factory=lambda: list(AUTO_SHOCK_RANGES))
    gray_threshold: int = 128
    plugin: str | None = None

    def validate(self):
        if self.method == SegMethod.HSV and not self.sample_ranges:
            raise EmptyRangeList("HSV method requires at least one sample range")
        if not 0 <= self.gray_threshold <= 255:
            raise ConfigInvalid(f"gray_threshold {self.gray_threshold} outside 0..255")
        if self.method == SegMethod.PLUGIN and not self.plugin:
            raise ConfigInvalid("plugin method requires a plugin name")
        return self

    def to_json(self):
        return {
            "method": self.method.value,
            "sample_ranges": [r.to_json() for r in self.sample_ranges],
            "shock_ranges": [r.to_json() for r in self.shock_ranges],
            "gray_threshold": int(self.gray_threshold),
            "plugin": self.plugin,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            method=SegMethod(obj.get("method", "auto-hsv")),
            sample_ranges=[HsvRange.from_json(r) for r in obj.get("sample_ranges", [])],
            shock_ranges=[HsvRange.from_json(r) for r in obj.get("shock_ranges", [])],
            gray_threshold=int(obj.get("gray_threshold", 128)),
            plugin=obj.get("plugin"),
        )


@dataclass
class PixelClassMask:
    """Per-pixel labels for one ROI. labels is (h, w) uint8, codes 0..3."""

    labels: np.ndarray
    roi_offset: tuple[int, int] = (0, 0)

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def height(self):
        return self.labels.shape[0]

    def count(self, cls: PixelClass) -> int:
        return int(np.count_nonzero(self.labels == int(cls)))

    def copy(self) -> "PixelClassMask":
        return PixelClassMask(self.labels.copy(), self.roi_offset)


def _roi_bounds(roi, width, height):
    """Accepts an (x, y, w, h) tuple or any object with x/y/w/h attributes."""
    if roi is None:
        return 0, 0, width, height
    if hasattr(roi, "x"):
        x, y, w, h = roi.x, roi.y, roi.w, roi.h
    else:
        x, y, w, h = roi
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > width or y + h > height:
        raise RoiOutOfBounds(f"roi ({x},{y},{w},{h}) outside {width}x{height} frame")
    return int(x), int(y), int(w), int(h)


def rgb_to_hsv(r, g, b):
    """Hexcone RGB -> HSV for 8-bit channels.

    Returns (h degrees in [0, 360), s in [0, 1], v in [0, 1]); achromatic
    pixels get h = 0.
    """
    r, g, b = r / 255.0, g / 255.0, b / 255.0
    mx = max(r, g, b)
    mn = min(r, g, b)
    c = mx - mn
    v = mx
    s = 0.0 if mx == 0 else c / mx
    if c == 0:
        h = 0.0
    elif mx == r:
        h = 60.0 * (((g - b) / c) % 6.0)
    elif mx == g:
        h = 60.0 * ((b - r) / c + 2.0)
    else:
        h = 60.0 * ((r - g) / c + 4.0)
    if h >= 360.0:
        h -= 360.0
    return h, s, v


def hsv_to_rgb(h, s, v):
    """Inverse of rgb_to_hsv; returns integer channels in 0..255."""
    h = h % 360.0
    c = v * s
    x = c * (1.0 - abs((h / 60.0) % 2.0 - 1.0))
    m = v - c
    sector = int(h // 60.0) % 6
    rgb1 = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    return tuple(int(round((u + m) * 255.0)) for u in rgb1)


def rgb_to_hsv_image(pixels: np.ndarray):
    """Vectorized rgb_to_hsv over an (h, w, 3) uint8 image.

    Returns float arrays (h_deg, s, v) with the same conventions as the
    scalar function.
    """
    rgb = pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    c = mx - mn
    v = mx
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(mx > 0, c / mx, 0.0)
        hr = ((g - b) / c) % 6.0
        hg = (b - r) / c + 2.0
        hb = (r - g) / c + 4.0
    h6 = np.select([mx == r, mx == g], [hr, hg], default=hb)
    h = np.where(c > 0, 60.0 * h6, 0.0)
    h = np.where(h >= 360.0, h - 360.0, h)
    return h, s, v


def luminance(pixels: np.ndarray) -> np.ndarray:
    """ITU-R 601 luminance of an (h, w, 3) image, float64 in 0..255."""
    return pixels.astype(np.float64) @ LUMA_WEIGHTS


def _in_any_range(h, s, v, ranges):
    hit = np.zeros(h.shape, dtype=bool)
    for rng in ranges:
        hit |= rng.contains(h, s, v)
    return hit


def classify_hsv(frame, roi, config: SegmentationConfig) -> PixelClassMask:
    """Label each ROI pixel SHOCK / SAMPLE / BACKGROUND by HSV ranges.

    SHOCK takes precedence over SAMPLE on overlap. SAMPLE_EDGE is never
    produced here; it is derived later from the extracted edge trace.
    """
    if not config.sample_ranges:
        raise EmptyRangeList("HSV classification requires at least one sample range")
    x, y, w, h = _roi_bounds(roi, frame.width, frame.height)
    window = frame.pixels[y : y + h, x : x + w]
    hh, ss, vv = rgb_to_hsv_image(window)
    labels = np.zeros((h, w), dtype=np.uint8)
    if config.sample_ranges:
        labels[_in_any_range(hh, ss, vv, config.sample_ranges)] = int(PixelClass.SAMPLE)
    if config.shock_ranges:
        labels[_in_any_range(hh, ss, vv, config.shock_ranges)] = int(PixelClass.SHOCK)
    return PixelClassMask(labels, (x, y))


def classify_auto_hsv(frame, roi) -> PixelClassMask:
    """classify_hsv with the shipped preset ranges."""
    cfg = SegmentationConfig(
        method=SegMethod.AUTO_HSV,
        sample_ranges=list(AUTO_SAMPLE_RANGES),
        shock_ranges=list(AUTO_SHOCK_RANGES),
    )
    return classify_hsv(frame, roi, cfg)


def classify_gray(frame, roi, threshold: int) -> PixelClassMask:
    """Grayscale threshold; labels only SAMPLE vs BACKGROUND (single edge)."""
    if not 0 <= threshold <= 255:
        raise ConfigInvalid(f"gray threshold {threshold} outside 0..255")
    x, y, w, h = _roi_bounds(roi, frame.width, frame.height)
    window = frame.pixels[y : y + h, x : x + w]
    lum = np.rint(luminance(window))
    labels = np.where(lum >= threshold, int(PixelClass.SAMPLE), int(PixelClass.BACKGROUND))
    return PixelClassMask(labels.astype(np.uint8), (x, y))


def largest_component(mask: PixelClassMask, cls: PixelClass) -> PixelClassMask:
    """Keep only the largest 4-connected component of `cls`.

    Smaller components of that class are relabeled BACKGROUND; other
    classes are untouched. Size ties break toward the component whose
    first pixel comes earliest in row-major order. A mask without the
    class is returned unchanged (as a copy).
    """
    if cls not in (PixelClass.SAMPLE, PixelClass.SHOCK):
        raise ConfigInvalid(f"largest_component expects SAMPLE or SHOCK, got {cls}")
    binary = mask.labels == int(cls)
    if not binary.any():
        return mask.copy()
    # 4-connectivity structure (the scipy default for 2-D).
    comp, n = ndimage.label(binary)
    sizes = ndimage.sum_labels(binary, comp, index=np.arange(1, n + 1))
    best = np.max(sizes)
    candidates = np.flatnonzero(sizes == best) + 1
    if len(candidates) > 1:
        flat = comp.ravel()
        firsts = [np.flatnonzero(flat == c)[0] for c in candidates]
        keep = candidates[int(np.argmin(firsts))]
    else:
        keep = candidates[0]
    labels = mask.labels.copy()
    labels[binary & (comp != keep)] = int(PixelClass.BACKGROUND)
    return PixelClassMask(labels, mask.roi_offset)


# Plugin segmenters (e.g. learned models) register here. A plugin is a
# callable (frame, roi) -> PixelClassMask.
_PLUGIN_SEGMENTERS: dict[str, object] = {}


def register_plugin_segmenter(name: str, fn) -> None:
    _PLUGIN_SEGMENTERS[name] = fn


def get_plugin_segmenter(name: str):
    try:
        return _PLUGIN_SEGMENTERS[name]
    except KeyError:
        raise ConfigInvalid(f"no plugin segmenter registered under {name!r}") from None


def classify(frame, roi, config: SegmentationConfig) -> PixelClassMask:
    """Dispatch to the configured segmentation method."""
    config.validate()
    if config.method == SegMethod.AUTO_HSV:
        return classify_auto_hsv(frame, roi)
    if config.method == SegMethod.HSV:
        return classify_hsv(frame, roi, config)
    if config.method == SegMethod.GRAY:
        return classify_gray(frame, roi, config.gray_threshold)
    return get_plugin_segmenter(config.plugin)(frame, roi)
