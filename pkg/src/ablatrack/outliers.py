"""Local Outlier Factor scoring and frame filtering.

The classic density-ratio formulation: k-distance, reachability distance
reach_k(a, b) = max(k-dist(b), d(a, b)), local reachability density
lrd = 1 / mean(reach), LOF(a) = mean over neighbors b of lrd(b) / lrd(a).
Neighborhoods are exactly the k nearest other points, distance ties broken
by index order. Duplicate groups get lrd = +inf and inf/inf ratios count
as 1, so scores stay finite inside a duplicate cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, DegenerateInput, NonFinite

DEFAULT_FEATURE_NAMES = ("centerline_x", "edge_point_count", "sample_area_px", "mean_sample_luminance")


@dataclass
class FeatureVector:
    frame_index: int
    features: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)


@dataclass
class LofConfig:
    k: int = 20
    threshold: float = 1.5
    feature_names: tuple[str, ...] = field(default=DEFAULT_FEATURE_NAMES)

    def validate(self):
        if self.k < 1:
            raise ConfigInvalid("LOF neighbor count k must be >= 1")
        if not self.threshold > 0:
            raise ConfigInvalid("LOF threshold must be > 0")
        return self

    def to_json(self):
        return {"k": self.k, "threshold": self.threshold, "feature_names": list(self.feature_names)}

    @classmethod
    def from_json(cls, obj):
        return cls(
            k=int(obj.get("k", 20)),
            threshold=float(obj.get("threshold", 1.5)),
            feature_names=tuple(obj.get("feature_names", DEFAULT_FEATURE_NAMES)),
        )


def lof_scores(points: np.ndarray, k: int) -> np.ndarray:
    """LOF score per point (Euclidean metric); k is clamped to n - 1."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < 2:
        raise DegenerateInput(f"LOF needs at least 2 points, got {n}")
    if not np.all(np.isfinite(pts)):
        raise NonFinite("LOF input contains non-finite values")
    if k < 1:
        raise ConfigInvalid("k must be >= 1")
    k = min(k, n - 1)

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(dist, np.inf)  # exclude self from neighborhoods
    # stable argsort on distance keeps index order on ties
    neigh = np.argsort(dist, axis=1, kind="stable")[:, :k]
    rows = np.arange(n)[:, None]
    k_dist = dist[rows, neigh][:, -1]

    reach = np.maximum(k_dist[neigh], dist[rows, neigh])
    mean_reach = reach.mean(axis=1)
    with np.errstate(divide="ignore"):
        lrd = np.where(mean_reach > 0, 1.0 / mean_reach, np.inf)

    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = lrd[neigh] / lrd[:, None]
    both_inf = np.isinf(lrd[neigh]) & np.isinf(lrd)[:, None]
    ratios = np.where(both_inf, 1.0, ratios)
    return ratios.mean(axis=1)


def filter_frames(batch: list[FeatureVector], cfg: LofConfig | None = None) -> np.ndarray:
    """Boolean keep flag per frame.

    Features are standardized per dimension (constant dimensions dropped);
    frames whose LOF score exceeds the threshold are rejected. Degenerate
    batches (fewer than 2 frames, or no varying dimension) keep everything.
    """
    cfg = (cfg or LofConfig()).validate()
    n = len(batch)
    if n < 2:
        return np.ones(n, dtype=bool)
    X = np.stack([fv.features for fv in batch])
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    varying = std > 0
    if not varying.any():
        return np.ones(n, dtype=bool)
    Z = (X[:, varying] - mean[varying]) / std[varying]
    scores = lof_scores(Z, min(cfg.k, n - 1))
    return scores <= cfg.threshold
