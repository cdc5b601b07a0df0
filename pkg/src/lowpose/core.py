"""Core value types shared across the toolkit.

All types here are immutable after construction: dataclasses are frozen and
wrapped numpy arrays are marked read-only, so instances can be shared freely
between pipeline stages without defensive copies.

Conventions:
    * image pixels are float64 in [0, 255], shape (height, width, channels);
    * keypoint visibility v is 0 (not labeled), 1 (labeled, occluded) or
      2 (labeled, visible); "labeled" means v > 0;
    * map-space arrays are channel-first (C, h, w).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParam, NoVisibleKeypoints, ShapeMismatch


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


class PoseSource(enum.Enum):
    """Where a pose came from (teacher provenance survives fusion)."""

    MAIN = "main"
    COMPLEMENTARY = "complementary"
    GROUND_TRUTH = "ground_truth"


@dataclass(frozen=True)
class Image:
    """An 8-bit-range raster held as float64.

    ``pixels`` has shape (height, width, channels) with channels 1 or 3 and
    every value in [0, 255]. Augmentations keep intermediate precision and
    re-clamp before returning, so the range invariant holds after every
    public operation.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatch(f"image array must be (h, w, c), got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ShapeMismatch(f"image must be at least 1x1, got {w}x{h}")
        if c not in (1, 3):
            raise ShapeMismatch(f"image must have 1 or 3 channels, got {c}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParam("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise InvalidParam("image values must lie in [0, 255]")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class Keypoint:
    """One keypoint: position, visibility flag, and an optional score."""

    x: float
    y: float
    v: int = 0
    score: float = 0.0

    def __post_init__(self) -> None:
        if self.v not in (0, 1, 2):
            raise InvalidParam(f"keypoint visibility must be 0, 1 or 2, got {self.v}")
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvalidParam("keypoint coordinates must be finite")
        if not np.isfinite(self.score) or not (0.0 <= self.score <= 1.0):
            raise InvalidParam(f"keypoint score must lie in [0, 1], got {self.score}")

    @property
    def labeled(self) -> bool:
        return self.v > 0


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box (x, y, w, h) in pixels; w and h are non-negative."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        vals = (self.x, self.y, self.w, self.h)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidParam("bounding box values must be finite")
        if self.w < 0 or self.h < 0:
            raise InvalidParam(f"bounding box w/h must be >= 0, got {self.w}x{self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.w, self.h))


@dataclass(frozen=True)
class Pose:
    """A scored multi-keypoint detection or annotation.

    ``center`` is stored explicitly: poses built from keypoints put the mean
    of their labeled keypoints there (see :meth:`from_keypoints`), while the
    center-map decoder stores the detected peak location instead.
    """

    keypoints: tuple[Keypoint, ...]
    center: tuple[float, float]
    score: float
    source: PoseSource = PoseSource.MAIN

    def __post_init__(self) -> None:
        if len(self.keypoints) == 0:
            raise InvalidParam("pose must have at least one keypoint")
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        cx, cy = self.center
        if not (np.isfinite(cx) and np.isfinite(cy)):
            raise InvalidParam("pose center must be finite")
        object.__setattr__(self, "center", (float(cx), float(cy)))
        if not np.isfinite(self.score) or not (0.0 <= self.score <= 1.0):
            raise InvalidParam(f"pose score must lie in [0, 1], got {self.score}")

    @classmethod
    def from_keypoints(
        cls,
        keypoints: tuple[Keypoint, ...] | list[Keypoint],
        score: float,
        source: PoseSource = PoseSource.MAIN,
    ) -> "Pose":
        """Build a pose whose center is the mean of its labeled keypoints."""
        kps = tuple(keypoints)
        labeled = [(k.x, k.y) for k in kps if k.labeled]
        if not labeled:
            raise NoVisibleKeypoints("pose has no labeled keypoint to center on")
        arr = np.asarray(labeled, dtype=np.float64)
        cx, cy = arr.mean(axis=0)
        return cls(keypoints=kps, center=(float(cx), float(cy)), score=score, source=source)

    @property
    def keypoint_count(self) -> int:
        return len(self.keypoints)

    def keypoint_array(self) -> np.ndarray:
        """(K, 4) float array of [x, y, v, score] rows."""
        return np.asarray(
            [[k.x, k.y, float(k.v), k.score] for k in self.keypoints],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class PersonAnnotation:
    """One ground-truth person: keypoints plus box and object area."""

    id: int
    image_id: int
    keypoints: tuple[Keypoint, ...]
    bbox: BoundingBox
    area: float = -1.0
    iscrowd: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        if len(self.keypoints) == 0:
            raise InvalidParam("annotation must have at least one keypoint")
        area = self.area
        if area < 0:
            area = self.bbox.area
            object.__setattr__(self, "area", float(area))
        if not np.isfinite(area):
            raise InvalidParam("annotation area must be finite")
        if any(k.labeled for k in self.keypoints) and area <= 0:
            raise InvalidParam(
                f"annotation {self.id}: area must be > 0 when keypoints are labeled"
            )

    @property
    def keypoint_count(self) -> int:
        return len(self.keypoints)

    def labeled_count(self) -> int:
        return sum(1 for k in self.keypoints if k.labeled)

    def to_pose(self) -> Pose:
        """View this annotation as a ground-truth pose (score 1)."""
        return Pose.from_keypoints(self.keypoints, score=1.0, source=PoseSource.GROUND_TRUTH)


@dataclass(frozen=True)
class TargetMaps:
    """Dense training targets for the center-based representation.

    Shapes for K keypoint types on an (h, w) map grid:
        heatmaps:       (K + 1, h, w)  -- channel K is the person-center map
        heatmap_weight: (K + 1, h, w)
        offsets:        (2K, h, w)     -- channels (2k, 2k+1) are (dx, dy)
        offset_weight:  (2K, h, w)
    """

    heatmaps: np.ndarray
    offsets: np.ndarray
    heatmap_weight: np.ndarray
    offset_weight: np.ndarray

    def __post_init__(self) -> None:
        hm = np.asarray(self.heatmaps, dtype=np.float64)
        off = np.asarray(self.offsets, dtype=np.float64)
        hw = np.asarray(self.heatmap_weight, dtype=np.float64)
        ow = np.asarray(self.offset_weight, dtype=np.float64)
        if hm.ndim != 3 or off.ndim != 3:
            raise ShapeMismatch("target maps must be channel-first 3-D arrays")
        if off.shape[0] % 2 != 0:
            raise ShapeMismatch("offset maps must have an even channel count")
        k = off.shape[0] // 2
        if hm.shape[0] != k + 1:
            raise ShapeMismatch(
                f"heatmaps have {hm.shape[0]} channels but offsets imply K={k}"
            )
        if hm.shape[1:] != off.shape[1:]:
            raise ShapeMismatch("heatmaps and offsets disagree on map size")
        if hw.shape != hm.shape or ow.shape != off.shape:
            raise ShapeMismatch("weight maps must match their value maps in shape")
        for name, arr in (("heatmaps", hm), ("offsets", off),
                          ("heatmap_weight", hw), ("offset_weight", ow)):
            if not np.all(np.isfinite(arr)):
                raise InvalidParam(f"{name} contains non-finite values")
        if hm.size and (hm.min() < 0.0 or hm.max() > 1.0):
            raise InvalidParam("heatmap values must lie in [0, 1]")
        if (hw.size and hw.min() < 0.0) or (ow.size and ow.min() < 0.0):
            raise InvalidParam("weight maps must be non-negative")
        object.__setattr__(self, "heatmaps", _freeze(hm))
        object.__setattr__(self, "offsets", _freeze(off))
        object.__setattr__(self, "heatmap_weight", _freeze(hw))
        object.__setattr__(self, "offset_weight", _freeze(ow))

    @property
    def keypoint_count(self) -> int:
        return self.offsets.shape[0] // 2

    @property
    def map_size(self) -> tuple[int, int]:
        """(h, w) of the map grid."""
        return self.heatmaps.shape[1], self.heatmaps.shape[2]


@dataclass(frozen=True)
class TagMap:
    """Per-pixel scalar embeddings for keypoint grouping, shape (K, h, w)."""

    tags: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.tags, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatch(f"tag map must be (K, h, w), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidParam("tag map contains non-finite values")
        object.__setattr__(self, "tags", _freeze(arr))

    @property
    def keypoint_count(self) -> int:
        return self.tags.shape[0]


def pose_bbox(pose: Pose, margin: float = 0.0) -> BoundingBox:
    """Tight box over a pose's participating keypoints, expanded by a margin.

    A keypoint participates if it is labeled (v > 0) or carries a positive
    score (predicted poses). The margin expands each side by
    ``margin * max(hull_w, hull_h)``.

    Raises:
        InvalidParam: margin is negative or non-finite.
        NoVisibleKeypoints: no keypoint participates.
    """
    if not np.isfinite(margin) or margin < 0:
        raise InvalidParam(f"margin must be finite and >= 0, got {margin}")
    pts = [(k.x, k.y) for k in pose.keypoints if k.v > 0 or k.score > 0]
    if not pts:
        raise NoVisibleKeypoints("pose has no participating keypoint for a bbox")
    arr = np.asarray(pts, dtype=np.float64)
    x0, y0 = arr.min(axis=0)
    x1, y1 = arr.max(axis=0)
    pad = margin * max(x1 - x0, y1 - y0)
    return BoundingBox(
        x=float(x0 - pad),
        y=float(y0 - pad),
        w=float((x1 - x0) + 2.0 * pad),
        h=float((y1 - y0) + 2.0 * pad),
    )
