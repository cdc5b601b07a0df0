"""Target encoding and pose decoding for both teacher representations.

Center-based route: people are encoded as a center heatmap plus per-keypoint
offset maps (`encode_targets`), and decoded by reading offsets at center
peaks (`decode_center_poses`).

Keypoint-based route: independent per-type keypoint peaks carry scalar
embedding tags (`extract_keypoint_peaks`) and are grouped into people by
assigning each candidate to the cluster with the nearest running-mean tag
(`group_keypoints`, assignments solved by `hungarian_assign`).

All coordinates here live at map resolution; callers divide image-space
coordinates by the output stride before encoding and multiply after
decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .assignment import hungarian_assign
from .core import Keypoint, PersonAnnotation, Pose, PoseSource, TagMap, TargetMaps
from .errors import InvalidParam, ShapeMismatch

# Pad value for cluster-assignment columns; far above any real tag cost.
# Pads are staggered by +j so equal-cost pad ties cannot arise.
_PAD_COST = 1e8
# Activation tie-break weight inside the grouping cost.
_ACTIVATION_EPS = 1e-3


@dataclass(frozen=True)
class CodecConfig:
    """Shared parameters of both codecs."""

    keypoint_count: int = 14
    heatmap_sigma: float = 2.0
    output_stride: int = 4
    peak_threshold: float = 0.01
    local_max_window: int = 3
    max_people: int = 30
    tag_group_threshold: float = 1.0
    offset_disk_radius: int = 2

    def __post_init__(self) -> None:
        if self.keypoint_count < 1:
            raise InvalidParam(f"keypoint_count must be >= 1, got {self.keypoint_count}")
        if not np.isfinite(self.heatmap_sigma) or self.heatmap_sigma <= 0:
            raise InvalidParam(f"heatmap_sigma must be > 0, got {self.heatmap_sigma}")
        if self.output_stride < 1:
            raise InvalidParam(f"output_stride must be >= 1, got {self.output_stride}")
        if not np.isfinite(self.peak_threshold) or self.peak_threshold <= 0:
            raise InvalidParam(f"peak_threshold must be > 0, got {self.peak_threshold}")
        if self.local_max_window < 1 or self.local_max_window % 2 == 0:
            raise InvalidParam(
                f"local_max_window must be odd and >= 1, got {self.local_max_window}"
            )
        if self.max_people < 1:
            raise InvalidParam(f"max_people must be >= 1, got {self.max_people}")
        if not np.isfinite(self.tag_group_threshold) or self.tag_group_threshold <= 0:
            raise InvalidParam(
                f"tag_group_threshold must be > 0, got {self.tag_group_threshold}"
            )
        if self.offset_disk_radius < 0:
            raise InvalidParam(
                f"offset_disk_radius must be >= 0, got {self.offset_disk_radius}"
            )


class KeypointCandidate(NamedTuple):
    """A keypoint peak: integer map pixel, activation, and embedding tag."""

    x: int
    y: int
    score: float
    tag: float


def _gaussian_splat(channel: np.ndarray, x: float, y: float, sigma: float) -> None:
    """Max-compose an unnormalized Gaussian centred at (x, y) into a map."""
    h, w = channel.shape
    ys = np.arange(h, dtype=np.float64)
    xs = np.arange(w, dtype=np.float64)
    d2 = (ys - y)[:, None] ** 2 + (xs - x)[None, :] ** 2
    np.maximum(channel, np.exp(-d2 / (2.0 * sigma * sigma)), out=channel)


def _in_bounds(x: float, y: float, w: int, h: int) -> bool:
    return 0.0 <= x <= w - 1 and 0.0 <= y <= h - 1


def _nearest_pixel(x: float, y: float, w: int, h: int) -> tuple[int, int]:
    """Round-half-up to the nearest pixel, clamped to the raster."""
    px = int(np.floor(x + 0.5))
    py = int(np.floor(y + 0.5))
    return min(max(px, 0), w - 1), min(max(py, 0), h - 1)


def _labeled_center(ann: PersonAnnotation) -> tuple[float, float] | None:
    pts = [(k.x, k.y) for k in ann.keypoints if k.labeled]
    if not pts:
        return None
    arr = np.asarray(pts, dtype=np.float64)
    cx, cy = arr.mean(axis=0)
    return float(cx), float(cy)


def _disk_pixels(cx: float, cy: float, radius: int, w: int, h: int) -> list[tuple[int, int]]:
    """Integer pixels within `radius` of (cx, cy), in row-major order."""
    out = []
    y0 = max(0, int(np.floor(cy - radius)))
    y1 = min(h - 1, int(np.ceil(cy + radius)))
    x0 = max(0, int(np.floor(cx - radius)))
    x1 = min(w - 1, int(np.ceil(cx + radius)))
    r2 = float(radius) ** 2
    for qy in range(y0, y1 + 1):
        for qx in range(x0, x1 + 1):
            if (qx - cx) ** 2 + (qy - cy) ** 2 <= r2:
                out.append((qx, qy))
    return out


def encode_targets(
    annotations: list[PersonAnnotation],
    cfg: CodecConfig,
    map_w: int,
    map_h: int,
) -> TargetMaps:
    """Encode people into heatmap/offset training targets.

    Keypoint channel k receives an unnormalized Gaussian at every labeled
    keypoint k (max-composed across people); channel K receives the same at
    every person center (mean of labeled keypoints). Offset channels store,
    at each pixel q of a small disk around the center, the vector from q to
    the keypoint, so reading them back at any disk pixel reconstructs the
    keypoint exactly. The offset weight is 1/sqrt(h_i^2 + w_i^2) of the
    person's box inside that person's disk; people are written in list
    order, so overlapping disks resolve to the later person.

    Keypoints or centers outside the map are skipped. No annotations is
    valid and yields all-zero maps.
    """
    k_count = cfg.keypoint_count
    for ann in annotations:
        if ann.keypoint_count != k_count:
            raise ShapeMismatch(
                f"annotation {ann.id} has {ann.keypoint_count} keypoints, expected {k_count}"
            )
    heatmaps = np.zeros((k_count + 1, map_h, map_w), dtype=np.float64)
    offsets = np.zeros((2 * k_count, map_h, map_w), dtype=np.float64)
    heatmap_weight = np.ones((k_count + 1, map_h, map_w), dtype=np.float64)
    offset_weight = np.zeros((2 * k_count, map_h, map_w), dtype=np.float64)

    for ann in annotations:
        center = _labeled_center(ann)
        for k, kp in enumerate(ann.keypoints):
            if kp.labeled and _in_bounds(kp.x, kp.y, map_w, map_h):
                _gaussian_splat(heatmaps[k], kp.x, kp.y, cfg.heatmap_sigma)
        if center is None or not _in_bounds(center[0], center[1], map_w, map_h):
            continue
        cx, cy = center
        _gaussian_splat(heatmaps[k_count], cx, cy, cfg.heatmap_sigma)
        diag = ann.bbox.diagonal
        if diag == 0.0:
            diag = 1.0
        weight = 1.0 / diag
        for qx, qy in _disk_pixels(cx, cy, cfg.offset_disk_radius, map_w, map_h):
            for k, kp in enumerate(ann.keypoints):
                if not (kp.labeled and _in_bounds(kp.x, kp.y, map_w, map_h)):
                    continue
                offsets[2 * k, qy, qx] = kp.x - qx
                offsets[2 * k + 1, qy, qx] = kp.y - qy
                offset_weight[2 * k, qy, qx] = weight
                offset_weight[2 * k + 1, qy, qx] = weight
    return TargetMaps(
        heatmaps=heatmaps,
        offsets=offsets,
        heatmap_weight=heatmap_weight,
        offset_weight=offset_weight,
    )


def encode_tag_targets(
    annotations: list[PersonAnnotation],
    cfg: CodecConfig,
    map_w: int,
    map_h: int,
) -> list[np.ndarray]:
    """Per-person tag-map read locations for the grouping loss.

    Each person maps to an int64 array of shape (M, 2): column 0 is the
    keypoint type (tag-map channel) and column 1 the flat plane index
    y*map_w + x of the keypoint's nearest pixel. Unlabeled keypoints are
    absent; keypoints whose nearest pixel falls outside the map are skipped;
    people with no usable keypoint are omitted.
    """
    k_count = cfg.keypoint_count
    out: list[np.ndarray] = []
    for ann in annotations:
        if ann.keypoint_count != k_count:
            raise ShapeMismatch(
                f"annotation {ann.id} has {ann.keypoint_count} keypoints, expected {k_count}"
            )
        rows: list[tuple[int, int]] = []
        for k, kp in enumerate(ann.keypoints):
            if not kp.labeled:
                continue
            px = int(np.floor(kp.x + 0.5))
            py = int(np.floor(kp.y + 0.5))
            if not (0 <= px < map_w and 0 <= py < map_h):
                continue
            rows.append((k, py * map_w + px))
        if rows:
            out.append(np.asarray(rows, dtype=np.int64))
    return out


def _local_maxima(plane: np.ndarray, threshold: float, window: int) -> list[tuple[int, int, float]]:
    """(y, x, value) of window-local maxima, in row-major order.

    A pixel wins the window if it is strictly greater than every neighbour
    that precedes it in row-major order and at least equal to every
    neighbour that follows — so exactly one pixel survives per tied plateau.
    """
    h, w = plane.shape
    radius = window // 2
    ok = plane >= threshold
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy == 0 and dx == 0:
                continue
            neighbor = np.full_like(plane, -np.inf)
            ys0, ys1 = max(0, -dy), min(h, h - dy)
            xs0, xs1 = max(0, -dx), min(w, w - dx)
            if ys0 < ys1 and xs0 < xs1:
                neighbor[ys0:ys1, xs0:xs1] = plane[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
            follows = dy > 0 or (dy == 0 and dx > 0)
            ok &= (plane >= neighbor) if follows else (plane > neighbor)
    ys, xs = np.nonzero(ok)
    return [(int(y), int(x), float(plane[y, x])) for y, x in zip(ys, xs)]


def decode_center_poses(
    heatmaps: np.ndarray,
    offsets: np.ndarray,
    cfg: CodecConfig,
) -> list[Pose]:
    """Decode center-representation predictions into poses.

    Center peaks (local maxima of channel K at or above peak_threshold) are
    kept up to max_people by activation; each keypoint is the peak pixel
    plus its offset vector, scored by the keypoint heatmap sampled at the
    nearest pixel. Pose score is the (clamped) center activation; the peak
    location is stored as the pose center. Output is sorted by score
    descending.
    """
    hm = np.asarray(heatmaps, dtype=np.float64)
    off = np.asarray(offsets, dtype=np.float64)
    if hm.ndim != 3 or off.ndim != 3:
        raise ShapeMismatch("prediction maps must be channel-first 3-D arrays")
    k_count = cfg.keypoint_count
    if off.shape[0] != 2 * k_count or hm.shape[0] != k_count + 1:
        raise ShapeMismatch(
            f"expected {k_count + 1} heatmap and {2 * k_count} offset channels, "
            f"got {hm.shape[0]} and {off.shape[0]}"
        )
    if hm.shape[1:] != off.shape[1:]:
        raise ShapeMismatch("heatmaps and offsets disagree on map size")
    h, w = hm.shape[1:]

    peaks = _local_maxima(hm[k_count], cfg.peak_threshold, cfg.local_max_window)
    order = sorted(range(len(peaks)), key=lambda i: (-peaks[i][2], i))
    poses: list[Pose] = []
    for i in order[: cfg.max_people]:
        qy, qx, activation = peaks[i]
        kps = []
        for k in range(k_count):
            px = qx + off[2 * k, qy, qx]
            py = qy + off[2 * k + 1, qy, qx]
            nx, ny = _nearest_pixel(px, py, w, h)
            kscore = float(np.clip(hm[k, ny, nx], 0.0, 1.0))
            kps.append(Keypoint(float(px), float(py), 2, kscore))
        poses.append(
            Pose(
                keypoints=tuple(kps),
                center=(float(qx), float(qy)),
                score=float(np.clip(activation, 0.0, 1.0)),
                source=PoseSource.MAIN,
            )
        )
    poses.sort(key=lambda p: -p.score)
    return poses


def extract_keypoint_peaks(
    heatmaps: np.ndarray,
    tags: TagMap | np.ndarray,
    cfg: CodecConfig,
) -> list[list[KeypointCandidate]]:
    """Per-type keypoint peaks with their embedding tags.

    Each type's local maxima (>= peak_threshold) are sorted by activation
    descending — row-major order breaking ties — and truncated to
    max_people.
    """
    hm = np.asarray(heatmaps, dtype=np.float64)
    tg = np.asarray(tags.tags if isinstance(tags, TagMap) else tags, dtype=np.float64)
    if hm.ndim != 3 or tg.ndim != 3:
        raise ShapeMismatch("heatmaps and tags must be channel-first 3-D arrays")
    if hm.shape[0] != cfg.keypoint_count:
        raise ShapeMismatch(
            f"expected {cfg.keypoint_count} keypoint channels, got {hm.shape[0]}"
        )
    if hm.shape != tg.shape:
        raise ShapeMismatch(f"heatmaps {hm.shape} and tags {tg.shape} disagree")
    out: list[list[KeypointCandidate]] = []
    for k in range(cfg.keypoint_count):
        peaks = _local_maxima(hm[k], cfg.peak_threshold, cfg.local_max_window)
        order = sorted(range(len(peaks)), key=lambda i: (-peaks[i][2], i))
        out.append(
            [
                KeypointCandidate(
                    x=peaks[i][1],
                    y=peaks[i][0],
                    score=peaks[i][2],
                    tag=float(tg[k, peaks[i][0], peaks[i][1]]),
                )
                for i in order[: cfg.max_people]
            ]
        )
    return out


class _Cluster:
    __slots__ = ("kps", "tag_sum", "count")

    def __init__(self) -> None:
        self.kps: dict[int, KeypointCandidate] = {}
        self.tag_sum = 0.0
        self.count = 0

    def add(self, k: int, cand: KeypointCandidate) -> None:
        self.kps[k] = cand
        self.tag_sum += cand.tag
        self.count += 1

    @property
    def mean_tag(self) -> float:
        return self.tag_sum / self.count


def group_keypoints(
    candidates: list[list[KeypointCandidate]],
    cfg: CodecConfig,
) -> list[Pose]:
    """Group per-type keypoint candidates into poses by embedding tags.

    Types are processed in fixed order. Within a type, candidates are
    assigned to clusters by minimum |tag - cluster_mean| - 1e-3*activation
    (columns padded when there are more candidates than clusters, so every
    candidate resolves); an assignment whose tag distance exceeds
    tag_group_threshold opens a new cluster instead of joining. Cluster
    means are running means over member tags.

    Each cluster becomes a pose: score = mean activation of its keypoints
    (clamped to [0, 1]), center = mean keypoint location, missing types
    v=0. Output is sorted by score descending, truncated to max_people.
    """
    if not candidates:
        return []
    if len(candidates) != cfg.keypoint_count:
        raise ShapeMismatch(
            f"expected {cfg.keypoint_count} candidate lists, got {len(candidates)}"
        )
    clusters: list[_Cluster] = []
    for k, cands in enumerate(candidates):
        if not cands:
            continue
        if not clusters:
            for cand in cands:
                cluster = _Cluster()
                cluster.add(k, cand)
                clusters.append(cluster)
            continue
        n_cand = len(cands)
        n_clu = len(clusters)
        means = np.asarray([c.mean_tag for c in clusters], dtype=np.float64)
        tags = np.asarray([c.tag for c in cands], dtype=np.float64)
        acts = np.asarray([c.score for c in cands], dtype=np.float64)
        tag_dist = np.abs(tags[:, None] - means[None, :])
        n_pad = max(0, n_cand - n_clu)
        cost = np.empty((n_cand, n_clu + n_pad), dtype=np.float64)
        cost[:, :n_clu] = tag_dist - _ACTIVATION_EPS * acts[:, None]
        for j in range(n_pad):
            cost[:, n_clu + j] = _PAD_COST + j
        pairs = hungarian_assign(cost)
        for i, j in sorted(pairs):
            cand = cands[i]
            if j < n_clu and tag_dist[i, j] <= cfg.tag_group_threshold:
                clusters[j].add(k, cand)
            else:
                cluster = _Cluster()
                cluster.add(k, cand)
                clusters.append(cluster)

    poses: list[Pose] = []
    for cluster in clusters:
        kps = []
        for k in range(cfg.keypoint_count):
            cand = cluster.kps.get(k)
            if cand is None:
                kps.append(Keypoint(0.0, 0.0, 0, 0.0))
            else:
                kps.append(
                    Keypoint(float(cand.x), float(cand.y), 2,
                             float(np.clip(cand.score, 0.0, 1.0)))
                )
        member = list(cluster.kps.values())
        score = float(np.clip(np.mean([c.score for c in member]), 0.0, 1.0))
        cx = float(np.mean([c.x for c in member]))
        cy = float(np.mean([c.y for c in member]))
        poses.append(
            Pose(keypoints=tuple(kps), center=(cx, cy), score=score,
                 source=PoseSource.COMPLEMENTARY)
        )
    poses.sort(key=lambda p: -p.score)
    return poses[: cfg.max_people]
