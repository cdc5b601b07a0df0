"""Photometric and geometric augmentations for low-light training data.

Three photometric families:

* ``ella`` — synthesizes extreme low light from well-lit frames: gamma,
  brightness scaling, contrast reduction and Gaussian noise, each included
  with a coin flip and parameterized by uniform draws.
* ``adjust_ella`` — milder variant for the pseudo-labelled branch: always
  gamma + brightness, occasionally restoring rectangular patches of the
  original image so some regions keep their well-lit appearance.
* ``pda`` — person-specific darkening: each pose's bounding box is dimmed
  by its own factor, producing uneven per-person illumination.

All operations are pure: they take an :class:`~lowpose.core.Image` plus an
explicit ``numpy.random.Generator`` and return new images, so results are
bit-reproducible for a given seed. Pixel values are clamped to [0, 255]
before every return.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BoundingBox, Image, Keypoint, PersonAnnotation, Pose, pose_bbox
from .errors import InvalidParam, ShapeMismatch
from .schema import KeypointSchema, default_schema

# ITU-R BT.601 luma weights for the grey image used by contrast reduction.
_LUMA = np.asarray([0.299, 0.587, 0.114], dtype=np.float64)


def _check_range(name: str, rng_pair: tuple[float, float],
                 lo: float = -np.inf, hi: float = np.inf) -> None:
    a, b = rng_pair
    if not (np.isfinite(a) and np.isfinite(b)):
        raise InvalidParam(f"{name} must be finite, got {rng_pair}")
    if a > b:
        raise InvalidParam(f"{name} must satisfy lo <= hi, got {rng_pair}")
    if a < lo or b > hi:
        raise InvalidParam(f"{name} must lie within [{lo}, {hi}], got {rng_pair}")


def _check_probability(name: str, p: float) -> None:
    if not np.isfinite(p) or not (0.0 <= p <= 1.0):
        raise InvalidParam(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class EllaParams:
    """Ranges for the four low-light corruption stages."""

    gamma_range: tuple[float, float] = (2.0, 5.0)
    brightness_range: tuple[float, float] = (0.01, 0.05)
    contrast_range: tuple[float, float] = (0.2, 1.0)
    noise_var_range: tuple[float, float] = (0.0, 40.0)
    per_aug_probability: float = 0.5

    def __post_init__(self) -> None:
        _check_range("gamma_range", self.gamma_range, lo=np.nextafter(0.0, 1.0))
        _check_range("brightness_range", self.brightness_range, lo=0.0)
        _check_range("contrast_range", self.contrast_range, lo=0.0, hi=1.0)
        _check_range("noise_var_range", self.noise_var_range, lo=0.0)
        _check_probability("per_aug_probability", self.per_aug_probability)


@dataclass(frozen=True)
class AdjustedEllaParams:
    """Always-on gamma + brightness, with occasional well-lit patch restores."""

    ella: EllaParams = field(default_factory=EllaParams)
    patch_restore_probability: float = 0.15
    patch_count_range: tuple[int, int] = (1, 3)
    patch_size_fraction_range: tuple[float, float] = (0.1, 0.3)

    def __post_init__(self) -> None:
        _check_probability("patch_restore_probability", self.patch_restore_probability)
        lo, hi = self.patch_count_range
        if lo < 1 or lo > hi:
            raise InvalidParam(
                f"patch_count_range must satisfy 1 <= lo <= hi, got {self.patch_count_range}"
            )
        _check_range("patch_size_fraction_range", self.patch_size_fraction_range,
                     lo=np.nextafter(0.0, 1.0), hi=1.0)


@dataclass(frozen=True)
class PdaParams:
    """Per-person darkening: brightness factor range and bbox margin."""

    brightness_range: tuple[float, float] = (0.1, 0.5)
    bbox_margin: float = 0.1

    def __post_init__(self) -> None:
        _check_range("brightness_range", self.brightness_range, lo=0.0)
        if not np.isfinite(self.bbox_margin) or self.bbox_margin < 0:
            raise InvalidParam(f"bbox_margin must be >= 0, got {self.bbox_margin}")


@dataclass(frozen=True)
class AffineParams:
    """Random rotation/scale/translation/flip into a square output."""

    rotation_range: tuple[float, float] = (-30.0, 30.0)
    scale_range: tuple[float, float] = (0.75, 1.5)
    translation_range: tuple[float, float] = (-40.0, 40.0)
    flip_probability: float = 0.5
    output_size: int = 512

    def __post_init__(self) -> None:
        _check_range("rotation_range", self.rotation_range)
        _check_range("scale_range", self.scale_range, lo=np.nextafter(0.0, 1.0))
        _check_range("translation_range", self.translation_range)
        _check_probability("flip_probability", self.flip_probability)
        if self.output_size < 1:
            raise InvalidParam(f"output_size must be >= 1, got {self.output_size}")


# ---------------------------------------------------------------------------
# Elementary photometric operations


def gamma_correct(image: Image, gamma: float) -> Image:
    """255 * (v / 255) ** gamma per value; gamma > 1 darkens."""
    if not np.isfinite(gamma) or gamma <= 0:
        raise InvalidParam(f"gamma must be finite and > 0, got {gamma}")
    out = 255.0 * np.power(image.pixels / 255.0, gamma)
    return Image(np.clip(out, 0.0, 255.0))


def adjust_brightness(image: Image, factor: float) -> Image:
    """Scale every value by a non-negative factor."""
    if not np.isfinite(factor) or factor < 0:
        raise InvalidParam(f"brightness factor must be >= 0, got {factor}")
    return Image(np.clip(image.pixels * factor, 0.0, 255.0))


def reduce_contrast(image: Image, factor: float) -> Image:
    """Blend toward the per-pixel grey image: c*v + (1-c)*grey."""
    if not np.isfinite(factor) or not (0.0 <= factor <= 1.0):
        raise InvalidParam(f"contrast factor must lie in [0, 1], got {factor}")
    px = image.pixels
    if image.channels == 3:
        grey = (px @ _LUMA)[..., None]
    else:
        grey = px
    out = factor * px + (1.0 - factor) * grey
    return Image(np.clip(out, 0.0, 255.0))


def add_gaussian_noise(image: Image, var: float, rng: np.random.Generator) -> Image:
    """Add i.i.d. zero-mean Gaussian noise with the given variance."""
    if not np.isfinite(var) or var < 0:
        raise InvalidParam(f"noise variance must be >= 0, got {var}")
    noise = rng.normal(0.0, np.sqrt(var), size=image.pixels.shape)
    return Image(np.clip(image.pixels + noise, 0.0, 255.0))


# ---------------------------------------------------------------------------
# Composite augmentations


def ella(image: Image, params: EllaParams, rng: np.random.Generator) -> Image:
    """Random extreme low-light corruption.

    The four stages run in a fixed order (gamma, brightness, contrast,
    noise). Each stage is included with ``per_aug_probability``; an included
    stage draws its parameter uniformly from its range. Draw order is fixed,
    so a given generator state always yields the same output.
    """
    out = image
    p = params.per_aug_probability
    if rng.random() < p:
        out = gamma_correct(out, float(rng.uniform(*params.gamma_range)))
    if rng.random() < p:
        out = adjust_brightness(out, float(rng.uniform(*params.brightness_range)))
    if rng.random() < p:
        out = reduce_contrast(out, float(rng.uniform(*params.contrast_range)))
    if rng.random() < p:
        out = add_gaussian_noise(out, float(rng.uniform(*params.noise_var_range)), rng)
    return out


def adjust_ella(
    image: Image, params: AdjustedEllaParams, rng: np.random.Generator
) -> tuple[Image, list[BoundingBox]]:
    """Milder low-light corruption with occasional well-lit patch restores.

    Always applies gamma then brightness (uniform draws). With probability
    ``patch_restore_probability`` it then copies 1..n random axis-aligned
    rectangles of the *original* image back into the output, where n is
    drawn from ``patch_count_range`` and each rectangle's width/height are
    independent fractions of the image width/height.

    Returns the augmented image and the list of restored patches (possibly
    empty), each as an integer-aligned :class:`BoundingBox`.
    """
    out = gamma_correct(image, float(rng.uniform(*params.ella.gamma_range)))
    out = adjust_brightness(out, float(rng.uniform(*params.ella.brightness_range)))
    patches: list[BoundingBox] = []
    if rng.random() < params.patch_restore_probability:
        lo, hi = params.patch_count_range
        count = int(rng.integers(lo, hi + 1))
        w, h = image.width, image.height
        pixels = out.pixels.copy()
        for _ in range(count):
            frac_w = float(rng.uniform(*params.patch_size_fraction_range))
            frac_h = float(rng.uniform(*params.patch_size_fraction_range))
            pw = min(w, max(1, int(round(frac_w * w))))
            ph = min(h, max(1, int(round(frac_h * h))))
            x0 = int(rng.integers(0, w - pw + 1))
            y0 = int(rng.integers(0, h - ph + 1))
            pixels[y0:y0 + ph, x0:x0 + pw, :] = image.pixels[y0:y0 + ph, x0:x0 + pw, :]
            patches.append(BoundingBox(float(x0), float(y0), float(pw), float(ph)))
        out = Image(pixels)
    return out, patches


def _pixel_window(box: BoundingBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Integer pixel window (x0, y0, x1, y1) covered by a continuous box."""
    x0 = max(0, int(np.floor(box.x)))
    y0 = max(0, int(np.floor(box.y)))
    x1 = min(width, int(np.ceil(box.x + box.w)))
    y1 = min(height, int(np.ceil(box.y + box.h)))
    return x0, y0, x1, y1


def pda(
    image: Image,
    poses: list[Pose],
    params: PdaParams,
    rng: np.random.Generator,
) -> Image:
    """Darken each pose's bounding box by its own random factor.

    One brightness factor is drawn per pose, in pose order; where boxes
    overlap the factors compose multiplicatively. Pixels outside every box
    are untouched.
    """
    pixels = image.pixels.copy()
    for pose in poses:
        box = pose_bbox(pose, params.bbox_margin)
        b = float(rng.uniform(*params.brightness_range))
        x0, y0, x1, y1 = _pixel_window(box, image.width, image.height)
        if x1 > x0 and y1 > y0:
            pixels[y0:y1, x0:x1, :] *= b
    return Image(np.clip(pixels, 0.0, 255.0))


# ---------------------------------------------------------------------------
# Random affine


def _affine_matrix(
    params: AffineParams, in_w: int, in_h: int,
    rotation_deg: float, scale: float, tx: float, ty: float, flip: bool,
) -> np.ndarray:
    """2x3 matrix mapping input pixel coords to output pixel coords.

    Rotation and scaling act about the image center; the input center lands
    on the output center plus the translation. A flip negates x about the
    center first, so identity parameters plus flip send x to W-1-x.
    """
    theta = np.deg2rad(rotation_deg)
    lin = scale * np.asarray(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]],
        dtype=np.float64,
    )
    if flip:
        lin = lin @ np.diag([-1.0, 1.0])
    c_in = np.asarray([(in_w - 1) / 2.0, (in_h - 1) / 2.0])
    s = params.output_size
    c_out = np.asarray([(s - 1) / 2.0, (s - 1) / 2.0])
    offset = c_out + np.asarray([tx, ty]) - lin @ c_in
    return np.concatenate([lin, offset[:, None]], axis=1)


def _warp_bilinear(pixels: np.ndarray, matrix: np.ndarray, out_size: int) -> np.ndarray:
    """Inverse-map bilinear warp with zero fill outside the source."""
    lin = matrix[:, :2]
    offset = matrix[:, 2]
    inv = np.linalg.inv(lin)
    ys, xs = np.mgrid[0:out_size, 0:out_size].astype(np.float64)
    pts = np.stack([xs.ravel(), ys.ravel()])  # (2, N) output coords
    src = inv @ (pts - offset[:, None])       # (2, N) input coords
    sx, sy = src[0], src[1]

    h, w, c = pixels.shape
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0

    out = np.zeros((out_size * out_size, c), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            px = x0 + dx
            py = y0 + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (px >= 0) & (px < w) & (py >= 0) & (py < h)
            if not valid.any():
                continue
            ix = px[valid].astype(np.intp)
            iy = py[valid].astype(np.intp)
            out[valid] += weight[valid, None] * pixels[iy, ix, :]
    return out.reshape(out_size, out_size, c)


def random_affine(
    image: Image,
    annotations: list[PersonAnnotation],
    params: AffineParams,
    rng: np.random.Generator,
    schema: KeypointSchema | None = None,
) -> tuple[Image, list[PersonAnnotation]]:
    """Random rotation/scale/translation/flip of an image and its people.

    Draw order is fixed: rotation, scale, tx, ty, flip. Keypoints are mapped
    by the same matrix as the pixels; a flip additionally reorders keypoints
    by the schema's left/right permutation. Keypoints that land outside the
    output raster keep their coordinates but are marked v=0. Boxes and areas
    are recomputed from the surviving labeled keypoints.
    """
    rotation = float(rng.uniform(*params.rotation_range))
    scale = float(rng.uniform(*params.scale_range))
    tx = float(rng.uniform(*params.translation_range))
    ty = float(rng.uniform(*params.translation_range))
    flip = bool(rng.random() < params.flip_probability)

    matrix = _affine_matrix(params, image.width, image.height,
                            rotation, scale, tx, ty, flip)
    warped = _warp_bilinear(image.pixels, matrix, params.output_size)
    out_image = Image(np.clip(warped, 0.0, 255.0))

    perm: tuple[int, ...] | None = None
    if flip and annotations:
        sch = schema if schema is not None else default_schema()
        k = annotations[0].keypoint_count
        if sch.keypoint_count != k:
            raise ShapeMismatch(
                f"schema has K={sch.keypoint_count} but annotations have K={k}"
            )
        perm = sch.flip_permutation()

    lin = matrix[:, :2]
    offset = matrix[:, 2]
    size = params.output_size
    out_anns: list[PersonAnnotation] = []
    for ann in annotations:
        kps = list(ann.keypoints)
        if perm is not None:
            kps = [kps[i] for i in perm]
        mapped: list[Keypoint] = []
        for kp in kps:
            x, y = lin @ np.asarray([kp.x, kp.y]) + offset
            v = kp.v
            if not (0.0 <= x <= size - 1 and 0.0 <= y <= size - 1):
                v = 0
            mapped.append(Keypoint(float(x), float(y), v, kp.score))
        labeled = [(k.x, k.y) for k in mapped if k.labeled]
        if labeled:
            arr = np.asarray(labeled)
            x0, y0 = arr.min(axis=0)
            x1, y1 = arr.max(axis=0)
            bbox = BoundingBox(float(x0), float(y0), float(x1 - x0), float(y1 - y0))
            area = max(bbox.area, 1.0)
        else:
            bbox = BoundingBox(0.0, 0.0, 0.0, 0.0)
            area = 0.0
        out_anns.append(
            PersonAnnotation(
                id=ann.id,
                image_id=ann.image_id,
                keypoints=tuple(mapped),
                bbox=bbox,
                area=area,
                iscrowd=ann.iscrowd,
            )
        )
    return out_image, out_anns
