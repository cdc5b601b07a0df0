"""Exception taxonomy for the lowpose toolkit.

Every error raised on purpose by this package derives from :class:`LowposeError`,
so callers (and the CLI) can distinguish rejected input from genuine bugs.
"""


class LowposeError(Exception):
    """Base class for all errors raised by lowpose."""


# ---------------------------------------------------------------------------
# Core value types / geometry


class InvalidParam(LowposeError):
    """A numeric parameter is outside its documented domain."""


class ShapeMismatch(LowposeError):
    """Array arguments disagree on shape or channel count."""


class NoVisibleKeypoints(LowposeError):
    """A pose has no keypoint that participates in a geometric operation."""


class NoLabeledKeypoints(LowposeError):
    """A pose has no keypoint with visibility > 0."""


class OutOfBounds(LowposeError):
    """A coordinate lies outside the valid raster."""


# ---------------------------------------------------------------------------
# Assignment / losses


class NonFiniteCost(LowposeError):
    """An assignment cost matrix contains NaN or infinity."""


class EmptyPersons(LowposeError):
    """A loss kernel received an empty person list."""


class ZeroDiagonal(LowposeError):
    """A person's bounding box has zero diagonal, so 1/diag is undefined."""


# ---------------------------------------------------------------------------
# Fusion / evaluation


class NonPositiveArea(LowposeError):
    """An object area used for OKS is not strictly positive."""


class MissingScores(LowposeError):
    """A prediction lacks a usable (finite) score."""


class ImageIdMismatch(LowposeError):
    """Predictions reference an image id absent from the ground truth."""


# ---------------------------------------------------------------------------
# File formats: annotations / poses / config


class ParseError(LowposeError):
    """A text document could not be parsed at all (malformed JSON, bad line)."""


class SchemaError(LowposeError):
    """A parsed document violates the documented schema."""


class DanglingReference(LowposeError):
    """An annotation references an image id that is not declared."""


# ---------------------------------------------------------------------------
# Tensor container format


class ContainerError(LowposeError):
    """Base class for binary tensor-container format violations."""


class BadMagic(ContainerError):
    """The file does not start with the container magic."""


class UnsupportedVersion(ContainerError):
    """The container declares a version this reader does not understand."""


class TruncatedFile(ContainerError):
    """The file ends before the declared content does."""


class LengthMismatch(ContainerError):
    """Declared and actual byte lengths disagree (including trailing bytes)."""


class UnsupportedDtype(ContainerError):
    """A tensor declares a dtype code this reader does not understand."""


class DuplicateTensorName(ContainerError):
    """Two tensors in one container share a name."""


# ---------------------------------------------------------------------------
# Images


class UnsupportedFormat(LowposeError):
    """An image file is neither a supported PNG nor a P6 PPM."""


class DecodeError(LowposeError):
    """An image file matched a known format but could not be decoded."""
