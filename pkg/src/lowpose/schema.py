"""Keypoint schema: names, left/right flip pairs, and OKS widths.

The schema is configuration data, not code: the default 14-keypoint layout
(CrowdPose convention) ships as ``data/crowdpose_schema.json`` and any other
layout can be loaded from a JSON file of the same shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ParseError, SchemaError

DEFAULT_SCHEMA_RESOURCE = "crowdpose_schema.json"


@dataclass(frozen=True)
class KeypointSchema:
    """Names plus symmetry and OKS metadata for one keypoint layout.

    Attributes:
        keypoint_names: one name per keypoint; length defines K.
        flip_pairs: (left, right) index pairs swapped by a horizontal flip.
            Indices not covered by any pair map to themselves.
        oks_sigmas: per-keypoint OKS width constants (the sigma_k in
            exp(-d^2 / (2 * area * sigma_k^2))).
    """

    keypoint_names: tuple[str, ...]
    flip_pairs: tuple[tuple[int, int], ...]
    oks_sigmas: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        k = len(self.keypoint_names)
        if k == 0:
            raise SchemaError("keypoint schema declares zero keypoints")
        if len(set(self.keypoint_names)) != k:
            raise SchemaError("keypoint names must be unique")
        seen: set[int] = set()
        for pair in self.flip_pairs:
            if len(pair) != 2:
                raise SchemaError(f"flip pair {pair!r} is not a pair")
            a, b = pair
            if not (0 <= a < k and 0 <= b < k) or a == b:
                raise SchemaError(f"flip pair {pair!r} out of range for K={k}")
            if a in seen or b in seen:
                raise SchemaError(f"keypoint index repeated across flip pairs: {pair!r}")
            seen.update((a, b))
        if self.oks_sigmas and len(self.oks_sigmas) != k:
            raise SchemaError(
                f"oks_sigmas has {len(self.oks_sigmas)} entries for K={k}"
            )
        if any(s <= 0 for s in self.oks_sigmas):
            raise SchemaError("oks_sigmas must be strictly positive")

    @property
    def keypoint_count(self) -> int:
        return len(self.keypoint_names)

    def flip_permutation(self) -> tuple[int, ...]:
        """Index permutation applied to keypoints by a horizontal flip."""
        perm = list(range(self.keypoint_count))
        for a, b in self.flip_pairs:
            perm[a], perm[b] = perm[b], perm[a]
        return tuple(perm)


def _schema_from_dict(doc: object, origin: str) -> KeypointSchema:
    if not isinstance(doc, dict):
        raise SchemaError(f"{origin}: schema document must be a JSON object")
    try:
        names = doc["keypoint_names"]
        pairs = doc["flip_pairs"]
    except KeyError as exc:
        raise SchemaError(f"{origin}: missing schema key {exc}") from exc
    sigmas = doc.get("oks_sigmas", [])
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise SchemaError(f"{origin}: keypoint_names must be a list of strings")
    if not isinstance(pairs, list):
        raise SchemaError(f"{origin}: flip_pairs must be a list of pairs")
    if not isinstance(sigmas, list) or not all(
        isinstance(s, (int, float)) for s in sigmas
    ):
        raise SchemaError(f"{origin}: oks_sigmas must be a list of numbers")
    norm_pairs = []
    for pair in pairs:
        if not isinstance(pair, list) or len(pair) != 2 or not all(
            isinstance(i, int) for i in pair
        ):
            raise SchemaError(f"{origin}: flip pair {pair!r} must be two integers")
        norm_pairs.append((pair[0], pair[1]))
    return KeypointSchema(
        keypoint_names=tuple(names),
        flip_pairs=tuple(norm_pairs),
        oks_sigmas=tuple(float(s) for s in sigmas),
    )


def load_schema(path: str) -> KeypointSchema:
    """Load a keypoint schema from a JSON file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return _schema_from_dict(doc, path)


def default_schema() -> KeypointSchema:
    """The built-in 14-keypoint CrowdPose-convention schema."""
    raw = resources.files("lowpose.data").joinpath(DEFAULT_SCHEMA_RESOURCE).read_text()
    return _schema_from_dict(json.loads(raw), DEFAULT_SCHEMA_RESOURCE)
