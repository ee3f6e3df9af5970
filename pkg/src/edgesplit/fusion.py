"""Interlacing channel concatenation for multi-view feature fusion.

V per-view features of shape (d, s, s) are joined into one (V*d, s, s)
tensor by interleaving channels: first every view's channel 0, then every
view's channel 1, and so on. Fused channel j therefore always originates
from view ``j mod V`` (channel ``j // V`` of that view), no matter how many
channels d a sampled sub-network happens to produce. This is the normative
channel layout for anything downstream that consumes fused features.

The transforms here move opaque payload arrays; nothing in this package
computes over them. They pin the wire layout bit-exactly and provide the
inverse used to test it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ViewBundle", "NotDivisibleError", "interlace", "deinterlace"]


class NotDivisibleError(ValueError):
    """Fused channel count is not a multiple of the view count."""


@dataclass(frozen=True)
class ViewBundle:
    """V same-shape views, stored as one (V, d, s, s) array."""

    views: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.views)
        if arr.ndim != 4:
            raise ValueError(f"expected a (V, d, s, s) array, got shape {arr.shape}")
        if arr.shape[2] != arr.shape[3]:
            raise ValueError(f"views must be square, got spatial {arr.shape[2:]} ")
        if min(arr.shape) < 1:
            raise ValueError("empty view bundle")
        object.__setattr__(self, "views", arr)

    @classmethod
    def from_views(cls, views) -> "ViewBundle":
        views = [np.asarray(v) for v in views]
        shapes = {v.shape for v in views}
        if len(shapes) != 1:
            raise ValueError(f"views disagree on shape: {sorted(shapes)}")
        return cls(np.stack(views, axis=0))

    @property
    def num_views(self) -> int:
        return self.views.shape[0]

    @property
    def channels(self) -> int:
        return self.views.shape[1]

    @property
    def spatial(self) -> int:
        return self.views.shape[2]


def interlace(bundle: ViewBundle) -> np.ndarray:
    """Fuse V views of d channels into (V*d, s, s) in interleaved order.

    fused[j] == bundle.views[j % V, j // V].
    """
    v, d, s, _ = bundle.views.shape
    return np.ascontiguousarray(
        bundle.views.transpose(1, 0, 2, 3).reshape(v * d, s, s))


def deinterlace(fused: np.ndarray, num_views: int) -> ViewBundle:
    """Inverse of interlace: split (V*d, s, s) back into a V-view bundle."""
    fused = np.asarray(fused)
    if fused.ndim != 3:
        raise ValueError(f"expected a (C, s, s) array, got shape {fused.shape}")
    if num_views < 1:
        raise ValueError("num_views must be >= 1")
    c = fused.shape[0]
    if c % num_views != 0:
        raise NotDivisibleError(
            f"{c} fused channels cannot come from {num_views} views")
    d = c // num_views
    views = fused.reshape(d, num_views, *fused.shape[1:]).transpose(1, 0, 2, 3)
    return ViewBundle(np.ascontiguousarray(views))
