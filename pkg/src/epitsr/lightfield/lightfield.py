from dataclasses import dataclass
from enum import Enum, unique
from typing import Tuple

import numpy as np
from einops import rearrange

from ..errors import ChannelError, DataError, ShapeMismatchError


BT601_LUMA = (0.299, 0.587, 0.114)


@unique
class Orientation(str, Enum):
    HORIZONTAL = "h"
    VERTICAL = "v"


# Token grouping per orientation: horizontal EPIs keep (u, h) fixed, vertical ones keep (v, w) fixed.
_EPI_PATTERNS = {
    Orientation.HORIZONTAL: "u v h w c -> (u h) v w c",
    Orientation.VERTICAL: "u v h w c -> (v w) u h c",
}
_EPI_INVERSE = {
    Orientation.HORIZONTAL: "(u h) v w c -> u v h w c",
    Orientation.VERTICAL: "(v w) u h c -> u v h w c",
}


@dataclass(frozen=True, eq=False)
class LightField:
    r"""
    A 4D light field stored as a dense `(U, V, H, W, C)` array.

    Angular coordinates `(u, v)` index the sub-aperture images, spatial coordinates
    `(h, w)` index pixels inside a view. Values are normalized intensities; they are
    clamped to [0, 1] when ingested from images but never during computation.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim != 5:
            raise ShapeMismatchError(f"LightField expects 5 extents (U, V, H, W, C), got shape {data.shape}.")
        if any(extent < 1 for extent in data.shape):
            raise ShapeMismatchError(f"LightField extents must all be >= 1, got {data.shape}.")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float32)
        if not np.all(np.isfinite(data)):
            raise DataError("LightField data contains NaN or Inf values.")
        object.__setattr__(self, "data", data)

    @property
    def u_views(self) -> int:
        return self.data.shape[0]

    @property
    def v_views(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    @property
    def channels(self) -> int:
        return self.data.shape[4]

    @property
    def extents(self) -> Tuple[int, int, int, int]:
        return self.data.shape[:4]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    def view(self, u: int, v: int) -> np.ndarray:
        return self.data[u, v]

    def astype(self, dtype) -> "LightField":
        return LightField(self.data.astype(dtype))

    def __repr__(self) -> str:
        return f"LightField(shape={self.data.shape}, dtype={self.data.dtype})"


@dataclass(frozen=True, eq=False)
class EpiVolume:
    r"""
    EPI-grouped view of a light field.

    `tokens` has shape `(G, A, S, C)`: `(U*H, V, W, C)` for horizontal volumes and
    `(V*W, U, H, C)` for vertical ones. `source_extents` keeps `(U, V, H, W)`.
    """

    orientation: Orientation
    tokens: np.ndarray
    source_extents: Tuple[int, int, int, int]


def to_epi(lf: "LightField", orientation: Orientation) -> EpiVolume:
    orientation = Orientation(orientation)
    tokens = rearrange(lf.data, _EPI_PATTERNS[orientation])
    return EpiVolume(orientation=orientation, tokens=tokens, source_extents=tuple(lf.extents))


def from_epi(volume: EpiVolume) -> "LightField":
    orientation = Orientation(volume.orientation)
    u, v, h, w = volume.source_extents
    if orientation == Orientation.HORIZONTAL:
        expected = (u * h, v, w)
    else:
        expected = (v * w, u, h)
    tokens = volume.tokens
    if tokens.ndim != 4 or tuple(tokens.shape[:3]) != expected:
        raise ShapeMismatchError(
            f"EPI volume of shape {tokens.shape} is inconsistent with source extents {volume.source_extents} "
            f"({orientation.name.lower()} expects leading extents {expected})."
        )
    if orientation == Orientation.HORIZONTAL:
        data = rearrange(tokens, _EPI_INVERSE[orientation], u=u, h=h)
    else:
        data = rearrange(tokens, _EPI_INVERSE[orientation], v=v, w=w)
    return LightField(data)


def transpose_lf(lf: "LightField") -> "LightField":
    r"""Swap `u <-> v` and `h <-> w`, mapping horizontal EPIs onto vertical ones."""
    return LightField(rearrange(lf.data, "u v h w c -> v u w h c"))


def rgb_to_y(lf: "LightField") -> "LightField":
    if lf.channels != 3:
        raise ChannelError(f"`rgb_to_y` expects 3 channels, got {lf.channels}.")
    weights = np.asarray(BT601_LUMA, dtype=lf.data.dtype)
    luma = np.clip(lf.data @ weights, 0.0, 1.0)
    return LightField(luma[..., None])
