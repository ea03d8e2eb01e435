r"""
Separable bicubic resampling following the `imresize` convention used to build
low-resolution inputs in light-field SR benchmarks.

Every 1-D resize is expressed as an `(out, in)` weight matrix so that a light
field is resampled with two `einsum` contractions over all views at once.
"""
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from ..errors import ConfigError
from .lightfield import LightField


Scale = Union[int, float, str, Fraction]

CUBIC_A = -0.5
CUBIC_SUPPORT = 4.0


def as_fraction(scale: Scale) -> Fraction:
    fraction = Fraction(scale).limit_denominator(10_000) if not isinstance(scale, Fraction) else scale
    if fraction <= 0:
        raise ConfigError(f"`scale` must be positive, got {scale}.")
    return fraction


def cubic_kernel(x: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    near = (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0
    far = a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def output_length(in_length: int, scale: Scale) -> int:
    return math.ceil(in_length * as_fraction(scale))


@lru_cache(maxsize=128)
def _resize_matrix(in_length: int, scale: Fraction, antialias: bool) -> np.ndarray:
    out_length = math.ceil(in_length * scale)
    if out_length < 1:
        raise ConfigError(f"Resizing length {in_length} by {scale} leaves no samples.")
    s = float(scale)
    if s < 1.0 and antialias:
        width = CUBIC_SUPPORT / s

        def kernel(x):
            return s * cubic_kernel(s * x)
    else:
        width = CUBIC_SUPPORT
        kernel = cubic_kernel

    # 1-based coordinates as in imresize; converted to 0-based when scattering.
    x = np.arange(1, out_length + 1, dtype=np.float64)
    u = x / s + 0.5 * (1.0 - 1.0 / s)
    left = np.floor(u - width / 2.0)
    taps = int(math.ceil(width)) + 2
    indices = left[:, None] + np.arange(taps)[None, :]
    weights = kernel(u[:, None] - indices)
    weights = weights / weights.sum(axis=1, keepdims=True)
    indices = np.clip(indices, 1, in_length).astype(np.int64) - 1

    matrix = np.zeros((out_length, in_length), dtype=np.float64)
    rows = np.repeat(np.arange(out_length), taps)
    np.add.at(matrix, (rows, indices.ravel()), weights.ravel())
    matrix.setflags(write=False)
    return matrix


def resize_matrix(in_length: int, scale: Scale, antialias: bool = True) -> np.ndarray:
    r"""`(out, in)` matrix of the 1-D bicubic resize of `in_length` samples by `scale`."""
    return _resize_matrix(int(in_length), as_fraction(scale), bool(antialias))


def sample_matrix(in_length: int, positions: Sequence[float]) -> np.ndarray:
    r"""
    Cubic interpolation matrix evaluating a length-`in_length` signal at real 0-based
    `positions`, replicating edge samples outside the signal.
    """
    positions = np.asarray(positions, dtype=np.float64)
    left = np.floor(positions) - 1.0
    indices = left[:, None] + np.arange(4)[None, :]
    weights = cubic_kernel(positions[:, None] - indices)
    weights = weights / weights.sum(axis=1, keepdims=True)
    indices = np.clip(indices, 0, in_length - 1).astype(np.int64)

    matrix = np.zeros((positions.shape[0], in_length), dtype=np.float64)
    rows = np.repeat(np.arange(positions.shape[0]), 4)
    np.add.at(matrix, (rows, indices.ravel()), weights.ravel())
    return matrix


def bicubic_resize(image: np.ndarray, scale: Scale, antialias: bool = True) -> np.ndarray:
    r"""
    Resize a `(H, W)` or `(H, W, C)` image by `scale` along both spatial axes.

    Downscaling widens the kernel by `1 / scale` when `antialias` is set; samples
    outside the image replicate the nearest edge pixel.
    """
    image = np.asarray(image)
    fraction = as_fraction(scale)
    squeeze = image.ndim == 2
    if squeeze:
        image = image[..., None]
    if image.ndim != 3:
        raise ConfigError(f"`bicubic_resize` expects a 2-D image or an (H, W, C) stack, got shape {image.shape}.")
    rows = resize_matrix(image.shape[0], fraction, antialias)
    cols = resize_matrix(image.shape[1], fraction, antialias)
    out = np.einsum("ih,hwc->iwc", rows, image.astype(np.float64), optimize=True)
    out = np.einsum("jw,iwc->ijc", cols, out, optimize=True)
    out = out.astype(image.dtype if np.issubdtype(image.dtype, np.floating) else np.float64)
    return out[..., 0] if squeeze else out


def resize_lf(lf: "LightField", scale: Scale, antialias: bool = True) -> "LightField":
    r"""Resize every sub-aperture image of `lf` by `scale`."""
    fraction = as_fraction(scale)
    rows = resize_matrix(lf.height, fraction, antialias)
    cols = resize_matrix(lf.width, fraction, antialias)
    out = np.einsum("ih,uvhwc->uviwc", rows, lf.data.astype(np.float64), optimize=True)
    out = np.einsum("jw,uviwc->uvijc", cols, out, optimize=True)
    return LightField(out.astype(lf.data.dtype))
