import math
from typing import Tuple

import numpy as np

from ..errors import ConfigError, TextureTooSmallError
from .lightfield import LightField
from .resample import bicubic_resize, sample_matrix
from .shear import angular_center, angular_offsets


def random_texture(
    height: int,
    width: int,
    seed: int = 0,
    smoothness: int = 4,
    channels: int = 1,
) -> np.ndarray:
    r"""
    Smooth random texture in [0, 1]: uniform noise on a coarse grid, bicubic
    upsampled by `smoothness` and cropped to `(height, width[, channels])`.
    """
    if height < 1 or width < 1 or smoothness < 1:
        raise ConfigError("`height`, `width` and `smoothness` must be positive.")
    rng = np.random.default_rng(seed)
    coarse = rng.random((height // smoothness + 2, width // smoothness + 2, channels))
    fine = bicubic_resize(coarse, smoothness) if smoothness > 1 else coarse
    fine = np.clip(fine[:height, :width], 0.0, 1.0).astype(np.float32)
    return fine[..., 0] if channels == 1 else fine


def required_texture_size(disparity: float, extents: Tuple[int, int, int, int]) -> Tuple[int, int]:
    u_views, v_views, height, width = extents
    u_c, v_c = angular_center(u_views, v_views)
    reach_h = math.ceil(abs(disparity) * float(np.max(np.abs(angular_offsets(u_views, u_c)))))
    reach_w = math.ceil(abs(disparity) * float(np.max(np.abs(angular_offsets(v_views, v_c)))))
    return height + 2 * reach_h, width + 2 * reach_w


def synth_lf(texture: np.ndarray, disparity: float, extents: Tuple[int, int, int, int]) -> "LightField":
    r"""
    Light field of a fronto-parallel plane with constant `disparity`.

    `lf(u, v, h, w) = texture(h0 + h + d * (u - u_c), w0 + w + d * (v - v_c))` with
    the window origin `(h0, w0)` centered in the texture. Non-integer shifts are
    sampled with the cubic kernel.
    """
    texture = np.asarray(texture)
    if texture.ndim == 2:
        texture = texture[..., None]
    u_views, v_views, height, width = extents
    if min(extents) < 1:
        raise ConfigError(f"`extents` must be positive, got {tuple(extents)}.")
    need_h, need_w = required_texture_size(disparity, extents)
    tex_h, tex_w = texture.shape[:2]
    h0, w0 = (tex_h - height) // 2, (tex_w - width) // 2
    if tex_h < need_h or tex_w < need_w or h0 < (need_h - height) // 2 or w0 < (need_w - width) // 2:
        raise TextureTooSmallError(
            f"Texture of {tex_h}x{tex_w} is too small for extents {tuple(extents)} at disparity {disparity} "
            f"(needs at least {need_h}x{need_w})."
        )

    u_c, v_c = angular_center(u_views, v_views)
    du = disparity * angular_offsets(u_views, u_c)
    dv = disparity * angular_offsets(v_views, v_c)
    integral = np.all(du == np.round(du)) and np.all(dv == np.round(dv))

    out = np.empty((u_views, v_views, height, width, texture.shape[2]), dtype=texture.dtype)
    if not np.issubdtype(out.dtype, np.floating):
        out = out.astype(np.float32)
    for u in range(u_views):
        for v in range(v_views):
            if integral:
                top, left = h0 + int(round(du[u])), w0 + int(round(dv[v]))
                out[u, v] = texture[top:top + height, left:left + width]
            else:
                rows = sample_matrix(tex_h, h0 + np.arange(height) + du[u])
                cols = sample_matrix(tex_w, w0 + np.arange(width) + dv[v])
                view = np.einsum("ih,hwc->iwc", rows, texture.astype(np.float64))
                out[u, v] = np.einsum("jw,iwc->ijc", cols, view)
    return LightField(out)
