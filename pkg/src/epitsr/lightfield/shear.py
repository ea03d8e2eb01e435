import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import EmptyValidRegionError, ShapeMismatchError
from .lightfield import LightField
from .resample import sample_matrix


def angular_center(u_views: int, v_views: int) -> Tuple[float, float]:
    return (u_views - 1) / 2.0, (v_views - 1) / 2.0


def angular_offsets(extent: int, center: float) -> np.ndarray:
    return np.arange(extent, dtype=np.float64) - center


@dataclass(frozen=True)
class ShearSpec:
    r"""
    Integer (or real) disparity offset `s` added to every view.

    View `(u, v)` is shifted by `s * (u - u_c)` rows and `s * (v - v_c)` columns.
    `center` defaults to the angular center `((U - 1) / 2, (V - 1) / 2)`.
    """

    s: float
    center: Optional[Tuple[float, float]] = None

    def resolve_center(self, u_views: int, v_views: int) -> Tuple[float, float]:
        return self.center if self.center is not None else angular_center(u_views, v_views)

    def margins(self, u_views: int, v_views: int) -> Tuple[int, int]:
        r"""Rows and columns lost on each side of every view."""
        u_c, v_c = self.resolve_center(u_views, v_views)
        max_du = float(np.max(np.abs(angular_offsets(u_views, u_c))))
        max_dv = float(np.max(np.abs(angular_offsets(v_views, v_c))))
        return math.ceil(abs(self.s) * max_du), math.ceil(abs(self.s) * max_dv)

    def validate(self, extents: Tuple[int, int, int, int]) -> Tuple[int, int]:
        u_views, v_views, height, width = extents
        margin_h, margin_w = self.margins(u_views, v_views)
        out_h, out_w = height - 2 * margin_h, width - 2 * margin_w
        if out_h < 1 or out_w < 1:
            raise EmptyValidRegionError(
                f"Shear s={self.s} on extents {tuple(extents)} leaves an empty valid region "
                f"({out_h}x{out_w})."
            )
        return out_h, out_w

    def is_integral(self, u_views: int, v_views: int) -> bool:
        u_c, v_c = self.resolve_center(u_views, v_views)
        shifts = np.concatenate([
            self.s * angular_offsets(u_views, u_c),
            self.s * angular_offsets(v_views, v_c),
        ])
        return bool(np.all(shifts == np.round(shifts)))


def shear(lf: "LightField", spec: ShearSpec) -> "LightField":
    r"""
    Shear `lf` by `spec.s` and crop to the region that is valid for every view.

    Integer shifts index the source directly; half-integer shifts (even angular
    extents) or real `s` fall back to cubic interpolation.
    """
    u_views, v_views, height, width = lf.extents
    out_h, out_w = spec.validate(lf.extents)
    margin_h, margin_w = spec.margins(u_views, v_views)
    u_c, v_c = spec.resolve_center(u_views, v_views)
    du = spec.s * angular_offsets(u_views, u_c)
    dv = spec.s * angular_offsets(v_views, v_c)

    out = np.empty((u_views, v_views, out_h, out_w, lf.channels), dtype=lf.data.dtype)
    if spec.is_integral(u_views, v_views):
        for u in range(u_views):
            h0 = margin_h + int(round(du[u]))
            for v in range(v_views):
                w0 = margin_w + int(round(dv[v]))
                out[u, v] = lf.data[u, v, h0:h0 + out_h, w0:w0 + out_w]
        return LightField(out)

    base_h = margin_h + np.arange(out_h, dtype=np.float64)
    base_w = margin_w + np.arange(out_w, dtype=np.float64)
    for u in range(u_views):
        rows = sample_matrix(height, base_h + du[u])
        for v in range(v_views):
            cols = sample_matrix(width, base_w + dv[v])
            view = np.einsum("ih,hwc->iwc", rows, lf.data[u, v].astype(np.float64))
            out[u, v] = np.einsum("jw,iwc->ijc", cols, view)
    return LightField(out)


def center_crop(lf: "LightField", height: int, width: int) -> "LightField":
    if height > lf.height or width > lf.width or height < 1 or width < 1:
        raise ShapeMismatchError(
            f"Cannot center-crop views of {lf.height}x{lf.width} to {height}x{width}."
        )
    top = (lf.height - height) // 2
    left = (lf.width - width) // 2
    return LightField(lf.data[:, :, top:top + height, left:left + width])
