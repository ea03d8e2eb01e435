from ..lightfield import LightField, resize_lf


class BicubicUpsampler:
    r"""Per-view bicubic interpolation, usable wherever an SR model is accepted."""

    name = "bicubic"

    def __init__(self, scale: int) -> None:
        self.scale = scale

    def __call__(self, lf: LightField) -> LightField:
        return resize_lf(lf, self.scale)

    def __repr__(self) -> str:
        return f"BicubicUpsampler(scale={self.scale})"
