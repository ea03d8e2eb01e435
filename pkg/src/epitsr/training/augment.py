r"""
Light-field consistent augmentation.

Spatial flips and rotations also act on the angular grid, so EPI lines keep the
slope their disparity implies.
"""
from dataclasses import dataclass

import numpy as np

from ..arguments import TrainConfig
from ..errors import ShapeMismatchError
from ..lightfield import LightField
from .patches import PatchPair


@dataclass(frozen=True)
class AugmentDraw:
    hflip: bool = False
    vflip: bool = False
    rot90: bool = False


def draw_augment(rng: np.random.Generator, cfg: TrainConfig) -> AugmentDraw:
    # Three coins are always drawn so disabling a flag does not shift later draws.
    coins = rng.random(3) < 0.5
    return AugmentDraw(
        hflip=bool(cfg.augment_hflip and coins[0]),
        vflip=bool(cfg.augment_vflip and coins[1]),
        rot90=bool(cfg.augment_rot90 and coins[2]),
    )


def augment_lf(lf: LightField, draw: AugmentDraw) -> LightField:
    data = lf.data
    if draw.hflip:
        data = data[:, ::-1, :, ::-1]
    if draw.vflip:
        data = data[::-1, :, ::-1]
    if draw.rot90:
        if lf.u_views != lf.v_views:
            raise ShapeMismatchError(f"90-degree rotation needs a square view grid, got {lf.u_views}x{lf.v_views}.")
        data = np.rot90(np.rot90(data, axes=(2, 3)), axes=(0, 1))
    return LightField(np.ascontiguousarray(data))


def augment(pair: PatchPair, draw: AugmentDraw) -> PatchPair:
    r"""Apply the same drawn transforms to both members of `pair`."""
    return PatchPair(lr=augment_lf(pair.lr, draw), hr=augment_lf(pair.hr, draw))
