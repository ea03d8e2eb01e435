from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from ..arguments import EpitConfig, TrainConfig
from ..errors import ConfigError, SceneTooSmallError
from ..lightfield import LightField, resize_lf


@dataclass(frozen=True)
class PatchPair:
    r"""A network input and its ground truth, cropped at the same spatial window in every view."""

    lr: LightField
    hr: LightField


def _origins(scene: LightField, cfg: TrainConfig, rng: Optional[np.random.Generator]) -> List[Tuple[int, int]]:
    size = cfg.hr_patch
    if scene.height < size or scene.width < size:
        raise SceneTooSmallError(
            f"Scene of {scene.height}x{scene.width} pixels is smaller than `hr_patch`={size}."
        )
    if cfg.random_crop:
        rng = np.random.default_rng(cfg.seed) if rng is None else rng
        return [
            (int(rng.integers(0, scene.height - size + 1)), int(rng.integers(0, scene.width - size + 1)))
            for _ in range(cfg.patches_per_scene)
        ]
    return [
        (top, left)
        for top in range(0, scene.height - size + 1, size)
        for left in range(0, scene.width - size + 1, size)
    ]


def _crop(scene: LightField, top: int, left: int, size: int) -> LightField:
    return LightField(np.ascontiguousarray(scene.data[:, :, top:top + size, left:left + size]))


def make_patches(scene: LightField, cfg: TrainConfig, rng: Optional[np.random.Generator] = None) -> List[PatchPair]:
    r"""
    Non-overlapping `hr_patch` tiles (or random crops with `random_crop`), each paired
    with its per-view bicubic downscale by `1 / scale`.
    """
    pairs = []
    for top, left in _origins(scene, cfg, rng):
        hr = _crop(scene, top, left, cfg.hr_patch)
        pairs.append(PatchPair(lr=resize_lf(hr, Fraction(1, cfg.scale)), hr=hr))
    return pairs


def make_asr_pairs(
    scene: LightField,
    cfg: TrainConfig,
    model_config: EpitConfig,
    rng: Optional[np.random.Generator] = None,
) -> List[PatchPair]:
    r"""
    Angular-SR pairs at full spatial resolution: the central `asr_out_views` grid is
    the target and its four corner views form the 2x2 input.
    """
    out_views = model_config.asr_out_views
    if model_config.asr_in_views != 2:
        raise ConfigError(f"Angular SR pairs are built for a 2x2 input grid, got `asr_in_views`={model_config.asr_in_views}.")
    if scene.u_views < out_views or scene.v_views < out_views:
        raise SceneTooSmallError(
            f"Angular SR needs at least {out_views}x{out_views} views, scene has {scene.u_views}x{scene.v_views}."
        )
    u0, v0 = (scene.u_views - out_views) // 2, (scene.v_views - out_views) // 2
    central = LightField(np.ascontiguousarray(scene.data[u0:u0 + out_views, v0:v0 + out_views]))
    corners = [0, out_views - 1]
    pairs = []
    for top, left in _origins(central, cfg, rng):
        hr = _crop(central, top, left, cfg.hr_patch)
        lr = LightField(np.ascontiguousarray(hr.data[np.ix_(corners, corners)]))
        pairs.append(PatchPair(lr=lr, hr=hr))
    return pairs
