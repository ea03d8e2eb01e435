from typing import Any, Sequence, Tuple

import pandas as pd
from loguru import logger
from tqdm import tqdm

from ..errors import ConfigError
from ..lightfield import LightField, ShearSpec, center_crop, shear
from .report import SWEEP_COLUMNS
from .scene import evaluate_dataset


def sweep_extents(lf: LightField, shear_values: Sequence[int]) -> Tuple[int, int]:
    r"""Spatial extents valid for every shear in `shear_values` (the widest one decides)."""
    widest = max(shear_values, key=abs)
    return ShearSpec(widest).validate(lf.extents)


def sweep_crop(lf: LightField, shear_values: Sequence[int]) -> LightField:
    r"""The unsheared scene cropped to the region the whole sweep shares."""
    return center_crop(lf, *sweep_extents(lf, shear_values))


def shear_sweep(
    model: Any,
    scenes: Sequence[Tuple[str, LightField]],
    shear_values: Sequence[int],
    scale: int,
    shave: int = 0,
    threads: int = 1,
) -> pd.DataFrame:
    r"""
    Evaluate `model` on every scene sheared by each value of `shear_values`.

    Each HR scene is sheared, then center-cropped to the region shared by the whole
    sweep, and only then downscaled, so LR and HR stay aligned and every row sees
    the same number of pixels. One `shear,psnr,ssim` row per value.
    """
    if not shear_values:
        raise ConfigError("`shear` must name at least one value.")
    extents = {name: sweep_extents(lf, shear_values) for name, lf in scenes}
    rows = []
    for s in tqdm(list(shear_values), desc="Shear sweep"):
        sheared = [(name, center_crop(shear(lf, ShearSpec(s)), *extents[name])) for name, lf in scenes]
        report = evaluate_dataset(model, sheared, scale, shave=shave, threads=threads)
        rows.append({"shear": s, **report.per_dataset})
        logger.info(f"Shear {s:+d}: PSNR {rows[-1]['psnr']:.4f} dB, SSIM {rows[-1]['ssim']:.4f}.")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
