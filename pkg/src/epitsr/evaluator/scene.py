import multiprocessing as mp
from fractions import Fraction
from typing import Any, List, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from ..errors import ConfigError, ShapeMismatchError
from ..lightfield import LightField, resize_lf, rgb_to_y
from .metrics import view_metrics
from .report import PER_VIEW_COLUMNS, MetricReport


def crop_to_multiple(lf: LightField, factor: int) -> LightField:
    r"""Drop trailing rows/columns so both spatial extents divide by `factor`."""
    height, width = lf.height - lf.height % factor, lf.width - lf.width % factor
    if height == 0 or width == 0:
        raise ShapeMismatchError(f"Scene of {lf.height}x{lf.width} pixels is smaller than the scale factor {factor}.")
    if (height, width) == (lf.height, lf.width):
        return lf
    return LightField(np.ascontiguousarray(lf.data[:, :, :height, :width]))


def _check_scale(model: Any, scale: int) -> None:
    model_scale = getattr(model, "scale", scale)
    if model_scale != scale:
        raise ConfigError(f"Model `{getattr(model, 'name', model)}` upscales by {model_scale}, evaluation `scale` is {scale}.")


def evaluate_scene(
    model: Any,
    lf_hr: LightField,
    scale: int,
    shave: int = 0,
    rgb_metrics: bool = False,
    scene: str = "scene",
) -> MetricReport:
    r"""
    Downscale `lf_hr` by `1 / scale`, super-resolve it with `model` and score every
    view. RGB scenes are scored on BT.601 luma unless `rgb_metrics` is set.
    """
    _check_scale(model, scale)
    hr = crop_to_multiple(lf_hr, scale)
    lr = resize_lf(hr, Fraction(1, scale))
    sr = model(lr)
    if sr.shape != hr.shape:
        raise ShapeMismatchError(f"Model output {sr.shape} does not match the ground truth {hr.shape} of `{scene}`.")
    sr = LightField(np.clip(sr.data, 0.0, 1.0))
    if hr.channels == 3 and not rgb_metrics:
        hr, sr = rgb_to_y(hr), rgb_to_y(sr)

    rows = []
    for u in range(hr.u_views):
        for v in range(hr.v_views):
            value, structural = view_metrics(hr.view(u, v), sr.view(u, v), shave)
            rows.append({"scene": scene, "u": u, "v": v, "psnr": value, "ssim": structural})
    metadata = {"scale": scale, "model": getattr(model, "name", type(model).__name__), "shave": shave}
    return MetricReport(pd.DataFrame(rows, columns=PER_VIEW_COLUMNS), metadata)


def _evaluate_indexed(index, model, lf_hr, scale, shave, rgb_metrics, scene):
    return index, evaluate_scene(model, lf_hr, scale, shave, rgb_metrics, scene)


def evaluate_dataset(
    model: Any,
    scenes: Sequence[Tuple[str, LightField]],
    scale: int,
    shave: int = 0,
    rgb_metrics: bool = False,
    threads: int = 1,
) -> MetricReport:
    r"""
    Evaluate `(name, scene)` pairs, on a process pool when `threads > 1`. Reports are
    merged in input order whatever order the workers finish in.
    """
    _check_scale(model, scale)
    results: List[Tuple[int, MetricReport]] = []
    progress_bar = tqdm(total=len(scenes), desc="Evaluate")
    if threads > 1 and len(scenes) > 1:
        errors: List[BaseException] = []

        def result_callback(result):
            results.append(result)
            progress_bar.update()

        pool = mp.Pool(processes=min(threads, len(scenes)))
        for index, (name, lf) in enumerate(scenes):
            pool.apply_async(
                _evaluate_indexed,
                args=(index, model, lf, scale, shave, rgb_metrics, name),
                callback=result_callback,
                error_callback=errors.append,
            )
        pool.close()
        pool.join()
        if errors:
            progress_bar.close()
            raise errors[0]
    else:
        for index, (name, lf) in enumerate(scenes):
            results.append(_evaluate_indexed(index, model, lf, scale, shave, rgb_metrics, name))
            progress_bar.update()
    progress_bar.close()

    results.sort(key=lambda item: item[0])
    report = MetricReport.merge([r for _, r in results], {"scenes": len(scenes)})
    logger.info(
        f"Evaluated {len(scenes)} scene(s) at {scale}x: PSNR {report.per_dataset['psnr']:.4f} dB, "
        f"SSIM {report.per_dataset['ssim']:.4f}."
    )
    return report


def perspective_grid(model: Any, lf_hr: LightField, scale: int, shave: int = 0, scene: str = "scene") -> pd.DataFrame:
    r"""Per-view PSNR laid out by angular coordinate (`u,v,psnr` rows)."""
    return evaluate_scene(model, lf_hr, scale, shave=shave, scene=scene).grid(scene)
