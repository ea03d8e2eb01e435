import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger


PER_VIEW_COLUMNS = ["scene", "u", "v", "psnr", "ssim"]
GRID_COLUMNS = ["u", "v", "psnr"]
SWEEP_COLUMNS = ["shear", "psnr", "ssim"]

# Infinite PSNR (zero MSE) is written as this value.
PSNR_CAP = 100.0


def _fmean(values: Iterable[float]) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else math.nan


def write_csv(frame: pd.DataFrame, path: Union[str, Path], config_hash: Optional[str] = None) -> Path:
    r"""
    Write `frame` with a leading `# config_sha256=<hash>` comment line. Infinite PSNR
    values are capped at `PSNR_CAP` with a warning.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = frame.copy()
    if "psnr" in frame.columns:
        infinite = np.isinf(frame["psnr"].to_numpy(dtype=np.float64))
        if infinite.any():
            logger.warning(f"{int(infinite.sum())} infinite PSNR value(s) capped at {PSNR_CAP} dB in `{path}`.")
            frame.loc[infinite, "psnr"] = PSNR_CAP
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# config_sha256={config_hash or ''}\n")
        frame.to_csv(f, index=False, float_format="%.10f", lineterminator="\n")
    return path


@dataclass
class MetricReport:
    r"""
    Per-view PSNR/SSIM rows with the two-level aggregation: views are averaged per
    scene, scenes are averaged per dataset. Means use `math.fsum`, so they do not
    depend on row order.
    """

    per_view: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def per_scene(self) -> pd.DataFrame:
        scenes = list(dict.fromkeys(self.per_view["scene"]))
        grouped = self.per_view.groupby("scene", sort=False)
        return pd.DataFrame({
            "scene": scenes,
            "psnr": [_fmean(grouped.get_group(s)["psnr"]) for s in scenes],
            "ssim": [_fmean(grouped.get_group(s)["ssim"]) for s in scenes],
        })

    @property
    def per_dataset(self) -> Dict[str, float]:
        per_scene = self.per_scene
        return {"psnr": _fmean(per_scene["psnr"]), "ssim": _fmean(per_scene["ssim"])}

    @classmethod
    def merge(cls, reports: Iterable["MetricReport"], metadata: Optional[Dict[str, Any]] = None) -> "MetricReport":
        reports = list(reports)
        if not reports:
            return cls(pd.DataFrame(columns=PER_VIEW_COLUMNS), dict(metadata or {}))
        merged_meta = dict(reports[0].metadata)
        merged_meta.update(metadata or {})
        frame = pd.concat([r.per_view for r in reports], ignore_index=True)
        return cls(frame[PER_VIEW_COLUMNS], merged_meta)

    def grid(self, scene: Optional[str] = None) -> pd.DataFrame:
        r"""`u,v,psnr` rows of one scene, in angular order."""
        if scene is None:
            scene = self.per_view["scene"].iloc[0]
        rows = self.per_view[self.per_view["scene"] == scene]
        return rows[GRID_COLUMNS].sort_values(["u", "v"]).reset_index(drop=True)

    def to_csv(self, path: Union[str, Path], config_hash: Optional[str] = None) -> Path:
        return write_csv(self.per_view[PER_VIEW_COLUMNS], path, config_hash)
