import re
from dataclasses import dataclass, field
from typing import List, Literal, Optional

from .model_args import SCALES


_SHEAR_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_shear_range(text: str) -> List[int]:
    r"""`"a..b"` -> `[a, a + 1, ..., b]`; a comma separated list is accepted too."""
    match = _SHEAR_RANGE.match(text)
    if match:
        start, stop = int(match.group(1)), int(match.group(2))
        if start > stop:
            raise ValueError(f"`shear` range `{text}` is empty.")
        return list(range(start, stop + 1))
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ValueError(f"`shear` must look like `a..b` or `a,b,c`, got `{text}`.")
    if not values:
        raise ValueError("`shear` must name at least one value.")
    return values


@dataclass
class EvalArguments:
    r"""
    Arguments for PSNR/SSIM evaluation.
    """

    scale: int = field(
        default=2,
        metadata={"help": "Downscale factor used to build LR inputs (2 or 4)."}
    )

    shave: int = field(
        default=0,
        metadata={"help": "Border pixels ignored by the metrics."}
    )

    rgb_metrics: bool = field(
        default=False,
        metadata={"help": "Score RGB scenes on all channels instead of BT.601 luma."}
    )

    grid_scene: Optional[str] = field(
        default=None,
        metadata={"help": "Scene whose per-view PSNR grid is written to `grid_out`."}
    )

    grid_out: Optional[str] = field(
        default=None,
        metadata={"help": "CSV path of the `u,v,psnr` perspective grid.", "hashed": False}
    )

    def __post_init__(self):
        if self.scale not in SCALES:
            raise ValueError("`scale` must be one of `2` and `4`.")
        if self.shave < 0:
            raise ValueError("`shave` should not be negative.")
        if (self.grid_scene is None) != (self.grid_out is None):
            raise ValueError("`grid_scene` and `grid_out` must be given together.")


@dataclass
class SweepArguments:
    r"""
    Arguments for the shear robustness sweep.
    """

    shear: str = field(
        default="-4..4",
        metadata={"help": "Integer shear values, as `a..b` or a comma separated list."}
    )

    def __post_init__(self):
        parse_shear_range(self.shear)

    def shear_values(self) -> List[int]:
        return parse_shear_range(self.shear)


@dataclass
class AttentionArguments:
    r"""
    Arguments for dumping a cross-view attention map.
    """

    block: int = field(
        default=0,
        metadata={"help": "Index of the Non-Local Cascading block."}
    )

    orient: Literal["h", "v"] = field(
        default="h",
        metadata={"help": "EPI orientation of the Basic-Transformer invocation."}
    )

    query_group: int = field(
        default=0,
        metadata={"help": "EPI group (fixed (u, h) or (v, w)) whose attention matrix is dumped."}
    )

    def __post_init__(self):
        if self.block < 0 or self.query_group < 0:
            raise ValueError("`block` and `query_group` should not be negative.")


@dataclass
class SRArguments:
    r"""
    Arguments for super-resolving one light field.
    """

    scale: Optional[int] = field(
        default=None,
        metadata={"help": "Upscale factor; must match the checkpoint when given."}
    )

    def __post_init__(self):
        if self.scale is not None and self.scale not in SCALES:
            raise ValueError("`scale` must be one of `2` and `4`.")
