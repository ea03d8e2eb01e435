from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import imageio.v3 as iio
import numpy as np
from einops import rearrange
from loguru import logger

from ..errors import ConfigError
from ..lightfield import LightField, Orientation, write_lf4d
from ..model import AttentionCapture, EpitModel


@dataclass(frozen=True)
class AttentionDump:
    r"""
    The `L x L` attention matrix of one EPI group, `L = A * S` with `A` views of `S`
    pixels each (`A = V, S = W` for horizontal EPIs, `A = U, S = H` for vertical).
    """

    block_index: int
    orientation: Orientation
    query_group: int
    matrix: np.ndarray
    angular: int
    spatial: int

    def slices(self) -> np.ndarray:
        r"""`[query view, key view, query pixel, key pixel]` cross-view attention slices."""
        return rearrange(self.matrix, "(aq sq) (ak sk) -> aq ak sq sk", aq=self.angular, ak=self.angular)

    def save(self, path: Union[str, Path]) -> Tuple[Path, Path]:
        r"""Write the slices as an `(A, A, S, S, 1)` LF4D file and the raw matrix as a PNG heatmap."""
        path = Path(path)
        binary = write_lf4d(self.slices()[..., None].astype(np.float32), path)
        peak = float(self.matrix.max()) or 1.0
        heatmap = np.round(np.clip(self.matrix / peak, 0.0, 1.0) * 255.0).astype(np.uint8)
        image = path.with_suffix(".png")
        iio.imwrite(image, heatmap)
        return binary, image


def attn_dump(
    model: EpitModel,
    lf: LightField,
    block_index: int,
    orientation: Union[Orientation, str],
    query_group: int,
) -> AttentionDump:
    r"""
    Run `model` on `lf` at float64 and keep the attention of the selected
    Basic-Transformer invocation and EPI group.
    """
    config = model.config
    orientation = Orientation(orientation)
    if not 0 <= block_index < config.num_blocks:
        raise ConfigError(f"`block`={block_index} is out of range for a model with {config.num_blocks} block(s).")
    if not config.use_transformer:
        raise ConfigError(f"Model `{model.name}` has no Basic-Transformer units to dump.")
    if orientation not in config.stage_orientations:
        raise ConfigError(f"Model `{model.name}` has no {orientation.name.lower()} stage.")
    if orientation == Orientation.HORIZONTAL:
        groups, angular, spatial = lf.u_views * lf.height, lf.v_views, lf.width
    else:
        groups, angular, spatial = lf.v_views * lf.width, lf.u_views, lf.height
    if not 0 <= query_group < groups:
        raise ConfigError(f"`query_group`={query_group} is out of range; this light field has {groups} groups.")

    capture = AttentionCapture(block_index, orientation)
    model.astype(np.float64)(lf.astype(np.float64), capture)
    matrix = capture.matrices[query_group]
    logger.debug(f"Captured attention of block {block_index} ({orientation.value}), group {query_group}: {matrix.shape}.")
    return AttentionDump(block_index, orientation, query_group, matrix, angular, spatial)
