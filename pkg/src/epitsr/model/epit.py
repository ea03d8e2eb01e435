from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger

from ..arguments import EpitConfig
from ..autodiff import Tensor, add
from ..errors import ChannelError, ShapeMismatchError
from ..lightfield import LightField, Orientation, resize_matrix
from .layers import (
    AttentionHook,
    asr_upsample,
    from_features,
    non_local_block,
    spatial_conv,
    spatial_upsample,
    to_features,
)
from .weights import (
    EpitWeights,
    build_weights,
    named_parameters,
    param_breakdown,
    param_count,
    replace_arrays,
    validate_weights,
    weights_astype,
    xavier_init,
)


class AttentionCapture:
    r"""
    Keeps the attention matrix `[G, L, L]` produced by one Basic-Transformer
    invocation, selected by block index and orientation.
    """

    def __init__(self, block_index: int, orientation: Orientation) -> None:
        self.block_index = block_index
        self.orientation = Orientation(orientation)
        self.matrices: Optional[np.ndarray] = None

    def _store(self, attention: np.ndarray) -> None:
        self.matrices = np.array(attention, copy=True)

    def hooks_for(self, block_index: int) -> Optional[Callable[[Orientation], AttentionHook]]:
        if block_index != self.block_index:
            return None
        return lambda orientation: self._store if orientation == self.orientation else None


def _bicubic_skip(x: np.ndarray, factor: int) -> np.ndarray:
    rows = resize_matrix(x.shape[3], factor)
    cols = resize_matrix(x.shape[4], factor)
    out = np.einsum("ih,buvhwc->buviwc", rows, x.astype(np.float64), optimize=True)
    out = np.einsum("jw,buviwc->buvijc", cols, out, optimize=True)
    return out.astype(x.dtype)


class EpitModel:
    r"""
    EPIT network: SpatialConv stem, `num_blocks` Non-Local Cascading blocks and an
    upsampling head (spatial pixel shuffle or 2x2 -> 7x7 angular synthesis).

    Weights are immutable once built; `with_arrays` returns a new model, so one
    instance may serve several evaluation workers.
    """

    def __init__(
        self,
        config: EpitConfig,
        weights: Optional[EpitWeights] = None,
        seed: int = 0,
        name: str = "epit",
    ) -> None:
        self.config = config
        if weights is None:
            weights = xavier_init(build_weights(config), seed)
        else:
            validate_weights(weights, config)
        self.weights = weights
        self.name = name

    @property
    def scale(self) -> int:
        return self.config.scale if self.config.mode == "spatial_sr" else 1

    def parameters(self) -> List[Tuple[str, Tensor]]:
        return named_parameters(self.weights)

    def param_count(self) -> int:
        return param_count(self.weights)

    def param_breakdown(self):
        return param_breakdown(self.weights)

    def with_arrays(self, arrays) -> "EpitModel":
        return EpitModel(self.config, replace_arrays(self.weights, arrays), name=self.name)

    def astype(self, dtype) -> "EpitModel":
        return EpitModel(self.config, weights_astype(self.weights, dtype), name=self.name)

    def forward(self, x: Tensor, capture: Optional[AttentionCapture] = None) -> Tensor:
        r"""
        Map `x: [B, U, V, H, W, C_in]` to `[B, U, V, aH, aW, C_out]` in spatial mode,
        or a `[B, 2, 2, H, W, C_in]` grid to `[B, 7, 7, H, W, C_out]` in angular mode.
        """
        config = self.config
        if x.ndim != 6:
            raise ShapeMismatchError(f"EPIT expects input extents (B, U, V, H, W, C), got {x.shape}.")
        b, u, v, _, _, channels = x.shape
        if channels != config.in_channels:
            raise ChannelError(f"Model `{self.name}` expects {config.in_channels} channel(s), got {channels}.")
        grid = (b, u, v)

        f = spatial_conv(to_features(x), self.weights.stem, config.leaky_slope)
        for index, block in enumerate(self.weights.blocks):
            hooks = capture.hooks_for(index) if capture is not None else None
            f = non_local_block(f, block, config, grid, hooks)

        if config.mode == "spatial_sr":
            y = from_features(spatial_upsample(f, self.weights.head, config.scale, config.leaky_slope), grid)
            if config.global_skip:
                y = add(y, Tensor.wrap(_bicubic_skip(x.data, config.scale)))
            return y
        f = asr_upsample(f, self.weights.head, grid, config.asr_out_views, config.leaky_slope)
        return from_features(f, (b, config.asr_out_views, config.asr_out_views))

    def __call__(self, lf: LightField, capture: Optional[AttentionCapture] = None) -> LightField:
        x = Tensor(lf.data[None], dtype=lf.data.dtype)
        out = self.forward(x, capture)
        return LightField(out.data[0])

    def __repr__(self) -> str:
        return f"EpitModel(name={self.name!r}, mode={self.config.mode}, params={self.param_count()})"


def epit_forward(lf_lr: LightField, weights: EpitWeights, config: EpitConfig) -> LightField:
    r"""One-shot forward pass for callers holding bare weights."""
    logger.debug(f"EPIT forward on light field {lf_lr.shape}, mode {config.mode}.")
    return EpitModel(config, weights)(lf_lr)
