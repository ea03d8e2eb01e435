r"""
Building blocks of EPIT on view-batched features.

Features travel as `Tensor[(B*U*V), C, H, W]`; `grid = (B, U, V)` carries the batch
and angular extents needed to regroup them into EPIs.
"""
import math
from typing import Callable, Optional, Tuple

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    conv2d,
    layer_norm,
    leaky_relu,
    linear,
    matmul,
    pixel_shuffle,
    rearrange,
    scale,
    softmax_last,
)
from ..errors import ShapeMismatchError
from ..lightfield import Orientation
from .weights import (
    AngularHeadWeights,
    BasicTransformerWeights,
    ConvWeights,
    EpiConvUnitWeights,
    SpatialConvWeights,
    SpatialHeadWeights,
    Unit,
)


Grid = Tuple[int, int, int]
AttentionHook = Optional[Callable[[np.ndarray], None]]

# (to EPI, back to views) per orientation. Horizontal groups share (u, h), vertical ones (v, w).
_TOKEN_PATTERNS = {
    Orientation.HORIZONTAL: ("(b u v) c h w -> (b u h) (v w) c", "(b u h) (v w) c -> (b u v) c h w"),
    Orientation.VERTICAL: ("(b u v) c h w -> (b v w) (u h) c", "(b v w) (u h) c -> (b u v) c h w"),
}
_PLANE_PATTERNS = {
    Orientation.HORIZONTAL: ("(b u v) c h w -> (b u h) c v w", "(b u h) c v w -> (b u v) c h w"),
    Orientation.VERTICAL: ("(b u v) c h w -> (b v w) c u h", "(b v w) c u h -> (b u v) c h w"),
}


def to_features(x: Tensor) -> Tensor:
    return rearrange(x, "b u v h w c -> (b u v) c h w")


def from_features(f: Tensor, grid: Grid) -> Tensor:
    b, u, v = grid
    return rearrange(f, "(b u v) c h w -> b u v h w c", b=b, u=u, v=v)


def conv_layer(x: Tensor, conv: ConvWeights, padding: str = "same") -> Tensor:
    return conv2d(x, conv.kernel, conv.bias, padding)


def spatial_conv(x: Tensor, weights: SpatialConvWeights, slope: float) -> Tensor:
    r"""Three 3x3 conv + LeakyReLU stages applied to every view independently."""
    for conv in weights.convs:
        x = leaky_relu(conv_layer(x, conv), slope)
    return x


def attention_scores(q: Tensor, k: Tensor) -> Tensor:
    r"""Row-stochastic `softmax(q k^T / sqrt(D))` over the key axis."""
    d = q.shape[-1]
    logits = matmul(q, rearrange(k, "... l d -> ... d l"))
    return softmax_last(scale(logits, 1.0 / math.sqrt(d)))


def basic_transformer(
    tokens: Tensor,
    weights: BasicTransformerWeights,
    slope: float,
    capture: AttentionHook = None,
) -> Tensor:
    r"""
    Single-head Basic-Transformer over `tokens: [G, L, C]`, without positional terms.

    Queries and keys come from the normalized tokens, values too; the attention
    residual adds the tokens before normalization.
    """
    t = matmul(tokens, weights.w_in)
    t_norm = layer_norm(t, weights.ln1.gamma, weights.ln1.beta)
    attention = attention_scores(matmul(t_norm, weights.w_q), matmul(t_norm, weights.w_k))
    if capture is not None:
        capture(attention.data)
    t = add(matmul(attention, matmul(t_norm, weights.w_v)), t)
    hidden = leaky_relu(linear(layer_norm(t, weights.ln2.gamma, weights.ln2.beta), weights.mlp_w1, weights.mlp_b1), slope)
    t = add(linear(hidden, weights.mlp_w2, weights.mlp_b2), t)
    return matmul(t, weights.w_out)


def epi_conv_unit(planes: Tensor, weights: EpiConvUnitWeights, slope: float) -> Tensor:
    first, second = weights.convs
    return conv_layer(leaky_relu(conv_layer(planes, first), slope), second)


def epi_stage(
    x: Tensor,
    unit: Unit,
    orientation: Orientation,
    grid: Grid,
    slope: float,
    capture: AttentionHook = None,
) -> Tensor:
    r"""Regroup features into EPIs of `orientation`, apply `unit` per EPI, regroup back."""
    b, u, v = grid
    sizes = dict(b=b, u=u, v=v, h=x.shape[2], w=x.shape[3])
    if isinstance(unit, BasicTransformerWeights):
        to_epi, back = _TOKEN_PATTERNS[orientation]
        out = basic_transformer(rearrange(x, to_epi, **sizes), unit, slope, capture)
    else:
        to_epi, back = _PLANE_PATTERNS[orientation]
        out = epi_conv_unit(rearrange(x, to_epi, **sizes), unit, slope)
    return rearrange(out, back, **sizes)


def non_local_block(x: Tensor, block, config, grid: Grid, hooks: Optional[Callable] = None) -> Tensor:
    r"""
    Horizontal then vertical stage (per `config.stage_order`), each followed by the
    block's SpatialConv and added to the block input.
    """
    shortcut = x
    for orientation in config.stage_orientations:
        hook = hooks(orientation) if hooks is not None else None
        y = epi_stage(x, block.unit_for(orientation, config), orientation, grid, config.leaky_slope, hook)
        if block.spatial is not None:
            y = spatial_conv(y, block.spatial, config.leaky_slope)
        x = add(y, shortcut) if config.block_residual else y
    return x


def spatial_upsample(x: Tensor, head: SpatialHeadWeights, factor: int, slope: float) -> Tensor:
    y = pixel_shuffle(conv_layer(x, head.expand), factor)
    return conv_layer(leaky_relu(y, slope), head.out)


def asr_upsample(x: Tensor, head: AngularHeadWeights, grid: Grid, out_views: int, slope: float) -> Tensor:
    r"""
    2x2 angular grid to `out_views x out_views`: no-pad angular conv, 1x1 channel
    expansion, pixel shuffle over the angular plane, final 3x3 spatial conv.
    """
    b, u, v = grid
    in_views = head.angular.kernel.shape[2]
    if (u, v) != (in_views, in_views):
        raise ShapeMismatchError(f"Angular SR expects a {in_views}x{in_views} view grid, got {u}x{v}.")
    h, w = x.shape[2:]
    planes = rearrange(x, "(b u v) c h w -> (b h w) c u v", b=b, u=u, v=v)
    y = conv_layer(planes, head.angular, padding="none")
    y = pixel_shuffle(conv_layer(y, head.expand), out_views)
    y = rearrange(y, "(b h w) c u v -> (b u v) c h w", b=b, h=h, w=w)
    return conv_layer(leaky_relu(y, slope), head.out)
