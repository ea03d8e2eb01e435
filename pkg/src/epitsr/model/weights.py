r"""
Learnable parameter sets of the EPIT network.

Weights are frozen dataclasses of `Tensor`s. `named_parameters` flattens them into
dotted names in a fixed order, which is also the order used by initialization,
checkpoints and the optimizer.
"""
import dataclasses
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..arguments import EpitConfig
from ..autodiff import Tensor, default_dtype
from ..errors import FormatError
from ..lightfield import Orientation


@dataclass(frozen=True)
class ConvWeights:
    kernel: Tensor
    bias: Tensor


@dataclass(frozen=True)
class SpatialConvWeights:
    convs: Tuple[ConvWeights, ...]


@dataclass(frozen=True)
class LayerNormWeights:
    gamma: Tensor
    beta: Tensor


@dataclass(frozen=True)
class BasicTransformerWeights:
    w_in: Tensor
    ln1: LayerNormWeights
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    ln2: LayerNormWeights
    mlp_w1: Tensor
    mlp_b1: Tensor
    mlp_w2: Tensor
    mlp_b2: Tensor
    w_out: Tensor


@dataclass(frozen=True)
class EpiConvUnitWeights:
    r"""Two 3x3 convolutions over EPI planes, replacing a transformer unit."""

    convs: Tuple[ConvWeights, ...]


Unit = Union[BasicTransformerWeights, EpiConvUnitWeights]


@dataclass(frozen=True)
class BlockWeights:
    r"""
    One Non-Local Cascading block. `unit` serves the horizontal stage, or both stages
    when weights are shared; `unit_v` exists only for unshared vertical stages.
    """

    unit: Optional[Unit]
    unit_v: Optional[Unit]
    spatial: Optional[SpatialConvWeights]

    def unit_for(self, orientation: Orientation, config: EpitConfig) -> Unit:
        if orientation == Orientation.VERTICAL and not config.share_weights:
            return self.unit_v
        if orientation == Orientation.VERTICAL and self.unit is None:
            return self.unit_v
        return self.unit


@dataclass(frozen=True)
class SpatialHeadWeights:
    expand: ConvWeights
    out: ConvWeights


@dataclass(frozen=True)
class AngularHeadWeights:
    angular: ConvWeights
    expand: ConvWeights
    out: ConvWeights


@dataclass(frozen=True)
class EpitWeights:
    stem: SpatialConvWeights
    blocks: Tuple[BlockWeights, ...]
    head: Union[SpatialHeadWeights, AngularHeadWeights]


def _zeros(*shape: int, dtype=None) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True, dtype=dtype)


def _conv(c_out: int, c_in: int, kernel: int, dtype) -> ConvWeights:
    return ConvWeights(kernel=_zeros(c_out, c_in, kernel, kernel, dtype=dtype), bias=_zeros(c_out, dtype=dtype))


def _spatial_conv(c_in: int, channels: int, dtype) -> SpatialConvWeights:
    return SpatialConvWeights(convs=(
        _conv(channels, c_in, 3, dtype),
        _conv(channels, channels, 3, dtype),
        _conv(channels, channels, 3, dtype),
    ))


def _transformer(config: EpitConfig, dtype) -> BasicTransformerWeights:
    c, d = config.channels, config.embed_dim
    hidden = config.mlp_hidden_ratio * d
    return BasicTransformerWeights(
        w_in=_zeros(c, d, dtype=dtype),
        ln1=LayerNormWeights(gamma=_zeros(d, dtype=dtype), beta=_zeros(d, dtype=dtype)),
        w_q=_zeros(d, d, dtype=dtype),
        w_k=_zeros(d, d, dtype=dtype),
        w_v=_zeros(d, d, dtype=dtype),
        ln2=LayerNormWeights(gamma=_zeros(d, dtype=dtype), beta=_zeros(d, dtype=dtype)),
        mlp_w1=_zeros(d, hidden, dtype=dtype),
        mlp_b1=_zeros(hidden, dtype=dtype),
        mlp_w2=_zeros(hidden, d, dtype=dtype),
        mlp_b2=_zeros(d, dtype=dtype),
        w_out=_zeros(d, c, dtype=dtype),
    )


def _unit(config: EpitConfig, dtype) -> Unit:
    if config.use_transformer:
        return _transformer(config, dtype)
    c = config.channels
    return EpiConvUnitWeights(convs=(_conv(c, c, 3, dtype), _conv(c, c, 3, dtype)))


def _block(config: EpitConfig, dtype) -> BlockWeights:
    if config.share_weights:
        unit, unit_v = _unit(config, dtype), None
    else:
        unit = _unit(config, dtype) if config.use_horizontal else None
        unit_v = _unit(config, dtype) if config.use_vertical else None
    spatial = _spatial_conv(config.channels, config.channels, dtype) if config.use_spatial_conv else None
    return BlockWeights(unit=unit, unit_v=unit_v, spatial=spatial)


def build_weights(config: EpitConfig, dtype=None) -> EpitWeights:
    r"""All-zero weights with the extents implied by `config`."""
    dtype = np.dtype(default_dtype() if dtype is None else dtype)
    c = config.channels
    if config.mode == "spatial_sr":
        head = SpatialHeadWeights(
            expand=_conv(c * config.scale ** 2, c, 1, dtype),
            out=_conv(config.out_channels, c, 3, dtype),
        )
    else:
        head = AngularHeadWeights(
            angular=_conv(c, c, config.asr_in_views, dtype),
            expand=_conv(c * config.asr_out_views ** 2, c, 1, dtype),
            out=_conv(config.out_channels, c, 3, dtype),
        )
    return EpitWeights(
        stem=_spatial_conv(config.in_channels, c, dtype),
        blocks=tuple(_block(config, dtype) for _ in range(config.num_blocks)),
        head=head,
    )


def _walk(node, prefix: str) -> Iterator[Tuple[str, Tensor]]:
    if node is None:
        return
    if isinstance(node, Tensor):
        yield prefix, node
    elif isinstance(node, tuple):
        for index, item in enumerate(node):
            yield from _walk(item, f"{prefix}.{index}")
    elif dataclasses.is_dataclass(node):
        for f in dataclasses.fields(node):
            name = f"{prefix}.{f.name}" if prefix else f.name
            yield from _walk(getattr(node, f.name), name)


def named_parameters(weights: EpitWeights) -> List[Tuple[str, Tensor]]:
    return list(_walk(weights, ""))


def parameter_arrays(weights: EpitWeights) -> "OrderedDict[str, np.ndarray]":
    return OrderedDict((name, tensor.data) for name, tensor in named_parameters(weights))


def _rebuild(node, prefix: str, arrays: Mapping[str, np.ndarray]):
    if node is None:
        return None
    if isinstance(node, Tensor):
        if prefix not in arrays:
            return node
        return Tensor(arrays[prefix], requires_grad=True, dtype=arrays[prefix].dtype)
    if isinstance(node, tuple):
        return tuple(_rebuild(item, f"{prefix}.{index}", arrays) for index, item in enumerate(node))
    changes = {}
    for f in dataclasses.fields(node):
        name = f"{prefix}.{f.name}" if prefix else f.name
        changes[f.name] = _rebuild(getattr(node, f.name), name, arrays)
    return dataclasses.replace(node, **changes)


def replace_arrays(weights: EpitWeights, arrays: Mapping[str, np.ndarray]) -> EpitWeights:
    r"""New weights whose named tensors take the given arrays; others are carried over."""
    unknown = set(arrays) - {name for name, _ in named_parameters(weights)}
    if unknown:
        raise FormatError(f"Unknown parameter name(s): {sorted(unknown)}.")
    return _rebuild(weights, "", arrays)


def weights_astype(weights: EpitWeights, dtype) -> EpitWeights:
    return replace_arrays(weights, {name: array.astype(dtype) for name, array in parameter_arrays(weights).items()})


def _fans(shape: Tuple[int, ...]) -> Tuple[int, int]:
    if len(shape) == 2:
        return shape[0], shape[1]
    receptive = int(np.prod(shape[2:]))
    return shape[1] * receptive, shape[0] * receptive


def xavier_init(weights: EpitWeights, seed: int) -> EpitWeights:
    r"""
    Xavier-uniform matrices and kernels, zero biases, unit LayerNorm gains.

    Draws follow `named_parameters` order from one seeded generator, so the same
    seed always yields bit-identical weights.
    """
    rng = np.random.default_rng(seed)
    arrays = OrderedDict()
    for name, tensor in named_parameters(weights):
        if tensor.ndim >= 2:
            fan_in, fan_out = _fans(tensor.shape)
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            arrays[name] = rng.uniform(-bound, bound, size=tensor.shape).astype(tensor.dtype)
        elif name.endswith("gamma"):
            arrays[name] = np.ones(tensor.shape, dtype=tensor.dtype)
        else:
            arrays[name] = np.zeros(tensor.shape, dtype=tensor.dtype)
    return replace_arrays(weights, arrays)


def param_count(weights: EpitWeights) -> int:
    return int(sum(tensor.size for _, tensor in named_parameters(weights)))


def param_breakdown(weights: EpitWeights) -> pd.DataFrame:
    r"""Parameter count per component (`stem`, `blocks.<i>.<part>`, `head`)."""
    counts: Dict[str, int] = OrderedDict()
    for name, tensor in named_parameters(weights):
        parts = name.split(".")
        component = ".".join(parts[:3]) if parts[0] == "blocks" else parts[0]
        counts[component] = counts.get(component, 0) + tensor.size
    return pd.DataFrame({"component": list(counts), "params": list(counts.values())})


def validate_weights(weights: EpitWeights, config: EpitConfig) -> None:
    r"""Check names and extents against the layout `config` implies."""
    expected = {name: tensor.shape for name, tensor in named_parameters(build_weights(config))}
    actual = {name: tensor.shape for name, tensor in named_parameters(weights)}
    missing = sorted(set(expected) - set(actual))
    extra = sorted(set(actual) - set(expected))
    if missing or extra:
        raise FormatError(f"Weights do not match the config: missing {missing}, unexpected {extra}.")
    for name, shape in expected.items():
        if actual[name] != shape:
            raise FormatError(f"Parameter `{name}` has extents {actual[name]}, config expects {shape}.")
    for name, tensor in named_parameters(weights):
        if not np.all(np.isfinite(tensor.data)):
            raise FormatError(f"Parameter `{name}` contains non-finite values.")
