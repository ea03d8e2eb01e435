r"""
Differentiable primitives used by the EPIT network.

Every function takes `Tensor`s (or arrays, treated as constants) and returns a new
`Tensor`; nothing is modified in place.
"""
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from einops import rearrange as _rearrange
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError, ShapeMismatchError
from .tensor import Tensor, as_tensor, make_result, note_kink


ArrayLike = Union[Tensor, np.ndarray, float]

LAYER_NORM_EPS = 1e-5


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def rule(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result("add", a.data + b.data, (a, b), rule)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def rule(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result("sub", a.data - b.data, (a, b), rule)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def rule(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result("mul", a.data * b.data, (a, b), rule)


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def rule(g):
        return (g * factor,)

    return make_result("scale", x.data * factor, (x,), rule)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    r"""Batched matrix product `[..., M, K] @ [..., K, N]`, broadcasting leading extents."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatchError(f"`matmul` extents do not agree: {a.shape} @ {b.shape}.")

    def rule(g):
        grad_a = g @ np.swapaxes(b.data, -1, -2)
        grad_b = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return make_result("matmul", a.data @ b.data, (a, b), rule)


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    out = matmul(x, weight)
    return add(out, bias) if bias is not None else out


@lru_cache(maxsize=256)
def _permutation(shape: Tuple[int, ...], pattern: str, axes: Tuple[Tuple[str, int], ...]) -> np.ndarray:
    index = _rearrange(np.arange(int(np.prod(shape))).reshape(shape), pattern, **dict(axes))
    index = np.ascontiguousarray(index).ravel()
    index.setflags(write=False)
    return index


def rearrange(x: Tensor, pattern: str, **axes: int) -> Tensor:
    r"""einops `rearrange`; the backward pass scatters through the element permutation."""
    x = as_tensor(x)
    out = _rearrange(x.data, pattern, **axes)
    index = _permutation(tuple(x.shape), pattern, tuple(sorted(axes.items())))

    def rule(g):
        grad = np.empty(x.size, dtype=g.dtype)
        grad[index] = g.ravel()
        return (grad.reshape(x.shape),)

    return make_result("rearrange", np.ascontiguousarray(out), (x,), rule)


def sum_all(x: Tensor) -> Tensor:
    def rule(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result("sum", np.asarray(x.data.sum()), (x,), rule)


def mean(x: Tensor) -> Tensor:
    count = x.size

    def rule(g):
        return (np.broadcast_to(g / count, x.shape).astype(x.dtype),)

    return make_result("mean", np.asarray(x.data.mean()), (x,), rule)


def softmax_last(x: Tensor) -> Tensor:
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def rule(g):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)

    return make_result("softmax", s, (x,), rule)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    r"""Normalize over the last axis with the biased variance, then apply `gamma`, `beta`."""
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise ShapeMismatchError(
            f"`layer_norm` affine parameters {gamma.shape}/{beta.shape} do not match feature width {x.shape[-1]}."
        )
    width = x.shape[-1]
    centered = x.data - x.data.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std

    def rule(g):
        grad_normed = g * gamma.data
        grad_x = inv_std / width * (
            width * grad_normed
            - grad_normed.sum(axis=-1, keepdims=True)
            - normed * (grad_normed * normed).sum(axis=-1, keepdims=True)
        )
        flat_g = g.reshape(-1, width)
        grad_gamma = (flat_g * normed.reshape(-1, width)).sum(axis=0)
        grad_beta = flat_g.sum(axis=0)
        return grad_x, grad_gamma, grad_beta

    return make_result("layer_norm", normed * gamma.data + beta.data, (x, gamma, beta), rule)


def leaky_relu(x: Tensor, slope: float = 0.1) -> Tensor:
    r"""`x` where `x >= 0`, `slope * x` elsewhere; the derivative at 0 is 1."""
    positive = x.data >= 0
    note_kink(positive)
    gate = np.where(positive, 1.0, slope).astype(x.dtype)

    def rule(g):
        return (g * gate,)

    return make_result("leaky_relu", x.data * gate, (x,), rule)


def _padding(kernel: int, padding: str) -> Tuple[int, int]:
    if padding == "same":
        before = (kernel - 1) // 2
        return before, kernel - 1 - before
    if padding == "none":
        return 0, 0
    raise ConfigError(f"`padding` must be `same` or `none`, got `{padding}`.")


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, padding: str = "same") -> Tensor:
    r"""
    2-D cross-correlation of `x: [B, Ci, H, W]` with `weight: [Co, Ci, kh, kw]`.

    `same` zero-pads to keep `H, W`; `none` yields `H - kh + 1, W - kw + 1`.
    """
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError(f"`conv2d` input {x.shape} does not match kernel {weight.shape}.")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeMismatchError(f"`conv2d` bias {bias.shape} does not match {weight.shape[0]} output channels.")
    _, _, height, width = x.shape
    kh, kw = weight.shape[2:]
    pad_h, pad_w = _padding(kh, padding), _padding(kw, padding)
    padded = np.pad(x.data, ((0, 0), (0, 0), pad_h, pad_w))
    if padded.shape[2] < kh or padded.shape[3] < kw:
        raise ShapeMismatchError(f"`conv2d` kernel {kh}x{kw} is larger than the input {height}x{width}.")
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    out_h, out_w = windows.shape[2:4]
    out = np.einsum("bchwij,ocij->bohw", windows, weight.data, optimize=True)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def rule(g):
        grad_w = np.einsum("bchwij,bohw->ocij", windows, g, optimize=True)
        grad_padded = np.zeros(padded.shape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                grad_padded[:, :, i:i + out_h, j:j + out_w] += np.einsum(
                    "bohw,oc->bchw", g, weight.data[:, :, i, j], optimize=True
                )
        grad_x = grad_padded[:, :, pad_h[0]:pad_h[0] + height, pad_w[0]:pad_w[0] + width]
        grad_b = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return grad_x, grad_w, grad_b

    inputs = (x, weight, bias) if bias is not None else (x, weight)
    return make_result("conv2d", out, inputs, rule)


def pixel_shuffle(x: Tensor, factor: int) -> Tensor:
    r"""`[B, C*r*r, H, W] -> [B, C, r*H, r*W]` with `out[b, c, r*h+i, r*w+j] = in[b, c*r*r + i*r + j, h, w]`."""
    if x.ndim != 4 or factor < 1 or x.shape[1] % (factor * factor):
        raise ShapeMismatchError(f"`pixel_shuffle` needs channels divisible by {factor}^2, got shape {x.shape}.")
    return rearrange(x, "b (c i j) h w -> b c (h i) (w j)", i=factor, j=factor)


def pixel_unshuffle(x: Tensor, factor: int) -> Tensor:
    if x.ndim != 4 or factor < 1 or x.shape[2] % factor or x.shape[3] % factor:
        raise ShapeMismatchError(f"`pixel_unshuffle` needs spatial extents divisible by {factor}, got shape {x.shape}.")
    return rearrange(x, "b c (h i) (w j) -> b (c i j) h w", i=factor, j=factor)


def l1_loss(pred: Tensor, target: ArrayLike) -> Tensor:
    r"""Mean absolute error; the subgradient at ties is 0."""
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"`l1_loss` shapes differ: {pred.shape} vs {target.shape}.")
    diff = pred.data - target.data
    note_kink(diff > 0)
    note_kink(diff < 0)
    count = diff.size

    def rule(g):
        grad = np.sign(diff) * (g / count)
        return grad.astype(pred.dtype), (-grad).astype(target.dtype)

    return make_result("l1_loss", np.asarray(np.abs(diff).mean()), (pred, target), rule)
