r"""
Dense tensors and the reverse-mode tape.

Operations record `(op, input ids, output id, backward rule)` on the tape that is
active in the current thread. `backward` walks the records in reverse and sums
incoming gradients per tensor id.
"""
import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import NonFiniteError, NonScalarLossError


_ids = itertools.count()
_local = threading.local()


def default_dtype() -> np.dtype:
    return getattr(_local, "dtype", np.dtype(np.float32))


@contextmanager
def precision(dtype) -> Iterator[np.dtype]:
    r"""Set the dtype used for new tensors in this thread (float32 by default)."""
    previous = default_dtype()
    _local.dtype = np.dtype(dtype)
    try:
        yield _local.dtype
    finally:
        _local.dtype = previous


def anomaly_enabled() -> bool:
    return getattr(_local, "anomaly", False)


@contextmanager
def detect_anomaly(enabled: bool = True) -> Iterator[None]:
    r"""Raise `NonFiniteError` as soon as any operation yields NaN or Inf."""
    previous = anomaly_enabled()
    _local.anomaly = enabled
    try:
        yield
    finally:
        _local.anomaly = previous


@contextmanager
def record_kinks() -> Iterator[List[bytes]]:
    r"""Collect the branch pattern of every piecewise op evaluated inside the block."""
    previous = getattr(_local, "kinks", None)
    _local.kinks = []
    try:
        yield _local.kinks
    finally:
        _local.kinks = previous


def note_kink(mask: np.ndarray) -> None:
    kinks = getattr(_local, "kinks", None)
    if kinks is not None:
        kinks.append(np.packbits(np.asarray(mask, dtype=bool).ravel()).tobytes())


class Tensor:
    __slots__ = ("data", "requires_grad", "id")

    def __init__(self, data, requires_grad: bool = False, dtype=None) -> None:
        self.data = np.asarray(data, dtype=default_dtype() if dtype is None else dtype)
        self.requires_grad = requires_grad
        self.id = next(_ids)

    @classmethod
    def wrap(cls, data: np.ndarray, requires_grad: bool = False) -> "Tensor":
        r"""Wrap an op result without casting it to the context dtype."""
        tensor = cls.__new__(cls)
        tensor.data = data
        tensor.requires_grad = requires_grad
        tensor.id = next(_ids)
        return tensor

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def __add__(self, other):
        from .functional import add
        return add(self, other)

    def __radd__(self, other):
        from .functional import add
        return add(other, self)

    def __sub__(self, other):
        from .functional import sub
        return sub(self, other)

    def __mul__(self, other):
        from .functional import mul
        return mul(self, other)

    def __rmul__(self, other):
        from .functional import mul
        return mul(other, self)

    def __matmul__(self, other):
        from .functional import matmul
        return matmul(self, other)

    def __neg__(self):
        from .functional import scale
        return scale(self, -1.0)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class Node:
    op: str
    inputs: Tuple[int, ...]
    output: int
    backward: BackwardRule


class Tape:
    r"""
    Ordered record of differentiable operations.

    Use as a context manager to make it the active tape of the current thread.
    A tape is written by one thread only.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self._outer: Optional["Tape"] = None

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward: BackwardRule) -> None:
        self.nodes.append(Node(op, tuple(t.id for t in inputs), output.id, backward))

    def __len__(self) -> int:
        return len(self.nodes)

    def __enter__(self) -> "Tape":
        self._outer = active_tape()
        _local.tape = self
        return self

    def __exit__(self, *exc) -> None:
        _local.tape = self._outer
        self._outer = None


def active_tape() -> Optional[Tape]:
    return getattr(_local, "tape", None)


def as_tensor(value: Union["Tensor", np.ndarray, float]) -> "Tensor":
    if isinstance(value, Tensor):
        return value
    return Tensor.wrap(np.asarray(value))


def make_result(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward: BackwardRule) -> "Tensor":
    r"""Wrap an op output, check it in anomaly mode and record it on the active tape."""
    if anomaly_enabled() and not np.all(np.isfinite(data)):
        raise NonFiniteError(f"Operation `{op}` produced a non-finite value (output shape {np.shape(data)}).")
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor.wrap(np.asarray(data), requires_grad=requires_grad)
    tape = active_tape()
    if requires_grad and tape is not None:
        tape.record(op, inputs, out, backward)
    return out


class Gradients:
    r"""Gradient buffers keyed by tensor id; tensors without a path get exact zeros."""

    def __init__(self, buffers: Dict[int, np.ndarray]) -> None:
        self.buffers = buffers

    def __getitem__(self, tensor: "Tensor") -> np.ndarray:
        grad = self.buffers.get(tensor.id)
        if grad is None:
            return np.zeros_like(tensor.data)
        return grad

    def __contains__(self, tensor: "Tensor") -> bool:
        return tensor.id in self.buffers

    def wrt(self, tensors: Sequence["Tensor"]) -> List[np.ndarray]:
        return [self[t] for t in tensors]


def backward(tape: Tape, loss: "Tensor") -> Gradients:
    r"""
    Reverse-mode pass from a scalar `loss` over the operations recorded on `tape`.

    Each node is visited once, in reverse recording order; gradients reaching the
    same tensor along several paths are summed.
    """
    if loss.size != 1:
        raise NonScalarLossError(f"`backward` needs a scalar loss, got shape {loss.shape}.")
    grads: Dict[int, np.ndarray] = {loss.id: np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        upstream = grads.get(node.output)
        if upstream is None:
            continue
        for input_id, grad in zip(node.inputs, node.backward(upstream)):
            if grad is None:
                continue
            if input_id in grads:
                grads[input_id] = grads[input_id] + grad
            else:
                grads[input_id] = grad
    return Gradients(grads)
