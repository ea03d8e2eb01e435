r"""
`EPTW` checkpoints.

Layout (little-endian): magic `b"EPTW"`, u16 version, u32 length of a UTF-8 JSON
block `{"config": ..., "meta": ...}`, u32 parameter count, then per parameter a
u16 name length, the name, a u8 rank, rank u32 extents and the float32 payload.
Parameters appear in `named_parameters` order.
"""
import json
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger

from ..arguments import EpitConfig
from ..errors import DataError, FormatError
from .epit import EpitModel
from .weights import build_weights, named_parameters, replace_arrays


PathLike = Union[str, Path]

EPTW_MAGIC = b"EPTW"
EPTW_VERSION = 1
_HEADER = struct.Struct("<4sHI")


def save_checkpoint(model: EpitModel, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    block = json.dumps({"config": model.config.to_dict(), "meta": meta or {}}, sort_keys=True).encode("utf-8")
    params = model.parameters()
    chunks = [_HEADER.pack(EPTW_MAGIC, EPTW_VERSION, len(block)), block, struct.pack("<I", len(params))]
    for name, tensor in params:
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<B{tensor.ndim}I", tensor.ndim, *tensor.shape))
        chunks.append(np.ascontiguousarray(tensor.data, dtype="<f4").tobytes())
    path.write_bytes(b"".join(chunks))
    logger.debug(f"Wrote checkpoint `{path}` with {len(params)} parameter buffers.")
    return path


class _Reader:
    def __init__(self, raw: bytes, path: Path) -> None:
        self.raw = raw
        self.path = path
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.raw):
            raise FormatError(f"Checkpoint `{self.path}` is truncated while reading {what}.")
        chunk = self.raw[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_checkpoint(path: PathLike) -> Tuple[EpitModel, Dict[str, Any]]:
    r"""Read a checkpoint, validating every name and extent against its stored config."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Checkpoint `{path}` does not exist.")
    reader = _Reader(path.read_bytes(), path)
    magic, version, block_size = reader.unpack(_HEADER.format, "header")
    if magic != EPTW_MAGIC:
        raise FormatError(f"`{path}` has bad magic {magic!r}, expected {EPTW_MAGIC!r}.")
    if version != EPTW_VERSION:
        raise FormatError(f"`{path}` has unsupported checkpoint version {version}.")
    try:
        block = json.loads(reader.take(block_size, "config block").decode("utf-8"))
        config = EpitConfig(**block["config"])
    except (ValueError, TypeError, KeyError) as e:
        raise FormatError(f"Checkpoint `{path}` holds an invalid config: {e}")

    expected = {name: tensor.shape for name, tensor in named_parameters(build_weights(config))}
    (count,) = reader.unpack("<I", "parameter count")
    if count != len(expected):
        raise FormatError(f"Checkpoint `{path}` stores {count} parameters, config implies {len(expected)}.")
    arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for _ in range(count):
        (name_size,) = reader.unpack("<H", "parameter name")
        name = reader.take(name_size, "parameter name").decode("utf-8")
        if name not in expected:
            raise FormatError(f"Checkpoint `{path}` has unexpected parameter `{name}`.")
        if name in arrays:
            raise FormatError(f"Checkpoint `{path}` stores parameter `{name}` twice.")
        (ndim,) = reader.unpack("<B", f"rank of `{name}`")
        shape = reader.unpack(f"<{ndim}I", f"extents of `{name}`")
        if tuple(shape) != expected[name]:
            raise FormatError(f"Parameter `{name}` in `{path}` has extents {shape}, config expects {expected[name]}.")
        size = int(np.prod(shape, dtype=np.int64))
        payload = reader.take(4 * size, f"payload of `{name}`")
        arrays[name] = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float32)
    if reader.offset != len(reader.raw):
        raise FormatError(f"Checkpoint `{path}` has {len(reader.raw) - reader.offset} trailing bytes.")

    weights = replace_arrays(build_weights(config, dtype=np.float32), arrays)
    model = EpitModel(config, weights, name=path.stem)
    return model, block.get("meta", {})
