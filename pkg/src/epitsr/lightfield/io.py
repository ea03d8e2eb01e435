r"""
Light-field file formats.

* Binary `LF4D`: magic `b"LF4D"`, little-endian u16 version (1), five u32 extents
  `(U, V, H, W, C)` and the row-major float32 payload.
* Directory: `lf.meta` with `U=<n>` / `V=<n>` lines next to `view_{u}_{v}.png` files.
"""
import struct
from pathlib import Path
from typing import Dict, Union

import imageio.v3 as iio
import numpy as np
from loguru import logger

from ..errors import DataError, FormatError, MissingViewError
from .lightfield import LightField


PathLike = Union[str, Path]

LF4D_MAGIC = b"LF4D"
LF4D_VERSION = 1
_HEADER = struct.Struct("<4sH5I")

META_FILE = "lf.meta"


def write_lf4d(array: np.ndarray, path: PathLike) -> Path:
    r"""Write any 5-D float array in the `LF4D` layout."""
    array = np.asarray(array)
    if array.ndim != 5:
        raise FormatError(f"LF4D payloads are 5-D, got shape {array.shape}.")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(LF4D_MAGIC, LF4D_VERSION, *array.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return path


def read_lf4d(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"LF4D file `{path}` does not exist.")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"`{path}` is truncated: {len(raw)} bytes is shorter than the LF4D header.")
    magic, version, *extents = _HEADER.unpack_from(raw)
    if magic != LF4D_MAGIC:
        raise FormatError(f"`{path}` has bad magic {magic!r}, expected {LF4D_MAGIC!r}.")
    if version != LF4D_VERSION:
        raise FormatError(f"`{path}` has unsupported LF4D version {version}.")
    count = int(np.prod(extents, dtype=np.int64))
    payload = raw[_HEADER.size:]
    if len(payload) != 4 * count:
        raise FormatError(
            f"`{path}` payload is truncated or oversized: {len(payload)} bytes for extents {tuple(extents)} "
            f"(expected {4 * count})."
        )
    return np.frombuffer(payload, dtype="<f4").reshape(extents).astype(np.float32)


def _read_meta(path: Path) -> Dict[str, int]:
    meta = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in ("U", "V"):
            raise FormatError(f"`{path}` line {lineno}: expected `U=<n>` or `V=<n>`, got `{line}`.")
        try:
            meta[key] = int(value)
        except ValueError:
            raise FormatError(f"`{path}` line {lineno}: `{key}` must be an integer, got `{value.strip()}`.")
    for key in ("U", "V"):
        if meta.get(key, 0) < 1:
            raise FormatError(f"`{path}` must declare a positive `{key}`.")
    return meta


def _to_unit_range(image: np.ndarray, path: Path) -> np.ndarray:
    if image.dtype == np.uint8:
        image = image.astype(np.float32) / 255.0
    elif image.dtype == np.uint16:
        image = image.astype(np.float32) / 65535.0
    elif np.issubdtype(image.dtype, np.floating):
        image = image.astype(np.float32)
    else:
        raise FormatError(f"`{path}` has unsupported pixel type {image.dtype}.")
    if image.ndim == 2:
        image = image[..., None]
    elif image.ndim == 3 and image.shape[2] == 4:
        image = image[..., :3]
    return np.clip(image, 0.0, 1.0)


def load_view_dir(path: PathLike) -> "LightField":
    path = Path(path)
    meta_path = path / META_FILE
    if not meta_path.is_file():
        raise MissingViewError(f"Light-field directory `{path}` has no `{META_FILE}`.")
    meta = _read_meta(meta_path)
    views = []
    reference = None
    for u in range(meta["U"]):
        row = []
        for v in range(meta["V"]):
            view_path = path / f"view_{u}_{v}.png"
            if not view_path.is_file():
                raise MissingViewError(f"Missing view `{view_path}` for declared {meta['U']}x{meta['V']} grid.")
            image = _to_unit_range(iio.imread(view_path), view_path)
            if reference is None:
                reference = image.shape
            elif image.shape != reference:
                raise FormatError(f"View `{view_path}` has shape {image.shape}, expected {reference}.")
            row.append(image)
        views.append(row)
    return LightField(np.stack([np.stack(row) for row in views]))


def save_view_dir(lf: "LightField", path: PathLike) -> Path:
    if lf.channels not in (1, 3):
        raise FormatError(f"PNG views need 1 or 3 channels, got {lf.channels}.")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / META_FILE).write_text(f"U={lf.u_views}\nV={lf.v_views}\n", encoding="utf-8")
    pixels = np.round(np.clip(lf.data, 0.0, 1.0) * 255.0).astype(np.uint8)
    for u in range(lf.u_views):
        for v in range(lf.v_views):
            view = pixels[u, v]
            iio.imwrite(path / f"view_{u}_{v}.png", view[..., 0] if lf.channels == 1 else view)
    return path


def is_lf_path(path: PathLike) -> bool:
    path = Path(path)
    return (path.is_file() and path.suffix == ".lf4d") or (path.is_dir() and (path / META_FILE).is_file())


def load_lf(path: PathLike) -> "LightField":
    r"""
    Load a light field from an `LF4D` file or a view directory.

    PNG views are normalized to [0, 1]; the binary format is lossless and loaded as stored.
    """
    path = Path(path)
    if path.is_dir():
        lf = load_view_dir(path)
    elif path.is_file():
        lf = LightField(read_lf4d(path))
    else:
        raise DataError(f"Light field `{path}` does not exist.")
    logger.debug(f"Loaded light field `{path}` with shape {lf.shape}.")
    return lf


def save_lf(lf: "LightField", path: PathLike) -> Path:
    r"""Save `lf` as `LF4D` when `path` ends with `.lf4d`, as a view directory otherwise."""
    path = Path(path)
    if path.suffix == ".lf4d":
        return write_lf4d(lf.data, path)
    return save_view_dir(lf, path)
