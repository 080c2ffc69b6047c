"""Binary tensor format and tagged bundles.

Tensor record (all integers little-endian)::

    offset 0   4 bytes   magic "CDA1"
    offset 4   u8        version (1)
    offset 5   u8        dtype (1 = float64, 2 = int32)
    offset 6   u8        rank
    offset 7   u8        reserved (0)
    offset 8   rank*u32  dims
    ...        payload   row-major elements

A bundle groups named tensors in one file::

    "CDA1" | u8 version | u8 dtype=0 | u8 rank=1 | u8 reserved | u32 count
    then ``count`` sections, each a 4-byte ASCII tag followed by a tensor record.

Scenes, model checkpoints and estimator checkpoints are bundles.
"""

from __future__ import annotations

import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from curda.errors import TensorFormatError

TENSOR_MAGIC = b"CDA1"
TENSOR_VERSION = 1

_DTYPE_BUNDLE = 0
_DTYPE_F64 = 1
_DTYPE_I32 = 2

_HEADER = struct.Struct("<4sBBBB")

type Tensor = NDArray[np.float64] | NDArray[np.int32]


def _dtype_code(array: NDArray[np.generic]) -> int:
    if np.issubdtype(array.dtype, np.floating):
        return _DTYPE_F64
    if np.issubdtype(array.dtype, np.integer) or np.issubdtype(array.dtype, np.bool_):
        return _DTYPE_I32
    msg = f"unsupported tensor dtype {array.dtype}"
    raise TypeError(msg)


def encode_tensor(array: NDArray[np.generic]) -> bytes:
    """Serialize one array as a tensor record."""
    code = _dtype_code(array)
    if array.ndim > 255:
        msg = f"rank {array.ndim} exceeds 255"
        raise ValueError(msg)
    header = _HEADER.pack(TENSOR_MAGIC, TENSOR_VERSION, code, array.ndim, 0)
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    if code == _DTYPE_F64:
        payload = np.ascontiguousarray(array, dtype="<f8").tobytes()
    else:
        as_int = np.asarray(array, dtype=np.int64)
        if as_int.size and (as_int.min() < np.iinfo(np.int32).min or as_int.max() > np.iinfo(np.int32).max):
            msg = "integer tensor values do not fit in int32"
            raise ValueError(msg)
        payload = np.ascontiguousarray(array, dtype="<i4").tobytes()
    return header + dims + payload


def decode_tensor(data: bytes, offset: int = 0) -> tuple[Tensor, int]:
    """Parse a tensor record starting at ``offset``.

    Returns:
        The array and the offset just past its payload.

    Raises:
        TensorFormatError: bad magic, unknown version or dtype, or truncation.
    """
    if len(data) - offset < _HEADER.size:
        raise TensorFormatError(offset, "truncated tensor header")
    magic, version, code, rank, _reserved = _HEADER.unpack_from(data, offset)
    if magic != TENSOR_MAGIC:
        raise TensorFormatError(offset, f"bad magic {magic!r}")
    if version != TENSOR_VERSION:
        raise TensorFormatError(offset + 4, f"unsupported version {version}")
    if code not in (_DTYPE_F64, _DTYPE_I32):
        raise TensorFormatError(offset + 5, f"unknown dtype code {code}")
    cursor = offset + _HEADER.size
    if len(data) - cursor < 4 * rank:
        raise TensorFormatError(cursor, "truncated tensor dims")
    dims = struct.unpack_from(f"<{rank}I", data, cursor)
    cursor += 4 * rank
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    width = 8 if code == _DTYPE_F64 else 4
    end = cursor + count * width
    if len(data) < end:
        raise TensorFormatError(len(data), f"truncated payload: expected {count * width} bytes from offset {cursor}")
    if code == _DTYPE_F64:
        array: Tensor = np.frombuffer(data, dtype="<f8", count=count, offset=cursor).astype(np.float64).reshape(dims)
    else:
        array = np.frombuffer(data, dtype="<i4", count=count, offset=cursor).astype(np.int32).reshape(dims)
    return array, end


def save_tensor(path: Path | str, array: NDArray[np.generic]) -> Path:
    """Write ``array`` as a single tensor file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(encode_tensor(array))
    return target


def load_tensor(path: Path | str) -> Tensor:
    """Read a single tensor file; trailing bytes are an error."""
    data = Path(path).read_bytes()
    array, end = decode_tensor(data)
    if end != len(data):
        raise TensorFormatError(end, "unexpected trailing bytes")
    return array


def _check_tag(tag: str) -> bytes:
    encoded = tag.encode("ascii")
    if len(encoded) != 4:
        msg = f"bundle tags must be 4 ASCII characters, got {tag!r}"
        raise ValueError(msg)
    return encoded


def save_bundle(path: Path | str, sections: Mapping[str, NDArray[np.generic]]) -> Path:
    """Write named tensors into one bundle file, preserving section order."""
    parts = [_HEADER.pack(TENSOR_MAGIC, TENSOR_VERSION, _DTYPE_BUNDLE, 1, 0), struct.pack("<I", len(sections))]
    for tag, array in sections.items():
        parts.append(_check_tag(tag))
        parts.append(encode_tensor(array))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(b"".join(parts))
    return target


def load_bundle(path: Path | str) -> dict[str, Tensor]:
    """Read a bundle file into an ordered tag -> array mapping."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise TensorFormatError(0, "truncated bundle header")
    magic, version, code, _rank, _reserved = _HEADER.unpack_from(data, 0)
    if magic != TENSOR_MAGIC:
        raise TensorFormatError(0, f"bad magic {magic!r}")
    if version != TENSOR_VERSION:
        raise TensorFormatError(4, f"unsupported version {version}")
    if code != _DTYPE_BUNDLE:
        raise TensorFormatError(5, "not a bundle file")
    (count,) = struct.unpack_from("<I", data, _HEADER.size)
    cursor = _HEADER.size + 4
    sections: dict[str, Tensor] = {}
    for _ in range(count):
        if len(data) - cursor < 4:
            raise TensorFormatError(cursor, "truncated section tag")
        tag = data[cursor : cursor + 4].decode("ascii", errors="replace")
        array, cursor = decode_tensor(data, cursor + 4)
        sections[tag] = array
    if cursor != len(data):
        raise TensorFormatError(cursor, "unexpected trailing bytes")
    return sections
