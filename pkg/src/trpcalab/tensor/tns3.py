"""Reader and writer for the TNS3 binary tensor format.

Layout (all little-endian):

    4 bytes   magic b"TNS3"
    1 byte    version (0x01)
    3 x u64   n1, n2, n3
    n1*n2*n3 x f64 values, tube-major (k fastest, then j, then i)

Tube-major order is C order for an (n1, n2, n3) array, so the payload is
the raw buffer of the tensor.
"""

import struct
from pathlib import Path

import numpy as np

from ..errors import TrpcaLabError
from .models import DenseTensor, as_dense

MAGIC = b"TNS3"
VERSION = 1
_HEADER = struct.Struct("<4sBQQQ")
_VALUE_DTYPE = np.dtype("<f8")
# Largest payload we are willing to address (bytes).
_MAX_PAYLOAD = np.iinfo(np.int64).max


class TensorFormatError(TrpcaLabError):
    """Raised when a TNS3 file cannot be decoded."""
    pass


class BadMagicError(TensorFormatError):
    """The file does not start with the TNS3 magic bytes."""
    pass


class UnsupportedVersionError(TensorFormatError):
    """The version byte is not one this reader understands."""
    pass


class DimensionOverflowError(TensorFormatError):
    """The declared dimensions are zero or their payload size overflows."""
    pass


class TruncatedPayloadError(TensorFormatError):
    """The file holds fewer values than the header declares."""
    pass


class TrailingDataError(TensorFormatError):
    """The file holds more bytes than the header declares."""
    pass


def encode_tensor(t) -> bytes:
    """Serialize a tensor to TNS3 bytes.

    Args:
        t: Finite real n1 x n2 x n3 tensor.

    Returns:
        The encoded bytes.
    """
    t = as_dense(t)
    n1, n2, n3 = t.shape
    header = _HEADER.pack(MAGIC, VERSION, n1, n2, n3)
    return header + np.ascontiguousarray(t, dtype=_VALUE_DTYPE).tobytes(order="C")


def decode_tensor(data: bytes) -> DenseTensor:
    """Decode TNS3 bytes into a tensor.

    Args:
        data: The raw file content.

    Returns:
        The decoded n1 x n2 x n3 float64 tensor.

    Raises:
        BadMagicError: If the magic bytes are wrong or the header is short.
        UnsupportedVersionError: If the version byte is not 0x01.
        DimensionOverflowError: If a dimension is zero or the payload size
            does not fit in a signed 64-bit byte count.
        TruncatedPayloadError: If fewer values than declared are present.
        TrailingDataError: If extra bytes follow the payload.
    """
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"Bad magic: expected {MAGIC!r}, got {bytes(data[:4])!r}")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(
            f"Header needs {_HEADER.size} bytes, file has {len(data)}"
        )

    _, version, n1, n2, n3 = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"Unsupported TNS3 version {version}")
    if min(n1, n2, n3) == 0:
        raise DimensionOverflowError(f"Zero dimension in header: {(n1, n2, n3)}")

    count = n1 * n2 * n3  # Python ints, no wraparound
    if count * _VALUE_DTYPE.itemsize > _MAX_PAYLOAD:
        raise DimensionOverflowError(
            f"Dimensions {(n1, n2, n3)} overflow the addressable payload size"
        )

    payload = len(data) - _HEADER.size
    expected = count * _VALUE_DTYPE.itemsize
    if payload < expected:
        raise TruncatedPayloadError(
            f"Header declares {count} values, payload holds "
            f"{payload // _VALUE_DTYPE.itemsize}"
        )
    if payload > expected:
        raise TrailingDataError(f"{payload - expected} unexpected bytes after payload")

    values = np.frombuffer(data, dtype=_VALUE_DTYPE, count=count, offset=_HEADER.size)
    return values.astype(np.float64).reshape(n1, n2, n3)


def read_tensor(path: str | Path) -> DenseTensor:
    """Read a TNS3 file.

    Args:
        path: Path to the file.

    Returns:
        The decoded tensor.

    Raises:
        OSError: If the file cannot be read.
        TensorFormatError: If the content is not a valid TNS3 tensor.
    """
    return decode_tensor(Path(path).read_bytes())


def write_tensor(t, path: str | Path) -> None:
    """Write a tensor to a TNS3 file, replacing any existing file.

    Args:
        t: Finite real n1 x n2 x n3 tensor.
        path: Destination path.

    Raises:
        OSError: If the file cannot be written.
    """
    Path(path).write_bytes(encode_tensor(t))
