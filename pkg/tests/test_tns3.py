"""Tests for the TNS3 tensor file format."""

import struct

import numpy as np
import pytest

from trpcalab.tensor.tns3 import (
    BadMagicError,
    DimensionOverflowError,
    TensorFormatError,
    TrailingDataError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    decode_tensor,
    encode_tensor,
    read_tensor,
    write_tensor,
)


def _header(n1, n2, n3, magic=b"TNS3", version=1):
    return struct.pack("<4sBQQQ", magic, version, n1, n2, n3)


def test_encode_layout_is_tube_major():
    t = np.arange(24, dtype=float).reshape(2, 3, 4)
    data = encode_tensor(t)
    assert data[:4] == b"TNS3"
    assert data[4] == 1
    assert struct.unpack_from("<QQQ", data, 5) == (2, 3, 4)
    values = struct.unpack_from("<24d", data, 29)
    # Entry (i, j, k) sits at i*n2*n3 + j*n3 + k.
    assert values[1 * 12 + 2 * 4 + 3] == t[1, 2, 3]
    assert len(data) == 29 + 24 * 8


def test_file_round_trip_is_bit_exact(tmp_path, random_tensor):
    t = random_tensor(3, 2, 5)
    t[0, 0, 0] = -0.0
    t[1, 1, 1] = 5e-324
    path = tmp_path / "x.tns3"
    write_tensor(t, path)
    back = read_tensor(path)
    assert back.shape == (3, 2, 5)
    assert back.tobytes() == t.tobytes()
    assert path.read_bytes() == encode_tensor(back)


def test_bad_magic():
    with pytest.raises(BadMagicError):
        decode_tensor(_header(1, 1, 1, magic=b"TNS2") + b"\0" * 8)
    with pytest.raises(BadMagicError):
        decode_tensor(b"TN")


def test_unsupported_version():
    with pytest.raises(UnsupportedVersionError):
        decode_tensor(_header(1, 1, 1, version=2) + b"\0" * 8)


def test_zero_dimension():
    with pytest.raises(DimensionOverflowError):
        decode_tensor(_header(2, 0, 3))


def test_dimension_overflow():
    with pytest.raises(DimensionOverflowError):
        decode_tensor(_header(2 ** 40, 2 ** 40, 2 ** 40))


def test_truncated_payload():
    with pytest.raises(TruncatedPayloadError):
        decode_tensor(_header(2, 2, 2) + b"\0" * 8 * 7)
    with pytest.raises(TruncatedPayloadError):
        decode_tensor(_header(2, 2, 2)[:20])


def test_trailing_data():
    with pytest.raises(TrailingDataError):
        decode_tensor(_header(1, 1, 2) + b"\0" * 17)


def test_errors_share_base_class():
    with pytest.raises(TensorFormatError):
        decode_tensor(b"")


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        read_tensor(tmp_path / "missing.tns3")


def test_encode_rejects_non_finite():
    with pytest.raises(ValueError):
        encode_tensor(np.array([[[np.inf]]]))
