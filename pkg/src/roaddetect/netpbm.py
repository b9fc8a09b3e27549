"""Binary netpbm codec (P6 colour, P5 gray), maxval 255 only."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TruncatedPayload, UnsupportedMaxval
from .raster import as_gray, as_mask, as_rgb, unit_to_bytes

_WHITESPACE = b" \t\n\r\v\f"


def _parse_header(data: bytes, magic: bytes):
    """Return (width, height, payload_offset)."""
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("netpbm data must be bytes")
    data = bytes(data)
    if data[:2] != magic:
        raise MalformedHeader(f"expected magic {magic!r}, found {data[:2]!r}")
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise MalformedHeader("header ends before width/height/maxval")
        c = data[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeader("unterminated comment in header")
            pos = end + 1
        else:
            if not tokens and pos == 2:
                raise MalformedHeader("magic must be followed by whitespace")
            start = pos
            while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE + b"#":
                pos += 1
            tok = data[start:pos]
            if not tok.isdigit():
                raise MalformedHeader(f"non-numeric header field {tok!r}")
            tokens.append(int(tok))
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise MalformedHeader("maxval must be followed by a single whitespace byte")
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise MalformedHeader(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"maxval {maxval} is not supported (need 255)")
    return width, height, pos + 1


def _payload(data: bytes, offset: int, count: int) -> np.ndarray:
    body = data[offset:offset + count]
    if len(body) < count:
        raise TruncatedPayload(f"expected {count} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8)


def load_ppm(data: bytes) -> np.ndarray:
    """Decode a binary P6 file into an (H, W, 3) uint8 raster."""
    w, h, off = _parse_header(data, b"P6")
    return _payload(bytes(data), off, 3 * w * h).reshape(h, w, 3).copy()


def save_ppm(img) -> bytes:
    rgb = as_rgb(img)
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb).tobytes()


def load_pgm_bytes(data: bytes) -> np.ndarray:
    """Decode a binary P5 file into its raw (H, W) uint8 samples."""
    w, h, off = _parse_header(data, b"P5")
    return _payload(bytes(data), off, w * h).reshape(h, w).copy()


def load_pgm(data: bytes) -> np.ndarray:
    """Decode a P5 file as a unit-interval gray raster (byte / 255)."""
    return load_pgm_bytes(data).astype(np.float64) / 255.0


def load_mask(data: bytes) -> np.ndarray:
    """Decode a P5 mask; bytes >= 128 read as 1."""
    return load_pgm_bytes(data) >= 128


def save_pgm(img, threshold: float | None = None) -> bytes:
    """Encode a gray raster or a binary mask as P5.

    Boolean masks map 1 -> 255 and 0 -> 0. Gray values are clamped to [0, 1],
    scaled by 255 and rounded half-up. With ``threshold`` set, gray values
    strictly above it are written as 255 and the rest as 0.
    """
    arr = np.asarray(img)
    if arr.dtype == np.bool_:
        payload = as_mask(arr).astype(np.uint8) * 255
    else:
        g = as_gray(arr)
        if threshold is not None:
            payload = np.where(g > threshold, 255, 0).astype(np.uint8)
        else:
            payload = unit_to_bytes(g)
    h, w = payload.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(payload).tobytes()


def read_ppm(path) -> np.ndarray:
    return load_ppm(Path(path).read_bytes())


def write_ppm(path, img) -> None:
    Path(path).write_bytes(save_ppm(img))


def read_mask(path) -> np.ndarray:
    return load_mask(Path(path).read_bytes())


def write_pgm(path, img, threshold: float | None = None) -> None:
    Path(path).write_bytes(save_pgm(img, threshold))
