"""Byte-stream visualization: byte classes, colors, Hilbert layout, PNG I/O.

An image is a ``uint8`` array of shape ``(side, side, 3)`` indexed
``[row, column]``; the byte at curve index ``d`` lands at
``image[y, x]`` with ``(x, y) = d2xy(order, d)``.
"""
import enum
import struct
import zlib

import numpy as np

from . import hilbert
from .errors import BadShape, EmptyContent

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PNG_COMPRESSION_LEVEL = 9


class ByteClass(enum.IntEnum):
    NULL = 0
    PRINTABLE = 1
    CONTROL = 2
    EXTENDED = 3
    MAX = 4


CLASS_COLORS = {
    ByteClass.NULL: (0, 0, 0),
    ByteClass.PRINTABLE: (0, 0, 255),
    ByteClass.CONTROL: (0, 255, 0),
    ByteClass.EXTENDED: (255, 0, 0),
    ByteClass.MAX: (255, 255, 255),
}


def classify_byte(b):
    b = int(b)
    if not 0 <= b <= 0xFF:
        raise ValueError(f"not a byte: {b}")
    if b == 0x00:
        return ByteClass.NULL
    if b == 0xFF:
        return ByteClass.MAX
    if 0x20 <= b <= 0x7E:
        return ByteClass.PRINTABLE
    if b < 0x20 or b == 0x7F:
        return ByteClass.CONTROL
    return ByteClass.EXTENDED


def byte_to_rgb(b):
    return CLASS_COLORS[classify_byte(b)]


def _build_palette():
    pal = np.empty((256, 3), dtype=np.uint8)
    for b in range(256):
        pal[b] = byte_to_rgb(b)
    pal.setflags(write=False)
    return pal


PALETTE = _build_palette()


def _as_array(data):
    if isinstance(data, np.ndarray):
        return np.ascontiguousarray(data, dtype=np.uint8).ravel()
    return np.frombuffer(bytes(data), dtype=np.uint8)


def sample_stream(data, n_cells):
    """Fit ``data`` onto exactly ``n_cells`` bytes.

    Longer streams are sampled at ``floor(c * L / n_cells)``; shorter ones are
    padded with 0x00.
    """
    arr = _as_array(data)
    length = arr.size
    if length == 0:
        raise EmptyContent("no bytes to visualize")
    if n_cells < 1:
        raise ValueError("n_cells must be positive")
    if length >= n_cells:
        idx = (np.arange(n_cells, dtype=np.int64) * length) // n_cells
        out = arr[idx]
    else:
        out = np.zeros(n_cells, dtype=np.uint8)
        out[:length] = arr
    return out.tobytes()


def render(data, order=hilbert.DEFAULT_ORDER):
    """Render a byte stream to a ``(2**order, 2**order, 3)`` RGB image."""
    xs, ys = hilbert.curve(order)
    side = 1 << order
    cells = np.frombuffer(sample_stream(data, side * side), dtype=np.uint8)
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[ys, xs] = PALETTE[cells]
    return img


def check_image(img):
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3 or img.shape[0] != img.shape[1]:
        raise BadShape(f"expected (side, side, 3) uint8 image, got {img.shape} {img.dtype}")
    return img


def _chunk(kind, payload):
    body = kind + payload
    return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body))


def encode_png(img):
    """8-bit RGB, non-interlaced PNG with filter 0 on every row."""
    img = check_image(img)
    h, w = img.shape[:2]
    raw = np.zeros((h, 1 + 3 * w), dtype=np.uint8)
    raw[:, 1:] = img.reshape(h, 3 * w)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return b"".join((
        PNG_SIGNATURE,
        _chunk(b"IHDR", ihdr),
        _chunk(b"IDAT", zlib.compress(raw.tobytes(), PNG_COMPRESSION_LEVEL)),
        _chunk(b"IEND", b""),
    ))


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(raw, h, stride, bpp=3):
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    pos = 0
    for y in range(h):
        ftype = raw[pos]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos + 1).copy()
        pos += stride + 1
        if ftype == 0:
            pass
        elif ftype == 2:
            line = line + prev
        elif ftype in (1, 3, 4):
            cur = line.astype(np.int32)
            up = prev.astype(np.int32)
            for i in range(stride):
                left = cur[i - bpp] if i >= bpp else 0
                ul = up[i - bpp] if i >= bpp else 0
                if ftype == 1:
                    pred = left
                elif ftype == 3:
                    pred = (left + up[i]) >> 1
                else:
                    pred = _paeth(left, up[i], ul)
                cur[i] = (cur[i] + pred) & 0xFF
            line = cur.astype(np.uint8)
        else:
            raise ValueError(f"bad PNG filter type {ftype}")
        out[y] = line
        prev = line
    return out


def decode_png(data):
    """Decode an 8-bit RGB non-interlaced PNG into an image array."""
    if not data.startswith(PNG_SIGNATURE):
        raise ValueError("not a PNG file")
    pos = len(PNG_SIGNATURE)
    header = None
    idat = []
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        kind = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        (crc,) = struct.unpack(">I", data[pos + 8 + length:pos + 12 + length])
        if zlib.crc32(kind + payload) != crc:
            raise ValueError(f"CRC mismatch in {kind!r} chunk")
        pos += 12 + length
        if kind == b"IHDR":
            header = struct.unpack(">IIBBBBB", payload)
        elif kind == b"IDAT":
            idat.append(payload)
        elif kind == b"IEND":
            break
    if header is None:
        raise ValueError("missing IHDR")
    w, h, depth, ctype, _, _, interlace = header
    if depth != 8 or ctype != 2 or interlace != 0:
        raise ValueError(f"unsupported PNG (depth={depth}, color={ctype}, interlace={interlace})")
    raw = zlib.decompress(b"".join(idat))
    return _unfilter(raw, h, 3 * w).reshape(h, w, 3)


def write_png(path, img):
    data = encode_png(img)
    with open(path, "wb") as f:
        f.write(data)
    return data


def read_png(path):
    with open(path, "rb") as f:
        return decode_png(f.read())
