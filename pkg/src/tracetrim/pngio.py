"""Minimal PNG codec for screenshots: 8-bit RGB/RGBA, non-interlaced.

Covers what the harnesses produce (the sim framebuffer and browser
screenshot captures); anything else raises PngFormatError.
"""

from __future__ import annotations

import struct
import zlib

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class PngFormatError(ValueError):
    pass


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_png(width: int, height: int, rgba: bytes) -> bytes:
    """Encode row-major RGBA bytes as a PNG."""
    if len(rgba) != width * height * 4:
        raise PngFormatError(
            f"pixel buffer is {len(rgba)} bytes, expected {width * height * 4}"
        )
    header = struct.pack(">IIBBBBB", width, height, 8, 6, 0, 0, 0)
    stride = width * 4
    raw = bytearray()
    for y in range(height):
        raw.append(0)  # filter type None
        raw.extend(rgba[y * stride : (y + 1) * stride])
    return (
        _SIGNATURE
        + _chunk(b"IHDR", header)
        + _chunk(b"IDAT", zlib.compress(bytes(raw), 9))
        + _chunk(b"IEND", b"")
    )


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, width: int, height: int, channels: int) -> bytearray:
    stride = width * channels
    out = bytearray(stride * height)
    pos = 0
    for y in range(height):
        if pos >= len(raw):
            raise PngFormatError("truncated image data")
        filter_type = raw[pos]
        pos += 1
        line = raw[pos : pos + stride]
        if len(line) != stride:
            raise PngFormatError("truncated scanline")
        pos += stride
        row_start = y * stride
        prev_start = row_start - stride
        if filter_type == 0:
            out[row_start : row_start + stride] = line
        elif filter_type == 1:
            for x in range(stride):
                left = out[row_start + x - channels] if x >= channels else 0
                out[row_start + x] = (line[x] + left) & 0xFF
        elif filter_type == 2:
            for x in range(stride):
                up = out[prev_start + x] if y > 0 else 0
                out[row_start + x] = (line[x] + up) & 0xFF
        elif filter_type == 3:
            for x in range(stride):
                left = out[row_start + x - channels] if x >= channels else 0
                up = out[prev_start + x] if y > 0 else 0
                out[row_start + x] = (line[x] + (left + up) // 2) & 0xFF
        elif filter_type == 4:
            for x in range(stride):
                left = out[row_start + x - channels] if x >= channels else 0
                up = out[prev_start + x] if y > 0 else 0
                up_left = out[prev_start + x - channels] if (y > 0 and x >= channels) else 0
                out[row_start + x] = (line[x] + _paeth(left, up, up_left)) & 0xFF
        else:
            raise PngFormatError(f"unsupported filter type {filter_type}")
    return out


def read_png(data: bytes) -> tuple[int, int, bytes]:
    """Decode a PNG to (width, height, row-major RGBA bytes)."""
    if not data.startswith(_SIGNATURE):
        raise PngFormatError("missing PNG signature")
    pos = len(_SIGNATURE)
    width = height = None
    channels = 0
    idat = bytearray()
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        tag = data[pos + 4 : pos + 8]
        payload = data[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            width, height, depth, color_type, _, _, interlace = struct.unpack(
                ">IIBBBBB", payload
            )
            if depth != 8:
                raise PngFormatError(f"unsupported bit depth {depth}")
            if color_type == 6:
                channels = 4
            elif color_type == 2:
                channels = 3
            else:
                raise PngFormatError(f"unsupported color type {color_type}")
            if interlace != 0:
                raise PngFormatError("interlaced PNGs are unsupported")
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
    if width is None:
        raise PngFormatError("missing IHDR chunk")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise PngFormatError(f"bad image data: {exc}") from exc
    pixels = _unfilter(raw, width, height, channels)
    if channels == 3:
        rgba = bytearray(width * height * 4)
        rgba[3::4] = b"\xff" * (width * height)
        for c in range(3):
            rgba[c::4] = pixels[c::3]
        return width, height, bytes(rgba)
    return width, height, bytes(pixels)
