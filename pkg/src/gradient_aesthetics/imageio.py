"""Reading and writing 8-bit grayscale images.

Binary PGM (P5) is the canonical format: it is what we write and what the
archive stores. PNG is accepted on read (decoded with Pillow) and may be
written as 8-bit gray for convenience.
"""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import MalformedImage, UnsupportedFormat

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
PGM_MAGIC = b"P5"

# BT.601 luma weights in thousandths, so conversion is integer-exact.
_LUMA = (299, 587, 114)
_INT = re.compile(rb"\d+")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable grid of intensities in 0..255, stored as a read-only
    ``(height, width)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise MalformedImage(f"expected a 2-D pixel grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MalformedImage(f"zero dimension in shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise MalformedImage("pixel values must lie in 0..255")
            arr = arr.astype(np.uint8)
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_values(cls, width: int, height: int, values: Sequence[int]) -> "GrayImage":
        """Build from a row-major flat sequence."""
        if width < 1 or height < 1:
            raise MalformedImage("width and height must be positive")
        flat = np.asarray(values, dtype=np.int64)
        if flat.size != width * height:
            raise MalformedImage(
                f"{flat.size} values given for a {width}x{height} image")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def values(self) -> list[int]:
        """Row-major pixel values as plain ints."""
        return self.pixels.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def luma(rgb: np.ndarray) -> np.ndarray:
    """round(0.299 R + 0.587 G + 0.114 B), rounding halves up.

    2-D input is taken to be gray already and returned unchanged.
    """
    arr = np.asarray(rgb)
    if arr.ndim == 2:
        return arr.astype(np.uint8)
    arr = arr[..., :3].astype(np.int64)
    w = np.asarray(_LUMA, dtype=np.int64)
    gray = ((arr * w).sum(axis=-1) + 500) // 1000
    return np.clip(gray, 0, 255).astype(np.uint8)


def _parse_pgm(data: bytes) -> GrayImage:
    pos = 2
    fields = []
    n = len(data)
    while len(fields) < 3:
        if pos >= n:
            raise MalformedImage("truncated PGM header")
        c = data[pos:pos + 1]
        if c == b"#":
            end = data.find(b"\n", pos)
            pos = n if end < 0 else end + 1
        elif c.isspace():
            pos += 1
        else:
            m = _INT.match(data, pos)
            if m is None:
                raise MalformedImage(f"unexpected byte {c!r} in PGM header")
            fields.append(int(m.group()))
            pos = m.end()
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise MalformedImage("missing whitespace after PGM maxval")
    pos += 1

    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedImage(f"zero dimension {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise MalformedImage(f"invalid maxval {maxval}")

    count = width * height
    if maxval < 256:
        raw = data[pos:pos + count]
        if len(raw) < count:
            raise MalformedImage(f"payload has {len(raw)} of {count} bytes")
        arr = np.frombuffer(raw, dtype=np.uint8)
    else:
        raw = data[pos:pos + 2 * count]
        if len(raw) < 2 * count:
            raise MalformedImage(f"payload has {len(raw)} of {2 * count} bytes")
        arr = (np.frombuffer(raw, dtype=">u2") >> 8).astype(np.uint8)
    return GrayImage(arr.reshape(height, width))


def _decode_png(data: bytes) -> GrayImage:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.int64) >> 8
                return GrayImage(np.clip(arr, 0, 255).astype(np.uint8))
            if mode == "L":
                return GrayImage(np.asarray(im))
            if mode == "LA":
                return GrayImage(np.asarray(im)[..., 0])
            if mode == "1":
                return GrayImage(np.asarray(im.convert("L")))
            if mode not in ("RGB", "RGBA"):
                im = im.convert("RGBA")
            return GrayImage(luma(np.asarray(im)))
    except (OSError, SyntaxError, ValueError) as exc:
        raise MalformedImage(f"cannot decode PNG: {exc}") from exc


def decode(data: bytes) -> GrayImage:
    """Decode PGM (P5) or PNG bytes, dispatching on magic bytes."""
    if data.startswith(PGM_MAGIC):
        return _parse_pgm(data)
    if data.startswith(PNG_MAGIC):
        return _decode_png(data)
    raise UnsupportedFormat(f"unrecognised magic bytes {data[:8]!r}")


def load_image(path: str | os.PathLike) -> GrayImage:
    """Load a P5 or PNG file as grayscale. Raises FileNotFoundError if
    the path does not exist."""
    with open(path, "rb") as fh:
        data = fh.read()
    return decode(data)


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def save_image(img: GrayImage, path: str | os.PathLike) -> None:
    """Write ``img`` as binary PGM, or as 8-bit gray PNG when the suffix
    is ``.png``."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        Image.fromarray(np.ascontiguousarray(img.pixels)).save(path, format="PNG")
        return
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))
