"""Three-level gradient pyramid: image, gradient, gradient of gradient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall
from .imageio import GrayImage

FORWARD = "forward"
SOBEL = "sobel"
OPERATORS = (FORWARD, SOBEL)

# Largest attainable Sobel magnitude on 8-bit input, 255 * sqrt(20): the
# corners are shared by both kernels, so |gx| = |gy| = 4 * 255 is impossible.
_SOBEL_MAX = 255.0 * np.sqrt(20.0)


def _forward_gradient(px: np.ndarray) -> np.ndarray:
    a = px.astype(np.int32)
    base = a[:-1, :-1]
    dx = np.abs(a[:-1, 1:] - base)
    dy = np.abs(a[1:, :-1] - base)
    return np.minimum(dx + dy, 255).astype(np.uint8)


def _sobel_gradient(px: np.ndarray) -> np.ndarray:
    a = px.astype(np.int64)
    gx = ((a[:-2, 2:] + 2 * a[1:-1, 2:] + a[2:, 2:])
          - (a[:-2, :-2] + 2 * a[1:-1, :-2] + a[2:, :-2]))
    gy = ((a[2:, :-2] + 2 * a[2:, 1:-1] + a[2:, 2:])
          - (a[:-2, :-2] + 2 * a[:-2, 1:-1] + a[:-2, 2:]))
    mag = np.hypot(gx, gy) * (255.0 / _SOBEL_MAX)
    return np.clip(np.floor(mag + 0.5), 0, 255).astype(np.uint8)


def gradient(img: GrayImage, operator: str = FORWARD) -> GrayImage:
    """Gradient magnitude of ``img``, re-quantised to 0..255.

    The default forward-difference operator gives, for every pixel with a
    right and a lower neighbour,

        out(x, y) = min(|img(x+1, y) - img(x, y)| + |img(x, y+1) - img(x, y)|, 255)

    so the output is one pixel smaller in each dimension. ``operator="sobel"``
    uses the 3x3 Sobel magnitude scaled so the largest attainable value maps
    to 255; its output is two pixels smaller in each dimension.
    """
    if operator == FORWARD:
        need = 2
    elif operator == SOBEL:
        need = 3
    else:
        raise ValueError(f"unknown gradient operator {operator!r}")
    if img.width < need or img.height < need:
        raise ImageTooSmall(
            f"{operator} gradient needs at least {need}x{need}, got {img.width}x{img.height}")
    if operator == FORWARD:
        return GrayImage(_forward_gradient(img.pixels))
    return GrayImage(_sobel_gradient(img.pixels))


@dataclass(frozen=True)
class LevelPyramid:
    l1: GrayImage
    l2: GrayImage
    l3: GrayImage

    def level(self, k: int) -> GrayImage:
        """Level by 1-based index."""
        if k not in (1, 2, 3):
            raise ValueError(f"pyramid level must be 1, 2 or 3, got {k}")
        return (self.l1, self.l2, self.l3)[k - 1]

    def __iter__(self):
        return iter((self.l1, self.l2, self.l3))


def build_pyramid(img: GrayImage, operator: str = FORWARD) -> LevelPyramid:
    l2 = gradient(img, operator)
    try:
        l3 = gradient(l2, operator)
    except ImageTooSmall:
        raise ImageTooSmall(
            f"image {img.width}x{img.height} too small for a three-level pyramid") from None
    return LevelPyramid(img, l2, l3)
