# Copyright (c) 2022 Intel Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from typing import Tuple

import numpy as np

BACKGROUND = (200, 200, 200)
APPLE_RED = (220, 30, 30)
STEM_BROWN = (110, 70, 20)
LEAF_GREEN = (40, 160, 40)
SQUARE_BLUE = (40, 70, 220)
TRIANGLE_YELLOW = (230, 200, 30)

DISTRACTOR_KINDS = ('square', 'triangle')


def blank_image(size: int) -> np.ndarray:
    image = np.empty((size, size, 3), dtype=np.uint8)
    image[...] = BACKGROUND
    return image


def sprite_box(center: Tuple[int, int], size: int) -> Tuple[int, int, int, int]:
    """Half-open box (top, left, bottom, right) of a `size` sprite centred on (row, col)."""
    row, col = center
    half = size // 2
    return row - half, col - half, row - half + size, col - half + size


def _clipped_mask(image: np.ndarray, top: int, left: int, mask: np.ndarray) -> Tuple[Tuple[slice, slice], np.ndarray]:
    height, width = image.shape[:2]
    r0, c0 = max(top, 0), max(left, 0)
    r1, c1 = max(min(top + mask.shape[0], height), r0), max(min(left + mask.shape[1], width), c0)
    return (slice(r0, r1), slice(c0, c1)), mask[r0 - top : r1 - top, c0 - left : c1 - left]


def paint(image: np.ndarray, top: int, left: int, mask: np.ndarray, color: Tuple[int, int, int]) -> None:
    """Paint `color` where `mask` is set, with the mask's top-left corner at (top, left). Clips at the border."""
    window, mask = _clipped_mask(image, top, left, mask)
    image[window][mask] = color


def draw_disc(image: np.ndarray, center: Tuple[int, int], radius: int, color: Tuple[int, int, int]) -> None:
    row, col = center
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    paint(image, row - radius, col - radius, yy**2 + xx**2 <= radius**2, color)


def draw_apple(image: np.ndarray, center: Tuple[int, int], size: int) -> None:
    """Red disc of radius 3/8 of `size` on the centre, a stem above it and one leaf pixel."""
    row, col = center
    radius = size * 3 // 8
    stem = max(size // 8, 1)
    draw_disc(image, center, radius, APPLE_RED)
    paint(image, row - radius - stem, col, np.ones((stem, 1), dtype=bool), STEM_BROWN)
    paint(image, row - radius - 1, col + 1, np.ones((1, 1), dtype=bool), LEAF_GREEN)


def draw_square(image: np.ndarray, center: Tuple[int, int], size: int) -> None:
    top, left, _, _ = sprite_box(center, size)
    paint(image, top, left, np.ones((size, size), dtype=bool), SQUARE_BLUE)


def draw_triangle(image: np.ndarray, center: Tuple[int, int], size: int) -> None:
    """Upward-pointing triangle filling the sprite box."""
    top, left, _, _ = sprite_box(center, size)
    rows, cols = np.mgrid[0:size, 0:size]
    mask = np.abs(cols - (size - 1) / 2.0) <= (rows + 1) / 2.0
    paint(image, top, left, mask, TRIANGLE_YELLOW)


DRAW_DISTRACTOR = {
    'square': draw_square,
    'triangle': draw_triangle,
}
