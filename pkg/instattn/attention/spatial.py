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

import functools
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from instattn.attention.feature_map import AttendedPoint, AugmentedFeatureMap, FeatureMap
from instattn.engine import functional as F
from instattn.engine.tensor import Tensor, constant
from instattn.utils.exceptions import ParameterError, ShapeError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@functools.lru_cache(maxsize=None)
def position_grid(height: int, width: int) -> np.ndarray:
    """[H*W, 2] table of (column, row) for every pixel in raster order."""
    rows, cols = np.divmod(np.arange(height * width), width)
    return _frozen(np.stack([cols, rows], axis=1).astype(np.float64))


@functools.lru_cache(maxsize=None)
def onehot_channels(height: int, width: int) -> np.ndarray:
    """[H*W, H, W]; channel p is 1 at the pixel with raster index p."""
    return _frozen(np.eye(height * width).reshape(height * width, height, width))


@functools.lru_cache(maxsize=None)
def coord_channels(height: int, width: int) -> np.ndarray:
    """[2, H, W]; channel 0 holds col/(W-1), channel 1 holds row/(H-1)."""
    xs = np.arange(width) / max(width - 1, 1)
    ys = np.arange(height) / max(height - 1, 1)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing='ij')
    return _frozen(np.stack([grid_x, grid_y]))


@functools.lru_cache(maxsize=None)
def score_channel(height: int, width: int) -> np.ndarray:
    """[1, H, W]; raster index p scores p/(H*W-1), so the first pixel is 0.0 and the last 1.0."""
    n = height * width
    if n < 2:
        raise ShapeError('append_score_map', f'score map needs at least two pixels, got {height}x{width}')
    return _frozen((np.arange(n) / (n - 1)).reshape(1, height, width))


def spatial_softmax(g: FeatureMap) -> Tuple[FeatureMap, AttendedPoint]:
    """Normalize every channel of `g` with a softmax over its pixels and take expected pixel coordinates.

    Returns `(ghat, f)`: `ghat` sums to one per channel and `f[..., 0]` / `f[..., 1]` are the expected
    column / row under it.
    """
    g.values.check_finite('spatial_softmax input')
    n, c, h, w = g.values.shape
    probs = F.softmax(F.reshape(g.values, (n, c, h * w)))
    ghat = FeatureMap(F.reshape(probs, (n, c, h, w)))
    f = AttendedPoint(F.matmul(probs, constant(position_grid(h, w))))
    return ghat, f


def _append(g: FeatureMap, channels: np.ndarray, kind: str) -> AugmentedFeatureMap:
    extra = constant(np.broadcast_to(channels[None], (g.batch,) + channels.shape))
    return AugmentedFeatureMap(F.concat([g.values, extra], axis=1), kind=kind, base_channels=g.channels)


def append_onehot(g: FeatureMap) -> AugmentedFeatureMap:
    return _append(g, onehot_channels(g.height, g.width), 'onehot')


def append_coords(g: FeatureMap) -> AugmentedFeatureMap:
    return _append(g, coord_channels(g.height, g.width), 'coords')


def append_score_map(g: FeatureMap) -> AugmentedFeatureMap:
    return _append(g, score_channel(g.height, g.width), 'score')


AUGMENTATIONS: Dict[str, Callable[[FeatureMap], AugmentedFeatureMap]] = {
    'onehot': append_onehot,
    'coords': append_coords,
    'score': append_score_map,
}


def augmented_channels(kind: Optional[str], height: int, width: int) -> int:
    """Number of channels the augmentation `kind` appends to an `height` x `width` map."""
    if kind is None:
        return 0
    if kind not in AUGMENTATIONS:
        raise ParameterError('augment', 'kind', kind)
    return {'onehot': height * width, 'coords': 2, 'score': 1}[kind]


def augment(g: FeatureMap, kind: Optional[str]) -> FeatureMap:
    if kind is None:
        return g
    if kind not in AUGMENTATIONS:
        raise ParameterError('augment', 'kind', kind)
    return AUGMENTATIONS[kind](g)


def bottleneck_1x1(gtilde: FeatureMap, weight: Tensor, bias: Tensor) -> FeatureMap:
    """1x1 convolution down to `weight.shape[0]` channels (one in every shipped head) followed by tanh."""
    if weight.ndim != 4 or weight.shape[1:] != (gtilde.channels, 1, 1):
        raise ShapeError(
            'bottleneck_1x1', f'weight {weight.shape} does not fit a {gtilde.channels}-channel feature map'
        )
    return FeatureMap(F.tanh(F.conv2d(gtilde.values, weight, bias)))


def attention_mass_within(
    ghat: Union[FeatureMap, np.ndarray],
    center: Sequence[float],
    radius: float,
) -> np.ndarray:
    """Fraction of attention mass inside the square window |col - x| <= radius, |row - y| <= radius.

    `center` is (x, y) in feature-map units. Returns one value per (sample, channel).
    """
    values = ghat.values.data if isinstance(ghat, FeatureMap) else np.asarray(ghat, dtype=np.float64)
    if values.ndim == 2:
        values = values[None, None]
    h, w = values.shape[-2:]
    rows = np.abs(np.arange(h) - center[1]) <= radius
    cols = np.abs(np.arange(w) - center[0]) <= radius
    window = rows[:, None] & cols[None, :]
    return (values * window).sum(axis=(-2, -1))
