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

from typing import List, Optional, Sequence

import numpy as np

from instattn.attention.feature_map import FeatureMap
from instattn.engine.tensor import Tensor
from instattn.networks.layers import Activation, Conv2d, CropEven, Dropout, MaxPool2d, Module, Sequential
from instattn.utils.exceptions import ConfigError, ShapeError

DEFAULT_WIDTHS = (16, 32, 64, 64, 128, 128, 128)
# Indices (into the conv list) after which a 2x2 max pool follows.
POOL_AFTER = (2, 4)
STRIDE = 4


def conv_stack(
    in_channels: int,
    widths: Sequence[int],
    rng: np.random.Generator,
    pool_after: Sequence[int] = POOL_AFTER,
    crop_to_even: bool = False,
) -> List[Module]:
    """Conv3x3-ELU layers of the given widths with a MaxPool2D after each index in `pool_after`.

    With `crop_to_even` every pool is preceded by a crop that drops an odd trailing row or column.
    """
    layers: List[Module] = []
    channels = in_channels
    for i, width in enumerate(widths):
        layers += [Conv2d(channels, width, 3, rng), Activation('elu')]
        if i in pool_after:
            layers += [CropEven(), MaxPool2d()] if crop_to_even else [MaxPool2d()]
        channels = width
    return layers


class VisionBackbone(Module):
    """Shared convolutional trunk mapping [N,3,S,S] images to [N,C,S/4,S/4] feature maps.

    Seven same-padded Conv3x3-ELU layers with 2x2 max pools after the third and fifth, followed by dropout.
    """

    def __init__(
        self,
        input_size: int = 120,
        widths: Sequence[int] = DEFAULT_WIDTHS,
        dropout_p: float = 0.5,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        if input_size <= 0 or input_size % STRIDE:
            raise ConfigError(f'Input size must be a positive multiple of {STRIDE}, got {input_size}')
        if len(widths) != len(DEFAULT_WIDTHS) or any(w < 1 for w in widths):
            raise ConfigError(f'Backbone needs {len(DEFAULT_WIDTHS)} positive widths, got {list(widths)}')
        rng = rng if rng is not None else np.random.default_rng(0)
        self.input_size = input_size
        self.widths = tuple(widths)
        self.out_channels = self.widths[-1]
        self.feature_size = input_size // STRIDE
        dropout = Dropout(dropout_p, np.random.default_rng(rng.integers(2**32)))
        self.body = self.add_module('body', Sequential(*conv_stack(3, widths, rng), dropout))

    def forward(self, x: Tensor) -> FeatureMap:
        if x.ndim != 4 or x.shape[1:] != (3, self.input_size, self.input_size):
            raise ShapeError(
                'vision_backbone', f'expected [N,3,{self.input_size},{self.input_size}] images, got {x.shape}'
            )
        return FeatureMap(self.body(x))


def images_to_tensor(images: np.ndarray) -> Tensor:
    """Convert [N,H,W,3] uint8 (or [0,1] float) images to a [N,3,H,W] float tensor in [0,1]."""
    images = np.asarray(images)
    if images.ndim == 3:
        images = images[None]
    data = images.astype(np.float64)
    if images.dtype == np.uint8:
        data /= 255.0
    return Tensor(np.ascontiguousarray(data.transpose(0, 3, 1, 2)))
