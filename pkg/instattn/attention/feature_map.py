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

from dataclasses import dataclass

import numpy as np

from instattn.engine.tensor import Tensor
from instattn.utils.exceptions import ShapeError


@dataclass
class FeatureMap:
    """A batch of spatial activation grids, `values` of shape [N, C, H, W]."""

    values: Tensor

    def __post_init__(self):
        if self.values.ndim != 4:
            raise ShapeError('FeatureMap', f'expected [N,C,H,W] values, got {self.values.shape}')
        if self.values.shape[1] < 1:
            raise ShapeError('FeatureMap', 'a feature map needs at least one channel')

    @property
    def batch(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[2]

    @property
    def width(self) -> int:
        return self.values.shape[3]


@dataclass
class AugmentedFeatureMap(FeatureMap):
    """A feature map with constant positional channels appended after its first `base_channels`."""

    kind: str = 'onehot'
    base_channels: int = 1

    @property
    def appended_channels(self) -> int:
        return self.channels - self.base_channels


@dataclass
class AttendedPoint:
    """Expected (x, y) coordinates per channel in feature-map units, `values` of shape [N, C, 2].

    x indexes the feature-map width (columns), y its height (rows).
    """

    values: Tensor

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[2] != 2:
            raise ShapeError('AttendedPoint', f'expected [N,C,2] values, got {self.values.shape}')

    @property
    def x(self) -> np.ndarray:
        return self.values.data[..., 0]

    @property
    def y(self) -> np.ndarray:
        return self.values.data[..., 1]
