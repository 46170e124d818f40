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

from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from instattn.attention.feature_map import AttendedPoint, FeatureMap
from instattn.attention.spatial import augment, augmented_channels, bottleneck_1x1, spatial_softmax
from instattn.engine import functional as F
from instattn.networks.backbone import DEFAULT_WIDTHS, conv_stack
from instattn.networks.layers import Activation, Conv2d, Dense, Flatten, Module, Sequential
from instattn.utils.exceptions import ShapeError

ProbeResult = Tuple[FeatureMap, Optional[FeatureMap], AttendedPoint]


class LocalizationHeadKind(str, Enum):
    FC = 'fc'
    CONV = 'conv'
    SOFTMAX_PLAIN = 'softmax-plain'
    SOFTMAX_ONEHOT = 'softmax-onehot'
    SOFTMAX_COORDS = 'softmax-coords'
    SOFTMAX_SCORE = 'softmax-score'

    @property
    def is_softmax(self) -> bool:
        return self.value.startswith('softmax-')

    @property
    def augmentation(self) -> Optional[str]:
        """Positional channels appended before the bottleneck, `None` for unaugmented heads."""
        return {
            LocalizationHeadKind.SOFTMAX_ONEHOT: 'onehot',
            LocalizationHeadKind.SOFTMAX_COORDS: 'coords',
            LocalizationHeadKind.SOFTMAX_SCORE: 'score',
        }.get(self)


class LocalizationHead(Module):
    """Maps a backbone feature map to one attended point per sample, in feature-map units.

    Every head starts with the Conv1x1(1)-Tanh bottleneck; softmax heads append their positional
    channels before it.
    """

    kind: LocalizationHeadKind

    def __init__(self, in_channels: int, feature_size: int, rng: np.random.Generator):
        super().__init__()
        self.in_channels = in_channels
        self.feature_size = feature_size
        extra = augmented_channels(self.kind.augmentation, feature_size, feature_size)
        self.bottleneck = self.add_module('bottleneck', Conv2d(in_channels + extra, 1, 1, rng))

    def bottlenecked(self, g: FeatureMap) -> FeatureMap:
        if g.channels != self.in_channels or (g.height, g.width) != (self.feature_size, self.feature_size):
            raise ShapeError(
                f'{self.kind.value} head',
                f'expected [N,{self.in_channels},{self.feature_size},{self.feature_size}], got {g.values.shape}',
            )
        gtilde = augment(g, self.kind.augmentation)
        return bottleneck_1x1(gtilde, self.bottleneck.weight, self.bottleneck.bias)

    def probe(self, g: FeatureMap) -> ProbeResult:
        """Return `(bottlenecked map, attention map or None, attended point)`."""
        raise NotImplementedError

    def forward(self, g: FeatureMap) -> AttendedPoint:
        return self.probe(g)[2]


class FCHead(LocalizationHead):
    kind = LocalizationHeadKind.FC

    def __init__(self, in_channels: int, feature_size: int, rng: np.random.Generator):
        super().__init__(in_channels, feature_size, rng)
        self.mlp = self.add_module(
            'mlp',
            Sequential(
                Flatten(),
                Dense(feature_size * feature_size, 1024, rng),
                Activation('elu'),
                Dense(1024, 128, rng),
                Activation('elu'),
                Dense(128, 2, rng),
            ),
        )

    def probe(self, g: FeatureMap) -> ProbeResult:
        gb = self.bottlenecked(g)
        out = self.mlp(gb.values)
        return gb, None, AttendedPoint(F.reshape(out, (out.shape[0], 1, 2)))


class ConvHead(LocalizationHead):
    """Convolutional regressor: a backbone-like stack, Conv1x1(16)-ELU-Conv1x1(2), then a spatial mean."""

    kind = LocalizationHeadKind.CONV

    def __init__(
        self,
        in_channels: int,
        feature_size: int,
        rng: np.random.Generator,
        widths: Sequence[int] = DEFAULT_WIDTHS,
    ):
        super().__init__(in_channels, feature_size, rng)
        self.widths = tuple(widths)
        self.stack = self.add_module(
            'stack',
            Sequential(
                *conv_stack(1, widths, rng, crop_to_even=True),
                Conv2d(widths[-1], 16, 1, rng),
                Activation('elu'),
                Conv2d(16, 2, 1, rng),
            ),
        )

    def probe(self, g: FeatureMap) -> ProbeResult:
        gb = self.bottlenecked(g)
        out = F.mean(self.stack(gb.values), axis=(2, 3))
        return gb, None, AttendedPoint(F.reshape(out, (out.shape[0], 1, 2)))


class SoftmaxHead(LocalizationHead):
    """Optional positional augmentation, bottleneck and spatial softmax; `kind` picks the augmentation."""

    def __init__(
        self,
        in_channels: int,
        feature_size: int,
        rng: np.random.Generator,
        kind: LocalizationHeadKind = LocalizationHeadKind.SOFTMAX_PLAIN,
    ):
        self.kind = kind
        super().__init__(in_channels, feature_size, rng)

    def probe(self, g: FeatureMap) -> ProbeResult:
        gb = self.bottlenecked(g)
        ghat, f = spatial_softmax(gb)
        return gb, ghat, f


def build_head(
    kind: LocalizationHeadKind,
    in_channels: int,
    feature_size: int,
    rng: np.random.Generator,
    conv_widths: Sequence[int] = DEFAULT_WIDTHS,
) -> LocalizationHead:
    kind = LocalizationHeadKind(kind)
    if kind is LocalizationHeadKind.FC:
        return FCHead(in_channels, feature_size, rng)
    if kind is LocalizationHeadKind.CONV:
        return ConvHead(in_channels, feature_size, rng, widths=conv_widths)
    return SoftmaxHead(in_channels, feature_size, rng, kind=kind)
