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

from typing import Optional, Sequence, Union

import numpy as np

from instattn.attention.feature_map import AttendedPoint
from instattn.engine.tensor import Tensor
from instattn.networks.backbone import DEFAULT_WIDTHS, STRIDE, VisionBackbone, images_to_tensor
from instattn.networks.heads import LocalizationHeadKind, ProbeResult, build_head
from instattn.networks.layers import Module
from instattn.utils import batched


def feature_to_image_coords(f: Union[AttendedPoint, np.ndarray], stride: int = STRIDE) -> np.ndarray:
    """Map feature-map coordinates to input-image pixels.

    Feature pixel `i` pools image pixels `stride*i .. stride*i + stride - 1`, so it maps to their centre.
    """
    values = f.values.data if isinstance(f, AttendedPoint) else np.asarray(f, dtype=np.float64)
    return stride * values + (stride - 1) / 2.0


class Localizer(Module):
    """Backbone followed by a localization head; predicts one (x, y) point per image."""

    def __init__(
        self,
        kind: Union[LocalizationHeadKind, str],
        input_size: int = 120,
        widths: Sequence[int] = DEFAULT_WIDTHS,
        dropout_p: float = 0.5,
        conv_widths: Sequence[int] = DEFAULT_WIDTHS,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.kind = LocalizationHeadKind(kind)
        self.input_size = input_size
        self.backbone = self.add_module('backbone', VisionBackbone(input_size, widths, dropout_p, rng))
        self.head = self.add_module(
            'head',
            build_head(self.kind, self.backbone.out_channels, self.backbone.feature_size, rng, conv_widths),
        )

    def probe(self, images: Tensor) -> ProbeResult:
        return self.head.probe(self.backbone(images))

    def forward(self, images: Tensor) -> AttendedPoint:
        return self.head(self.backbone(images))

    def predict(self, images: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """Predicted (x, y) image coordinates of [N,H,W,3] images, evaluated without dropout or a graph."""
        was_training = self.training
        self.eval()
        try:
            coords = [
                feature_to_image_coords(self(images_to_tensor(np.stack(batch))))[:, 0, :]
                for batch in batched(list(images), batch_size)
            ]
        finally:
            self.train(was_training)
        return np.concatenate(coords, axis=0) if coords else np.zeros((0, 2))
