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

import numpy as np

from instattn.engine.tensor import Tensor
from instattn.harness.config import TrainConfig
from instattn.scenes.generator import SceneConfig

# Smallest backbone that still exercises every layer of the real one.
TINY_WIDTHS = (2, 2, 2, 2, 2, 2, 2)
TINY_CONV_HEAD = (2, 2, 2, 2, 2, 2, 2)
TINY_SIZE = 16
GRADCHECK_TOLERANCE = 1e-5


def random_tensor(shape, seed=0, scale=1.0, requires_grad=True) -> Tensor:
    rng = np.random.default_rng(seed)
    return Tensor(rng.normal(scale=scale, size=shape), requires_grad=requires_grad)


def tiny_scene_config(image_size: int = 32) -> SceneConfig:
    return SceneConfig.for_image_size(image_size)


def tiny_train_config(**overrides) -> TrainConfig:
    values = dict(
        head='score',
        input_size=32,
        widths=TINY_WIDTHS,
        conv_head_widths=TINY_CONV_HEAD,
        batch_size=4,
        epochs=1,
        dropout_p=0.0,
        seed=0,
    )
    values.update(overrides)
    return TrainConfig(**values)
