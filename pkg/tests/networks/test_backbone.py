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
import pytest

from instattn.engine import functional as F
from instattn.engine.tensor import Graph, Tensor, backward
from instattn.networks.backbone import DEFAULT_WIDTHS, VisionBackbone, images_to_tensor
from instattn.networks.heads import LocalizationHeadKind, SoftmaxHead
from instattn.networks.layers import Conv2d, CropEven, Dense, Dropout, Sequential
from instattn.utils.exceptions import ConfigError, ContractError, ShapeError
from tests.helpers import TINY_SIZE, TINY_WIDTHS


def test_backbone_output_shape():
    backbone = VisionBackbone(TINY_SIZE, TINY_WIDTHS, rng=np.random.default_rng(0))
    g = backbone(Tensor(np.zeros((2, 3, TINY_SIZE, TINY_SIZE))))
    assert (g.batch, g.channels, g.height, g.width) == (2, 2, 4, 4)
    assert backbone.feature_size == TINY_SIZE // 4


def test_backbone_parameter_count():
    backbone = VisionBackbone(120, DEFAULT_WIDTHS, rng=np.random.default_rng(0))
    channels = (3,) + DEFAULT_WIDTHS
    expected = sum(9 * c_in * c_out + c_out for c_in, c_out in zip(channels, channels[1:]))
    assert backbone.num_parameters() == expected == 429536


@pytest.mark.parametrize('size', [0, 30, 121])
def test_backbone_rejects_input_size(size):
    with pytest.raises(ConfigError):
        VisionBackbone(size, TINY_WIDTHS)


def test_backbone_rejects_widths():
    with pytest.raises(ConfigError):
        VisionBackbone(TINY_SIZE, (2, 2, 2))
    with pytest.raises(ConfigError):
        VisionBackbone(TINY_SIZE, (2, 2, 2, 0, 2, 2, 2))


def test_backbone_rejects_wrong_image_shape():
    backbone = VisionBackbone(TINY_SIZE, TINY_WIDTHS)
    with pytest.raises(ShapeError):
        backbone(Tensor(np.zeros((1, 3, 20, 20))))
    with pytest.raises(ShapeError):
        backbone(Tensor(np.zeros((1, 1, TINY_SIZE, TINY_SIZE))))


def test_backbone_dropout_only_in_training():
    backbone = VisionBackbone(TINY_SIZE, TINY_WIDTHS, dropout_p=0.5, rng=np.random.default_rng(1))
    x = Tensor(np.random.default_rng(2).random((1, 3, TINY_SIZE, TINY_SIZE)))
    backbone.eval()
    first, second = backbone(x).values.data, backbone(x).values.data
    np.testing.assert_array_equal(first, second)
    backbone.train()
    assert not np.array_equal(backbone(x).values.data, backbone(x).values.data)


def test_images_to_tensor():
    images = np.zeros((2, 4, 6, 3), dtype=np.uint8)
    images[0, 1, 2] = (255, 0, 51)
    t = images_to_tensor(images)
    assert t.shape == (2, 3, 4, 6)
    np.testing.assert_allclose(t.data[0, :, 1, 2], [1.0, 0.0, 0.2])
    assert images_to_tensor(images[0]).shape == (1, 3, 4, 6)


def test_state_dict_round_trip_and_order():
    rng = np.random.default_rng(0)
    model = Sequential(Conv2d(1, 2, 3, rng), Dense(4, 3, rng))
    assert list(model.state_dict()) == ['0.weight', '0.bias', '1.weight', '1.bias']
    clone = Sequential(Conv2d(1, 2, 3, np.random.default_rng(9)), Dense(4, 3, np.random.default_rng(9)))
    clone.load_state_dict(model.state_dict())
    for (name, a), (_, b) in zip(model.named_parameters(), clone.named_parameters()):
        np.testing.assert_array_equal(a.data, b.data, err_msg=name)


def test_load_state_dict_contract():
    rng = np.random.default_rng(0)
    model = Dense(4, 3, rng)
    state = model.state_dict()
    with pytest.raises(ContractError):
        model.load_state_dict({'weight': state['weight']})
    with pytest.raises(ContractError):
        model.load_state_dict(dict(state, extra=np.zeros(1)))
    with pytest.raises(ShapeError):
        model.load_state_dict(dict(state, bias=np.zeros(4)))


def test_train_eval_propagates():
    model = Sequential(Dropout(0.5), Sequential(Dropout(0.1)))
    model.eval()
    assert not any(m.training for m in model.modules())
    model.train()
    assert all(m.training for m in model.modules())


def test_crop_even():
    x = Tensor(np.arange(2 * 5 * 7, dtype=float).reshape(1, 2, 5, 7))
    out = CropEven()(x)
    assert out.shape == (1, 2, 4, 6)
    even = Tensor(np.zeros((1, 1, 4, 4)))
    assert CropEven()(even) is even


def test_gradients_reach_every_backbone_parameter():
    backbone = VisionBackbone(TINY_SIZE, TINY_WIDTHS, dropout_p=0.0, rng=np.random.default_rng(3))
    x = Tensor(np.random.default_rng(4).random((2, 3, TINY_SIZE, TINY_SIZE)))
    with Graph() as graph:
        loss = F.sum(F.mul(backbone(x).values, backbone(x).values))
    backward(loss, graph, backbone.parameters())
    assert all(p.grad is not None and p.grad.shape == p.shape for p in backbone.parameters())
    assert np.any(backbone.parameters()[0].grad != 0)


def sprite_moved_by_one_stride() -> np.ndarray:
    images = np.zeros((2, 64, 64, 3), dtype=np.uint8)
    images[0, 20:28, 22:30] = (220, 30, 30)
    images[1, 24:32, 26:34] = (220, 30, 30)
    return images


def test_feature_map_follows_a_sprite_shifted_by_the_stride():
    backbone = VisionBackbone(64, TINY_WIDTHS, rng=np.random.default_rng(5)).eval()
    # Biases start at zero, so a black background stays exactly zero through the stack.
    g = backbone(images_to_tensor(sprite_moved_by_one_stride())).values.data
    np.testing.assert_allclose(g[1], np.roll(g[0], (1, 1), axis=(1, 2)), atol=1e-12)


def test_attended_point_moves_by_the_excess_attention_mass():
    rng = np.random.default_rng(5)
    backbone = VisionBackbone(64, TINY_WIDTHS, rng=rng).eval()
    head = SoftmaxHead(TINY_WIDTHS[-1], 16, rng, kind=LocalizationHeadKind.SOFTMAX_PLAIN)
    g = backbone(images_to_tensor(sprite_moved_by_one_stride()))
    values = g.values.data[0]
    norms = np.linalg.norm(values, axis=0)
    peak = values[(slice(None),) + np.unravel_index(np.argmax(norms), norms.shape)]
    # Background cells saturate at tanh = -1, the floor of the bottleneck; the peak cell reaches tanh(2).
    head.bottleneck.weight.data[...] = (22.0 * peak / peak.dot(peak)).reshape(1, -1, 1, 1)
    head.bottleneck.bias.data[...] = -20.0
    gb, ghat, f = head.probe(g)
    assert gb.values.data[0, 0, 15, 15] == pytest.approx(-1.0, abs=1e-15)
    background = ghat.values.data[:, 0, 15, 15]
    assert background[0] == pytest.approx(background[1], rel=1e-12)
    excess = 1.0 - 16 * 16 * background[0]
    assert 0.0 < excess < 1.0
    np.testing.assert_allclose(f.values.data[1, 0] - f.values.data[0, 0], [excess, excess], atol=1e-9)
