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

import struct

import numpy as np
import pytest

from instattn.harness.checkpoint import (
    Checkpoint,
    build_model,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from instattn.networks.localizer import Localizer
from instattn.networks.policy import PolicyNetwork
from instattn.utils.exceptions import ContractError, FormatError, ShapeError
from tests.helpers import tiny_train_config


@pytest.fixture
def checkpoint():
    cfg = tiny_train_config(head='coords')
    return Checkpoint.from_model(build_model(cfg, 'localizer'), cfg, 'localizer', step=12, n_train=32)


def test_from_model(checkpoint):
    assert checkpoint.model == 'localizer'
    assert checkpoint.step == 12
    assert checkpoint.config['n_train'] == '32'
    assert checkpoint.train_config() == tiny_train_config(head='coords')
    assert all(t.dtype == np.float32 for t in checkpoint.tensors.values())
    assert list(checkpoint.tensors)[0] == 'backbone.body.0.weight'


def test_save_load_is_bit_exact(tmp_path, checkpoint):
    path = tmp_path / 'model.iack'
    save_checkpoint(checkpoint, path)
    loaded = load_checkpoint(path)
    assert loaded.equals(checkpoint)
    assert encode_checkpoint(loaded) == encode_checkpoint(checkpoint)


def test_build_model_restores_predictions(checkpoint):
    images = np.random.default_rng(0).integers(0, 256, size=(3, 32, 32, 3), dtype=np.uint8)
    original = checkpoint.build_model()
    restored = decode_checkpoint(encode_checkpoint(checkpoint)).build_model()
    assert isinstance(restored, Localizer)
    np.testing.assert_array_equal(original.predict(images), restored.predict(images))


def test_model_initialization_depends_on_seed():
    a = build_model(tiny_train_config(seed=1), 'policy')
    b = build_model(tiny_train_config(seed=1), 'policy')
    c = build_model(tiny_train_config(seed=2), 'policy')
    assert isinstance(a, PolicyNetwork)
    first = [p.data for p in a.parameters()]
    assert all(np.array_equal(x, p.data) for x, p in zip(first, b.parameters()))
    assert not all(np.array_equal(x, p.data) for x, p in zip(first, c.parameters()))


def test_model_kind_contract():
    cfg = tiny_train_config()
    with pytest.raises(ContractError):
        build_model(cfg, 'critic')
    with pytest.raises(ContractError):
        Checkpoint.from_model(build_model(cfg), cfg, 'critic')


def test_load_into_rejects_other_architecture(checkpoint):
    with pytest.raises(ShapeError):
        checkpoint.load_into(build_model(tiny_train_config(head='coords', widths=(3, 2, 2, 2, 2, 2, 2))))
    with pytest.raises(ContractError):
        checkpoint.load_into(build_model(tiny_train_config(head='fc')))


def test_equals_detects_changes(checkpoint):
    other = decode_checkpoint(encode_checkpoint(checkpoint))
    name = next(iter(other.tensors))
    other.tensors[name] = other.tensors[name].copy()
    other.tensors[name].flat[0] += 1.0
    assert not other.equals(checkpoint)


def test_layout():
    ckpt = Checkpoint({'w': np.array([[1.0, 2.0]], dtype=np.float32)}, {'model': 'localizer'})
    data = encode_checkpoint(ckpt)
    block = b'model=localizer\n'
    expected = b'IACK' + struct.pack('<II', 1, len(block)) + block + struct.pack('<II', 1, 1) + b'w'
    expected += struct.pack('<III', 2, 1, 2) + struct.pack('<2f', 1.0, 2.0)
    assert data == expected


@pytest.mark.parametrize(
    'mutate,offset',
    [
        (lambda d: b'IADM' + d[4:], 0),
        (lambda d: d[:4] + struct.pack('<I', 2) + d[8:], 4),
        (lambda d: d[:12] + b'\xff' + d[13:], 12),
        (lambda d: d[:-2], 49),
        (lambda d: d + b'\x00', 57),
    ],
    ids=['magic', 'version', 'utf8', 'truncated', 'trailing'],
)
def test_malformed_files_report_offset(mutate, offset):
    data = encode_checkpoint(Checkpoint({'w': np.array([[1.0, 2.0]], dtype=np.float32)}, {'model': 'localizer'}))
    assert len(data) == 57
    with pytest.raises(FormatError) as excinfo:
        decode_checkpoint(mutate(data))
    assert excinfo.value.offset == offset
