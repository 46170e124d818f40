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

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from instattn.harness.config import TrainConfig
from instattn.networks.layers import Module
from instattn.networks.localizer import Localizer
from instattn.networks.policy import PolicyNetwork
from instattn.utils import log
from instattn.utils.binary import U32, ByteReader, header
from instattn.utils.exceptions import ContractError, FormatError

MAGIC = b'IACK'
VERSION = 1
MODEL_KINDS = ('localizer', 'policy')


@dataclass
class Checkpoint:
    """Named float32 parameter tensors plus the configuration that rebuilds their model.

    `config` holds the `TrainConfig` echo together with `model` (localizer or policy) and `training_step`.
    """

    tensors: Dict[str, np.ndarray]
    config: Dict[str, str] = field(default_factory=dict)

    @property
    def model(self) -> str:
        return self.config.get('model', 'localizer')

    @property
    def step(self) -> int:
        return int(self.config.get('training_step', '0'))

    def train_config(self) -> TrainConfig:
        return TrainConfig.from_dict(self.config, ignore_unknown=True)

    def equals(self, other: 'Checkpoint') -> bool:
        """Bit-exact equality of configuration and tensors."""
        return (
            self.config == other.config
            and list(self.tensors) == list(other.tensors)
            and all(
                a.shape == b.shape and a.tobytes() == b.tobytes()
                for a, b in zip(self.tensors.values(), other.tensors.values())
            )
        )

    @classmethod
    def from_model(cls, model: Module, cfg: TrainConfig, model_kind: str, step: int = 0, **extra: Any) -> 'Checkpoint':
        if model_kind not in MODEL_KINDS:
            raise ContractError(f'model kind must be one of {MODEL_KINDS}, got {model_kind}')
        config = cfg.to_dict()
        config['model'] = model_kind
        config['training_step'] = str(step)
        config.update({key: str(value) for key, value in extra.items()})
        tensors = {name: tensor.data.astype(np.float32) for name, tensor in model.named_parameters()}
        return cls(tensors, config)

    def load_into(self, model: Module) -> Module:
        """Copy the stored tensors into `model`, widening to float64."""
        model.load_state_dict({name: value.astype(np.float64) for name, value in self.tensors.items()})
        return model

    def build_model(self) -> Module:
        model = build_model(self.train_config(), self.model)
        return self.load_into(model)


def build_model(cfg: TrainConfig, model_kind: str = 'localizer') -> Module:
    """Freshly initialized model for `cfg`; initialization depends only on `cfg.seed`."""
    rng = np.random.default_rng(cfg.seed)
    kwargs = dict(
        input_size=cfg.input_size,
        widths=cfg.widths,
        dropout_p=cfg.dropout_p,
        conv_widths=cfg.conv_head_widths,
        rng=rng,
    )
    if model_kind == 'localizer':
        return Localizer(cfg.head_kind, **kwargs)
    if model_kind == 'policy':
        return PolicyNetwork(cfg.head_kind, **kwargs)
    raise ContractError(f'model kind must be one of {MODEL_KINDS}, got {model_kind}')


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    config_block = ''.join(f'{key}={value}\n' for key, value in ckpt.config.items()).encode('utf-8')
    chunks = [header(MAGIC, VERSION), U32.pack(len(config_block)), config_block, U32.pack(len(ckpt.tensors))]
    for name, value in ckpt.tensors.items():
        encoded_name = name.encode('utf-8')
        chunks += [U32.pack(len(encoded_name)), encoded_name, U32.pack(value.ndim)]
        chunks += [U32.pack(dim) for dim in value.shape]
        chunks.append(np.ascontiguousarray(value, dtype='<f4').tobytes())
    return b''.join(chunks)


def decode_checkpoint(data: bytes) -> Checkpoint:
    reader = ByteReader(data, 'checkpoint')
    reader.expect_header(MAGIC, VERSION)
    block_offset = reader.offset + U32.size
    block = reader.read(reader.u32('config length'), 'config block')
    try:
        text = bytes(block).decode('utf-8')
    except UnicodeDecodeError as e:
        raise FormatError('checkpoint', f'config block is not UTF-8: {e.reason}', block_offset + e.start)
    config: Dict[str, str] = {}
    for line in text.splitlines():
        if '=' not in line:
            raise FormatError('checkpoint', f'malformed config line {line!r}', block_offset)
        key, value = line.split('=', 1)
        config[key] = value

    tensors: Dict[str, np.ndarray] = {}
    for i in range(reader.u32('tensor count')):
        name_offset = reader.offset
        raw_name = reader.read(reader.u32(f'name length of tensor {i}'), f'name of tensor {i}')
        try:
            name = bytes(raw_name).decode('utf-8')
        except UnicodeDecodeError:
            raise FormatError('checkpoint', f'name of tensor {i} is not UTF-8', name_offset)
        shape = tuple(reader.u32(f'dims of {name}') for _ in range(reader.u32(f'rank of {name}')))
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.read(4 * count, f'data of {name}'), dtype='<f4')
        tensors[name] = values.astype(np.float32).reshape(shape)
    reader.expect_end()
    return Checkpoint(tensors, config)


def save_checkpoint(ckpt: Checkpoint, path: Union[str, Path]) -> None:
    Path(path).write_bytes(encode_checkpoint(ckpt))
    log.info(f'Saved {ckpt.model} checkpoint ({len(ckpt.tensors)} tensors, step {ckpt.step}) to {path}')


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    return decode_checkpoint(Path(path).read_bytes())
