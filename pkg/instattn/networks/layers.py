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

from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from instattn.engine import functional as F
from instattn.engine.init import kaiming_uniform, zeros
from instattn.engine.tensor import Tensor
from instattn.utils.exceptions import ContractError, ShapeError


class Module:
    """Container of named learnable tensors and sub-modules.

    Parameters and sub-modules are kept in registration order, which fixes the order of
    `named_parameters()`, `state_dict()` and therefore of checkpoints.
    """

    def __init__(self):
        self._parameters: Dict[str, Tensor] = {}
        self._modules: Dict[str, 'Module'] = {}
        self.training = True

    def register_parameter(self, name: str, value: np.ndarray) -> Tensor:
        tensor = Tensor(value, requires_grad=True, name=name)
        self._parameters[name] = tensor
        return tensor

    def add_module(self, name: str, module: 'Module') -> 'Module':
        self._modules[name] = module
        return module

    def named_parameters(self, prefix: str = '') -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._parameters.items():
            yield prefix + name, tensor
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix=f'{prefix}{name}.')

    def parameters(self) -> List[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    def modules(self) -> Iterator['Module']:
        yield self
        for module in self._modules.values():
            yield from module.modules()

    def train(self, mode: bool = True) -> 'Module':
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> 'Module':
        return self.train(False)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy `state` into the parameters. Every parameter must be present with a matching shape."""
        named = dict(self.named_parameters())
        missing = [name for name in named if name not in state]
        if missing:
            raise ContractError(f'state is missing parameters: {missing}')
        unexpected = [name for name in state if name not in named]
        if unexpected:
            raise ContractError(f'state has unexpected parameters: {unexpected}')
        for name, tensor in named.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise ShapeError('load_state_dict', f'{name} has shape {value.shape}, expected {tensor.shape}')
            tensor.data[...] = value

    def num_parameters(self) -> int:
        return int(np.sum([tensor.size for tensor in self.parameters()]))

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Sequential(Module):
    def __init__(self, *layers: Module):
        super().__init__()
        self.layers = list(layers)
        for i, layer in enumerate(self.layers):
            self.add_module(str(i), layer)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x


class Conv2d(Module):
    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, rng: np.random.Generator):
        super().__init__()
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = self.register_parameter(
            'weight', kaiming_uniform((out_channels, in_channels, kernel_size, kernel_size), fan_in, rng)
        )
        self.bias = self.register_parameter('bias', zeros((out_channels,)))

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, padding='same')


class Dense(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.weight = self.register_parameter('weight', kaiming_uniform((in_features, out_features), in_features, rng))
        self.bias = self.register_parameter('bias', zeros((out_features,)))

    def forward(self, x: Tensor) -> Tensor:
        return F.dense(x, self.weight, self.bias)


class MaxPool2d(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.maxpool2d(x)


class Activation(Module):
    def __init__(self, kind: str):
        super().__init__()
        self.kind = kind

    def forward(self, x: Tensor) -> Tensor:
        return F.activation(x, self.kind)


class Dropout(Module):
    """Inverted dropout drawing its masks from a private generator, so forward passes are reproducible."""

    def __init__(self, p: float, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.p = p
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x: Tensor) -> Tensor:
        return F.dropout(x, self.p, self.training, self.rng)


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.reshape(x, (x.shape[0], -1))


class CropEven(Module):
    """Drop the last row and/or column of a [N,C,H,W] tensor so that H and W are even."""

    def forward(self, x: Tensor) -> Tensor:
        height, width = x.shape[2] - x.shape[2] % 2, x.shape[3] - x.shape[3] % 2
        if (height, width) == x.shape[2:]:
            return x
        return F.crop(x, height, width)
