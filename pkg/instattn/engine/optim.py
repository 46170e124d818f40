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
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from instattn.engine.tensor import Tensor
from instattn.utils.exceptions import ContractError


@dataclass
class AdamState:
    """Moment buffers and step counter of the Adam optimizer.

    `m` and `v` are allocated lazily on the first step so that a state can be created before the
    parameters it will track are known.
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> Tuple[Sequence[np.ndarray], AdamState]:
    """Apply one bias-corrected Adam update to `params` in place and return `(params, state)`."""
    if len(params) != len(grads):
        raise ContractError(f'adam_step got {len(params)} parameters but {len(grads)} gradients')
    for param, grad in zip(params, grads):
        if param.shape != np.shape(grad):
            raise ContractError(f'adam_step gradient shape {np.shape(grad)} does not match parameter {param.shape}')

    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    elif len(state.m) != len(params) or any(m.shape != p.shape for m, p in zip(state.m, params)):
        raise ContractError('adam_step moment buffers do not match the parameters')

    state.t += 1
    bias1 = 1.0 - state.beta1**state.t
    bias2 = 1.0 - state.beta2**state.t
    for param, grad, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(grad)
        m_hat = m / bias1
        v_hat = v / bias2
        param -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state


class Adam:
    """Adam over a fixed, ordered set of named parameter tensors.

    Parameters without a gradient after `backward` are treated as having zero gradient.
    """

    def __init__(
        self,
        parameters: Union[Dict[str, Tensor], Sequence[Tensor]],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        if isinstance(parameters, dict):
            self.names = list(parameters)
            self.parameters = list(parameters.values())
        else:
            self.parameters = list(parameters)
            self.names = [p.name or str(i) for i, p in enumerate(self.parameters)]
        self.state = AdamState(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps)

    def zero_grad(self) -> None:
        for param in self.parameters:
            param.grad = None

    def step(self) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.parameters]
        adam_step([p.data for p in self.parameters], grads, self.state)
