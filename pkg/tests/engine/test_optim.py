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
from instattn.engine.optim import Adam, AdamState, adam_step
from instattn.engine.tensor import Graph, Tensor, backward
from instattn.utils.exceptions import ContractError


def test_first_step_moves_by_learning_rate():
    params = [np.array([1.0, -1.0, 0.5])]
    grads = [np.array([0.3, -4.0, 1e-3])]
    params, state = adam_step(params, grads, AdamState(lr=0.1))
    assert state.t == 1
    np.testing.assert_allclose(params[0], [0.9, -0.9, 0.4], atol=1e-5)


def test_bias_correction_over_steps():
    state = AdamState(lr=1.0, beta1=0.5, beta2=0.5, eps=0.0)
    param = np.array([0.0])
    adam_step([param], [np.array([2.0])], state)
    adam_step([param], [np.array([4.0])], state)
    # m = 0.5 * 1 + 0.5 * 4 = 2.5 -> 2.5 / 0.75; v = 0.5 * 2 + 0.5 * 16 = 9 -> 9 / 0.75
    expected = -1.0 - (2.5 / 0.75) / np.sqrt(9.0 / 0.75)
    assert param[0] == pytest.approx(expected)
    assert state.t == 2


def test_zero_gradient_leaves_params():
    param = np.array([3.0, 4.0])
    adam_step([param], [np.zeros(2)], AdamState())
    np.testing.assert_array_equal(param, [3.0, 4.0])


def test_adam_step_contract():
    with pytest.raises(ContractError):
        adam_step([np.zeros(2)], [], AdamState())
    with pytest.raises(ContractError):
        adam_step([np.zeros(2)], [np.zeros(3)], AdamState())
    state = AdamState()
    adam_step([np.zeros(2)], [np.ones(2)], state)
    with pytest.raises(ContractError):
        adam_step([np.zeros(3)], [np.ones(3)], state)


def test_adam_minimizes_quadratic():
    x = Tensor([5.0, -3.0], requires_grad=True)
    optimizer = Adam({'x': x}, lr=0.1)
    for _ in range(500):
        optimizer.zero_grad()
        with Graph() as graph:
            loss = F.sum(x * x)
        backward(loss, graph)
        optimizer.step()
    np.testing.assert_allclose(x.data, [0.0, 0.0], atol=5e-2)
    assert optimizer.names == ['x']


def test_adam_treats_missing_grad_as_zero():
    a = Tensor([1.0], requires_grad=True, name='a')
    b = Tensor([1.0], requires_grad=True)
    optimizer = Adam([a, b], lr=0.5)
    a.grad = np.array([1.0])
    optimizer.step()
    assert a.data[0] == pytest.approx(0.5)
    assert b.data[0] == 1.0
    assert optimizer.names == ['a', '1']
