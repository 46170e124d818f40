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

from typing import Callable, List, Sequence

import numpy as np

from instattn.engine.tensor import Graph, Tensor, backward

DEFAULT_STEP = 1e-5


def numerical_gradient(fn: Callable[[], Tensor], tensor: Tensor, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central finite-difference gradient of the scalar `fn()` with respect to `tensor`.

    `fn` must be a pure function of the tensors it closes over; `tensor.data` is perturbed in place
    and restored afterwards.
    """
    grad = np.zeros_like(tensor.data)
    for index in np.ndindex(*tensor.shape):
        original = tensor.data[index]
        tensor.data[index] = original + h
        plus = fn().item()
        tensor.data[index] = original - h
        minus = fn().item()
        tensor.data[index] = original
        grad[index] = (plus - minus) / (2.0 * h)
    return grad


def analytic_gradients(fn: Callable[[], Tensor], tensors: Sequence[Tensor]) -> List[np.ndarray]:
    for tensor in tensors:
        tensor.requires_grad = True
    with Graph() as graph:
        loss = fn()
    backward(loss, graph, parameters=tensors)
    return [np.array(t.grad) for t in tensors]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def gradcheck(fn: Callable[[], Tensor], tensors: Sequence[Tensor], h: float = DEFAULT_STEP) -> float:
    """Worst relative error between autodiff and central-difference gradients over `tensors`."""
    analytic = analytic_gradients(fn, tensors)
    return max(relative_error(a, numerical_gradient(fn, t, h)) for a, t in zip(analytic, tensors))
