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

from typing import Any, Callable, Dict

import numpy as np

from instattn.engine.optim import Adam
from instattn.engine.tensor import Graph, Tensor, backward
from instattn.harness.checkpoint import Checkpoint
from instattn.networks.layers import Module
from instattn.utils.exceptions import NumericError

Hook = Callable[[str, Dict[str, Any]], None]


def no_hook(event: str, payload: Dict[str, Any]) -> None:
    pass


def optimize_step(model: Module, optimizer: Adam, loss_fn: Callable[[], Tensor]) -> float:
    """Record `loss_fn()` on a fresh graph, backpropagate and apply one optimizer update."""
    optimizer.zero_grad()
    with Graph() as graph:
        loss = loss_fn()
    loss.check_finite('training loss')
    backward(loss, graph, model.parameters())
    optimizer.step()
    return loss.item()


def last_good_checkpoint(model: Module, snapshot: Callable[[], Checkpoint], fallback: Checkpoint) -> Checkpoint:
    """`snapshot()` of the current parameters, or `fallback` when they already hold non-finite values."""
    if all(np.all(np.isfinite(p.data)) for p in model.parameters()):
        return snapshot()
    return fallback


def guarded_step(
    model: Module,
    optimizer: Adam,
    loss_fn: Callable[[], Tensor],
    snapshot: Callable[[], Checkpoint],
    fallback: Checkpoint,
) -> float:
    """`optimize_step` that turns numeric failures into `NumericError` carrying the last good checkpoint."""
    try:
        return optimize_step(model, optimizer, loss_fn)
    except NumericError as e:
        raise NumericError(e.detail, checkpoint=last_good_checkpoint(model, snapshot, fallback)) from e
