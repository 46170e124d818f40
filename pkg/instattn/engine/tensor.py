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

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from instattn.utils.exceptions import ContractError, NumericError

ArrayLike = Union[np.ndarray, float, int, Sequence]

_NODE_IDS = itertools.count()
_ACTIVE = threading.local()


class Tensor:
    """An n-dimensional float64 array taking part in a reverse-mode differentiation graph.

    Parameters are leaf tensors created with `requires_grad=True`. Tensors produced by ops inside an
    active `Graph` are recorded on that graph; outside of any graph ops only evaluate forward.
    """

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.node_id = next(_NODE_IDS)
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data.item())

    def zero_grad(self) -> None:
        self.grad = None

    def check_finite(self, what: str = 'tensor') -> 'Tensor':
        if not np.all(np.isfinite(self.data)):
            raise NumericError(f'non-finite values in {what} (shape {self.shape})')
        return self

    def __repr__(self) -> str:
        label = f' name={self.name!r}' if self.name else ''
        return f'Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})'

    def __add__(self, other):
        from instattn.engine import functional as F

        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from instattn.engine import functional as F

        return F.sub(self, other)

    def __mul__(self, other):
        from instattn.engine import functional as F

        return F.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from instattn.engine import functional as F

        return F.mul(self, -1.0)

    def __matmul__(self, other):
        from instattn.engine import functional as F

        return F.matmul(self, other)


def constant(data: ArrayLike, name: Optional[str] = None) -> Tensor:
    """Wrap `data` in a tensor that never receives gradients."""
    return Tensor(data, requires_grad=False, name=name)


@dataclass(frozen=True)
class Operation:
    """One recorded op: its inputs, its output and the rule mapping the output gradient to input gradients."""

    name: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

    @property
    def input_ids(self) -> Tuple[int, ...]:
        return tuple(t.node_id for t in self.inputs)

    @property
    def output_id(self) -> int:
        return self.output.node_id


class Graph:
    """Ordered tape of recorded operations.

    Usage:

    ```
    with Graph() as graph:
        loss = F.mse_loss(model(x), y)
    backward(loss, graph, model.parameters())
    ```

    Graphs are bound to the thread that entered them; separate threads record onto separate graphs.
    """

    def __init__(self) -> None:
        self.operations: List[Operation] = []

    def record(self, operation: Operation) -> None:
        self.operations.append(operation)

    def __len__(self) -> int:
        return len(self.operations)

    def __enter__(self) -> 'Graph':
        stack = getattr(_ACTIVE, 'stack', None)
        if stack is None:
            stack = _ACTIVE.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.stack.pop()

    def backward(self, loss: Tensor, parameters: Optional[Iterable[Tensor]] = None) -> None:
        backward(loss, self, parameters)


def current_graph() -> Optional[Graph]:
    stack = getattr(_ACTIVE, 'stack', None)
    return stack[-1] if stack else None


def record(
    name: str,
    inputs: Sequence[Tensor],
    data: np.ndarray,
    backward_fn: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]],
) -> Tensor:
    """Create the output tensor of an op and, when differentiating, record the op on the active graph."""
    graph = current_graph()
    tracked = graph is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=tracked)
    if tracked:
        graph.record(Operation(name, tuple(inputs), out, backward_fn))  # type: ignore[union-attr]
    return out


def backward(loss: Tensor, graph: Graph, parameters: Optional[Iterable[Tensor]] = None) -> None:
    """Populate `.grad` on every tensor reachable from `loss` through `graph`.

    When `parameters` is given their gradients are reset to zero first, so parameters that `loss` does
    not depend on end up with an all-zero gradient. Otherwise gradients accumulate into existing buffers.
    """
    if loss.size != 1:
        raise ContractError(f'backward expects a scalar loss, got shape {loss.shape}')
    loss.check_finite('loss')

    if parameters is not None:
        for param in parameters:
            param.grad = np.zeros_like(param.data)

    loss.grad = np.ones_like(loss.data)
    for op in reversed(graph.operations):
        grad_out = op.output.grad
        if grad_out is None:
            continue
        for tensor, grad in zip(op.inputs, op.backward(grad_out)):
            if grad is None or not tensor.requires_grad:
                continue
            if tensor.grad is None:
                tensor.grad = np.array(grad, dtype=np.float64)
            else:
                tensor.grad = tensor.grad + grad
