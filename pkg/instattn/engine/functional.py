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

from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import logsumexp

from instattn.engine.tensor import Tensor, record
from instattn.utils.exceptions import ContractError, NumericError, ParameterError, ShapeError

Operand = Union[Tensor, np.ndarray, float, int]


def _as_tensor(value: Operand) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# Elementwise arithmetic


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward_fn(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record('add', (a, b), a.data + b.data, backward_fn)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward_fn(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return record('sub', (a, b), a.data - b.data, backward_fn)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward_fn(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record('mul', (a, b), a.data * b.data, backward_fn)


# Reductions and shape manipulation


def sum(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    def backward_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record('sum', (x,), np.sum(x.data, axis=axis, keepdims=keepdims), backward_fn)


def mean(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    total = sum(x, axis=axis, keepdims=keepdims)
    count = x.size // max(total.size, 1)
    return mul(total, 1.0 / count)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    def backward_fn(g):
        return (g.reshape(x.shape),)

    return record('reshape', (x,), x.data.reshape(shape), backward_fn)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along `axis`; every other dimension must agree."""
    tensors = [_as_tensor(t) for t in tensors]
    reference = tensors[0].shape
    norm_axis = axis % len(reference)
    for t in tensors[1:]:
        other = t.shape
        if len(other) != len(reference) or any(
            d != r for i, (d, r) in enumerate(zip(other, reference)) if i != norm_axis
        ):
            raise ShapeError('concat', f'cannot concatenate {reference} with {other} along axis {axis}')
    splits = np.cumsum([t.shape[norm_axis] for t in tensors])[:-1]

    def backward_fn(g):
        return tuple(np.split(g, splits, axis=norm_axis))

    return record('concat', tuple(tensors), np.concatenate([t.data for t in tensors], axis=norm_axis), backward_fn)


def crop(x: Tensor, height: int, width: int) -> Tensor:
    """Keep the top-left `height` x `width` window of a [N,C,H,W] tensor."""
    if x.ndim != 4 or height > x.shape[2] or width > x.shape[3]:
        raise ShapeError('crop', f'cannot crop {x.shape} to {height}x{width}')

    def backward_fn(g):
        full = np.zeros_like(x.data)
        full[:, :, :height, :width] = g
        return (full,)

    return record('crop', (x,), x.data[:, :, :height, :width], backward_fn)


def matmul(a: Tensor, b: Operand) -> Tensor:
    """Multiply the last axis of `a` ([..., K]) with a matrix `b` ([K, M])."""
    b = _as_tensor(b)
    if b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise ShapeError('matmul', f'inner dimensions disagree: {a.shape} @ {b.shape}')

    def backward_fn(g):
        grad_a = g @ b.data.T
        grad_b = a.data.reshape(-1, b.shape[0]).T @ g.reshape(-1, b.shape[1])
        return grad_a, grad_b

    return record('matmul', (a, b), a.data @ b.data, backward_fn)


# Layer primitives


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise ShapeError('dense', f'input {x.shape} does not match weight {weight.shape}')
    if bias.shape != (weight.shape[1],):
        raise ShapeError('dense', f'bias {bias.shape} does not match weight {weight.shape}')

    def backward_fn(g):
        return g @ weight.data.T, x.data.T @ g, g.sum(axis=0)

    return record('dense', (x, weight, bias), x.data @ weight.data + bias.data, backward_fn)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, padding: str = 'same') -> Tensor:
    """2D cross-correlation of a [N,C,H,W] input with a [K,C,k,k] kernel, k in {1, 3}, stride 1."""
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError('conv2d', f'expected 4D input and weight, got {x.shape} and {weight.shape}')
    n_out, n_in, kh, kw = weight.shape
    if kh != kw or kh not in (1, 3):
        raise ShapeError('conv2d', f'kernel must be 3x3 or 1x1, got {kh}x{kw}')
    if x.shape[1] != n_in:
        raise ShapeError('conv2d', f'input has {x.shape[1]} channels, weight expects {n_in}')
    if bias.shape != (n_out,):
        raise ShapeError('conv2d', f'bias {bias.shape} does not match {n_out} output channels')
    if padding not in ('same', 'none'):
        raise ParameterError('conv2d', 'padding', padding)

    pad = (kh - 1) // 2 if padding == 'same' else 0
    height, width = x.shape[2], x.shape[3]
    if kh == 1:
        out = np.einsum('nchw,kc->nkhw', x.data, weight.data[:, :, 0, 0], optimize=True)
        windows = None
    else:
        padded = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
        out = np.einsum('nchwij,kcij->nkhw', windows, weight.data, optimize=True)
    out = out + bias.data[None, :, None, None]
    if not np.all(np.isfinite(out)):
        raise NumericError(f'conv2d produced non-finite output (input {x.shape}, weight {weight.shape})')

    def backward_fn(g):
        grad_bias = g.sum(axis=(0, 2, 3))
        if windows is None:
            w2 = weight.data[:, :, 0, 0]
            grad_x = np.einsum('nkhw,kc->nchw', g, w2, optimize=True)
            grad_w = np.einsum('nkhw,nchw->kc', g, x.data, optimize=True)[:, :, None, None]
            return grad_x, grad_w, grad_bias
        grad_w = np.einsum('nkhw,nchwij->kcij', g, windows, optimize=True)
        out_h, out_w = g.shape[2], g.shape[3]
        grad_padded = np.zeros((x.shape[0], n_in, height + 2 * pad, width + 2 * pad))
        for i in range(kh):
            for j in range(kw):
                grad_padded[:, :, i : i + out_h, j : j + out_w] += np.einsum(
                    'nkhw,kc->nchw', g, weight.data[:, :, i, j], optimize=True
                )
        grad_x = grad_padded[:, :, pad : pad + height, pad : pad + width]
        return grad_x, grad_w, grad_bias

    return record('conv2d', (x, weight, bias), out, backward_fn)


def maxpool2d(x: Tensor) -> Tensor:
    """2x2 max pooling with stride 2. Gradients go to the first maximal element of each window."""
    if x.ndim != 4:
        raise ShapeError('maxpool2d', f'expected a 4D input, got {x.shape}')
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError('maxpool2d', f'spatial size must be even, got {h}x{w}')

    windows = x.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // 2, w // 2, 4)
    winners = np.argmax(windows, axis=-1)[..., None]
    out = np.take_along_axis(windows, winners, axis=-1)[..., 0]

    def backward_fn(g):
        grad_windows = np.zeros_like(windows)
        np.put_along_axis(grad_windows, winners, g[..., None], axis=-1)
        grad_x = grad_windows.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
        return (grad_x,)

    return record('maxpool2d', (x,), out, backward_fn)


# Activations


def relu(x: Tensor) -> Tensor:
    def backward_fn(g):
        return (g * (x.data > 0),)

    return record('relu', (x,), np.maximum(x.data, 0.0), backward_fn)


def elu(x: Tensor, alpha: float = 1.0) -> Tensor:
    out = np.where(x.data > 0, x.data, alpha * np.expm1(np.minimum(x.data, 0.0)))

    def backward_fn(g):
        return (g * np.where(x.data > 0, 1.0, out + alpha),)

    return record('elu', (x,), out, backward_fn)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward_fn(g):
        return (g * (1.0 - out**2),)

    return record('tanh', (x,), out, backward_fn)


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last dimension."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=-1, keepdims=True)

    def backward_fn(g):
        return (out * (g - np.sum(g * out, axis=-1, keepdims=True)),)

    return record('softmax', (x,), out, backward_fn)


def log_softmax(x: Tensor) -> Tensor:
    out = x.data - logsumexp(x.data, axis=-1, keepdims=True)

    def backward_fn(g):
        return (g - np.exp(out) * g.sum(axis=-1, keepdims=True),)

    return record('log_softmax', (x,), out, backward_fn)


def dropout(x: Tensor, p: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout: zero each element with probability `p` and scale survivors by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ParameterError('dropout', 'p', p)
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ContractError('dropout in training mode needs a random generator')
    mask = (rng.random(x.shape) >= p) / (1.0 - p)

    def backward_fn(g):
        return (g * mask,)

    return record('dropout', (x,), x.data * mask, backward_fn)


ACTIVATIONS: Dict[str, Callable[..., Tensor]] = {
    'elu': elu,
    'relu': relu,
    'tanh': tanh,
    'softmax': softmax,
    'dropout': dropout,
}


def activation(x: Tensor, kind: str, **kwargs) -> Tensor:
    """Apply the activation named `kind` (`elu`, `relu`, `tanh`, `softmax` or `dropout`).

    `dropout` needs `p` and `training` keyword arguments, plus `rng` when training.
    """
    if kind not in ACTIVATIONS:
        raise ParameterError('activation', 'kind', kind)
    return ACTIVATIONS[kind](x, **kwargs)


# Losses


def cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer `targets` under row-wise softmax of `logits` [N,K]."""
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ShapeError('cross_entropy', f'logits {logits.shape} do not match targets {targets.shape}')
    if np.any(targets < 0) or np.any(targets >= logits.shape[1]):
        raise ContractError(f'cross_entropy targets must lie in [0, {logits.shape[1]})')

    rows = np.arange(logits.shape[0])
    log_probs = logits.data - logsumexp(logits.data, axis=-1, keepdims=True)
    loss = -log_probs[rows, targets].mean()

    def backward_fn(g):
        grad = np.exp(log_probs)
        grad[rows, targets] -= 1.0
        return (grad * (g / logits.shape[0]),)

    return record('cross_entropy', (logits,), np.asarray(loss), backward_fn)


def mse_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError('mse_loss', f'prediction {pred.shape} does not match target {target.shape}')
    diff = pred.data - target

    def backward_fn(g):
        return (g * 2.0 * diff / diff.size,)

    return record('mse_loss', (pred,), np.asarray(np.mean(diff**2)), backward_fn)
