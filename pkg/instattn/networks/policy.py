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
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from instattn.engine import functional as F
from instattn.engine.tensor import Tensor
from instattn.networks.backbone import DEFAULT_WIDTHS, VisionBackbone, images_to_tensor
from instattn.networks.heads import LocalizationHeadKind, build_head
from instattn.networks.layers import Activation, Dense, Module, Sequential
from instattn.utils.exceptions import ContractError, ParameterError

# Number of choices of each action head: a0, a1, a2 in {-1, 0, +1}; a3 in {open, close}.
HEAD_SIZES = (3, 3, 3, 2)
STATE_SIZE = 4
OPEN, CLOSE = 0, 1


@dataclass(frozen=True)
class ActionVector:
    """Relative end-effector motion along x, y and z plus the gripper command."""

    a0: int
    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        if any(a not in (-1, 0, 1) for a in (self.a0, self.a1, self.a2)) or self.a3 not in (OPEN, CLOSE):
            raise ContractError(f'invalid action {self.as_tuple()}')

    def as_tuple(self):
        return self.a0, self.a1, self.a2, self.a3

    @property
    def motion(self):
        return self.a0, self.a1, self.a2

    def codes(self) -> np.ndarray:
        """Class indices per head: motions -1/0/+1 map to 0/1/2, the gripper bit maps to itself."""
        return np.array([self.a0 + 1, self.a1 + 1, self.a2 + 1, self.a3], dtype=np.int64)

    @classmethod
    def from_codes(cls, codes: Sequence[int]) -> 'ActionVector':
        codes = [int(c) for c in codes]
        return cls(codes[0] - 1, codes[1] - 1, codes[2] - 1, codes[3])


@dataclass
class Observation:
    """A camera frame (uint8 [H,W,3]) and the robot state c = (x, y, z, gripper), each in [0, 1]."""

    image: np.ndarray
    state: np.ndarray

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.uint8)
        # float32 storage keeps states bit-identical across demonstration files.
        self.state = np.asarray(self.state, dtype=np.float32).astype(np.float64)
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ContractError(f'observation image must be [H,W,3], got {self.image.shape}')
        if self.state.shape != (STATE_SIZE,) or np.any(self.state < 0) or np.any(self.state > 1):
            raise ContractError(f'observation state must be {STATE_SIZE} values in [0, 1], got {self.state}')


def resize_nearest(image: np.ndarray, size: int) -> np.ndarray:
    """Nearest-neighbour resize of a [H,W,C] image to [size,size,C]."""
    rows = np.arange(size) * image.shape[0] // size
    cols = np.arange(size) * image.shape[1] // size
    return image[rows][:, cols]


def one_hot(codes: np.ndarray, size: int) -> np.ndarray:
    return np.eye(size)[np.asarray(codes, dtype=np.int64)]


@dataclass
class ActionDistribution:
    """The four autoregressive categoricals of one observation.

    `probs[i]` is head i conditioned on the prior actions the distribution was built with, or on the
    greedy choices of the earlier heads when no prior was given. `conditional(i, prefix)` evaluates head i
    for any prefix of earlier action codes.
    """

    probs: List[np.ndarray]
    conditional: Callable[[int, Sequence[int]], np.ndarray]

    def joint(self) -> np.ndarray:
        """Probability of every (a0, a1, a2, a3) code combination, shape (3, 3, 3, 2)."""
        joint = np.zeros(HEAD_SIZES)
        for combo in itertools.product(*(range(n) for n in HEAD_SIZES)):
            p = 1.0
            for head in range(len(HEAD_SIZES)):
                p *= self.conditional(head, combo[:head])[combo[head]]
            joint[combo] = p
        return joint


class PolicyNetwork(Module):
    """Autoregressive visuomotor policy.

    Backbone and localization head produce an attended point f; the trunk maps concat(f / (W_g - 1), c)
    through FC16-ReLU-FC7-ReLU to h. Head i maps concat(h, one-hot a_0..a_{i-1}) through FC8-ReLU-FC{3|2}.
    """

    def __init__(
        self,
        kind: Union[LocalizationHeadKind, str] = LocalizationHeadKind.SOFTMAX_SCORE,
        input_size: int = 120,
        widths: Sequence[int] = DEFAULT_WIDTHS,
        dropout_p: float = 0.5,
        conv_widths: Sequence[int] = DEFAULT_WIDTHS,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.kind = LocalizationHeadKind(kind)
        self.input_size = input_size
        self.backbone = self.add_module('backbone', VisionBackbone(input_size, widths, dropout_p, rng))
        self.feature_size = self.backbone.feature_size
        self.localizer = self.add_module(
            'localizer', build_head(self.kind, self.backbone.out_channels, self.feature_size, rng, conv_widths)
        )
        self.trunk = self.add_module(
            'trunk',
            Sequential(Dense(2 + STATE_SIZE, 16, rng), Activation('relu'), Dense(16, 7, rng), Activation('relu')),
        )
        self.action_heads: List[Module] = []
        for i, size in enumerate(HEAD_SIZES):
            in_features = 7 + int(np.sum(HEAD_SIZES[:i]))
            head = Sequential(Dense(in_features, 8, rng), Activation('relu'), Dense(8, size, rng))
            self.action_heads.append(self.add_module(f'action{i}', head))

    def encode(self, images: Tensor, states: np.ndarray) -> Tensor:
        """Trunk output h for [N,3,S,S] images and [N,4] states."""
        f = self.localizer(self.backbone(images)).values
        scaled = F.mul(F.reshape(f, (f.shape[0], 2)), 1.0 / max(self.feature_size - 1, 1))
        return self.trunk(F.concat([scaled, Tensor(np.asarray(states, dtype=np.float64))], axis=1))

    def head_logits(self, h: Tensor, head: int, prior_codes: np.ndarray) -> Tensor:
        prior_codes = np.asarray(prior_codes, dtype=np.int64).reshape(h.shape[0], -1)
        if prior_codes.shape[1] < head:
            raise ContractError(f'action head {head} needs {head} prior actions, got {prior_codes.shape[1]}')
        parts = [h] + [Tensor(one_hot(prior_codes[:, j], HEAD_SIZES[j])) for j in range(head)]
        return self.action_heads[head](F.concat(parts, axis=1) if head else h)

    def forward(self, images: Tensor, states: np.ndarray, prior_codes: np.ndarray) -> List[Tensor]:
        """Teacher-forced logits of all four heads; `prior_codes` [N, >=3] holds the expert's a0..a2 codes."""
        h = self.encode(images, states)
        return [self.head_logits(h, i, prior_codes) for i in range(len(HEAD_SIZES))]

    def policy_forward(self, obs: Observation, prior_actions: Optional[Sequence[int]] = None) -> ActionDistribution:
        """Action distribution for one observation.

        `prior_actions` are the codes of already-fixed leading actions. In training mode every conditioned
        head needs one, as it does for teacher forcing.
        """
        prior = [int(c) for c in (prior_actions or [])]
        if self.training and len(prior) < len(HEAD_SIZES) - 1:
            raise ContractError(
                f'policy in training mode needs {len(HEAD_SIZES) - 1} prior actions, got {len(prior)}'
            )
        image = obs.image if obs.image.shape[0] == self.input_size else resize_nearest(obs.image, self.input_size)
        h = self.encode(images_to_tensor(image), obs.state[None])

        def conditional(head: int, prefix: Sequence[int]) -> np.ndarray:
            return F.softmax(self.head_logits(h, head, np.asarray(list(prefix)[:head]))).data[0]

        probs: List[np.ndarray] = []
        chosen: List[int] = []
        for head in range(len(HEAD_SIZES)):
            p = conditional(head, chosen)
            probs.append(p)
            chosen.append(prior[head] if head < len(prior) else int(np.argmax(p)))
        return ActionDistribution(probs=probs, conditional=conditional)


def select_action(
    dist: ActionDistribution,
    mode: str = 'greedy',
    rng: Optional[np.random.Generator] = None,
) -> ActionVector:
    """Decode an action head by head, feeding each choice into the next head's conditioning.

    Greedy decoding breaks ties toward the lowest index.
    """
    if mode not in ('greedy', 'sample'):
        raise ParameterError('select_action', 'mode', mode)
    if mode == 'sample' and rng is None:
        raise ContractError('sampling actions needs a random generator')
    codes: List[int] = []
    for head in range(len(HEAD_SIZES)):
        p = dist.conditional(head, codes)
        codes.append(int(np.argmax(p)) if mode == 'greedy' else int(rng.choice(len(p), p=p)))  # type: ignore
    return ActionVector.from_codes(codes)
