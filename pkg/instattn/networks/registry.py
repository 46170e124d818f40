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

from typing import Dict, List

from instattn.networks.heads import LocalizationHeadKind
from instattn.utils.exceptions import InvalidHeadException, InvalidTaskException

HEAD_NAMES: Dict[str, LocalizationHeadKind] = {
    'fc': LocalizationHeadKind.FC,
    'conv': LocalizationHeadKind.CONV,
    'softmax': LocalizationHeadKind.SOFTMAX_PLAIN,
    'onehot': LocalizationHeadKind.SOFTMAX_ONEHOT,
    'coords': LocalizationHeadKind.SOFTMAX_COORDS,
    'score': LocalizationHeadKind.SOFTMAX_SCORE,
}

TASKS: Dict[str, int] = {
    'reach': 0,
    'push': 1,
    'pickplace': 2,
}

# Canonical demonstration and evaluation rollout counts per task.
TASK_DEMOS: Dict[str, int] = {'reach': 15, 'push': 15, 'pickplace': 10}
TASK_ROLLOUTS: Dict[str, int] = {'reach': 15, 'push': 15, 'pickplace': 20}


def get_supported_heads() -> List[str]:
    return list(HEAD_NAMES.keys())


def get_supported_tasks() -> List[str]:
    return list(TASKS.keys())


def head_kind(name: str) -> LocalizationHeadKind:
    """Resolve a CLI head name (`score`) or a kind value (`softmax-score`)."""
    if name in HEAD_NAMES:
        return HEAD_NAMES[name]
    try:
        return LocalizationHeadKind(name)
    except ValueError:
        raise InvalidHeadException(name, get_supported_heads())


def head_name(kind: LocalizationHeadKind) -> str:
    return {v: k for k, v in HEAD_NAMES.items()}[LocalizationHeadKind(kind)]


def task_id(task: str) -> int:
    if task not in TASKS:
        raise InvalidTaskException(task, get_supported_tasks())
    return TASKS[task]


def task_name(task_id: int) -> str:
    for name, value in TASKS.items():
        if value == task_id:
            return name
    raise InvalidTaskException(str(task_id), get_supported_tasks())
