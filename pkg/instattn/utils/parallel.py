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

from typing import Callable, List, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed

T = TypeVar('T')
R = TypeVar('R')


def derive_seeds(seed: int, n: int) -> List[int]:
    """Derive `n` independent, reproducible integer seeds from `seed`.

    Per-item seeds make generation and rollouts independent of execution order and worker count.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Apply `fn` to every item, fanning out over `workers` threads. Output order follows `items`."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=workers, prefer='threads')(delayed(fn)(item) for item in items)
