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

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from instattn.utils.exceptions import ContractError

# Accuracy floors / ceilings per (head, training-set size) on the 4096-sample test split.
LOCALIZATION_FLOORS = {
    ('score', 4096): 0.97,
    ('score', 32): 0.90,
    ('coords', 4096): 0.95,
    ('coords', 32): 0.75,
    ('onehot', 4096): 0.90,
}
LOCALIZATION_CEILINGS = {
    ('softmax', 4096): 0.40,
    ('softmax', 32): 0.40,
    ('fc', 32): 0.35,
    ('conv', 32): 0.35,
}
# One-hot at 32 samples must land within this many points below score at 32, and not above it.
ONEHOT_SMALL_SET_GAP = 0.45


@dataclass
class EvalReport:
    """Outcome of one evaluation: localization accuracy of a head or task success rate of a policy."""

    kind: str
    head: str
    rate: float
    n: int
    seed: int
    runtime_s: float
    task: str = ''
    n_train: Optional[int] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ('localization', 'imitation'):
            raise ContractError(f'report kind must be localization or imitation, got {self.kind}')
        if not 0.0 <= self.rate <= 1.0:
            raise ContractError(f'rate must lie in [0, 1], got {self.rate}')

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'EvalReport':
        return cls(**payload)


def load_reports(text: str) -> List[EvalReport]:
    """Parse one report object or a list of them."""
    payload = json.loads(text)
    items = payload if isinstance(payload, list) else [payload]
    return [EvalReport.from_dict(item) for item in items]


def reports_to_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    columns = ['kind', 'head', 'task', 'n_train', 'n', 'seed', 'rate', 'runtime_s']
    return pd.DataFrame([{c: getattr(r, c) for c in columns} for r in reports], columns=columns)


def localization_ordering_violations(reports: Sequence[EvalReport]) -> List[str]:
    """Check localization reports against the expected accuracy floors, ceilings and head ordering.

    Only combinations present in `reports` are checked; the median is used when a combination was
    evaluated more than once. Returns human-readable violations, empty when everything holds.
    """
    frame = reports_to_frame([r for r in reports if r.kind == 'localization'])
    if frame.empty:
        return []
    rates = frame.groupby(['head', 'n_train'])['rate'].median().to_dict()
    violations = []
    for (head, n_train), floor in LOCALIZATION_FLOORS.items():
        if (head, n_train) in rates and rates[head, n_train] < floor:
            violations.append(f'{head}@{n_train}: accuracy {rates[head, n_train]:.4f} below floor {floor}')
    for (head, n_train), ceiling in LOCALIZATION_CEILINGS.items():
        if (head, n_train) in rates and rates[head, n_train] > ceiling:
            violations.append(f'{head}@{n_train}: accuracy {rates[head, n_train]:.4f} above ceiling {ceiling}')
    if ('onehot', 32) in rates and ('score', 32) in rates:
        onehot, score = rates['onehot', 32], rates['score', 32]
        if not score - ONEHOT_SMALL_SET_GAP <= onehot <= score:
            low = score - ONEHOT_SMALL_SET_GAP
            violations.append(f'onehot@32: accuracy {onehot:.4f} outside [{low:.4f}, {score:.4f}]')
    return violations
