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
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

from instattn.networks.backbone import DEFAULT_WIDTHS, STRIDE
from instattn.networks.heads import LocalizationHeadKind
from instattn.networks.registry import get_supported_tasks, head_kind, head_name
from instattn.utils import log
from instattn.utils.exceptions import ConfigError, InstAttnError

# Epoch defaults for the canonical large (4096) and small (32) training sets.
LARGE_SET_EPOCHS = 60
SMALL_SET_EPOCHS = 400
SMALL_SET_THRESHOLD = 256


def default_epochs(n_train: int) -> int:
    return SMALL_SET_EPOCHS if n_train <= SMALL_SET_THRESHOLD else LARGE_SET_EPOCHS


def _parse_widths(value: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in value.split(',') if v.strip())


def _parse_optional_int(value: str) -> Optional[int]:
    return None if value.lower() in ('', 'none') else int(value)


def _format(value: Any) -> str:
    if isinstance(value, tuple):
        return ','.join(str(v) for v in value)
    return 'none' if value is None else str(value)


@dataclass
class TrainConfig:
    """Hyperparameters and data paths of one training run.

    Stored as flat `key=value` text. `epochs=none` picks `default_epochs` for the training set size.
    """

    head: str = 'score'
    input_size: int = 120
    learning_rate: float = 1e-3
    batch_size: int = 16
    epochs: Optional[int] = None
    dropout_p: float = 0.5
    seed: int = 0
    patience: int = 10
    holdout_fraction: float = 0.1
    widths: Tuple[int, ...] = DEFAULT_WIDTHS
    conv_head_widths: Tuple[int, ...] = DEFAULT_WIDTHS
    train_data: str = ''
    test_data: str = ''
    demos: str = ''
    task: str = ''

    def __post_init__(self):
        self.validate()

    @property
    def head_kind(self) -> LocalizationHeadKind:
        return head_kind(self.head)

    def epochs_for(self, n_train: int) -> int:
        return self.epochs if self.epochs is not None else default_epochs(n_train)

    def validate(self) -> None:
        self.head = head_name(head_kind(self.head))
        checks = [
            (self.input_size > 0 and self.input_size % STRIDE == 0, 'input_size', 'a positive multiple of 4'),
            (self.learning_rate > 0, 'learning_rate', 'positive'),
            (self.batch_size >= 1, 'batch_size', 'at least 1'),
            (self.epochs is None or self.epochs >= 0, 'epochs', 'non-negative'),
            (0.0 <= self.dropout_p < 1.0, 'dropout_p', 'in [0, 1)'),
            (self.patience >= 1, 'patience', 'at least 1'),
            (0.0 <= self.holdout_fraction < 1.0, 'holdout_fraction', 'in [0, 1)'),
            (len(self.widths) == len(DEFAULT_WIDTHS) and min(self.widths) >= 1, 'widths', '7 positive ints'),
            (
                len(self.conv_head_widths) == len(DEFAULT_WIDTHS) and min(self.conv_head_widths) >= 1,
                'conv_head_widths',
                '7 positive ints',
            ),
            (self.task in ('',) + tuple(get_supported_tasks()), 'task', f'one of {get_supported_tasks()}'),
        ]
        for ok, key, requirement in checks:
            if not ok:
                raise ConfigError(f'Config value {key}={_format(getattr(self, key))} must be {requirement}')

    def to_dict(self) -> Dict[str, str]:
        return {f.name: _format(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def to_text(self) -> str:
        return ''.join(f'{key}={value}\n' for key, value in self.to_dict().items())

    @classmethod
    def from_dict(cls, values: Dict[str, str], ignore_unknown: bool = False) -> 'TrainConfig':
        kwargs: Dict[str, Any] = {}
        for key, raw in values.items():
            if key not in PARSERS:
                if ignore_unknown:
                    continue
                raise ConfigError(f'Unknown config key `{key}`. Valid keys: {list(PARSERS)}')
            try:
                kwargs[key] = PARSERS[key](raw.strip())
            except ValueError:
                raise ConfigError(f'Malformed value for config key `{key}`: {raw!r}')
        try:
            return cls(**kwargs)
        except ConfigError:
            raise
        except InstAttnError as e:
            raise ConfigError(str(e))

    @classmethod
    def from_text(cls, text: str) -> 'TrainConfig':
        values: Dict[str, str] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f'Malformed config line {number}: expected key=value, got {line!r}')
            key, value = line.split('=', 1)
            values[key.strip()] = value
        return cls.from_dict(values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'TrainConfig':
        return cls.from_text(Path(path).read_text())

    def with_overrides(self, **overrides: Any) -> 'TrainConfig':
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def log(self, title: str = 'Training configuration:') -> None:
        log.info('-' * 40)
        log.info(title)
        for key, value in self.to_dict().items():
            log.info(f'{key}: {value}')
        log.info('-' * 40)


PARSERS: Dict[str, Callable[[str], Any]] = {
    'head': str,
    'input_size': int,
    'learning_rate': float,
    'batch_size': int,
    'epochs': _parse_optional_int,
    'dropout_p': float,
    'seed': int,
    'patience': int,
    'holdout_fraction': float,
    'widths': _parse_widths,
    'conv_head_widths': _parse_widths,
    'train_data': str,
    'test_data': str,
    'demos': str,
    'task': str,
}
