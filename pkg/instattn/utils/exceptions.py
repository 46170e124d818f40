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

from typing import Iterable, Optional


class InstAttnError(Exception):
    """Base class of all errors raised by `instattn`. `exit_code` is what the CLI returns."""

    exit_code = 1


class ContractError(InstAttnError):
    """A documented precondition of an operation was violated."""


class ShapeError(ContractError):
    def __init__(self, op: str, detail: str):
        self.op = op
        self.message = f'Shape error in `{op}`: {detail}'
        super().__init__(self.message)


class ParameterError(ContractError):
    def __init__(self, op: str, name: str, value):
        self.message = f'Invalid parameter `{name}`={value!r} for `{op}`'
        super().__init__(self.message)


class ConfigError(InstAttnError):
    """Invalid configuration file, CLI argument combination or model configuration."""


class InvalidHeadException(ConfigError):
    def __init__(self, head: str, valid_heads: Iterable[str]):
        self.message = f'Invalid localization head ({head}) specified. Choose from the following: {list(valid_heads)}'
        super().__init__(self.message)


class InvalidTaskException(ConfigError):
    def __init__(self, task: str, valid_tasks: Iterable[str]):
        self.message = f'Invalid task ({task}) specified. Choose from the following: {list(valid_tasks)}'
        super().__init__(self.message)


class GenerationError(InstAttnError):
    """The scene sampler could not place the requested sprites."""


class SimulationError(InstAttnError):
    """The scripted expert failed to solve an episode, which indicates a simulator bug."""


class FormatError(InstAttnError):
    exit_code = 2

    def __init__(self, what: str, detail: str, offset: int):
        self.offset = offset
        self.message = f'Malformed {what} file at byte offset {offset}: {detail}'
        super().__init__(self.message)


class NumericError(InstAttnError):
    exit_code = 3

    def __init__(self, detail: str, checkpoint: Optional[object] = None):
        # Training attaches the last checkpoint taken before the failure.
        self.detail = detail
        self.checkpoint = checkpoint
        self.message = f'Numeric failure: {detail}'
        super().__init__(self.message)
