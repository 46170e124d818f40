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

import struct
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from instattn.networks.policy import ActionVector, Observation
from instattn.networks.registry import task_id, task_name
from instattn.sim.agents import Demonstration
from instattn.sim.world import IMAGE_SIZE
from instattn.utils import log
from instattn.utils.binary import U8, U32, ByteReader, header
from instattn.utils.exceptions import ContractError, InvalidTaskException

MAGIC = b'IADM'
VERSION = 1
STATE = struct.Struct('<4f')
CODES = struct.Struct('<4B')
IMAGE_BYTES = IMAGE_SIZE * IMAGE_SIZE * 3


def encode_demos(demos: Sequence[Demonstration]) -> bytes:
    """Serialize demonstrations of a single task. Frames are fixed at the simulator's 120x120 resolution."""
    if not demos:
        raise ContractError('cannot encode an empty demonstration set')
    tasks = {demo.task for demo in demos}
    if len(tasks) != 1:
        raise ContractError(f'demonstrations must share one task, got {sorted(tasks)}')
    chunks = [header(MAGIC, VERSION), U8.pack(task_id(demos[0].task)), U32.pack(len(demos))]
    for demo in demos:
        chunks.append(U32.pack(len(demo.steps)))
        for obs, action in demo.steps:
            if obs.image.shape != (IMAGE_SIZE, IMAGE_SIZE, 3):
                raise ContractError(f'demonstration frames must be {IMAGE_SIZE}x{IMAGE_SIZE}x3')
            chunks.append(np.ascontiguousarray(obs.image, dtype=np.uint8).tobytes())
            chunks.append(STATE.pack(*obs.state))
            chunks.append(CODES.pack(*action.codes()))
    return b''.join(chunks)


def decode_demos(data: bytes) -> Tuple[str, List[Demonstration]]:
    reader = ByteReader(data, 'demonstration')
    reader.expect_header(MAGIC, VERSION)
    task_offset = reader.offset
    raw_task = reader.u8('task id')
    try:
        task = task_name(raw_task)
    except InvalidTaskException:
        raise reader.fail(f'unknown task id {raw_task}', offset=task_offset)
    demos = []
    for i in range(reader.u32('episode count')):
        # Only successful rollouts are ever written.
        demo = Demonstration(task=task, success=True)
        for t in range(reader.u32(f'length of episode {i}')):
            field = f'step {t} of episode {i}'
            image = np.frombuffer(reader.read(IMAGE_BYTES, field), dtype=np.uint8).reshape(IMAGE_SIZE, IMAGE_SIZE, 3)
            state = reader.unpack(STATE, field)
            codes_offset = reader.offset
            codes = reader.unpack(CODES, field)
            if any(c > 2 for c in codes[:3]) or codes[3] > 1:
                raise reader.fail(f'invalid action codes {codes}', offset=codes_offset)
            try:
                obs = Observation(image.copy(), np.array(state, dtype=np.float32))
            except ContractError as e:
                raise reader.fail(str(e), offset=codes_offset - STATE.size)
            demo.steps.append((obs, ActionVector.from_codes(codes)))
        demos.append(demo)
    reader.expect_end()
    return task, demos


def write_demos(path: Union[str, Path], demos: Sequence[Demonstration]) -> None:
    Path(path).write_bytes(encode_demos(demos))
    log.info(f'Wrote {len(demos)} {demos[0].task} demonstrations to {path}')


def read_demos(path: Union[str, Path]) -> Tuple[str, List[Demonstration]]:
    return decode_demos(Path(path).read_bytes())
