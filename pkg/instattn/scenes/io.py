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
from typing import List, Sequence, Union

import numpy as np

from instattn.scenes.generator import LocalizationSample
from instattn.utils import log
from instattn.utils.binary import U16, U32, ByteReader, header
from instattn.utils.exceptions import ContractError

MAGIC = b'IALD'
VERSION = 1
LABEL = struct.Struct('<2f')


def encode_dataset(samples: Sequence[LocalizationSample]) -> bytes:
    """Serialize samples: header, u32 count, u16 H, u16 W, then per sample RGB bytes and f32 (row, col)."""
    if not samples:
        raise ContractError('cannot encode an empty dataset')
    height, width = samples[0].image.shape[:2]
    chunks = [header(MAGIC, VERSION), U32.pack(len(samples)), U16.pack(height), U16.pack(width)]
    for sample in samples:
        if sample.image.shape != (height, width, 3):
            raise ContractError(f'all images must be {height}x{width}x3, got {sample.image.shape}')
        chunks.append(np.ascontiguousarray(sample.image, dtype=np.uint8).tobytes())
        chunks.append(LABEL.pack(*sample.label))
    return b''.join(chunks)


def decode_dataset(data: bytes) -> List[LocalizationSample]:
    reader = ByteReader(data, 'dataset')
    reader.expect_header(MAGIC, VERSION)
    count = reader.u32('sample count')
    height, width = reader.u16('height'), reader.u16('width')
    image_bytes = height * width * 3
    samples = []
    for i in range(count):
        image = np.frombuffer(reader.read(image_bytes, f'image {i}'), dtype=np.uint8).reshape(height, width, 3)
        row, col = reader.unpack(LABEL, f'label {i}')
        samples.append(LocalizationSample(image.copy(), (float(row), float(col))))
    reader.expect_end()
    return samples


def write_dataset(path: Union[str, Path], samples: Sequence[LocalizationSample]) -> None:
    Path(path).write_bytes(encode_dataset(samples))
    log.info(f'Wrote {len(samples)} samples to {path}')


def read_dataset(path: Union[str, Path]) -> List[LocalizationSample]:
    samples = decode_dataset(Path(path).read_bytes())
    log.debug(f'Read {len(samples)} samples from {path}')
    return samples
