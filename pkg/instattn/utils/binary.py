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
from typing import Optional, Tuple

from instattn.utils.exceptions import FormatError

U8 = struct.Struct('<B')
U16 = struct.Struct('<H')
U32 = struct.Struct('<I')
MAGIC = struct.Struct('<4s')


class ByteReader:
    """Sequential little-endian reader that reports the byte offset of any malformed field."""

    def __init__(self, data: bytes, what: str):
        self.data = memoryview(data)
        self.what = what
        self.offset = 0

    def fail(self, detail: str, offset: Optional[int] = None) -> FormatError:
        return FormatError(self.what, detail, self.offset if offset is None else offset)

    def read(self, n: int, field: str = 'data') -> memoryview:
        if n < 0 or self.offset + n > len(self.data):
            raise self.fail(f'truncated {field}: needed {n} bytes, {len(self.data) - self.offset} left')
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: struct.Struct, field: str) -> Tuple:
        return fmt.unpack(self.read(fmt.size, field))

    def u8(self, field: str) -> int:
        return self.unpack(U8, field)[0]

    def u16(self, field: str) -> int:
        return self.unpack(U16, field)[0]

    def u32(self, field: str) -> int:
        return self.unpack(U32, field)[0]

    def expect_header(self, magic: bytes, version: int) -> None:
        found = self.unpack(MAGIC, 'magic')[0]
        if found != magic:
            raise self.fail(f'bad magic {found!r}, expected {magic!r}', offset=0)
        found_version = self.u32('version')
        if found_version != version:
            raise self.fail(f'unsupported version {found_version}, expected {version}', offset=MAGIC.size)

    def expect_end(self) -> None:
        if self.offset != len(self.data):
            raise self.fail(f'{len(self.data) - self.offset} unexpected trailing bytes')


def header(magic: bytes, version: int) -> bytes:
    return MAGIC.pack(magic) + U32.pack(version)
