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

import functools as _functools
import logging
import time as _time
from typing import Callable, List, TypeVar

T = TypeVar('T')


def set_logger(
    level: int = logging.INFO,
    auxiliary_log_level: int = logging.ERROR,
) -> None:
    """Create logger object and set the logging level to `level`."""
    global log
    log = logging.getLogger('instattn')
    log.setLevel(level)
    log.handlers.clear()
    log.propagate = False
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)

    formatter = logging.Formatter(
        "[%(asctime)s] %(levelname)-5s %(filename)s:%(lineno)d - %(message)s",
        "%m-%d %H:%M:%S",
    )
    console_handler.setFormatter(formatter)
    log.addHandler(console_handler)

    # Pillow logs every plugin import at DEBUG.
    loggers_3rd_party = ['PIL', 'joblib']
    for logger_3rd_party in loggers_3rd_party:
        logging.getLogger(logger_3rd_party).setLevel(auxiliary_log_level)


log: logging.Logger = logging.getLogger('instattn')

set_logger()


def measure_time(func: Callable[..., T]) -> Callable[..., T]:
    """Decorator to measure elapsed time of a function call.

    Usage:

    ```
    @measure_time
    def build(n=2):
        return [i for i in range(n)]

    build()
    # > Calling build
    # > Finished build in 0.0004 s
    ```
    """

    @_functools.wraps(func)
    def wrapper_timer(*args, **kwargs):
        log.debug("> Calling {}".format(func.__name__))
        start_time = _time.perf_counter()
        value = func(*args, **kwargs)
        run_time = _time.perf_counter() - start_time
        log.debug('> Finished {} in {:.4f} s'.format(func.__name__, run_time))
        return value

    return wrapper_timer


def batched(lst: list, batch_size: int) -> List[list]:
    """Split list into consecutive batches of `batch_size` elements; the last batch may be shorter."""
    return [lst[i : i + batch_size] for i in range(0, len(lst), batch_size)]
