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

import pytest


def pytest_addoption(parser):
    parser.addoption("--gradcheck_seeds", action="store", type=int, default=10)
    parser.addoption("--input_size", action="store", type=int, default=64)
    parser.addoption("--n_test", action="store", type=int, default=512)


@pytest.fixture(scope="session")
def gradcheck_seeds(pytestconfig):
    return list(range(pytestconfig.getoption("gradcheck_seeds")))


@pytest.fixture(scope="session")
def input_size(pytestconfig):
    return pytestconfig.getoption("input_size")


@pytest.fixture(scope="session")
def n_test(pytestconfig):
    return pytestconfig.getoption("n_test")
