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

from instattn.harness.checkpoint import Checkpoint, load_checkpoint, save_checkpoint  # noqa: F401
from instattn.harness.config import TrainConfig, default_epochs  # noqa: F401
from instattn.harness.export import export_feature_maps  # noqa: F401
from instattn.harness.imitation import eval_policy, train_policy  # noqa: F401
from instattn.harness.localization import eval_localizer, train_localizer  # noqa: F401
from instattn.harness.reports import EvalReport, localization_ordering_violations, reports_to_frame  # noqa: F401
