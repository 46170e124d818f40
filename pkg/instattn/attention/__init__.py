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

from instattn.attention.feature_map import AttendedPoint, AugmentedFeatureMap, FeatureMap  # noqa: F401
from instattn.attention.spatial import (  # noqa: F401
    AUGMENTATIONS,
    append_coords,
    append_onehot,
    append_score_map,
    attention_mass_within,
    augment,
    augmented_channels,
    bottleneck_1x1,
    coord_channels,
    onehot_channels,
    position_grid,
    score_channel,
    spatial_softmax,
)
