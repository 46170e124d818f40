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

import numpy as np
import pytest

from instattn.harness.config import TrainConfig
from instattn.harness.export import export_feature_maps
from instattn.harness.imitation import eval_policy, train_policy
from instattn.networks.registry import TASK_DEMOS
from instattn.scenes.generator import LocalizationSample
from instattn.sim.agents import record_demos
from instattn.sim.world import cell_center, render, reset

TRAINING_SEEDS = (0, 1, 2)
SCORE_FLOORS = {'reach': 0.80, 'push': 0.60, 'pickplace': 0.60}


def median_success(head, task, demos):
    rates = []
    for seed in TRAINING_SEEDS:
        ckpt = train_policy(TrainConfig(head=head, seed=seed), demos)
        rates.append(eval_policy(ckpt, task, seed=100 + seed, workers=4).rate)
    return float(np.median(rates))


@pytest.mark.parametrize('task', list(SCORE_FLOORS))
def test_score_policy_beats_fc_policy(task):
    demos = record_demos(task, TASK_DEMOS[task], seed=7, workers=4)
    score = median_success('score', task, demos)
    fc = median_success('fc', task, demos)
    assert score >= SCORE_FLOORS[task]
    assert fc < score


def test_policy_attends_to_goal_object(tmp_path):
    demos = record_demos('push', TASK_DEMOS['push'], seed=7, workers=4)
    ckpt = train_policy(TrainConfig(head='score'), demos)
    samples = []
    for seed in range(1000, 1100):
        state = reset('push', np.random.default_rng(seed))
        samples.append(LocalizationSample(render(state).image, cell_center(state.goal().cell)))
    records = export_feature_maps(ckpt, samples, tmp_path)
    concentrated = [record.mass_near_label >= 0.8 for record in records]
    assert sum(concentrated) >= 0.9 * len(records)


def test_behaviour_cloning_halves_the_loss_on_reach():
    demos = record_demos('reach', TASK_DEMOS['reach'], seed=7, workers=4)
    first_batch, epoch_losses = [], []

    def hook(event, payload):
        if event == 'batch' and not first_batch:
            first_batch.append(payload['loss'])
        if event == 'epoch':
            epoch_losses.append(payload['train_loss'])

    train_policy(TrainConfig(head='score', seed=0), demos, hook=hook)
    assert epoch_losses[-1] <= 0.5 * first_batch[0]
