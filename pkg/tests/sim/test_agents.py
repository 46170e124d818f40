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

from instattn.networks.policy import OPEN, ActionVector, PolicyNetwork
from instattn.sim.agents import (
    MAX_STEPS,
    Agent,
    ExpertAgent,
    PolicyAgent,
    RandomAgent,
    record_demos,
    rollout,
)
from instattn.sim.expert import scripted_expert
from instattn.sim.world import GRID_XY, PUSH_DISTANCE, TOP_Z, SimObject, SimState, chebyshev, reset, step, success
from instattn.utils.exceptions import ContractError
from tests.helpers import TINY_SIZE, TINY_WIDTHS

TASKS = ['reach', 'push', 'pickplace']


@pytest.mark.parametrize('task', TASKS)
def test_expert_solves_every_seed(task):
    for seed in range(25):
        episode = rollout(ExpertAgent(), task, seed)
        assert episode.success, f'{task} seed {seed}'
        assert len(episode.demo) < MAX_STEPS


def test_expert_never_pushes_on_the_way_to_reach():
    for seed in range(25):
        episode = rollout(ExpertAgent(), 'reach', seed)
        spawned = {o.spawn for o in episode.final_state.objects}
        assert spawned == {o.cell for o in episode.final_state.objects}


def test_expert_push_moves_the_goal_far_enough():
    episode = rollout(ExpertAgent(), 'push', 7)
    goal = episode.final_state.goal()
    assert goal.cell[0] - goal.spawn[0] == PUSH_DISTANCE
    assert goal.cell[1] == goal.spawn[1]


def test_expert_serves_the_raster_first_target():
    objects = [SimObject('target', (20, 10), (20, 10)), SimObject('target', (3, 2), (3, 2))]
    state = SimState('reach', (12, 12, 5), objects)
    for _ in range(40):
        state = step(state, scripted_expert(state))
    assert state.planar == (3, 2) and state.ee[2] == 0


def test_expert_lifts_before_leaving_the_table():
    state = SimState('reach', (5, 5, 0), [SimObject('target', (9, 5), (9, 5))])
    assert scripted_expert(state) == ActionVector(0, 0, 1, OPEN)


def test_expert_reach_never_moves_away_from_the_goal():
    for seed in range(50):
        episode = rollout(ExpertAgent(), 'reach', seed)
        goal = episode.final_state.goal().cell
        cells = [tuple(int(round(v * (GRID_XY - 1))) for v in obs.state[:2]) for obs, _ in episode.demo.steps]
        distances = [chebyshev(cell, goal) for cell in cells + [episode.final_state.planar]]
        assert all(b <= a for a, b in zip(distances, distances[1:])), f'seed {seed}: {distances}'


def test_expert_steps_onto_an_adjacent_target_above_the_table():
    state = SimState('reach', (4, 7, 1), [SimObject('target', (5, 7), (5, 7))])
    assert scripted_expert(state) == ActionVector(1, 0, 0, OPEN)
    # Higher up it descends while moving, so it lands on the target cell.
    high = SimState('reach', (4, 7, TOP_Z), [SimObject('target', (5, 7), (5, 7))])
    assert scripted_expert(high) == ActionVector(1, 0, -1, OPEN)


def with_distractor(state: SimState, cell) -> SimState:
    cluttered = state.copy()
    cluttered.objects.append(SimObject('distractor', cell, cell, shape='square'))
    return cluttered


@pytest.mark.parametrize('task', TASKS)
def test_expert_ignores_distractor_placement(task):
    rng = np.random.default_rng(11)
    for seed in range(30):
        state = reset(task, np.random.default_rng(seed))
        for _ in range(int(rng.integers(0, 15))):
            if success(state):
                break
            state = step(state, scripted_expert(state))
        occupied = {o.cell for o in state.objects}
        free = [
            (x, y)
            for x in range(GRID_XY)
            for y in range(GRID_XY)
            if (x, y) not in occupied and chebyshev(state.planar, (x, y)) >= 2
        ]
        cluttered = with_distractor(state, free[int(rng.integers(len(free)))])
        assert cluttered.goal_index() == state.goal_index()
        assert scripted_expert(cluttered) == scripted_expert(state)


def test_expert_action_is_unchanged_by_a_far_distractor():
    state = SimState('reach', (2, 3, TOP_Z), [SimObject('target', (6, 4), (6, 4))])
    cluttered = with_distractor(state, (11, 11))
    for _ in range(8):
        assert scripted_expert(cluttered) == scripted_expert(state)
        state, cluttered = step(state, scripted_expert(state)), step(cluttered, scripted_expert(cluttered))
    assert success(state) and success(cluttered)


def test_expert_needs_a_target():
    state = SimState('reach', (5, 5, 5), [SimObject('distractor', (1, 1), (1, 1), shape='square')])
    with pytest.raises(ContractError):
        scripted_expert(state)


def test_rollout_records_observation_action_pairs():
    episode = rollout(ExpertAgent(), 'reach', 3)
    obs, action = episode.demo.steps[0]
    assert obs.image.shape == (120, 120, 3)
    assert isinstance(action, ActionVector)
    assert episode.demo.seed == 3


def test_rollout_respects_step_cap():
    class Idle(Agent):
        def act(self, state, obs):
            return ActionVector(0, 0, 0, OPEN)

    episode = rollout(Idle(), 'push', 0, max_steps=7)
    assert len(episode.demo) == 7
    assert not episode.success
    assert episode.final_state.tick == 7


def test_random_agent_is_seeded():
    a = rollout(RandomAgent(np.random.default_rng(1)), 'reach', 0, max_steps=20)
    b = rollout(RandomAgent(np.random.default_rng(1)), 'reach', 0, max_steps=20)
    assert [act for _, act in a.demo.steps] == [act for _, act in b.demo.steps]


def test_policy_agent_acts_greedily():
    network = PolicyNetwork('softmax-score', TINY_SIZE, TINY_WIDTHS, rng=np.random.default_rng(0))
    agent = PolicyAgent(network)
    assert not network.training
    episode = rollout(agent, 'reach', 0, max_steps=3)
    again = rollout(agent, 'reach', 0, max_steps=3)
    assert [act for _, act in episode.demo.steps] == [act for _, act in again.demo.steps]


def test_record_demos():
    demos = record_demos('pickplace', 3, seed=2)
    assert len(demos) == 3
    assert all(d.success and d.task == 'pickplace' for d in demos)
    threaded = record_demos('pickplace', 3, seed=2, workers=3)
    assert [d.seed for d in demos] == [d.seed for d in threaded]
    assert [len(d) for d in demos] == [len(d) for d in threaded]
    with pytest.raises(ContractError):
        record_demos('reach', 0, seed=0)
