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

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from instattn.networks.policy import HEAD_SIZES, ActionVector, Observation, PolicyNetwork, select_action
from instattn.sim.expert import scripted_expert
from instattn.sim.world import SimState, render, reset, step, success
from instattn.utils import log, measure_time
from instattn.utils.exceptions import ContractError, SimulationError
from instattn.utils.parallel import derive_seeds, parallel_map

MAX_STEPS = 200
MAX_DEMO_ATTEMPTS = 10


class Agent:
    def act(self, state: SimState, obs: Observation) -> ActionVector:
        raise NotImplementedError


class ExpertAgent(Agent):
    def act(self, state: SimState, obs: Observation) -> ActionVector:
        return scripted_expert(state)


class RandomAgent(Agent):
    """Draws every action head uniformly from its own generator; use one instance per thread."""

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def act(self, state: SimState, obs: Observation) -> ActionVector:
        return ActionVector.from_codes([self.rng.integers(n) for n in HEAD_SIZES])


class PolicyAgent(Agent):
    """Acts with a trained policy network; the network is switched to evaluation mode."""

    def __init__(self, network: PolicyNetwork, mode: str = 'greedy', rng: Optional[np.random.Generator] = None):
        self.network = network.eval()
        self.mode = mode
        self.rng = rng

    def act(self, state: SimState, obs: Observation) -> ActionVector:
        return select_action(self.network.policy_forward(obs), self.mode, self.rng)


@dataclass
class Demonstration:
    task: str
    steps: List[Tuple[Observation, ActionVector]] = field(default_factory=list)
    success: bool = False
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class Episode:
    demo: Demonstration
    final_state: SimState

    @property
    def success(self) -> bool:
        return self.demo.success


def rollout(agent: Agent, task: str, seed: int, max_steps: int = MAX_STEPS) -> Episode:
    """Run `agent` from the seeded reset until success or `max_steps`, recording (observation, action) pairs."""
    state = reset(task, np.random.default_rng(seed))
    demo = Demonstration(task=task, seed=seed)
    for _ in range(max_steps):
        obs = render(state)
        action = agent.act(state, obs)
        demo.steps.append((obs, action))
        state = step(state, action)
        if success(state):
            demo.success = True
            break
    return Episode(demo, state)


def _expert_demo(task: str, seed: int, max_steps: int) -> Demonstration:
    attempt_seeds = derive_seeds(seed, MAX_DEMO_ATTEMPTS)
    for attempt_seed in attempt_seeds:
        episode = rollout(ExpertAgent(), task, attempt_seed, max_steps)
        if episode.success:
            return episode.demo
        log.warning(f'Expert failed {task} episode with seed {attempt_seed}; resampling')
    raise SimulationError(f'expert failed {MAX_DEMO_ATTEMPTS} consecutive {task} episodes (seed {seed})')


@measure_time
def record_demos(task: str, n: int, seed: int, max_steps: int = MAX_STEPS, workers: int = 1) -> List[Demonstration]:
    """Record `n` successful expert demonstrations of `task`."""
    if n < 1:
        raise ContractError(f'number of demonstrations must be at least 1, got {n}')
    demos = parallel_map(lambda s: _expert_demo(task, s, max_steps), derive_seeds(seed, n), workers)
    log.info(f'Recorded {n} {task} demonstrations, {sum(len(d) for d in demos)} steps in total')
    return demos
