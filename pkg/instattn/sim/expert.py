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

from instattn.networks.policy import CLOSE, OPEN, ActionVector
from instattn.sim.world import Cell, SimState, chebyshev

CARRY_Z = 1


def _toward(state: SimState, goal: Cell, gripper: int) -> ActionVector:
    """One greedy step toward `goal`: planar sign-of-delta, descending only once the goal is closer than the
    current height, so the end effector lands on the goal cell. On the table and more than a cell away it
    lifts first; a planar step at table height would push whatever it moves into."""
    x, y, z = state.ee
    dx, dy = int(np.sign(goal[0] - x)), int(np.sign(goal[1] - y))
    d = chebyshev(state.planar, goal)
    if z == 0 and d > 0:
        blocked = state.object_at((x + dx, y + dy)) is not None
        if d > 1 or blocked:
            return ActionVector(0, 0, 1, gripper)
    dz = -1 if d < z else 0
    return ActionVector(dx, dy, dz, gripper)


def _reach(state: SimState) -> ActionVector:
    return _toward(state, state.goal().cell, OPEN)


def _push(state: SimState) -> ActionVector:
    tx, ty = state.goal().cell
    approach = (tx - 1, ty)
    if state.planar == approach and state.ee[2] == 0:
        return ActionVector(1, 0, 0, OPEN)
    return _toward(state, approach, OPEN)


def _pickplace(state: SimState) -> ActionVector:
    goal_index = state.goal_index()
    goal = state.objects[goal_index]
    held = state.held_index()
    x, _, z = state.ee
    if held is not None and held != goal_index:
        return ActionVector(0, 0, 0, OPEN)
    if held == goal_index:
        if z < CARRY_Z:
            return ActionVector(0, 0, 1, CLOSE)
        if x < state.place_column:
            return ActionVector(1, 0, 0, CLOSE)
        return ActionVector(0, 0, 0, OPEN)
    if state.planar == goal.cell:
        return ActionVector(0, 0, -1, OPEN) if z > 0 else ActionVector(0, 0, 0, CLOSE)
    return _toward(state, goal.cell, OPEN)


EXPERTS = {
    'reach': _reach,
    'push': _push,
    'pickplace': _pickplace,
}


def scripted_expert(state: SimState) -> ActionVector:
    """Deterministic greedy expert that always serves the raster-first target.

    Raises `ContractError` when the state holds no targets.
    """
    state.goal_index()
    return EXPERTS[state.task](state)
