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

import copy
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from instattn.networks.policy import CLOSE, OPEN, ActionVector, Observation
from instattn.networks.registry import task_id
from instattn.scenes.sprites import APPLE_RED, DISTRACTOR_KINDS, DRAW_DISTRACTOR, blank_image, draw_disc, paint
from instattn.utils.exceptions import ContractError, SimulationError

GRID_XY = 24
GRID_Z = 6
TOP_Z = GRID_Z - 1
CELL_PX = 5
IMAGE_SIZE = GRID_XY * CELL_PX
PLACE_COLUMN = GRID_XY - 1
PUSH_DISTANCE = 8
REACH_RADIUS = 1
PLACE_TOLERANCE = 1
MAX_RESET_ATTEMPTS = 1000
# Pick-and-place targets spawn at or left of this column, so no episode starts solved.
PICKPLACE_MAX_SPAWN_X = 20

Cell = Tuple[int, int]


@dataclass
class SimObject:
    kind: str
    cell: Cell
    spawn: Cell
    held: bool = False
    shape: str = 'apple'

    @property
    def is_target(self) -> bool:
        return self.kind == 'target'


@dataclass
class SimState:
    """Grid-world state; cells are (x, y) with x along the image width and y along its height."""

    task: str
    ee: Tuple[int, int, int]
    objects: List[SimObject] = field(default_factory=list)
    gripper: int = OPEN
    tick: int = 0
    place_column: int = PLACE_COLUMN

    def __post_init__(self):
        task_id(self.task)

    def copy(self) -> 'SimState':
        return copy.deepcopy(self)

    @property
    def planar(self) -> Cell:
        return self.ee[0], self.ee[1]

    def held_index(self) -> Optional[int]:
        for i, obj in enumerate(self.objects):
            if obj.held:
                return i
        return None

    def object_at(self, cell: Cell, targets_only: bool = False, include_held: bool = False) -> Optional[int]:
        for i, obj in enumerate(self.objects):
            if obj.cell == cell and (include_held or not obj.held) and (obj.is_target or not targets_only):
                return i
        return None

    def goal_index(self) -> int:
        """Index of the raster-first target by spawn cell (row-major: y, then x)."""
        targets = [i for i, obj in enumerate(self.objects) if obj.is_target]
        if not targets:
            raise ContractError('state has no target objects')
        return min(targets, key=lambda i: (self.objects[i].spawn[1], self.objects[i].spawn[0]))

    def goal(self) -> SimObject:
        return self.objects[self.goal_index()]


def in_grid(cell: Cell) -> bool:
    return 0 <= cell[0] < GRID_XY and 0 <= cell[1] < GRID_XY


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _layout_ok(task: str, objects: List[SimObject]) -> bool:
    occupied = {obj.cell for obj in objects}
    targets = [obj for obj in objects if obj.is_target]
    goal = min(targets, key=lambda obj: (obj.spawn[1], obj.spawn[0]))
    gx, gy = goal.cell
    if task == 'push':
        path = [(gx - 1, gy)] + [(gx + k, gy) for k in range(1, PUSH_DISTANCE + 1)]
        return 1 <= gx <= GRID_XY - 1 - PUSH_DISTANCE and not occupied.intersection(path)
    if task == 'pickplace':
        return all(t.cell[0] <= PICKPLACE_MAX_SPAWN_X for t in targets) and (PLACE_COLUMN, gy) not in occupied
    return True


def reset(task: str, rng: np.random.Generator) -> SimState:
    """Random episode start: end effector at a random cell at the top, 1-3 targets and 0-2 distractors."""
    task_id(task)
    for _ in range(MAX_RESET_ATTEMPTS):
        ee = (int(rng.integers(GRID_XY)), int(rng.integers(GRID_XY)), TOP_Z)
        n_targets, n_distractors = int(rng.integers(1, 4)), int(rng.integers(0, 3))
        flat = rng.choice(GRID_XY * GRID_XY, size=n_targets + n_distractors, replace=False)
        cells = [(int(c % GRID_XY), int(c // GRID_XY)) for c in flat]
        objects = [SimObject('target', cell, cell) for cell in cells[:n_targets]]
        objects += [
            SimObject('distractor', cell, cell, shape=DISTRACTOR_KINDS[int(rng.integers(len(DISTRACTOR_KINDS)))])
            for cell in cells[n_targets:]
        ]
        if _layout_ok(task, objects):
            return SimState(task=task, ee=ee, objects=objects)
    raise SimulationError(f'could not sample a solvable {task} layout')


def step(state: SimState, action: ActionVector) -> SimState:
    """Apply one action and return the next state; `state` is left untouched.

    Planar moves at z=0 with an open, empty gripper push an unheld target one cell along the motion. A
    push whose destination is off-grid or occupied cancels the whole move.
    """
    nxt = state.copy()
    nxt.tick += 1
    x, y, z = state.ee
    nx = int(np.clip(x + action.a0, 0, GRID_XY - 1))
    ny = int(np.clip(y + action.a1, 0, GRID_XY - 1))
    nz = int(np.clip(z + action.a2, 0, TOP_Z))
    held = nxt.held_index()

    if held is None and state.gripper == OPEN and nz == 0 and (nx, ny) != (x, y):
        pushed = nxt.object_at((nx, ny), targets_only=True)
        if pushed is not None:
            dest = (nx + (nx - x), ny + (ny - y))
            if in_grid(dest) and nxt.object_at(dest, include_held=True) is None:
                nxt.objects[pushed].cell = dest
            else:
                nx, ny, nz = x, y, z

    nxt.ee = (nx, ny, nz)
    if held is not None:
        nxt.objects[held].cell = (nx, ny)

    if action.a3 == CLOSE and state.gripper == OPEN and held is None and nz == 0:
        grabbed = nxt.object_at((nx, ny), targets_only=True)
        if grabbed is None:
            grabbed = nxt.object_at((nx, ny))
        if grabbed is not None:
            nxt.objects[grabbed].held = True
    elif action.a3 == OPEN and held is not None:
        nxt.objects[held].held = False
    nxt.gripper = action.a3
    return nxt


def success(state: SimState) -> bool:
    if not any(obj.is_target for obj in state.objects):
        return False
    goal = state.goal()
    if state.task == 'reach':
        return chebyshev(state.planar, goal.cell) <= REACH_RADIUS and state.ee[2] == 0
    if state.task == 'push':
        return goal.cell[0] - goal.spawn[0] >= PUSH_DISTANCE
    return state.gripper == OPEN and any(
        obj.is_target and not obj.held and abs(obj.cell[0] - state.place_column) <= PLACE_TOLERANCE
        for obj in state.objects
    )


def cell_center(cell: Cell) -> Tuple[int, int]:
    """Pixel (row, col) at the centre of a grid cell."""
    return cell[1] * CELL_PX + CELL_PX // 2, cell[0] * CELL_PX + CELL_PX // 2


def ee_shade(z: int) -> int:
    return int(round(150 * z / TOP_Z))


def state_vector(state: SimState) -> np.ndarray:
    x, y, z = state.ee
    return np.array([x / (GRID_XY - 1), y / (GRID_XY - 1), z / TOP_Z, state.gripper], dtype=np.float32)


def render(state: SimState) -> Observation:
    """Top-down frame: gray table, red discs for targets, square or triangle distractors, and a cross for the
    end effector whose gray level grows with height (black on the table)."""
    image = blank_image(IMAGE_SIZE)
    for obj in state.objects:
        center = cell_center(obj.cell)
        if obj.is_target:
            draw_disc(image, center, CELL_PX // 2, APPLE_RED)
        else:
            DRAW_DISTRACTOR[obj.shape](image, center, CELL_PX)
    row, col = cell_center(state.planar)
    shade = ee_shade(state.ee[2])
    arm = np.ones((1, CELL_PX), dtype=bool)
    paint(image, row, col - CELL_PX // 2, arm, (shade, shade, shade))
    paint(image, row - CELL_PX // 2, col, arm.T, (shade, shade, shade))
    return Observation(image, state_vector(state))
