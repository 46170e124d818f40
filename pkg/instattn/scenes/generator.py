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
from typing import List, Optional, Sequence, Tuple

import numpy as np

from instattn.scenes.sprites import DISTRACTOR_KINDS, DRAW_DISTRACTOR, blank_image, draw_apple, sprite_box
from instattn.utils import log, measure_time
from instattn.utils.exceptions import ContractError, GenerationError, ParameterError
from instattn.utils.parallel import derive_seeds, parallel_map

Position = Tuple[int, int]

SPLITS = ('train', 'test')
QUADRANTS = ('top-left', 'top-right', 'bottom-left', 'bottom-right')
MATCH_THRESHOLD_PX = 8.0
MAX_SPRITE_ATTEMPTS = 100
MAX_SCENE_ATTEMPTS = 100


@dataclass(frozen=True)
class SceneConfig:
    image_size: int = 120
    target_size: int = 16
    distractor_size: int = 12

    @classmethod
    def reduced(cls) -> 'SceneConfig':
        return cls(image_size=64, target_size=8, distractor_size=6)

    @classmethod
    def for_image_size(cls, image_size: int) -> 'SceneConfig':
        """Canonical config for 120 px images, sprites scaled proportionally otherwise."""
        if image_size == cls.image_size:
            return cls()
        if image_size == 64:
            return cls.reduced()
        return cls(image_size, max(image_size * 2 // 15, 4), max(image_size // 10, 3))


@dataclass
class SceneSpec:
    """Sprite centres of one scene; `targets` and `distractors` hold (row, col) pixel positions."""

    targets: List[Position]
    distractors: List[Position] = field(default_factory=list)
    distractor_kinds: List[str] = field(default_factory=list)
    split: str = 'test'
    seed: Optional[int] = None
    config: SceneConfig = field(default_factory=SceneConfig)

    @property
    def label(self) -> Position:
        return raster_first(self.targets)


@dataclass
class LocalizationSample:
    image: np.ndarray
    label: Tuple[float, float]
    spec: Optional[SceneSpec] = None


def raster_first(positions: Sequence[Position]) -> Position:
    """First position in row-major order: smallest row, ties broken by smallest column."""
    if not positions:
        raise ContractError('raster_first needs at least one position')
    return min((tuple(p) for p in positions), key=lambda p: (p[0], p[1]))  # type: ignore


def localization_match(pred: Sequence[float], truth: Sequence[float], threshold: float = MATCH_THRESHOLD_PX) -> bool:
    """True iff prediction (x, y) is strictly closer than `threshold` pixels to truth (row, col) on both axes."""
    return abs(pred[0] - truth[1]) < threshold and abs(pred[1] - truth[0]) < threshold


def quadrant_of(row: float, col: float, image_size: int = 120) -> str:
    half = image_size / 2
    return QUADRANTS[2 * int(row >= half) + int(col >= half)]


def filter_quadrant(
    samples: Sequence[LocalizationSample],
    quadrant: str,
    image_size: int = 120,
) -> List[LocalizationSample]:
    """Samples whose label (the raster-first target) lies in `quadrant`."""
    if quadrant not in QUADRANTS:
        raise ParameterError('filter_quadrant', 'quadrant', quadrant)
    return [s for s in samples if quadrant_of(s.label[0], s.label[1], image_size) == quadrant]


def _boxes_overlap(a: Position, size_a: int, b: Position, size_b: int) -> bool:
    top_a, left_a, bottom_a, right_a = sprite_box(a, size_a)
    top_b, left_b, bottom_b, right_b = sprite_box(b, size_b)
    return top_a < bottom_b and top_b < bottom_a and left_a < right_b and left_b < right_a


def _inside(center: Position, size: int, image_size: int) -> bool:
    top, left, bottom, right = sprite_box(center, size)
    return top >= 0 and left >= 0 and bottom <= image_size and right <= image_size


def _placed(spec: SceneSpec) -> List[Tuple[Position, int]]:
    cfg = spec.config
    return [(t, cfg.target_size) for t in spec.targets] + [(d, cfg.distractor_size) for d in spec.distractors]


def _place(
    rng: np.random.Generator,
    size: int,
    placed: List[Tuple[Position, int]],
    cfg: SceneConfig,
    allowed=lambda row, col: True,
) -> Optional[Position]:
    low, high = size // 2, cfg.image_size - size + size // 2
    for _ in range(MAX_SPRITE_ATTEMPTS):
        center = (int(rng.integers(low, high + 1)), int(rng.integers(low, high + 1)))
        if allowed(*center) and not any(_boxes_overlap(center, size, p, s) for p, s in placed):
            return center
    return None


def sample_scene(
    split: str,
    rng: np.random.Generator,
    config: SceneConfig = SceneConfig(),
    n_targets: Optional[int] = None,
    seed: Optional[int] = None,
) -> SceneSpec:
    """Draw sprite positions by rejection sampling.

    Train scenes hold 1-2 targets outside the bottom-right quadrant and no distractors; test scenes hold
    1-3 targets and 0-2 distractors anywhere. `n_targets` forces the target count.
    """
    if split not in SPLITS:
        raise ParameterError('sample_scene', 'split', split)
    if max(config.target_size, config.distractor_size) > config.image_size:
        raise GenerationError(f'sprites do not fit into a {config.image_size}px image')
    half = config.image_size // 2

    def allowed_target(row: int, col: int) -> bool:
        return split == 'test' or not (row >= half and col >= half)

    for _ in range(MAX_SCENE_ATTEMPTS):
        if split == 'train':
            count = int(rng.integers(1, 3)) if n_targets is None else n_targets
            kinds: List[str] = []
        else:
            count = int(rng.integers(1, 4)) if n_targets is None else n_targets
            kinds = [DISTRACTOR_KINDS[int(k)] for k in rng.integers(0, len(DISTRACTOR_KINDS), int(rng.integers(0, 3)))]
        spec = SceneSpec(targets=[], distractor_kinds=kinds, split=split, seed=seed, config=config)
        placed: List[Tuple[Position, int]] = []
        complete = True
        for _ in range(count):
            center = _place(rng, config.target_size, placed, config, allowed_target)
            if center is None:
                complete = False
                break
            spec.targets.append(center)
            placed.append((center, config.target_size))
        for _ in kinds if complete else []:
            center = _place(rng, config.distractor_size, placed, config)
            if center is None:
                complete = False
                break
            spec.distractors.append(center)
            placed.append((center, config.distractor_size))
        if complete and spec.targets:
            return spec
    raise GenerationError(f'could not place sprites for a {split} scene after {MAX_SCENE_ATTEMPTS} attempts')


def render_scene(spec: SceneSpec) -> np.ndarray:
    """Render a scene as a uint8 [S,S,3] image on the light gray background."""
    cfg = spec.config
    if len(spec.distractor_kinds) != len(spec.distractors):
        raise ContractError('every distractor needs a kind')
    placed = _placed(spec)
    for i, (center, size) in enumerate(placed):
        if not _inside(center, size, cfg.image_size):
            raise ContractError(f'sprite at {center} does not fit into the image')
        if any(_boxes_overlap(center, size, other, other_size) for other, other_size in placed[:i]):
            raise ContractError(f'sprite at {center} overlaps another sprite')

    image = blank_image(cfg.image_size)
    for target in spec.targets:
        draw_apple(image, target, cfg.target_size)
    for center, kind in zip(spec.distractors, spec.distractor_kinds):
        DRAW_DISTRACTOR[kind](image, center, cfg.distractor_size)
    return image


def generate_sample(
    split: str,
    seed: int,
    config: SceneConfig = SceneConfig(),
    n_targets: Optional[int] = None,
) -> LocalizationSample:
    spec = sample_scene(split, np.random.default_rng(seed), config, n_targets=n_targets, seed=seed)
    label = spec.label
    return LocalizationSample(render_scene(spec), (float(label[0]), float(label[1])), spec)


@measure_time
def build_dataset(
    split: str,
    n: int,
    seed: int,
    config: SceneConfig = SceneConfig(),
    n_targets: Optional[int] = None,
    workers: int = 1,
) -> List[LocalizationSample]:
    """Generate `n` samples; sample i depends only on (split, seed, i), never on `workers`."""
    if n < 1:
        raise ContractError(f'dataset size must be at least 1, got {n}')
    log.info(f'Generating {n} {split} samples (seed {seed}, {config.image_size}px)')
    return parallel_map(
        lambda sample_seed: generate_sample(split, sample_seed, config, n_targets),
        derive_seeds(seed, n),
        workers,
    )


def stack_samples(samples: Sequence[LocalizationSample]) -> Tuple[np.ndarray, np.ndarray]:
    """Images [N,S,S,3] and labels [N,2] (row, col) of a sample list."""
    images = np.stack([s.image for s in samples])
    labels = np.array([s.label for s in samples], dtype=np.float64).reshape(len(samples), 2)
    return images, labels
