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

import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from instattn.engine import functional as F
from instattn.engine.optim import Adam
from instattn.engine.tensor import Tensor
from instattn.harness.checkpoint import Checkpoint, build_model
from instattn.harness.config import TrainConfig
from instattn.harness.reports import EvalReport
from instattn.harness.training import Hook, guarded_step, no_hook
from instattn.networks.backbone import images_to_tensor
from instattn.networks.policy import HEAD_SIZES, PolicyNetwork, resize_nearest
from instattn.networks.registry import TASK_ROLLOUTS, task_id
from instattn.sim.agents import MAX_STEPS, Agent, Demonstration, PolicyAgent, rollout
from instattn.utils import batched, log, measure_time
from instattn.utils.exceptions import ContractError
from instattn.utils.parallel import derive_seeds, parallel_map

EpisodeArrays = Tuple[np.ndarray, np.ndarray, np.ndarray]


def demo_arrays(demo: Demonstration, input_size: int) -> EpisodeArrays:
    """Frames resized to `input_size`, states [T,4] and action codes [T,4] of one demonstration."""
    frames = [obs.image for obs, _ in demo.steps]
    images = np.stack([f if f.shape[0] == input_size else resize_nearest(f, input_size) for f in frames])
    states = np.stack([obs.state for obs, _ in demo.steps])
    codes = np.stack([action.codes() for _, action in demo.steps])
    return images, states, codes


def policy_loss(model: PolicyNetwork, images: Tensor, states: np.ndarray, codes: np.ndarray) -> Tensor:
    """Sum over the four heads of the cross-entropy of the expert's action codes.

    Heads are conditioned on the expert's earlier actions (teacher forcing), never on model choices.
    """
    logits = model(images, states, codes[:, : len(HEAD_SIZES) - 1])
    losses = [F.cross_entropy(head_logits, codes[:, i]) for i, head_logits in enumerate(logits)]
    total = losses[0]
    for loss in losses[1:]:
        total = F.add(total, loss)
    return total


@measure_time
def train_policy(cfg: TrainConfig, demos: Sequence[Demonstration], hook: Hook = no_hook) -> Checkpoint:
    """Behaviour cloning with Adam and dropout active.

    Episodes are shuffled as a whole every epoch and batches take consecutive frames of that order. The final
    checkpoint is returned.
    """
    episodes = [demo_arrays(demo, cfg.input_size) for demo in demos if demo.steps]
    if not episodes:
        raise ContractError('cannot train a policy on an empty demonstration set')
    tasks = {demo.task for demo in demos}
    if len(tasks) != 1:
        raise ContractError(f'demonstrations must share one task, got {sorted(tasks)}')
    task = tasks.pop()
    cfg = cfg.with_overrides(task=task)
    n_frames = sum(len(codes) for _, _, codes in episodes)
    epochs = cfg.epochs_for(n_frames)
    cfg.log()

    model: PolicyNetwork = build_model(cfg, 'policy')  # type: ignore[assignment]
    step = 0

    def snapshot() -> Checkpoint:
        return Checkpoint.from_model(model, cfg, 'policy', step, n_train=len(episodes))

    last = snapshot()
    rng = np.random.default_rng(derive_seeds(cfg.seed, 2)[1])
    optimizer = Adam(dict(model.named_parameters()), lr=cfg.learning_rate)
    log.info(f'Training {cfg.head} policy for {task} on {len(episodes)} episodes ({n_frames} frames)')

    for epoch in range(epochs):
        model.train()
        order = rng.permutation(len(episodes))
        images = np.concatenate([episodes[i][0] for i in order])
        states = np.concatenate([episodes[i][1] for i in order])
        codes = np.concatenate([episodes[i][2] for i in order])
        losses = []
        for batch in batched(list(range(n_frames)), cfg.batch_size):
            x, s, c = images_to_tensor(images[batch]), states[batch], codes[batch]
            loss = guarded_step(model, optimizer, lambda: policy_loss(model, x, s, c), snapshot, last)
            step += 1
            losses.append(loss)
            hook(
                'batch',
                {'epoch': epoch, 'step': step, 'loss': loss, 'prior_codes': c[:, :3].copy(), 'expert_codes': c.copy()},
            )
        epoch_loss = float(np.mean(losses))
        log.info(f'Epoch {epoch + 1}/{epochs}: behaviour-cloning loss {epoch_loss:.4f}')
        hook('epoch', {'epoch': epoch, 'step': step, 'train_loss': epoch_loss})
        last = snapshot()
    return last


def evaluate_agent(
    agent: Agent,
    task: str,
    n_rollouts: int,
    seed: int,
    max_steps: int = MAX_STEPS,
    workers: int = 1,
) -> List[bool]:
    """Success flag of each of `n_rollouts` seeded episodes."""
    task_id(task)
    if n_rollouts < 1:
        raise ContractError(f'number of rollouts must be at least 1, got {n_rollouts}')
    episodes = parallel_map(lambda s: rollout(agent, task, s, max_steps), derive_seeds(seed, n_rollouts), workers)
    return [episode.success for episode in episodes]


@measure_time
def eval_policy(
    ckpt: Optional[Checkpoint],
    task: str,
    n_rollouts: Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
    agent: Optional[Agent] = None,
) -> EvalReport:
    """Greedy rollouts of the checkpointed policy from seeded resets, capped at 200 steps each.

    `agent` replaces the checkpointed policy, e.g. to measure the scripted expert through the same protocol.
    """
    task_id(task)
    n_rollouts = n_rollouts if n_rollouts is not None else TASK_ROLLOUTS[task]
    head = agent.__class__.__name__ if agent is not None else ''
    if agent is None:
        if ckpt is None:
            raise ContractError('either a checkpoint or an agent is needed')
        cfg = ckpt.train_config()
        head = cfg.head
        if ckpt.model != 'policy':
            raise ContractError(f'expected a policy checkpoint, got {ckpt.model}')
        if cfg.task and cfg.task != task:
            raise ContractError(f'checkpoint was trained on {cfg.task}, cannot evaluate on {task}')
        agent = PolicyAgent(ckpt.build_model())  # type: ignore[arg-type]
    start = time.perf_counter()
    outcomes = evaluate_agent(agent, task, n_rollouts, seed, workers=workers)
    rate = float(np.mean(outcomes))
    log.info(f'{task}: success rate {rate:.4f} over {n_rollouts} rollouts')
    return EvalReport(
        kind='imitation',
        head=head,
        rate=rate,
        n=n_rollouts,
        seed=seed,
        runtime_s=time.perf_counter() - start,
        task=task,
        n_train=int(ckpt.config['n_train']) if ckpt is not None and 'n_train' in ckpt.config else None,
    )
