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

import math
import time
from typing import Optional, Sequence

import numpy as np
from sklearn.metrics import mean_squared_error
from sklearn.model_selection import train_test_split

from instattn.engine import functional as F
from instattn.engine.optim import Adam
from instattn.engine.tensor import Tensor
from instattn.harness.checkpoint import Checkpoint, build_model
from instattn.harness.config import TrainConfig
from instattn.harness.reports import EvalReport
from instattn.harness.training import Hook, guarded_step, no_hook
from instattn.networks.backbone import STRIDE, images_to_tensor
from instattn.networks.localizer import Localizer
from instattn.scenes.generator import LocalizationSample, localization_match, stack_samples
from instattn.utils import batched, log, measure_time
from instattn.utils.exceptions import ContractError
from instattn.utils.parallel import derive_seeds


def normalized_targets(labels: np.ndarray, image_size: int) -> np.ndarray:
    """(row, col) pixel labels as (x, y) in units of the image size."""
    return labels[:, ::-1] / image_size


def normalized_prediction(model: Localizer, images: Tensor) -> Tensor:
    """Differentiable (x, y) image coordinates of the attended point, in units of the image size."""
    f = model(images).values
    coords = F.add(F.mul(F.reshape(f, (f.shape[0], 2)), float(STRIDE)), (STRIDE - 1) / 2.0)
    return F.mul(coords, 1.0 / model.input_size)


def _check_input_size(images: np.ndarray, input_size: int) -> None:
    if images.shape[1:3] != (input_size, input_size):
        raise ContractError(f'model expects {input_size}x{input_size} images, dataset has {images.shape[1:3]}')


def holdout_split(n: int, fraction: float, seed: int):
    """Indices of the training and held-out parts; the held-out part has ceil(fraction * n) samples."""
    indices = np.arange(n)
    n_holdout = math.ceil(fraction * n) if n > 1 else 0
    if n_holdout == 0 or n_holdout >= n:
        return indices, indices[:0]
    train_idx, holdout_idx = train_test_split(indices, test_size=n_holdout, random_state=seed)
    return np.sort(train_idx), np.sort(holdout_idx)


def holdout_mse(model: Localizer, images: np.ndarray, targets: np.ndarray, batch_size: int) -> float:
    predictions = model.predict(images, batch_size=batch_size) / model.input_size
    return float(mean_squared_error(targets, predictions))


@measure_time
def train_localizer(
    cfg: TrainConfig,
    samples: Sequence[LocalizationSample],
    hook: Hook = no_hook,
) -> Checkpoint:
    """Fit a localizer by minimizing MSE between attended point and label in normalized image coordinates.

    A `holdout_fraction` slice of the training set drives early stopping after `patience` epochs without
    improvement; the checkpoint with the lowest held-out loss is returned.
    """
    if not samples:
        raise ContractError('cannot train on an empty dataset')
    images, labels = stack_samples(samples)
    _check_input_size(images, cfg.input_size)
    targets = normalized_targets(labels, cfg.input_size)
    epochs = cfg.epochs_for(len(samples))
    cfg.log()

    model: Localizer = build_model(cfg, 'localizer')  # type: ignore[assignment]
    step = 0

    def snapshot() -> Checkpoint:
        return Checkpoint.from_model(model, cfg, 'localizer', step, n_train=len(samples))

    best = snapshot()
    if epochs == 0:
        return best

    split_seed, shuffle_seed = derive_seeds(cfg.seed, 2)
    train_idx, holdout_idx = holdout_split(len(samples), cfg.holdout_fraction, split_seed)
    rng = np.random.default_rng(shuffle_seed)
    optimizer = Adam(dict(model.named_parameters()), lr=cfg.learning_rate)
    best_loss, stale_epochs = math.inf, 0
    log.info(f'Training {cfg.head} localizer on {len(train_idx)} samples, {len(holdout_idx)} held out')

    for epoch in range(epochs):
        model.train()
        losses = []
        for batch in batched(list(rng.permutation(train_idx)), cfg.batch_size):
            x, t = images_to_tensor(images[batch]), targets[batch]
            loss = guarded_step(
                model, optimizer, lambda: F.mse_loss(normalized_prediction(model, x), t), snapshot, best
            )
            step += 1
            losses.append(loss)
            hook('batch', {'epoch': epoch, 'step': step, 'loss': loss, 'indices': list(batch), 'model': model})

        train_loss = float(np.mean(losses))
        if len(holdout_idx):
            monitored = holdout_mse(model, images[holdout_idx], targets[holdout_idx], cfg.batch_size)
        else:
            monitored = train_loss
        log.info(f'Epoch {epoch + 1}/{epochs}: train MSE {train_loss:.6f}, held-out MSE {monitored:.6f}')
        hook('epoch', {'epoch': epoch, 'step': step, 'train_loss': train_loss, 'holdout_loss': monitored})

        if monitored < best_loss:
            best_loss, stale_epochs = monitored, 0
            best = snapshot()
        else:
            stale_epochs += 1
            if stale_epochs >= cfg.patience:
                log.info(f'Early stopping after epoch {epoch + 1}: no improvement for {cfg.patience} epochs')
                break
    return best


@measure_time
def eval_localizer(
    ckpt: Checkpoint,
    samples: Sequence[LocalizationSample],
    seed: int = 0,
    name: Optional[str] = None,
) -> EvalReport:
    """Fraction of samples whose predicted point is within 8 px of the label on both axes."""
    if ckpt.model != 'localizer':
        raise ContractError(f'expected a localizer checkpoint, got {ckpt.model}')
    if not samples:
        raise ContractError('cannot evaluate on an empty dataset')
    start = time.perf_counter()
    cfg = ckpt.train_config()
    images, labels = stack_samples(samples)
    _check_input_size(images, cfg.input_size)
    model: Localizer = ckpt.build_model()  # type: ignore[assignment]
    predictions = model.predict(images, batch_size=max(cfg.batch_size, 64))
    hits = [localization_match(p, label) for p, label in zip(predictions, labels)]
    accuracy = float(np.mean(hits))
    log.info(f'{cfg.head} localizer: accuracy {accuracy:.4f} on {len(samples)} samples')
    return EvalReport(
        kind='localization',
        head=cfg.head,
        rate=accuracy,
        n=len(samples),
        seed=seed,
        runtime_s=time.perf_counter() - start,
        n_train=int(ckpt.config['n_train']) if 'n_train' in ckpt.config else None,
        extra={'subset': name} if name else {},
    )
