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

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from instattn.attention.spatial import attention_mass_within
from instattn.harness.checkpoint import Checkpoint
from instattn.networks.backbone import STRIDE, images_to_tensor
from instattn.networks.heads import ProbeResult
from instattn.networks.localizer import Localizer, feature_to_image_coords
from instattn.networks.policy import PolicyNetwork, resize_nearest
from instattn.scenes.generator import MATCH_THRESHOLD_PX, LocalizationSample, localization_match
from instattn.utils import log, measure_time
from instattn.utils.exceptions import ContractError


@dataclass
class ExportRecord:
    """Files written for one input and where the model attended."""

    index: int
    paths: Tuple[Path, Path, Path]
    attended: Tuple[float, float]
    label: Tuple[float, float]
    mass_near_label: float
    matched: bool


def to_grayscale_u8(values: np.ndarray) -> np.ndarray:
    """Min-max normalize a 2D map to 0..255; a constant map becomes uniform mid-gray."""
    values = np.asarray(values, dtype=np.float64)
    low, high = values.min(), values.max()
    if high - low <= 0:
        return np.full(values.shape, 128, dtype=np.uint8)
    return np.round(255.0 * (values - low) / (high - low)).astype(np.uint8)


def write_pgm(path: Union[str, Path], values: np.ndarray) -> Path:
    """Write a 2D map as an 8-bit portable graymap."""
    path = Path(path)
    Image.fromarray(to_grayscale_u8(values)).save(path, format='PPM')
    return path


def _probe(model: Union[Localizer, PolicyNetwork], image: np.ndarray) -> ProbeResult:
    if isinstance(model, PolicyNetwork):
        if image.shape[0] != model.input_size:
            image = resize_nearest(image, model.input_size)
        return model.localizer.probe(model.backbone(images_to_tensor(image)))
    return model.probe(images_to_tensor(image))


@measure_time
def export_feature_maps(
    ckpt: Checkpoint,
    samples: Sequence[LocalizationSample],
    out_dir: Union[str, Path],
) -> List[ExportRecord]:
    """Write, per input, the grayscale input, the bottlenecked map g and the attention map as PGM files.

    Also measures how much attention mass falls within the 8 px match window around each label.
    """
    model: Union[Localizer, PolicyNetwork] = ckpt.build_model()  # type: ignore[assignment]
    if not model.kind.is_softmax:
        raise ContractError(f'feature maps need a spatial-softmax head, checkpoint has {model.kind.value}')
    model.eval()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    input_size = model.input_size
    radius = MATCH_THRESHOLD_PX / STRIDE

    records = []
    for i, sample in enumerate(samples):
        image = sample.image
        g, ghat, f = _probe(model, image)
        scale = image.shape[0] / input_size
        attended = feature_to_image_coords(f)[0, 0] * scale
        label_xy = np.array([sample.label[1], sample.label[0]]) / scale
        label_feature = (label_xy - (STRIDE - 1) / 2.0) / STRIDE
        assert ghat is not None
        mass = float(attention_mass_within(ghat, label_feature, radius)[0, 0])
        paths = (
            write_pgm(out_dir / f'{i:05d}_input.pgm', np.asarray(Image.fromarray(image).convert('L'))),
            write_pgm(out_dir / f'{i:05d}_g.pgm', g.values.data[0, 0]),
            write_pgm(out_dir / f'{i:05d}_ghat.pgm', ghat.values.data[0, 0]),
        )
        records.append(
            ExportRecord(
                index=i,
                paths=paths,
                attended=(float(attended[0]), float(attended[1])),
                label=sample.label,
                mass_near_label=mass,
                matched=localization_match(attended, sample.label),
            )
        )
    log.info(f'Exported feature maps of {len(records)} inputs to {out_dir}')
    return records
