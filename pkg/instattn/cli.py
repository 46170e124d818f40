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

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from instattn.harness.checkpoint import load_checkpoint, save_checkpoint
from instattn.harness.config import TrainConfig
from instattn.harness.export import export_feature_maps
from instattn.harness.imitation import eval_policy, train_policy
from instattn.harness.localization import eval_localizer, train_localizer
from instattn.harness.reports import load_reports, localization_ordering_violations, reports_to_frame
from instattn.networks.registry import TASK_DEMOS, get_supported_heads, get_supported_tasks
from instattn.scenes.generator import QUADRANTS, SPLITS, SceneConfig, build_dataset, filter_quadrant
from instattn.scenes.io import read_dataset, write_dataset
from instattn.sim.agents import ExpertAgent, RandomAgent, record_demos
from instattn.sim.io import read_demos, write_demos
from instattn.utils import log, set_logger
from instattn.utils.exceptions import ConfigError, InstAttnError, NumericError
from instattn.version import __version__


def _emit(payload) -> None:
    print(json.dumps(payload, indent=4))


def _train_config(args, image_size: int) -> TrainConfig:
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig(input_size=image_size)
    return cfg.with_overrides(head=args.head, epochs=args.epochs, seed=args.seed)


def _image_size(samples) -> int:
    return samples[0].image.shape[0] if samples else 120


def _gen_data(args) -> None:
    config = SceneConfig.for_image_size(args.size)
    samples = build_dataset(args.split, args.n, args.seed, config, n_targets=args.targets, workers=args.workers)
    write_dataset(args.out, samples)


def _train_loc(args) -> None:
    samples = read_dataset(args.data)
    cfg = _train_config(args, _image_size(samples)).with_overrides(train_data=str(args.data))
    try:
        ckpt = train_localizer(cfg, samples)
    except NumericError as e:
        if e.checkpoint is not None:
            save_checkpoint(e.checkpoint, args.out)  # type: ignore[arg-type]
        raise
    save_checkpoint(ckpt, args.out)


def _eval_loc(args) -> None:
    ckpt = load_checkpoint(args.ckpt)
    samples = read_dataset(args.data)
    if args.quadrant:
        samples = filter_quadrant(samples, args.quadrant, _image_size(samples))
    _emit(eval_localizer(ckpt, samples, name=args.quadrant).to_dict())


def _record_demos(args) -> None:
    n = args.n if args.n is not None else TASK_DEMOS[args.task]
    write_demos(args.out, record_demos(args.task, n, args.seed, workers=args.workers))


def _train_policy(args) -> None:
    _, demos = read_demos(args.demos)
    cfg = _train_config(args, 120).with_overrides(demos=str(args.demos))
    try:
        ckpt = train_policy(cfg, demos)
    except NumericError as e:
        if e.checkpoint is not None:
            save_checkpoint(e.checkpoint, args.out)  # type: ignore[arg-type]
        raise
    save_checkpoint(ckpt, args.out)


def _eval_policy(args) -> None:
    if args.agent == 'policy':
        if not args.ckpt:
            raise ConfigError('--ckpt is required to evaluate a policy')
        report = eval_policy(load_checkpoint(args.ckpt), args.task, args.rollouts, args.seed, workers=args.workers)
    else:
        agent = ExpertAgent() if args.agent == 'expert' else RandomAgent(np.random.default_rng(args.seed))
        workers = args.workers if args.agent == 'expert' else 1
        report = eval_policy(None, args.task, args.rollouts, args.seed, workers=workers, agent=agent)
    _emit(report.to_dict())


def _export_maps(args) -> None:
    samples = read_dataset(args.data)
    if args.limit is not None:
        samples = samples[: args.limit]
    records = export_feature_maps(load_checkpoint(args.ckpt), samples, args.out)
    _emit(
        {
            'n': len(records),
            'matched': float(np.mean([r.matched for r in records])) if records else 0.0,
            'mean_mass_near_label': float(np.mean([r.mass_near_label for r in records])) if records else 0.0,
            'out': str(args.out),
        }
    )


def _summarize(args) -> None:
    reports = [report for path in args.reports for report in load_reports(Path(path).read_text())]
    frame = reports_to_frame(reports)
    log.info('\n' + frame.to_string(index=False))
    violations = localization_ordering_violations(reports)
    for violation in violations:
        log.warning(violation)
    _emit({'reports': len(reports), 'violations': violations})


COMMANDS = {
    'gen-data': _gen_data,
    'train-loc': _train_loc,
    'eval-loc': _eval_loc,
    'record-demos': _record_demos,
    'train-policy': _train_policy,
    'eval-policy': _eval_policy,
    'export-maps': _export_maps,
    'summarize': _summarize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='instattn', formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='Print more information.')
    parser.add_argument('--workers', default=1, type=int, help='Threads for data generation and rollouts.')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, help=help, formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    gen = add('gen-data', 'Generate a synthetic localization dataset.')
    gen.add_argument('--split', required=True, choices=SPLITS)
    gen.add_argument('--n', required=True, type=int, help='Number of samples.')
    gen.add_argument('--seed', default=0, type=int, help='Random Seed')
    gen.add_argument('--out', required=True, type=Path)
    gen.add_argument('--targets', default=None, type=int, help='Force this many targets per scene.')
    gen.add_argument('--size', default=120, type=int, help='Image size in pixels.')

    for name, help in (('train-loc', 'Train a localizer.'), ('train-policy', 'Behaviour-clone a policy.')):
        sub = add(name, help)
        sub.add_argument('--head', default=None, choices=get_supported_heads(), help='Localization head.')
        sub.add_argument('--config', default=None, type=Path, help='key=value training configuration file.')
        sub.add_argument('--epochs', default=None, type=int, help='Override the configured epochs.')
        sub.add_argument('--seed', default=None, type=int, help='Override the configured seed.')
        sub.add_argument('--out', required=True, type=Path, help='Checkpoint output path.')
        if name == 'train-loc':
            sub.add_argument('--data', required=True, type=Path, help='Training dataset.')
        else:
            sub.add_argument('--demos', required=True, type=Path, help='Demonstration file.')

    evl = add('eval-loc', 'Evaluate a localizer checkpoint.')
    evl.add_argument('--ckpt', required=True, type=Path)
    evl.add_argument('--data', required=True, type=Path)
    evl.add_argument('--quadrant', default=None, choices=QUADRANTS, help='Only labels in this quadrant.')

    rec = add('record-demos', 'Record scripted-expert demonstrations.')
    rec.add_argument('--task', required=True, choices=get_supported_tasks())
    rec.add_argument('--n', default=None, type=int, help='Number of demonstrations (task default if unset).')
    rec.add_argument('--seed', default=0, type=int, help='Random Seed')
    rec.add_argument('--out', required=True, type=Path)

    evp = add('eval-policy', 'Measure task success rate over seeded rollouts.')
    evp.add_argument('--ckpt', default=None, type=Path)
    evp.add_argument('--task', required=True, choices=get_supported_tasks())
    evp.add_argument('--rollouts', default=None, type=int, help='Number of rollouts (task default if unset).')
    evp.add_argument('--seed', default=0, type=int, help='Random Seed')
    evp.add_argument('--agent', default='policy', choices=['policy', 'expert', 'random'])

    exp = add('export-maps', 'Export input, g and attention maps as PGM images.')
    exp.add_argument('--ckpt', required=True, type=Path)
    exp.add_argument('--data', required=True, type=Path)
    exp.add_argument('--out', required=True, type=Path, help='Output directory.')
    exp.add_argument('--limit', default=None, type=int, help='Export only the first N inputs.')

    summ = add('summarize', 'Tabulate JSON reports and check the localization ordering.')
    summ.add_argument('reports', nargs='+', type=Path)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_logger(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        COMMANDS[args.command](args)
    except InstAttnError as e:
        log.error(getattr(e, 'message', str(e)))
        return e.exit_code
    except OSError as e:
        log.error(f'I/O error: {e}')
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
