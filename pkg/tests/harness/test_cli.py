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

import json

import pytest

from instattn.cli import build_parser, main
from instattn.harness.checkpoint import load_checkpoint
from instattn.harness.reports import EvalReport
from instattn.scenes.io import read_dataset
from instattn.sim.io import read_demos

TINY_CONFIG = """# tiny localizer for CLI tests
head=score
input_size=32
widths=2,2,2,2,2,2,2
conv_head_widths=2,2,2,2,2,2,2
batch_size=4
epochs=1
dropout_p=0.0
holdout_fraction=0.0
"""


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / 'tiny.cfg').write_text(TINY_CONFIG)
    for split, seed in (('train', 1), ('test', 2)):
        argv = ['gen-data', '--split', split, '--n', '8', '--seed', str(seed), '--size', '32']
        assert main(argv + ['--out', str(tmp_path / f'{split}.bin')]) == 0
    return tmp_path


def run_json(capsys, argv):
    capsys.readouterr()
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_gen_data(workspace):
    samples = read_dataset(workspace / 'train.bin')
    assert len(samples) == 8
    assert samples[0].image.shape == (32, 32, 3)


def test_train_and_eval_localizer(workspace, capsys):
    ckpt_path = workspace / 'score.ckpt'
    argv = ['train-loc', '--config', str(workspace / 'tiny.cfg'), '--data', str(workspace / 'train.bin')]
    assert main(argv + ['--out', str(ckpt_path)]) == 0
    ckpt = load_checkpoint(ckpt_path)
    assert ckpt.model == 'localizer'
    assert ckpt.train_config().head == 'score'

    report = run_json(capsys, ['eval-loc', '--ckpt', str(ckpt_path), '--data', str(workspace / 'test.bin')])
    assert report['kind'] == 'localization'
    assert report['n'] == 8
    assert 0.0 <= report['rate'] <= 1.0

    (workspace / 'report.json').write_text(json.dumps(report))
    summary = run_json(capsys, ['summarize', str(workspace / 'report.json')])
    assert summary == {'reports': 1, 'violations': []}


def test_head_override(workspace):
    ckpt_path = workspace / 'coords.ckpt'
    argv = ['train-loc', '--config', str(workspace / 'tiny.cfg'), '--head', 'coords', '--epochs', '0']
    assert main(argv + ['--data', str(workspace / 'train.bin'), '--out', str(ckpt_path)]) == 0
    cfg = load_checkpoint(ckpt_path).train_config()
    assert cfg.head == 'coords'
    assert cfg.epochs == 0


def test_export_maps(workspace, capsys):
    cfg = workspace / 'softmax.cfg'
    cfg.write_text(TINY_CONFIG.replace('head=score', 'head=softmax'))
    ckpt_path = workspace / 'softmax.ckpt'
    argv = ['train-loc', '--config', str(cfg), '--epochs', '0', '--data', str(workspace / 'train.bin')]
    assert main(argv + ['--out', str(ckpt_path)]) == 0
    out = workspace / 'maps'
    argv = ['export-maps', '--ckpt', str(ckpt_path), '--data', str(workspace / 'test.bin')]
    summary = run_json(capsys, argv + ['--out', str(out), '--limit', '2'])
    assert summary['n'] == 2
    assert len(list(out.glob('*.pgm'))) == 6


def test_summarize_reports_violations(tmp_path, capsys):
    reports = [EvalReport('localization', 'softmax', 0.9, 64, 0, 1.0, n_train=32).to_dict()]
    (tmp_path / 'reports.json').write_text(json.dumps(reports))
    summary = run_json(capsys, ['summarize', str(tmp_path / 'reports.json')])
    assert summary['reports'] == 1
    assert len(summary['violations']) == 1


def test_record_demos_and_eval_expert(tmp_path, capsys):
    out = tmp_path / 'reach.demos'
    assert main(['record-demos', '--task', 'reach', '--n', '2', '--seed', '3', '--out', str(out)]) == 0
    task, demos = read_demos(out)
    assert task == 'reach'
    assert len(demos) == 2

    report = run_json(capsys, ['eval-policy', '--agent', 'expert', '--task', 'reach', '--rollouts', '3'])
    assert report['kind'] == 'imitation'
    assert report['rate'] == 1.0


def test_eval_policy_needs_checkpoint():
    assert main(['eval-policy', '--task', 'reach', '--rollouts', '1']) == 1


def test_malformed_dataset_exits_2(tmp_path):
    bad = tmp_path / 'bad.bin'
    bad.write_bytes(b'JUNK' + bytes(12))
    (tmp_path / 'tiny.cfg').write_text(TINY_CONFIG)
    argv = ['train-loc', '--config', str(tmp_path / 'tiny.cfg'), '--data', str(bad)]
    assert main(argv + ['--out', str(tmp_path / 'x.ckpt')]) == 2
    assert not (tmp_path / 'x.ckpt').exists()


def test_missing_file_exits_2(tmp_path):
    assert main(['eval-loc', '--ckpt', str(tmp_path / 'none.ckpt'), '--data', str(tmp_path / 'none.bin')]) == 2


def test_invalid_config_exits_1(workspace):
    (workspace / 'bad.cfg').write_text(TINY_CONFIG + 'dropout_p=1.5\n')
    argv = ['train-loc', '--config', str(workspace / 'bad.cfg'), '--data', str(workspace / 'train.bin')]
    assert main(argv + ['--out', str(workspace / 'x.ckpt')]) == 1
