"""End-to-end tests of the command line."""

import csv
import json

import pytest
from click.testing import CliRunner

from mixfm.cli import cli
from mixfm.core.database import load_checkpoint, read_runs
from mixfm.core.errors import EXIT_IO, EXIT_NUMERICAL, EXIT_VALIDATION
from mixfm.core.sparse import read_dataset


FAST = ['--epochs', '2', '--batch-size', '64', '--embedding-size', '2', '--learning-rate', '0.05']


@pytest.fixture(scope='module')
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp('synth')
    result = CliRunner().invoke(cli, [
        'synth', '-n', '300', '--users', '8', '--items', '8', '--contexts', '2',
        '--blocked-pairs', '4', '--planted-per-pair', '2', '--seed', '1', '-d', str(out)])
    assert result.exit_code == 0, result.output
    return out


def _run(*args):
    return CliRunner().invoke(cli, [str(a) for a in args])


def _read_csv(path):
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


class TestGroup:
    def test_help_lists_commands(self):
        result = _run('--help')
        assert result.exit_code == 0
        for name in ('train', 'evaluate', 'augment', 'bound', 'synth', 'encode',
                     'sweep-ratio', 'sweep-neighbors', 'sweep-embedding', 'perturb', 'compare'):
            assert name in result.output

    def test_version(self):
        result = _run('--version')
        assert result.exit_code == 0
        assert 'mixfm' in result.output


class TestSynth:
    def test_files(self, data_dir):
        for name in ('train.libsvm', 'valid.libsvm', 'test.libsvm', 'truth.ckpt'):
            assert (data_dir / name).exists()
        assert read_dataset(data_dir / 'train.libsvm').dim == 18


class TestTrain:
    def test_curves_and_checkpoint(self, data_dir, tmp_path):
        result = _run('train', '--train', data_dir / 'train.libsvm', '--valid', data_dir / 'valid.libsvm',
                      '--test', data_dir / 'test.libsvm', *FAST, '-d', tmp_path)
        assert result.exit_code == 0, result.output
        rows = _read_csv(tmp_path / 'curves.csv')
        assert len(rows) == 6
        assert list(rows[0]) == ['epoch', 'split', 'auc', 'logloss', 'seconds']
        params, metadata = load_checkpoint(tmp_path / 'model.ckpt')
        assert params.d == 2
        assert metadata['mode'] == 'mix'

    def test_reruns_are_identical(self, data_dir, tmp_path):
        outputs = []
        for name in ('a', 'b'):
            result = _run('train', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                          *FAST, '--mode', 'saliency', '--candidates', '3', '-d', tmp_path / name)
            assert result.exit_code == 0, result.output
            outputs.append([{k: v for k, v in row.items() if k != 'seconds'}
                            for row in _read_csv(tmp_path / name / 'curves.csv')])
        assert outputs[0] == outputs[1]
        a, _ = load_checkpoint(tmp_path / 'a' / 'model.ckpt')
        b, _ = load_checkpoint(tmp_path / 'b' / 'model.ckpt')
        assert a.same_as(b)

    def test_invalid_learning_rate_exit_code(self, data_dir, tmp_path):
        result = _run('train', '--train', data_dir / 'train.libsvm', '--learning-rate', '0', '-d', tmp_path)
        assert result.exit_code == EXIT_VALIDATION
        assert 'learning rate' in result.output

    def test_diverging_training_exit_code(self, data_dir, tmp_path):
        result = _run('train', '--train', data_dir / 'train.libsvm', '--epochs', '30', '--batch-size', '8',
                      '--learning-rate', '1e300', '--init-std', '1e10', '-d', tmp_path)
        assert result.exit_code == EXIT_NUMERICAL

    def test_malformed_data_exit_code(self, tmp_path):
        bad = tmp_path / 'bad.libsvm'
        bad.write_text('1 0:1\n1 zz\n')
        result = _run('train', '--train', bad, '-d', tmp_path)
        assert result.exit_code == EXIT_VALIDATION
        assert 'line 2' in result.output


class TestEvaluate:
    def test_report(self, data_dir, tmp_path):
        _run('train', '--train', data_dir / 'train.libsvm', *FAST, '-d', tmp_path)
        result = _run('evaluate', '-c', tmp_path / 'model.ckpt', '--data', data_dir / 'test.libsvm',
                      '-o', tmp_path / 'report.json')
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / 'report.json').read_text())[0]
        assert 0.0 <= report['auc'] <= 1.0
        assert report['n_examples'] == len(read_dataset(data_dir / 'test.libsvm'))

    def test_missing_checkpoint_exit_code(self, data_dir, tmp_path):
        missing = tmp_path / 'missing.ckpt'
        missing.write_text('not sqlite')
        result = _run('evaluate', '-c', missing, '--data', data_dir / 'test.libsvm')
        assert result.exit_code in (EXIT_IO, EXIT_VALIDATION)


class TestAugment:
    def test_mixed_file(self, data_dir, tmp_path):
        out = tmp_path / 'mixed.libsvm'
        result = _run('augment', '--data', data_dir / 'train.libsvm', '--mix-ratio', '0.5', '-o', out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith('#mixed mode=mix')
        mixed = read_dataset(out)
        assert len(mixed) == round(0.5 * len(read_dataset(data_dir / 'train.libsvm')))

    def test_saliency_needs_checkpoint(self, data_dir):
        result = _run('augment', '--data', data_dir / 'train.libsvm', '--mode', 'saliency')
        assert result.exit_code == EXIT_VALIDATION


class TestBound:
    def test_report(self, data_dir, tmp_path):
        _run('train', '--train', data_dir / 'train.libsvm', *FAST, '-d', tmp_path)
        out = tmp_path / 'bound.json'
        result = _run('bound', '-c', tmp_path / 'model.ckpt', '--data', data_dir / 'train.libsvm', '-o', out)
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload['verdict'] in ('fm-tighter', 'mixfm-tighter')
        assert payload['fm']['tau'] == 3
        assert payload['mixup_regularizer'] >= 0


class TestEncode:
    def test_split_files(self, tmp_path):
        records = tmp_path / 'ratings.csv'
        lines = ['user,item,label'] + [f"u{i % 5},i{i % 7},{i % 2}" for i in range(40)]
        records.write_text('\n'.join(lines) + '\n')
        result = _run('encode', '-i', records, '--column', 'user:onehot', '--column', 'item:onehot',
                      '-d', tmp_path / 'out')
        assert result.exit_code == 0, result.output
        sizes = [len(read_dataset(tmp_path / 'out' / f"{name}.libsvm")) for name in ('train', 'valid', 'test')]
        assert sizes == [32, 4, 4]
        assert 'item\tonehot\t[5, 12)\t7' in (tmp_path / 'out' / 'schema.txt').read_text()

    def test_negatives(self, tmp_path):
        records = tmp_path / 'clicks.csv'
        records.write_text('user,item\nu1,a\nu1,b\nu2,c\n')
        result = _run('encode', '-i', records, '--column', 'user:onehot', '--column', 'item:onehot',
                      '--negatives', '1', '--item-column', 'item', '--no-split', '-d', tmp_path / 'out')
        assert result.exit_code == 0, result.output
        data = read_dataset(tmp_path / 'out' / 'data.libsvm')
        assert list(data.labels) == [1, 0, 1, 0, 1, 0]

    def test_negatives_with_user_column(self, tmp_path):
        records = tmp_path / 'clicks.csv'
        records.write_text('user,ctx,item\nu1,home,a\nu1,work,b\nu2,home,a\n')
        result = _run('encode', '-i', records, '--column', 'user:onehot', '--column', 'ctx:onehot',
                      '--column', 'item:onehot', '--negatives', '1', '--item-column', 'item',
                      '--user-column', 'user', '--no-split', '-d', tmp_path / 'out')
        assert result.exit_code == 0, result.output
        data = read_dataset(tmp_path / 'out' / 'data.libsvm')
        # users [0, 2), contexts [2, 4), items a=4 b=5; u1 has clicked both items
        assert list(data.labels) == [1, 1, 1, 0]
        assert list(data[3].x.indices) == [1, 2, 5]
    def test_bad_column_spec(self, tmp_path):
        records = tmp_path / 'r.csv'
        records.write_text('user,label\nu1,1\n')
        result = _run('encode', '-i', records, '--column', 'user:dense', '-d', tmp_path)
        assert result.exit_code == EXIT_VALIDATION


class TestExperiments:
    def test_sweep_ratio_csv(self, data_dir, tmp_path):
        out = tmp_path / 'sweep.csv'
        result = _run('sweep-ratio', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                      *FAST, '--repeats', '2', '--ratios', '0,0.5', '-o', out, '--db', tmp_path / 'runs.db')
        assert result.exit_code == 0, result.output
        rows = _read_csv(out)
        assert [r['x'] for r in rows] == ['0', '0.5']
        assert list(rows[0]) == ['x', 'method', 'mean_auc', 'sd_auc', 'delta']
        assert len(read_runs(tmp_path / 'runs.db', experiment='sweep-ratio')) == 4

    def test_sweep_output_is_reproducible(self, data_dir, tmp_path):
        texts = []
        for name in ('a.csv', 'b.csv'):
            _run('sweep-neighbors', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                 *FAST, '--repeats', '2', '--candidates', '1,2', '-o', tmp_path / name)
            texts.append((tmp_path / name).read_text())
        assert texts[0] == texts[1]

    def test_sweep_embedding_has_gamma(self, data_dir, tmp_path):
        out = tmp_path / 'emb.csv'
        result = _run('sweep-embedding', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                      *FAST, '--repeats', '1', '--embedding-sizes', '2', '-m', 'fm', '-m', 'mixfm', '-o', out)
        assert result.exit_code == 0, result.output
        rows = _read_csv(out)
        assert [r['method'] for r in rows] == ['fm', 'mixfm']
        assert 'mean_gamma' in rows[0]

    def test_perturb_with_checkpoints(self, data_dir, tmp_path):
        _run('train', '--train', data_dir / 'train.libsvm', *FAST, '--mode', 'none', '-d', tmp_path / 'fm')
        out = tmp_path / 'perturb.csv'
        result = _run('perturb', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                      '--noise-levels', '0,0.1', '--repeats', '2', '-c', f"fm={tmp_path / 'fm' / 'model.ckpt'}",
                      '-o', out)
        assert result.exit_code == 0, result.output
        rows = _read_csv(out)
        assert [(r['x'], r['method']) for r in rows] == [('0', 'fm'), ('0.1', 'fm')]
        assert rows[0]['delta'] == '0'

    def test_perturb_bad_checkpoint_spec(self, data_dir):
        result = _run('perturb', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                      '-c', 'model.ckpt')
        assert result.exit_code == EXIT_VALIDATION

    def test_compare_table_on_stdout(self, data_dir):
        result = _run('compare', '--train', data_dir / 'train.libsvm', '--test', data_dir / 'test.libsvm',
                      *FAST, '--repeats', '2', '-m', 'fm', '-m', 'mixfm')
        assert result.exit_code == 0, result.output
        lines = result.stdout.splitlines()
        assert lines[0].split()[:3] == ['method', 'mean_auc', 'sd_auc']
        assert lines[2].split()[0] == 'fm'
        assert 'identical' in lines[2]

    def test_sweep_requires_test_split(self, data_dir):
        result = _run('compare', '--train', data_dir / 'train.libsvm')
        assert result.exit_code == 2


class TestConfigFile:
    def test_config_supplies_defaults(self, data_dir, tmp_path):
        config = tmp_path / 'run.cfg'
        config.write_text(f"train = {data_dir / 'train.libsvm'}\nepochs = 1\nembedding-size = 3\n"
                          f"batch_size = 64\nunknown_key = 1\n")
        result = _run('--config', config, 'train', '-d', tmp_path / 'out')
        assert result.exit_code == 0, result.output
        params, metadata = load_checkpoint(tmp_path / 'out' / 'model.ckpt')
        assert params.d == 3
        assert metadata['epochs'] == '1'
        assert 'unknown_key' in result.output

    def test_command_line_wins(self, data_dir, tmp_path):
        config = tmp_path / 'run.cfg'
        config.write_text('embedding_size = 3\nepochs = 1\n')
        result = _run('--config', config, 'train', '--train', data_dir / 'train.libsvm',
                      '--embedding-size', '2', '-d', tmp_path / 'out')
        assert result.exit_code == 0, result.output
        assert load_checkpoint(tmp_path / 'out' / 'model.ckpt')[0].d == 2

    def test_malformed_config(self, tmp_path):
        config = tmp_path / 'run.cfg'
        config.write_text('epochs 3\n')
        result = _run('--config', config, 'train', '--help')
        assert result.exit_code == EXIT_VALIDATION
