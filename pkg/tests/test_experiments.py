"""Tests for the seeded experiment harness."""

import math

import numpy as np
import pytest

from mixfm.core.augment import MixConfig
from mixfm.core.errors import ValidationError
from mixfm.core.experiments import (
    COMPARE_FIELDS,
    ExperimentConfig,
    Splits,
    TrialTask,
    compare_methods,
    perturb_checkpoints,
    perturb_dataset,
    perturb_sweep,
    run_trial,
    run_trials,
    sweep_embedding,
    sweep_neighbors,
    sweep_ratio,
)
from mixfm.core.model import FmParams
from mixfm.core.sparse import parse_lines
from mixfm.core.synth import SynthSpec, generate_synthetic
from mixfm.core.training import TrainConfig


@pytest.fixture(scope='module')
def splits():
    result = generate_synthetic(SynthSpec(n=300, users=8, items=8, contexts=2, blocked_pairs=4,
                                          planted_per_pair=2, seed=1))
    return Splits(result.train, result.valid, result.test)


def _config(**kwargs):
    values = dict(train=TrainConfig(epochs=2, batch_size=64, embedding_size=2, learning_rate=0.05),
                  mix=MixConfig(), repeats=2, seed=3)
    values.update(kwargs)
    return ExperimentConfig(**values)


class TestConfig:
    def test_smfm_defaults_to_ten_candidates(self):
        cfg = _config()
        assert cfg.method_mix('smfm').p == 10
        assert cfg.method_mix('smfm').mode == 'saliency'
        assert cfg.method_mix('fm').mode == 'none'

    def test_explicit_candidates_kept(self):
        assert _config(mix=MixConfig(p=4)).method_mix('smfm').p == 4

    @pytest.mark.parametrize('kwargs', [{'repeats': 0}, {'jobs': 0}, {'methods': ('fm', 'xfm')}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            _config(**kwargs)

    def test_holdout_prefers_test(self, splits):
        assert splits.holdout is splits.test
        assert Splits(splits.train, splits.valid).holdout is splits.valid
        with pytest.raises(ValidationError):
            Splits(splits.train).holdout


class TestPerturb:
    def test_zero_noise_is_identity(self):
        data = parse_lines(["1 0:1 1:0.5"], dim=2)
        assert perturb_dataset(data, 0.0, np.random.default_rng(0)) is data

    def test_noise_bounded_and_clamped(self):
        data = parse_lines(["1 0:1 1:0.5", "0 1:0.1"], dim=2)
        noisy = perturb_dataset(data, 0.2, np.random.default_rng(0))
        assert noisy.features.data.min() >= 0.0
        assert noisy.features.data.max() <= 1.0
        assert np.abs(noisy.features.toarray() - data.features.toarray()).max() <= 0.2 + 1e-12
        assert np.array_equal(noisy.labels, data.labels)

    def test_negative_level(self):
        with pytest.raises(ValidationError):
            perturb_dataset(parse_lines(["1 0:1"], dim=1), -0.1, np.random.default_rng(0))


class TestTrials:
    def test_paired_seeds(self, splits):
        cfg = _config()
        fm = TrialTask('t', 'fm', 0.0, 1, 3, cfg.train, MixConfig(mode='none'), splits)
        empty_mix = TrialTask('t', 'mixfm', 0.0, 1, 3, cfg.train, MixConfig(n_prime=0), splits)
        assert run_trial(fm).auc == run_trial(empty_mix).auc

    def test_repeats_differ(self, splits):
        cfg = _config()
        a = run_trial(TrialTask('t', 'fm', 0.0, 0, 3, cfg.train, MixConfig(mode='none'), splits, keep_params=True))
        b = run_trial(TrialTask('t', 'fm', 0.0, 1, 3, cfg.train, MixConfig(mode='none'), splits, keep_params=True))
        assert not a.params.same_as(b.params)

    def test_run_row(self, splits):
        cfg = _config()
        result = run_trial(TrialTask('compare', 'fm', 0.0, 0, 3, cfg.train, MixConfig(mode='none'), splits))
        row = result.run_row()
        assert row['experiment'] == 'compare'
        assert row['seed'] == 3
        assert result.params is None

    def test_parallel_matches_sequential(self, splits):
        cfg = _config()
        tasks = [TrialTask('t', 'mixfm', 0.0, r, 3, cfg.train, MixConfig(), splits) for r in range(3)]
        sequential = [r.auc for r in run_trials(tasks, jobs=1)]
        parallel = [r.auc for r in run_trials(tasks, jobs=2)]
        assert sequential == parallel


class TestSweeps:
    def test_ratio(self, splits):
        rows, results = sweep_ratio(splits, _config(ratios=(0.0, 0.5)))
        assert [r['x'] for r in rows] == [0.0, 0.5]
        assert rows[0]['delta'] == 0.0
        assert len(results) == 4

    def test_ratio_always_runs_baseline(self, splits):
        rows, results = sweep_ratio(splits, _config(ratios=(0.5,)))
        assert len(rows) == 1
        assert {r.x for r in results} == {0.0, 0.5}

    def test_neighbors(self, splits):
        rows, _ = sweep_neighbors(splits, _config(candidates=(1, 3)))
        assert [r['x'] for r in rows] == [1, 3]
        assert rows[0]['delta'] == 0.0
        assert all(r['method'] == 'smfm' for r in rows)

    def test_embedding(self, splits):
        rows, _ = sweep_embedding(splits, _config(embedding_sizes=(2, 4), methods=('fm', 'mixfm')))
        assert [(r['x'], r['method']) for r in rows] == [(2, 'fm'), (2, 'mixfm'), (4, 'fm'), (4, 'mixfm')]
        assert rows[0]['delta'] == 0.0
        assert all(r['mean_gamma'] > 0 for r in rows)

    def test_empty_grid(self, splits):
        with pytest.raises(ValidationError):
            sweep_ratio(splits, _config(ratios=()))

    def test_perturb(self, splits):
        rows, results = perturb_sweep(splits, _config(noise_levels=(0.0, 0.2)))
        assert [(r['x'], r['method']) for r in rows] == [(0.0, 'fm'), (0.0, 'mixfm'), (0.2, 'fm'), (0.2, 'mixfm')]
        assert rows[0]['delta'] == 0.0
        clean = np.mean([r.auc for r in results if r.method == 'fm'])
        assert rows[0]['mean_auc'] == pytest.approx(clean)

    def test_perturb_checkpoints(self, splits):
        params = FmParams(0.0, np.linspace(-1, 1, splits.train.dim), np.zeros((splits.train.dim, 2)))
        rows = perturb_checkpoints({'fm': params}, splits.test, (0.0, 0.1), repeats=2, seed=0)
        assert len(rows) == 2
        assert rows[0]['delta'] == 0.0
        again = perturb_checkpoints({'fm': params}, splits.test, (0.0, 0.1), repeats=2, seed=0)
        assert [r['mean_auc'] for r in rows] == [r['mean_auc'] for r in again]

    def test_compare(self, splits):
        rows, results = compare_methods(splits, _config())
        assert [r['method'] for r in rows] == ['fm', 'copyfm', 'mixfm', 'smfm']
        assert set(rows[0]) == set(COMPARE_FIELDS)
        assert rows[0]['verdict'] == 'identical'
        assert rows[0]['delta'] == 0.0
        assert len(results) == 8

    def test_compare_single_repeat(self, splits):
        rows, _ = compare_methods(splits, _config(repeats=1), methods=('fm', 'mixfm'))
        assert rows[1]['verdict'] == 'too-few-repeats'
        assert math.isnan(rows[1]['pvalue'])

    def test_deterministic(self, splits):
        a, _ = compare_methods(splits, _config(), methods=('fm', 'mixfm'))
        b, _ = compare_methods(splits, _config(), methods=('fm', 'mixfm'))
        assert [r['mean_auc'] for r in a] == [r['mean_auc'] for r in b]
