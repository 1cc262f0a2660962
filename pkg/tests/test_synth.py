"""Tests for the synthetic data generator."""

import pytest

from mixfm.core.database import load_checkpoint
from mixfm.core.errors import ValidationError
from mixfm.core.sparse import read_dataset
from mixfm.core.synth import (
    SynthSpec,
    count_cooccurrences,
    format_blocked,
    generate_synthetic,
    parse_blocked,
    write_synthetic,
)


SMALL = SynthSpec(n=600, users=12, items=10, contexts=3, blocked_pairs=8, planted_per_pair=3, seed=5)


class TestSynthSpec:
    def test_layout(self):
        assert SMALL.dim == 25
        assert SMALL.item_feature(0) == 12
        assert SMALL.context_feature(2) == 24

    @pytest.mark.parametrize('kwargs', [
        {'users': 0}, {'blocked_pairs': 0}, {'blocked_pairs': 10 * 10}, {'ratios': (0.5, 0.5, 0.5)},
        {'planted_per_pair': 0}, {'n': 2},
    ])
    def test_invalid(self, kwargs):
        values = {'users': 10, 'items': 10}
        values.update(kwargs)
        with pytest.raises(ValidationError):
            SynthSpec(**values)


class TestGenerate:
    def test_blocked_pairs_absent_from_train_and_valid(self):
        result = generate_synthetic(SMALL)
        for user, item in result.blocked_features():
            assert count_cooccurrences(result.train, user, item) == 0
            assert count_cooccurrences(result.valid, user, item) == 0
            assert count_cooccurrences(result.test, user, item) >= SMALL.planted_per_pair

    def test_split_sizes(self):
        result = generate_synthetic(SMALL)
        assert len(result.train) == 480
        assert len(result.valid) == 60
        assert len(result.test) == 60 + 8 * 3

    def test_every_example_has_three_features(self):
        result = generate_synthetic(SMALL)
        assert result.train.tau == 3
        assert (result.train.nnz_per_row == 3).all()

    def test_labels_not_degenerate(self):
        result = generate_synthetic(SMALL)
        share = result.train.n_positive / len(result.train)
        assert 0.2 < share < 0.8

    def test_deterministic(self):
        a = generate_synthetic(SMALL)
        b = generate_synthetic(SMALL)
        assert a.blocked == b.blocked
        assert (a.test.features != b.test.features).nnz == 0
        assert a.truth.same_as(b.truth)


class TestBlockedFormat:
    def test_round_trip(self):
        pairs = [(0, 12), (3, 15)]
        assert format_blocked(pairs) == '0:12,3:15'
        assert parse_blocked('0:12, 3:15') == pairs

    def test_malformed(self):
        with pytest.raises(ValidationError):
            parse_blocked('0:x')


class TestWrite:
    def test_files(self, tmp_path):
        result = generate_synthetic(SMALL)
        paths = write_synthetic(result, tmp_path)
        assert set(paths) == {'train', 'valid', 'test', 'truth'}
        header = (tmp_path / 'test.libsvm').read_text().splitlines()[0]
        assert header == f"# blocked={format_blocked(result.blocked_features())}"
        assert read_dataset(paths['train']).dim == SMALL.dim
        truth, metadata = load_checkpoint(paths['truth'])
        assert truth.same_as(result.truth)
        assert metadata['role'] == 'truth'
        assert parse_blocked(metadata['blocked_pairs']) == result.blocked_features()
