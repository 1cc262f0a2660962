"""Tests for config files and comma-list options."""

import click
import pytest

from mixfm.core.errors import DataIOError, ParseError
from mixfm.utils.config import (
    FLOAT_LIST,
    INT_LIST,
    build_default_map,
    known_keys,
    load_config,
    normalize_key,
    parse_config,
)


@click.group()
def group():
    pass


@group.command(name='fit')
@click.option('--train', 'train_path')
@click.option('--learning-rate', type=float)
def fit(train_path, learning_rate):
    pass


@group.command(name='sweep')
@click.option('--ratios', type=FLOAT_LIST)
def sweep(ratios):
    pass


class TestParseConfig:
    def test_keys_and_comments(self):
        values = parse_config(['# experiment', 'Learning-Rate = 0.05  # faster', '', 'repeats=3'])
        assert values == {'learning_rate': '0.05', 'repeats': '3'}

    def test_later_keys_win(self):
        assert parse_config(['seed = 1', 'seed = 2']) == {'seed': '2'}

    def test_missing_equals(self):
        with pytest.raises(ParseError) as info:
            parse_config(['epochs 10'], source='run.cfg')
        assert info.value.line == 1

    def test_normalize_key(self):
        assert normalize_key(' Mix-Ratio ') == 'mix_ratio'

    def test_load_missing(self, tmp_path):
        with pytest.raises(DataIOError):
            load_config(tmp_path / 'missing.cfg')


class TestDefaultMap:
    def test_routes_keys_by_command(self):
        default_map, unknown = build_default_map(group, {'learning_rate': '0.1', 'ratios': '0,1', 'bogus': '1'})
        assert default_map['fit'] == {'learning_rate': '0.1'}
        assert default_map['sweep'] == {'ratios': '0,1'}
        assert unknown == ['bogus']

    def test_option_name_alias(self):
        default_map, unknown = build_default_map(group, {'train': 'data.libsvm'})
        assert default_map['fit'] == {'train_path': 'data.libsvm'}
        assert unknown == []

    def test_known_keys(self):
        assert {'train', 'train_path', 'learning_rate', 'ratios'} <= set(known_keys(group))


class TestCommaList:
    def test_float_list(self):
        assert FLOAT_LIST.convert('0, 0.5,2', None, None) == (0.0, 0.5, 2.0)

    def test_int_list(self):
        assert INT_LIST.convert('1,2,10', None, None) == (1, 2, 10)

    def test_sequence_passthrough(self):
        assert INT_LIST.convert([1, 2], None, None) == (1, 2)

    def test_bad_item(self):
        with pytest.raises(click.BadParameter):
            INT_LIST.convert('1,x', None, None)
