"""Tests for output formatting utilities."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from mixfm.utils.output import (
    determine_format,
    format_value,
    json_ready,
    render,
    write_json,
    write_output,
)


class TestFormatValue:
    def test_none_to_empty(self):
        assert format_value(None) == ''

    def test_integer(self):
        assert format_value(42) == '42'

    def test_float_fixed_digits(self):
        assert format_value(0.1 + 0.2) == '0.3'
        assert format_value(1 / 3) == '0.3333333333'

    def test_non_finite(self):
        assert format_value(math.nan) == 'nan'
        assert format_value(math.inf) == 'inf'
        assert format_value(-math.inf) == '-inf'

    def test_list_to_comma_separated(self):
        assert format_value([1, 2.5]) == '1, 2.5'

    def test_dict_to_sorted_json(self):
        assert format_value({'b': 1, 'a': 2}) == '{"a": 2, "b": 1}'


class TestJsonReady:
    def test_numpy_scalars(self):
        assert json_ready(np.float64(0.5)) == 0.5
        assert isinstance(json_ready(np.int64(3)), int)

    def test_non_finite_becomes_null(self):
        assert json_ready({'auc': math.nan}) == {'auc': None}

    def test_arrays(self):
        assert json_ready(np.array([1.0, 2.0])) == [1.0, 2.0]


class TestDetermineFormat:
    def test_explicit_format_overrides(self):
        assert determine_format('csv', Path('results.json')) == 'csv'

    def test_extensions(self):
        assert determine_format(None, Path('sweep.csv')) == 'csv'
        assert determine_format(None, Path('report.json')) == 'json'
        assert determine_format(None, Path('runs.ndjson')) == 'jsonl'
        assert determine_format(None, Path('runs.TSV')) == 'table'

    def test_unknown_extension(self):
        assert determine_format(None, Path('results.xyz')) == 'records'

    def test_no_output_path(self):
        assert determine_format(None, None) == 'records'


class TestWriteOutput:
    FIELDS = ['x', 'method', 'mean_auc']
    ROWS = [
        {'x': 0.0, 'method': 'mixfm', 'mean_auc': 0.71234567891234},
        {'x': 0.5, 'method': 'mixfm', 'mean_auc': 0.72, 'extra': 'ignored'},
    ]

    def test_csv(self, tmp_path):
        path = tmp_path / 'sweep.csv'
        write_output('csv', self.FIELDS, self.ROWS, path)
        lines = path.read_text().splitlines()
        assert lines == ['x,method,mean_auc', '0,mixfm,0.7123456789', '0.5,mixfm,0.72']

    def test_json(self, tmp_path):
        path = tmp_path / 'sweep.json'
        write_output('json', self.FIELDS, self.ROWS, path)
        data = json.loads(path.read_text())
        assert data[1] == {'x': 0.5, 'method': 'mixfm', 'mean_auc': 0.72}

    def test_jsonl(self, tmp_path):
        path = tmp_path / 'sweep.jsonl'
        write_output('jsonl', self.FIELDS, self.ROWS, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])['method'] == 'mixfm'

    def test_table(self):
        lines = render('table', self.FIELDS, self.ROWS).splitlines()
        assert len(lines) == 4
        assert lines[0].split() == self.FIELDS
        assert set(lines[1].replace(' ', '')) == {'-'}

    def test_records(self):
        text = render('records', ['auc'], [{'auc': 0.5}, {'auc': 0.6}])
        assert text == 'auc: 0.5\n\nauc: 0.6\n'

    def test_missing_field_is_null(self, tmp_path):
        path = tmp_path / 'r.json'
        write_output('json', ['auc', 'missing'], [{'auc': 0.5}], path)
        assert json.loads(path.read_text())[0]['missing'] is None

    def test_stdout(self, capsys):
        write_output('csv', ['auc'], [{'auc': 0.5}])
        assert capsys.readouterr().out == 'auc\n0.5\n'

    def test_rendering_is_reproducible(self):
        assert render('csv', self.FIELDS, self.ROWS) == render('csv', self.FIELDS, self.ROWS)


class TestWriteJson:
    def test_sorted_keys_and_nested(self, tmp_path):
        path = tmp_path / 'nested' / 'bound.json'
        write_json({'verdict': 'fm-tighter', 'fm': {'gap': 1.5}, 'auc': math.nan}, path)
        text = path.read_text()
        assert text.index('"auc"') < text.index('"fm"') < text.index('"verdict"')
        assert json.loads(text)['auc'] is None


@pytest.mark.parametrize('value,expected', [(1e-12, '1e-12'), (123456.0, '123456')])
def test_float_formatting_edge_cases(value, expected):
    assert format_value(value) == expected
