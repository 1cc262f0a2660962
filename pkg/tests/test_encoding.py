"""Tests for tabular record encoding."""

import pytest

from mixfm.core.encoding import (
    ColumnSpec,
    EncodingSchema,
    build_schema,
    encode_records,
    fit_schema,
    format_schema,
    load_schema,
    parse_schema,
    read_records,
)
from mixfm.core.errors import ParseError, ValidationError


ROWS = [
    {'user': 'u2', 'item': 'b', 'tags': 'x|y', 'age': '20', 'label': '1'},
    {'user': 'u1', 'item': 'a', 'tags': 'y', 'age': '40', 'label': '0'},
    {'user': 'u1', 'item': 'c', 'tags': '', 'age': '30', 'label': '1'},
]

KINDS = {'user': 'onehot', 'item': 'onehot', 'tags': 'multihot', 'age': 'numeric'}


class TestSchema:
    def test_build_layout(self):
        schema = build_schema(ROWS, KINDS)
        assert schema.offsets == (0, 2, 5, 7)
        assert schema.dim == 8
        assert schema.feature_range('item') == (2, 5)
        assert schema.column('user').vocabulary == {'u1': 0, 'u2': 1}

    def test_oov_reserves_index(self):
        schema = build_schema(ROWS, {'user': 'onehot', 'age': 'numeric'}, oov=True)
        assert schema.column('user').width == 3
        assert schema.dim == 4

    def test_incomplete_schema_has_no_dim(self):
        schema = EncodingSchema((ColumnSpec('user', 'onehot'),))
        with pytest.raises(ValidationError):
            schema.dim

    def test_duplicate_columns(self):
        with pytest.raises(ValidationError):
            EncodingSchema((ColumnSpec('a', 'numeric'), ColumnSpec('a', 'onehot')))

    def test_parse_schema(self, tmp_path):
        (tmp_path / 'items.txt').write_text('a\nb\nc\n')
        schema = parse_schema(['# columns', 'item onehot items.txt', 'age numeric 0,100'], base_dir=tmp_path)
        assert schema.column('item').vocabulary == {'a': 0, 'b': 1, 'c': 2}
        assert schema.column('age').low == 0.0
        assert schema.dim == 4

    def test_parse_schema_unknown_kind(self):
        with pytest.raises(ParseError) as info:
            parse_schema(['item sparse'], source='schema.txt')
        assert info.value.line == 1

    def test_load_schema_then_fit(self, tmp_path):
        path = tmp_path / 'schema.txt'
        path.write_text('user onehot\nage numeric\n')
        schema = fit_schema(load_schema(path), ROWS)
        assert schema.column('age').low == 20.0
        assert schema.column('age').high == 40.0

    def test_format_schema(self):
        text = format_schema(build_schema(ROWS, KINDS))
        assert text.splitlines()[1] == 'item\tonehot\t[2, 5)\t3'


class TestEncodeRecords:
    def test_encoding(self):
        schema = build_schema(ROWS, KINDS)
        data = encode_records(ROWS, schema)
        assert list(data.labels) == [1.0, 0.0, 1.0]
        first = data[0]
        # u2, item b, tags x and y, age at the minimum scales to zero
        assert first.x.indices == (1, 3, 5, 6)
        assert data[1].x.entries == [(0, 1.0), (2, 1.0), (6, 1.0), (7, 1.0)]
        assert data[2].x.entries == [(0, 1.0), (4, 1.0), (7, 0.5)]

    def test_without_label_column_all_positive(self):
        schema = build_schema(ROWS, KINDS)
        assert list(encode_records(ROWS, schema, label_column=None).labels) == [1.0, 1.0, 1.0]

    def test_unseen_category(self):
        schema = build_schema(ROWS, {'user': 'onehot'})
        with pytest.raises(ValidationError, match='unseen'):
            encode_records([{'user': 'u9', 'label': '1'}], schema)

    def test_unseen_category_with_oov(self):
        schema = build_schema(ROWS, {'user': 'onehot'}, oov=True)
        data = encode_records([{'user': 'u9', 'label': '1'}], schema)
        assert data[0].x.indices == (2,)

    def test_numeric_out_of_bounds(self):
        schema = build_schema(ROWS, {'age': 'numeric'})
        rows = [{'age': '80', 'label': '0'}]
        with pytest.raises(ValidationError):
            encode_records(rows, schema)
        assert encode_records(rows, schema, clamp=True)[0].x.values == (1.0,)

    def test_bad_label(self):
        schema = build_schema(ROWS, {'user': 'onehot'})
        with pytest.raises(ValidationError, match='record 1'):
            encode_records([{'user': 'u1', 'label': '3'}], schema)


class TestReadRecords:
    def test_delimiter(self, tmp_path):
        path = tmp_path / 'r.tsv'
        path.write_text('user\tlabel\nu1\t1\n')
        assert read_records(path, delimiter='\t') == [{'user': 'u1', 'label': '1'}]
