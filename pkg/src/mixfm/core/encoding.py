"""Categorical/numeric encoding of tabular records into sparse vectors.

Schema file: one column per line, ``name kind [vocab-file|min,max]`` where
kind is ``onehot``, ``multihot`` or ``numeric``. Vocabulary files hold one
value per line. Columns without a vocabulary (or without bounds) are
completed from the data with ``fit_schema`` in a prior pass.
"""

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from mixfm.core.errors import DataIOError, ParseError, ValidationError
from mixfm.core.sparse import Dataset
from mixfm.utils.logger import Logger


KINDS = ('onehot', 'multihot', 'numeric')
MULTI_SEPARATOR = '|'


@dataclass(frozen=True)
class ColumnSpec:
    """Encoding of one input column.

    ``vocabulary`` maps category strings to column-local indices; with
    ``oov`` set the column reserves one extra index after its vocabulary.
    """
    name: str
    kind: str
    vocabulary: Optional[Dict[str, int]] = None
    low: Optional[float] = None
    high: Optional[float] = None
    oov: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"column '{self.name}': unknown kind '{self.kind}' (use {', '.join(KINDS)})")
        if self.kind == 'numeric' and self.low is not None and self.high is not None and self.high < self.low:
            raise ValidationError(f"column '{self.name}': bounds [{self.low}, {self.high}] are reversed")

    @property
    def is_categorical(self) -> bool:
        return self.kind != 'numeric'

    @property
    def is_complete(self) -> bool:
        if self.is_categorical:
            return self.vocabulary is not None
        return self.low is not None and self.high is not None

    @property
    def width(self) -> int:
        """Number of feature indices the column occupies."""
        if not self.is_categorical:
            return 1
        if self.vocabulary is None:
            raise ValidationError(f"column '{self.name}' has no vocabulary yet")
        return len(self.vocabulary) + (1 if self.oov else 0)


@dataclass(frozen=True)
class EncodingSchema:
    """Ordered columns; column i owns the index range [offsets[i], offsets[i] + width)."""
    columns: Tuple[ColumnSpec, ...]
    offsets: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate column names in schema")
        offsets = []
        if all(c.is_complete for c in self.columns):
            position = 0
            for column in self.columns:
                offsets.append(position)
                position += column.width
        object.__setattr__(self, 'columns', tuple(self.columns))
        object.__setattr__(self, 'offsets', tuple(offsets))

    @property
    def is_complete(self) -> bool:
        return bool(self.columns) and len(self.offsets) == len(self.columns)

    @property
    def dim(self) -> int:
        self._require_complete()
        last = self.columns[-1]
        return self.offsets[-1] + last.width

    def column(self, name: str) -> ColumnSpec:
        for column in self.columns:
            if column.name == name:
                return column
        raise ValidationError(f"unknown column '{name}'")

    def feature_range(self, name: str) -> Tuple[int, int]:
        """Half-open feature index range [start, stop) of a column."""
        self._require_complete()
        for column, offset in zip(self.columns, self.offsets):
            if column.name == name:
                return offset, offset + column.width
        raise ValidationError(f"unknown column '{name}'")

    def _require_complete(self) -> None:
        if not self.is_complete:
            missing = [c.name for c in self.columns if not c.is_complete]
            raise ValidationError(f"schema incomplete for columns: {', '.join(missing) or '(none)'}")


def _read_vocabulary(path: Path) -> Dict[str, int]:
    try:
        values = [line.strip() for line in path.read_text(encoding='utf-8').splitlines()]
    except OSError as e:
        raise DataIOError(f"Failed to read vocabulary {path}: {e}")
    vocabulary: Dict[str, int] = {}
    for value in values:
        if value and value not in vocabulary:
            vocabulary[value] = len(vocabulary)
    return vocabulary


def parse_schema(lines: Iterable[str], base_dir: Optional[Path] = None, oov: bool = False,
                 source: Optional[str] = None) -> EncodingSchema:
    """Parse schema lines (``name kind [vocab-file|min,max]``)."""
    columns: List[ColumnSpec] = []
    for line_number, line in enumerate(lines, 1):
        text = line.strip()
        if not text or text.startswith('#'):
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise ParseError("expected 'name kind [vocab-file|min,max]'", source=source, line=line_number)
        name, kind = parts[0], parts[1].lower()
        if kind not in KINDS:
            raise ParseError(f"unknown kind '{parts[1]}'", source=source, line=line_number,
                             column=text.index(parts[1]) + 1)
        argument = parts[2] if len(parts) == 3 else None
        if kind == 'numeric':
            low = high = None
            if argument is not None:
                try:
                    low, high = (float(v) for v in argument.split(','))
                except ValueError:
                    raise ParseError(f"numeric bounds must be 'min,max', got '{argument}'",
                                     source=source, line=line_number)
            columns.append(ColumnSpec(name, kind, low=low, high=high))
        else:
            vocabulary = None
            if argument is not None:
                vocab_path = Path(argument)
                if base_dir is not None and not vocab_path.is_absolute():
                    vocab_path = base_dir / vocab_path
                vocabulary = _read_vocabulary(vocab_path)
            columns.append(ColumnSpec(name, kind, vocabulary=vocabulary, oov=oov))
    if not columns:
        raise ParseError("schema has no columns", source=source)
    return EncodingSchema(tuple(columns))


def load_schema(path: Union[str, Path], oov: bool = False) -> EncodingSchema:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise DataIOError(f"Failed to read schema {path}: {e}")
    return parse_schema(text.splitlines(), base_dir=path.parent, oov=oov, source=str(path))


def _cell(row: Mapping[str, str], name: str) -> str:
    if name not in row or row[name] is None:
        raise ValidationError(f"record has no value for column '{name}'")
    return str(row[name]).strip()


def _members(value: str) -> List[str]:
    return sorted({v.strip() for v in value.split(MULTI_SEPARATOR) if v.strip()})


def fit_schema(schema: EncodingSchema, rows: Sequence[Mapping[str, str]]) -> EncodingSchema:
    """Fill missing vocabularies (sorted values) and numeric bounds from rows."""
    columns = []
    for column in schema.columns:
        if column.is_complete:
            columns.append(column)
            continue
        if column.kind == 'onehot':
            values = sorted({_cell(row, column.name) for row in rows})
            columns.append(replace(column, vocabulary={v: i for i, v in enumerate(values)}))
        elif column.kind == 'multihot':
            values = sorted({m for row in rows for m in _members(_cell(row, column.name))})
            columns.append(replace(column, vocabulary={v: i for i, v in enumerate(values)}))
        else:
            numbers = [_number(row, column.name) for row in rows]
            if not numbers:
                raise ValidationError(f"cannot infer bounds of '{column.name}' from no records")
            low = column.low if column.low is not None else min(numbers)
            high = column.high if column.high is not None else max(numbers)
            columns.append(replace(column, low=low, high=high))
    return EncodingSchema(tuple(columns))


def build_schema(rows: Sequence[Mapping[str, str]], kinds: Mapping[str, str],
                 oov: bool = False) -> EncodingSchema:
    """Create a complete schema for the named columns from the records."""
    columns = tuple(ColumnSpec(name, kind, oov=oov and kind != 'numeric') for name, kind in kinds.items())
    return fit_schema(EncodingSchema(columns), rows)


def _number(row: Mapping[str, str], name: str) -> float:
    text = _cell(row, name)
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"column '{name}': '{text}' is not a number")


def _category_index(column: ColumnSpec, value: str) -> int:
    index = column.vocabulary.get(value)
    if index is None:
        if not column.oov:
            raise ValidationError(f"column '{column.name}': unseen category '{value}'")
        index = len(column.vocabulary)
    return index


def encode_row(row: Mapping[str, str], schema: EncodingSchema, clamp: bool = False,
               logger: Optional[Logger] = None) -> Tuple[List[int], List[float]]:
    """Encode one record into sorted (indices, values)."""
    indices: List[int] = []
    values: List[float] = []
    for column, offset in zip(schema.columns, schema.offsets):
        if column.kind == 'onehot':
            indices.append(offset + _category_index(column, _cell(row, column.name)))
            values.append(1.0)
        elif column.kind == 'multihot':
            local = sorted({_category_index(column, m) for m in _members(_cell(row, column.name))})
            indices.extend(offset + i for i in local)
            values.extend(1.0 for _ in local)
        else:
            number = _number(row, column.name)
            span = column.high - column.low
            scaled = (number - column.low) / span if span > 0 else 0.0
            if scaled < 0 or scaled > 1:
                if not clamp:
                    raise ValidationError(
                        f"column '{column.name}': {number} outside bounds [{column.low}, {column.high}]")
                if logger is not None:
                    logger.verbose_info(f"   clamped '{column.name}' value {number}")
                scaled = min(1.0, max(0.0, scaled))
            if scaled != 0:
                indices.append(offset)
                values.append(scaled)
    return indices, values


def encode_records(rows: Iterable[Mapping[str, str]], schema: EncodingSchema,
                   label_column: Optional[str] = 'label', clamp: bool = False,
                   logger: Optional[Logger] = None) -> Dataset:
    """Encode tabular records into a dataset of dimension ``schema.dim``.

    One-hot columns contribute one entry of value 1, multi-hot columns one
    entry per set member, numeric columns a min-max scaled value (absent when
    it scales to zero). Without a label column every record is a positive.
    """
    dim = schema.dim
    labels: List[float] = []
    indices: List[int] = []
    values: List[float] = []
    indptr = [0]
    for record_number, row in enumerate(rows, 1):
        try:
            row_indices, row_values = encode_row(row, schema, clamp=clamp, logger=logger)
            label = _number(row, label_column) if label_column else 1.0
        except ValidationError as e:
            raise ValidationError(f"record {record_number}: {e}")
        if not 0 <= label <= 1:
            raise ValidationError(f"record {record_number}: label {label} outside [0, 1]")
        labels.append(label)
        indices.extend(row_indices)
        values.extend(row_values)
        indptr.append(len(indices))
    features = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), dim))
    return Dataset(features, np.asarray(labels, dtype=np.float64))


def read_records(path: Union[str, Path], delimiter: str = ',') -> List[Dict[str, str]]:
    """Read a delimited file with a header row into dictionaries."""
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8', newline='') as handle:
            return list(csv.DictReader(handle, delimiter=delimiter))
    except OSError as e:
        raise DataIOError(f"Failed to read records {path}: {e}")


def format_schema(schema: EncodingSchema) -> str:
    """Human-readable column layout: name, kind, index range, width."""
    lines = []
    for column, offset in zip(schema.columns, schema.offsets):
        lines.append(f"{column.name}\t{column.kind}\t[{offset}, {offset + column.width})\t{column.width}")
    return '\n'.join(lines) + '\n'
