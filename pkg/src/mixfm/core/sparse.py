"""Sparse sample representation and the libsvm-style text format.

One example per line: ``label( idx:val)*`` with 0-based feature indices.
Datasets keep their rows as a CSR matrix so minibatches can be sliced and
multiplied without per-example Python loops; the per-example types
(``SparseVector``, ``LabeledExample``) are views materialized on demand.
"""

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from mixfm.core.errors import DataIOError, ParseError, ValidationError


DIM_HEADER = re.compile(r'^#\s*dim\s*=\s*(\d+)\s*$')


class Provenance(str, enum.Enum):
    """Where an example came from."""
    NATURAL = 'natural'
    MIXED = 'mixed'
    COPIED = 'copied'


PROVENANCE_CODES = {Provenance.NATURAL: 0, Provenance.MIXED: 1, Provenance.COPIED: 2}
PROVENANCE_BY_CODE = {code: prov for prov, code in PROVENANCE_CODES.items()}


@dataclass(frozen=True)
class SparseVector:
    """One encoded sample x in R^m stored as sorted (index, value) pairs."""
    indices: Tuple[int, ...]
    values: Tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValidationError("indices and values differ in length")
        if self.dim < 0:
            raise ValidationError(f"dim must be non-negative, got {self.dim}")
        previous = -1
        for index, value in zip(self.indices, self.values):
            if index <= previous:
                raise ValidationError("indices must be strictly increasing")
            if index >= self.dim:
                raise ValidationError(f"index {index} out of range for dim {self.dim}")
            if value == 0:
                raise ValidationError(f"explicit zero stored at index {index}")
            if not abs(value) <= 1:
                raise ValidationError(f"value {value} at index {index} exceeds 1 in magnitude")
            previous = index

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, float]], dim: int,
                   clamp: bool = False) -> 'SparseVector':
        """Normalize arbitrary (index, value) pairs: sort, drop zeros, check range."""
        ordered = sorted((int(i), float(v)) for i, v in pairs)
        indices: List[int] = []
        values: List[float] = []
        for index, value in ordered:
            if index < 0:
                raise ValidationError(f"negative feature index {index}")
            if indices and indices[-1] == index:
                raise ValidationError(f"duplicate feature index {index}")
            if clamp:
                value = min(1.0, max(-1.0, value))
            if value != 0:
                indices.append(index)
                values.append(value)
        return cls(tuple(indices), tuple(values), dim)

    @classmethod
    def empty(cls, dim: int) -> 'SparseVector':
        return cls((), (), dim)

    @property
    def entries(self) -> List[Tuple[int, float]]:
        return list(zip(self.indices, self.values))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.indices, dtype=np.int64), np.asarray(self.values, dtype=np.float64)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[list(self.indices)] = self.values
        return dense

    def to_csr(self) -> sp.csr_matrix:
        indices, values = self.as_arrays()
        return sp.csr_matrix((values, indices, np.array([0, len(indices)])), shape=(1, self.dim))


@dataclass(frozen=True)
class LabeledExample:
    """A pair (x, y) with y in [0, 1]; natural examples have y in {0, 1}."""
    x: SparseVector
    y: float
    provenance: Provenance = Provenance.NATURAL

    def __post_init__(self):
        if not 0.0 <= self.y <= 1.0:
            raise ValidationError(f"label {self.y} outside [0, 1]")


def _canonical_csr(features: sp.spmatrix) -> sp.csr_matrix:
    matrix = sp.csr_matrix(features, dtype=np.float64, copy=True)
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled examples sharing one feature dimension m.

    Rows of ``features`` are the x vectors; ``provenance`` holds one code per
    row (see ``PROVENANCE_CODES``). Treat instances as immutable.
    """
    features: sp.csr_matrix
    labels: np.ndarray
    provenance: np.ndarray = field(default=None)

    def __post_init__(self):
        features = _canonical_csr(self.features)
        labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        if features.shape[0] != labels.shape[0]:
            raise ValidationError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        if labels.size and (labels.min() < 0 or labels.max() > 1 or np.isnan(labels).any()):
            raise ValidationError("labels must lie in [0, 1]")
        if features.nnz and np.abs(features.data).max() > 1:
            raise ValidationError("feature values must satisfy |v| <= 1")
        if self.provenance is None:
            provenance = np.zeros(labels.shape[0], dtype=np.int8)
        else:
            provenance = np.asarray(self.provenance, dtype=np.int8).reshape(-1)
            if provenance.shape[0] != labels.shape[0]:
                raise ValidationError("provenance length does not match labels")
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'provenance', provenance)

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample], dim: Optional[int] = None) -> 'Dataset':
        """Stack examples into a dataset; dims must agree."""
        if dim is None:
            if not examples:
                raise ValidationError("dim is required for an empty dataset")
            dim = examples[0].x.dim
        indptr = [0]
        indices: List[int] = []
        values: List[float] = []
        for example in examples:
            if example.x.dim != dim:
                raise ValidationError(f"example dim {example.x.dim} does not match dataset dim {dim}")
            indices.extend(example.x.indices)
            values.extend(example.x.values)
            indptr.append(len(indices))
        features = sp.csr_matrix(
            (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
            shape=(len(examples), dim))
        labels = np.array([e.y for e in examples], dtype=np.float64)
        provenance = np.array([PROVENANCE_CODES[Provenance(e.provenance)] for e in examples], dtype=np.int8)
        return cls(features, labels, provenance)

    @classmethod
    def empty(cls, dim: int) -> 'Dataset':
        return cls(sp.csr_matrix((0, dim)), np.zeros(0))

    def __len__(self) -> int:
        return self.features.shape[0]

    def __iter__(self) -> Iterator[LabeledExample]:
        for i in range(len(self)):
            yield self.example(i)

    def __getitem__(self, i: int) -> LabeledExample:
        return self.example(i)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def nnz_per_row(self) -> np.ndarray:
        return np.diff(self.features.indptr)

    @property
    def tau(self) -> int:
        """Maximum number of nonzero features in any example."""
        return int(self.nnz_per_row.max()) if len(self) else 0

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def examples(self) -> List[LabeledExample]:
        return list(self)

    def example(self, i: int) -> LabeledExample:
        start, end = self.features.indptr[i], self.features.indptr[i + 1]
        x = SparseVector(
            tuple(int(j) for j in self.features.indices[start:end]),
            tuple(float(v) for v in self.features.data[start:end]),
            self.dim,
        )
        return LabeledExample(x, float(self.labels[i]), PROVENANCE_BY_CODE[int(self.provenance[i])])

    def provenance_of(self, i: int) -> Provenance:
        return PROVENANCE_BY_CODE[int(self.provenance[i])]

    def count(self, provenance: Provenance) -> int:
        return int(np.count_nonzero(self.provenance == PROVENANCE_CODES[provenance]))

    def subset(self, rows: Sequence[int]) -> 'Dataset':
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.provenance[rows])

    def natural(self) -> 'Dataset':
        """Only the examples that were not generated by augmentation."""
        return self.subset(np.flatnonzero(self.provenance == PROVENANCE_CODES[Provenance.NATURAL]))

    def concat(self, other: 'Dataset') -> 'Dataset':
        if other.dim != self.dim:
            raise ValidationError(f"cannot concatenate dims {self.dim} and {other.dim}")
        if len(other) == 0:
            return self
        return Dataset(
            sp.vstack([self.features, other.features], format='csr'),
            np.concatenate([self.labels, other.labels]),
            np.concatenate([self.provenance, other.provenance]),
        )

    def with_features(self, features: sp.spmatrix) -> 'Dataset':
        """Same labels and provenance over new feature rows."""
        return Dataset(features, self.labels, self.provenance)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _parse_tokens(line: str, clamp: bool = False,
                  dim: Optional[int] = None) -> Tuple[float, List[int], List[float]]:
    """Parse one line into (label, sorted indices, values); zeros dropped."""
    stripped = line.rstrip('\r\n')
    tokens = [(m.start() + 1, m.group()) for m in re.finditer(r'\S+', stripped)]
    if not tokens:
        raise ParseError("missing label", column=1)

    label_column, label_token = tokens[0]
    try:
        label = float(label_token)
    except ValueError:
        raise ParseError(f"invalid label '{label_token}'", column=label_column)
    if not 0.0 <= label <= 1.0:
        raise ParseError(f"label {label_token} outside [0, 1]", column=label_column)

    pairs: List[Tuple[int, float, int]] = []
    for column, token in tokens[1:]:
        index_text, sep, value_text = token.partition(':')
        if not sep:
            raise ParseError(f"expected idx:val, got '{token}'", column=column)
        try:
            index = int(index_text)
            value = float(value_text)
        except ValueError:
            raise ParseError(f"malformed feature token '{token}'", column=column)
        if index < 0:
            raise ParseError(f"negative feature index {index}", column=column)
        if dim is not None and index >= dim:
            raise ParseError(f"feature index {index} out of range for dim {dim}", column=column)
        if not math.isfinite(value):
            raise ParseError(f"non-finite value in '{token}'", column=column)
        if abs(value) > 1:
            if not clamp:
                raise ValidationError(
                    f"column {column}: value {value_text} exceeds 1 in magnitude (use clamp to clip)")
            value = math.copysign(1.0, value)
        pairs.append((index, value, column))

    pairs.sort(key=lambda p: p[0])
    indices: List[int] = []
    values: List[float] = []
    previous = -1
    for index, value, column in pairs:
        if index == previous:
            raise ParseError(f"duplicate feature index {index}", column=column)
        previous = index
        if value != 0:
            indices.append(index)
            values.append(value)
    return label, indices, values


def parse_sparse_line(line: str, dim: Optional[int] = None, clamp: bool = False) -> LabeledExample:
    """Parse ``label idx:val ...`` into a labeled example.

    Entries come back sorted with zero values dropped. When ``dim`` is not
    given the vector dimension is max index + 1.
    """
    label, indices, values = _parse_tokens(line, clamp=clamp, dim=dim)
    if dim is None:
        dim = indices[-1] + 1 if indices else 0
    return LabeledExample(SparseVector(tuple(indices), tuple(values), dim), label)


def format_number(value: float) -> str:
    """Shortest text that parses back to the same float."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def format_sparse_line(example: LabeledExample) -> str:
    parts = [format_number(example.y)]
    parts.extend(f"{i}:{format_number(v)}" for i, v in zip(example.x.indices, example.x.values))
    return ' '.join(parts)


def parse_lines(lines: Iterable[str], dim: Optional[int] = None, clamp: bool = False,
                source: Optional[str] = None) -> Dataset:
    """Parse text lines (with optional ``# dim=m`` header) into a dataset."""
    labels: List[float] = []
    indices: List[int] = []
    values: List[float] = []
    indptr = [0]
    header_dim: Optional[int] = None
    for line_number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.lstrip().startswith('#'):
            match = DIM_HEADER.match(line.strip())
            if match and header_dim is None:
                header_dim = int(match.group(1))
            continue
        try:
            label, row_indices, row_values = _parse_tokens(line, clamp=clamp, dim=dim or header_dim)
        except ParseError as e:
            raise e.at(source, line_number)
        except ValidationError as e:
            raise ValidationError(f"{source or '<input>'}, line {line_number}: {e}")
        labels.append(label)
        indices.extend(row_indices)
        values.extend(row_values)
        indptr.append(len(indices))

    if dim is None:
        dim = header_dim if header_dim is not None else (max(indices) + 1 if indices else 0)
    features = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), dim))
    return Dataset(features, np.asarray(labels, dtype=np.float64))


def read_dataset(path: Union[str, Path], dim: Optional[int] = None, clamp: bool = False) -> Dataset:
    """Read a sparse text file into a dataset."""
    path = Path(path)
    try:
        with path.open('r', encoding='ascii') as handle:
            return parse_lines(handle, dim=dim, clamp=clamp, source=str(path))
    except FileNotFoundError:
        raise DataIOError(f"Dataset file not found: {path}")
    except UnicodeDecodeError as e:
        raise ParseError(f"non-ASCII content ({e.reason})", source=str(path))


def format_dataset(dataset: Dataset, comments: Sequence[str] = ()) -> str:
    lines = [c if c.startswith('#') else f"#{c}" for c in comments]
    lines.append(f"# dim={dataset.dim}")
    lines.extend(format_sparse_line(example) for example in dataset)
    return '\n'.join(lines) + '\n'


def write_dataset(dataset: Dataset, path: Union[str, Path], comments: Sequence[str] = ()) -> Path:
    """Write a dataset as sparse text with a ``# dim=m`` header."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_dataset(dataset, comments), encoding='ascii')
    except OSError as e:
        raise DataIOError(f"Failed to write dataset {path}: {e}")
    return path
