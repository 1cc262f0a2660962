"""Negative sampling for implicit feedback and random dataset splits."""

from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import scipy.sparse as sp

from mixfm.core.errors import ValidationError
from mixfm.core.sparse import Dataset
from mixfm.utils.logger import Logger


def _split_row(indices: np.ndarray, values: np.ndarray, pool: Tuple[int, int]) -> Tuple[int, Tuple]:
    """Separate a positive row into its item index and the rest of its features."""
    start, stop = pool
    in_pool = (indices >= start) & (indices < stop)
    if np.count_nonzero(in_pool) != 1:
        raise ValidationError(
            f"each positive must have exactly one item feature in [{start}, {stop}), "
            f"found {int(np.count_nonzero(in_pool))}")
    item = int(indices[in_pool][0])
    context = tuple(zip(indices[~in_pool].tolist(), values[~in_pool].tolist()))
    return item, context


def _user_key(context: Tuple, user_range: Optional[Tuple[int, int]]) -> Tuple:
    """The user part of a row's context; the whole context without a user range."""
    if user_range is None:
        return context
    start, stop = user_range
    key = tuple(i for i, _ in context if start <= i < stop)
    if not key:
        raise ValidationError(f"positive has no user feature in [{start}, {stop})")
    return key


def _check_range(name: str, bounds: Tuple[int, int], dim: int) -> None:
    start, stop = bounds
    if not 0 <= start < stop <= dim:
        raise ValidationError(f"{name} [{start}, {stop}) invalid for dim {dim}")


def negative_sample(positives: Dataset, item_pool: Tuple[int, int], k: int,
                    rng: np.random.Generator, user_range: Optional[Tuple[int, int]] = None,
                    logger: Optional[Logger] = None) -> Dataset:
    """Pair every positive with k negatives drawn from the item pool.

    A user is identified by the features in ``user_range``; without one, by
    every feature outside the item pool. A negative keeps the positive's
    other features and swaps the item for one drawn uniformly, without
    replacement, among the items that user never interacted with in any
    row. Output order: each positive followed by its negatives.
    """
    if k < 1:
        raise ValidationError(f"negatives per positive must be >= 1, got {k}")
    _check_range('item pool', item_pool, positives.dim)
    start, stop = item_pool
    if user_range is not None:
        _check_range('user range', user_range, positives.dim)
        if user_range[0] < stop and start < user_range[1]:
            raise ValidationError(f"user range {tuple(user_range)} overlaps the item pool {tuple(item_pool)}")
    if logger is None:
        logger = Logger(verbose=False)

    X = positives.features
    rows: List[Tuple[int, Tuple, Tuple]] = []
    interacted: Dict[Tuple, Set[int]] = defaultdict(set)
    for i in range(len(positives)):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        item, context = _split_row(X.indices[lo:hi], X.data[lo:hi], item_pool)
        user = _user_key(context, user_range)
        rows.append((item, context, user))
        interacted[user].add(item)

    pool = np.arange(start, stop)
    labels: List[float] = []
    indices: List[int] = []
    values: List[float] = []
    indptr = [0]
    exhausted = 0
    short = 0

    def _emit(item: int, item_value: float, context: Tuple, label: float) -> None:
        entries = sorted(list(context) + [(item, item_value)])
        indices.extend(i for i, _ in entries)
        values.extend(v for _, v in entries)
        indptr.append(len(indices))
        labels.append(label)

    for i, (item, context, user) in enumerate(rows):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        item_value = float(X.data[lo:hi][X.indices[lo:hi] == item][0])
        _emit(item, item_value, context, float(positives.labels[i]))
        candidates = np.setdiff1d(pool, np.fromiter(interacted[user], dtype=np.int64), assume_unique=True)
        if candidates.size == 0:
            exhausted += 1
            continue
        if candidates.size < k:
            short += 1
        chosen = rng.choice(candidates, size=min(k, candidates.size), replace=False)
        for negative in np.sort(chosen):
            _emit(int(negative), item_value, context, 0.0)

    if exhausted:
        logger.warning(f"{exhausted} positive(s) skipped: user interacted with the entire item pool")
    if short:
        logger.warning(f"{short} positive(s) got fewer than {k} negatives: too few unseen items left")

    features = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), positives.dim))
    return Dataset(features, np.asarray(labels))


def split_sizes(n: int, ratios: Sequence[float]) -> Tuple[int, int, int]:
    train = int(round(n * ratios[0]))
    valid = int(round(n * ratios[1]))
    train = min(train, n)
    valid = min(valid, n - train)
    return train, valid, n - train - valid


def split_dataset(data: Dataset, ratios: Sequence[float],
                  rng: np.random.Generator) -> Tuple[Dataset, Dataset, Dataset]:
    """Disjoint random train/valid/test partition (sizes within 1 of n * ratio)."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValidationError(f"ratios must be three positive numbers, got {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1, got {sum(ratios)}")
    n = len(data)
    if n < 3:
        raise ValidationError(f"cannot split a dataset of {n} examples")
    order = rng.permutation(n)
    n_train, n_valid, _ = split_sizes(n, ratios)
    return (
        data.subset(np.sort(order[:n_train])),
        data.subset(np.sort(order[n_train:n_train + n_valid])),
        data.subset(np.sort(order[n_train + n_valid:])),
    )
