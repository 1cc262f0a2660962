"""Mixup neighbors for sparse samples, saliency-guided selection and CopyFM.

Every augmented set is regenerated once per epoch from the ``mixing`` seed
stream. Mixed and saliency modes share one draw order (first parents, then
n' * p second parents, then n' * p lambdas) so that saliency selection with
a single candidate reproduces plain Mixup exactly.
"""

import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mixfm.core.errors import NumericalError, ValidationError
from mixfm.core.metrics import evaluate
from mixfm.core.model import FmParams, pairwise_term, predict, predict_batch, sigmoid
from mixfm.core.seeding import SeedStreams
from mixfm.core.sparse import (
    PROVENANCE_CODES,
    Dataset,
    LabeledExample,
    Provenance,
    SparseVector,
)
from mixfm.core.training import TrainConfig, train_epoch
from mixfm.utils.logger import Logger


MODES = ('none', 'copy', 'mix', 'saliency')


@dataclass(frozen=True)
class MixConfig:
    """Augmentation settings.

    ``n_prime`` is the number of generated samples per epoch; None means
    the size of the natural dataset. ``p`` only matters in saliency mode.
    """
    alpha: float = 1.0
    beta: float = 1.0
    n_prime: Optional[int] = None
    p: int = 1
    mode: str = 'mix'
    absolute_saliency: bool = False

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValidationError(f"alpha and beta must be > 0, got ({self.alpha}, {self.beta})")
        if self.n_prime is not None and self.n_prime < 0:
            raise ValidationError(f"n' must be >= 0, got {self.n_prime}")
        if self.p < 1:
            raise ValidationError(f"candidate count p must be >= 1, got {self.p}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode '{self.mode}' (use {', '.join(MODES)})")

    def resolve_n_prime(self, n: int) -> int:
        return n if self.n_prime is None else self.n_prime


def mix_ratio_to_n_prime(ratio: float, n: int) -> int:
    """n' for a mixed-to-natural ratio (rounded to nearest)."""
    if ratio < 0:
        raise ValidationError(f"mix ratio must be >= 0, got {ratio}")
    return int(round(ratio * n))


# ---------------------------------------------------------------------------
# Lambda
# ---------------------------------------------------------------------------

def sample_lambdas(cfg: MixConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """λ = max(λ', 1 - λ') with λ' ~ Beta(alpha, beta), ``size`` draws."""
    raw = rng.beta(cfg.alpha, cfg.beta, size=size)
    lam = np.maximum(raw, 1.0 - raw)
    if lam.size and not ((lam >= 0.5) & (lam <= 1.0)).all():
        raise NumericalError("mixing weight drawn outside [0.5, 1]")
    return lam


def sample_lambda(cfg: MixConfig, rng: np.random.Generator) -> float:
    return float(sample_lambdas(cfg, rng, 1)[0])


def _check_lambda(lam: float) -> None:
    if not 0.5 <= lam <= 1.0:
        raise ValidationError(f"mixing weight {lam} outside [0.5, 1]")


# ---------------------------------------------------------------------------
# Mixing
# ---------------------------------------------------------------------------

def mix_pair(a: LabeledExample, b: LabeledExample, lam: float) -> LabeledExample:
    """λ a + (1 - λ) b over the union of supports, with the same for labels."""
    if a.x.dim != b.x.dim:
        raise ValidationError(f"cannot mix dims {a.x.dim} and {b.x.dim}")
    _check_lambda(lam)
    left = dict(a.x.entries)
    right = dict(b.x.entries)
    entries = []
    for index in sorted(left.keys() | right.keys()):
        value = lam * left.get(index, 0.0) + (1.0 - lam) * right.get(index, 0.0)
        if value != 0:
            entries.append((index, float(np.clip(value, -1.0, 1.0))))
    y = float(np.clip(lam * a.y + (1.0 - lam) * b.y, 0.0, 1.0))
    x = SparseVector(tuple(i for i, _ in entries), tuple(v for _, v in entries), a.x.dim)
    return LabeledExample(x, y, Provenance.MIXED)


def mix_rows(data: Dataset, first: np.ndarray, second: np.ndarray, lam: np.ndarray) -> Dataset:
    """Row-wise mix_pair(data[first[k]], data[second[k]], lam[k]) as one dataset."""
    lam = np.asarray(lam, dtype=np.float64)
    if lam.size and not ((lam >= 0.5) & (lam <= 1.0)).all():
        raise ValidationError("mixing weights must lie in [0.5, 1]")
    X = data.features
    features = sp.diags(lam) @ X[first] + sp.diags(1.0 - lam) @ X[second]
    features = sp.csr_matrix(features)
    features.eliminate_zeros()
    np.clip(features.data, -1.0, 1.0, out=features.data)
    labels = np.clip(lam * data.labels[first] + (1.0 - lam) * data.labels[second], 0.0, 1.0)
    provenance = np.full(lam.size, PROVENANCE_CODES[Provenance.MIXED], dtype=np.int8)
    return Dataset(features, labels, provenance)


def first_parents(n: int, n_prime: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of first parents.

    n' <= n: n' distinct examples. n' > n: the dataset floor(n'/n) times,
    plus (n' mod n) distinct extras.
    """
    if n_prime <= n:
        return rng.choice(n, size=n_prime, replace=False)
    copies, extra = divmod(n_prime, n)
    return np.concatenate([np.tile(np.arange(n), copies), rng.choice(n, size=extra, replace=False)])


def _draw_parents(data: Dataset, cfg: MixConfig, rng: np.random.Generator,
                  p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(data)
    if n == 0:
        raise ValidationError("cannot generate neighbors of an empty dataset")
    n_prime = cfg.resolve_n_prime(n)
    first = first_parents(n, n_prime, rng)
    second = rng.integers(0, n, size=n_prime * p).reshape(n_prime, p)
    lam = sample_lambdas(cfg, rng, n_prime * p).reshape(n_prime, p)
    return first, second, lam


def generate_mix_batch(data: Dataset, cfg: MixConfig, rng: np.random.Generator) -> Dataset:
    """n' mixed examples; second parents drawn uniformly with replacement."""
    first, second, lam = _draw_parents(data, cfg, rng, 1)
    if first.size == 0:
        return Dataset.empty(data.dim)
    return mix_rows(data, first, second[:, 0], lam[:, 0])


# ---------------------------------------------------------------------------
# Saliency
# ---------------------------------------------------------------------------

def saliency(params: FmParams, ex: LabeledExample) -> float:
    """(dL/df) * f(x) = (sigmoid(f) - y) * f."""
    score = predict(params, ex.x)
    return float((sigmoid(score) - ex.y) * score)


def saliency_batch(params: FmParams, data: Dataset) -> np.ndarray:
    scores = predict_batch(params, data)
    return (sigmoid(scores) - data.labels) * scores


def input_saliency(params: FmParams, ex: LabeledExample) -> float:
    """(dL/dx)^T x computed from the input gradient itself.

    For the FM this is (sigmoid(f) - y) * (linear + 2 * pairwise); it matches
    ``saliency`` only when w0 = 0 and the pairwise term vanishes.
    """
    score = predict(params, ex.x)
    indices, values = ex.x.as_arrays()
    linear = float(values @ params.w[indices]) if indices.size else 0.0
    return float((sigmoid(score) - ex.y) * (linear + 2.0 * pairwise_term(params, ex.x)))


def _selection_key(values: np.ndarray, cfg: MixConfig) -> np.ndarray:
    return np.abs(values) if cfg.absolute_saliency else values


def select_salient_neighbor(params: FmParams, ex: LabeledExample, data: Dataset, cfg: MixConfig,
                            rng: np.random.Generator) -> LabeledExample:
    """Best of p candidate neighbors of ``ex`` by saliency (lowest index on ties)."""
    if len(data) == 0:
        raise ValidationError("cannot draw neighbors from an empty dataset")
    second = rng.integers(0, len(data), size=cfg.p)
    lam = sample_lambdas(cfg, rng, cfg.p)
    candidates = [mix_pair(ex, data.example(int(j)), float(l)) for j, l in zip(second, lam)]
    scores = _selection_key(np.array([saliency(params, c) for c in candidates]), cfg)
    return candidates[int(np.argmax(scores))]


def generate_salient_batch(params: FmParams, data: Dataset, cfg: MixConfig,
                           rng: np.random.Generator) -> Dataset:
    """n' neighbors, each the saliency argmax among p candidates of its first parent.

    Saliency is measured against ``params`` as given (the start-of-epoch
    snapshot during training).
    """
    first, second, lam = _draw_parents(data, cfg, rng, cfg.p)
    n_prime, p = lam.shape
    if n_prime == 0:
        return Dataset.empty(data.dim)
    candidates = mix_rows(data, np.repeat(first, p), second.reshape(-1), lam.reshape(-1))
    if p == 1:
        return candidates
    scores = _selection_key(saliency_batch(params, candidates), cfg).reshape(n_prime, p)
    chosen = np.arange(n_prime) * p + np.argmax(scores, axis=1)
    return candidates.subset(chosen)


# ---------------------------------------------------------------------------
# CopyFM and the epoch loop
# ---------------------------------------------------------------------------

def copy_augment(data: Dataset, n_prime: int, rng: np.random.Generator) -> Dataset:
    """n' verbatim copies of distinct examples, in dataset order."""
    n = len(data)
    if n_prime > n:
        raise ValidationError(f"copy augmentation needs n' <= n, got n'={n_prime}, n={n}")
    if n_prime < 0:
        raise ValidationError(f"n' must be >= 0, got {n_prime}")
    rows = np.sort(rng.choice(n, size=n_prime, replace=False))
    copied = data.subset(rows)
    provenance = np.full(n_prime, PROVENANCE_CODES[Provenance.COPIED], dtype=np.int8)
    return Dataset(copied.features, copied.labels, provenance)


def build_augmentation(data: Dataset, mix: MixConfig, rng: np.random.Generator,
                       params: Optional[FmParams] = None) -> Dataset:
    """The augmented set D~ for one epoch."""
    if mix.mode == 'none':
        return Dataset.empty(data.dim)
    if mix.mode == 'copy':
        return copy_augment(data, mix.resolve_n_prime(len(data)), rng)
    if mix.mode == 'mix':
        return generate_mix_batch(data, mix, rng)
    if params is None:
        raise ValidationError("saliency mode needs model parameters")
    return generate_salient_batch(params, data, mix, rng)


@dataclass(frozen=True)
class EpochRecord:
    """One row of the learning curve."""
    epoch: int
    split: str
    auc: float
    logloss: float
    seconds: float

    def to_dict(self):
        return {'epoch': self.epoch, 'split': self.split, 'auc': self.auc,
                'logloss': self.logloss, 'seconds': self.seconds}


def train_augmented(data: Dataset, cfg: TrainConfig, mix: MixConfig,
                    streams: Optional[SeedStreams] = None,
                    valid: Optional[Dataset] = None,
                    test: Optional[Dataset] = None,
                    logger: Optional[Logger] = None) -> Tuple[FmParams, List[EpochRecord]]:
    """Train on D plus a freshly generated D~ every epoch.

    Initialization, shuffling and mixing use the ``init``, ``shuffle`` and
    ``mixing`` streams of ``streams`` (default: streams of ``cfg.seed``).
    History holds one record per epoch for train and each given split.
    """
    if logger is None:
        logger = Logger(verbose=False)
    if streams is None:
        streams = SeedStreams(cfg.seed)
    if len(data) == 0:
        raise ValidationError("cannot train on an empty dataset")
    for name, split in (('valid', valid), ('test', test)):
        if split is not None and split.dim != data.dim:
            raise ValidationError(f"{name} dimension {split.dim} does not match train dimension {data.dim}")

    mixing = streams.fresh('mixing')
    shuffle = streams.fresh('shuffle')
    params = cfg.initial_params(data.dim, streams.fresh('init'))
    state = cfg.initial_state(params)

    history: List[EpochRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        augmented = build_augmentation(data, mix, mixing, params)
        epoch_data = data if len(augmented) == 0 else data.concat(augmented)
        params, state, stats = train_epoch(params, state, epoch_data, cfg, shuffle)
        seconds = time.perf_counter() - started

        shown = None
        for name, split in (('train', data), ('valid', valid), ('test', test)):
            if split is None:
                continue
            report = evaluate(params, split)
            shown = EpochRecord(epoch, name, report.auc, report.logloss, seconds)
            history.append(shown)
        logger.progress(f"   epoch {epoch:3d}  loss {stats.loss:.5f}  "
                        f"{shown.split} auc {shown.auc:.4f}  {seconds:.2f}s", nl=True)
    return params, history

