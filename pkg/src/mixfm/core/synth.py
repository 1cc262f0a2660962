"""Synthetic click data with planted non-interactive (user, item) pairs.

Every example activates one user, one item and one context feature (value
1). Labels are Bernoulli draws from a ground-truth FM. A set of blocked
(user, item) pairs never co-occurs in train or valid; the test split holds
extra examples of exactly those pairs, so a model can only score them
through the learned embedding inner product.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from mixfm.core.database import save_checkpoint
from mixfm.core.errors import ValidationError
from mixfm.core.model import FmParams, predict_batch, sigmoid
from mixfm.core.sampling import split_sizes
from mixfm.core.seeding import SeedStreams
from mixfm.core.sparse import Dataset, write_dataset
from mixfm.utils.logger import Logger


@dataclass(frozen=True)
class SynthSpec:
    """Size and shape of a synthetic dataset."""
    n: int = 5000
    users: int = 50
    items: int = 50
    contexts: int = 10
    truth_d: int = 4
    blocked_pairs: int = 40
    planted_per_pair: int = 5
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    interaction_scale: float = 1.5
    linear_scale: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if min(self.users, self.items, self.contexts) < 1:
            raise ValidationError("users, items and contexts must all be >= 1")
        if self.truth_d < 1:
            raise ValidationError(f"truth_d must be >= 1, got {self.truth_d}")
        if self.n < 3:
            raise ValidationError(f"n must be >= 3, got {self.n}")
        if self.blocked_pairs < 1:
            raise ValidationError("at least one blocked pair is needed")
        if self.blocked_pairs >= self.users * self.items:
            raise ValidationError(
                f"cannot block {self.blocked_pairs} of {self.users * self.items} user-item pairs")
        if self.planted_per_pair < 1:
            raise ValidationError("planted_per_pair must be >= 1")
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios) or abs(sum(self.ratios) - 1) > 1e-9:
            raise ValidationError(f"ratios must be three positive numbers summing to 1, got {self.ratios}")

    @property
    def dim(self) -> int:
        return self.users + self.items + self.contexts

    def user_feature(self, u: int) -> int:
        return u

    def item_feature(self, i: int) -> int:
        return self.users + i

    def context_feature(self, c: int) -> int:
        return self.users + self.items + c


@dataclass(frozen=True, eq=False)
class SynthResult:
    spec: SynthSpec
    train: Dataset
    valid: Dataset
    test: Dataset
    truth: FmParams
    blocked: Tuple[Tuple[int, int], ...]

    def blocked_features(self) -> List[Tuple[int, int]]:
        """Blocked pairs as (user feature index, item feature index)."""
        return [(self.spec.user_feature(u), self.spec.item_feature(i)) for u, i in self.blocked]


def _truth_params(spec: SynthSpec, rng: np.random.Generator) -> FmParams:
    w = rng.normal(0.0, spec.linear_scale, size=spec.dim)
    V = rng.normal(0.0, spec.interaction_scale / np.sqrt(spec.truth_d), size=(spec.dim, spec.truth_d))
    return FmParams(0.0, w, V)


def _one_hot_rows(spec: SynthSpec, users, items, contexts) -> sp.csr_matrix:
    n = len(users)
    indices = np.column_stack([
        np.asarray(users),
        spec.users + np.asarray(items),
        spec.users + spec.items + np.asarray(contexts),
    ]).reshape(-1)
    indptr = np.arange(0, 3 * n + 1, 3)
    return sp.csr_matrix((np.ones(3 * n), indices, indptr), shape=(n, spec.dim))


def _draw_pairs(spec: SynthSpec, n: int, blocked: set, rng: np.random.Generator):
    users = rng.integers(0, spec.users, size=n)
    items = rng.integers(0, spec.items, size=n)
    redraw = np.array([(int(u), int(i)) in blocked for u, i in zip(users, items)], dtype=bool)
    while redraw.any():
        items[redraw] = rng.integers(0, spec.items, size=int(redraw.sum()))
        redraw = np.array([(int(u), int(i)) in blocked for u, i in zip(users, items)], dtype=bool)
    contexts = rng.integers(0, spec.contexts, size=n)
    return users, items, contexts


def _labeled(spec: SynthSpec, truth: FmParams, users, items, contexts,
             rng: np.random.Generator) -> Dataset:
    X = _one_hot_rows(spec, users, items, contexts)
    probability = sigmoid(predict_batch(truth, X))
    labels = (rng.random(len(users)) < probability).astype(np.float64)
    return Dataset(X, labels)


def generate_synthetic(spec: SynthSpec, logger: Optional[Logger] = None) -> SynthResult:
    """Draw truth model, blocked pairs and the three splits from ``spec.seed``."""
    if logger is None:
        logger = Logger(verbose=False)
    rng = SeedStreams(spec.seed).fresh('synth')

    truth = _truth_params(spec, rng)
    flat = np.sort(rng.choice(spec.users * spec.items, size=spec.blocked_pairs, replace=False))
    blocked = tuple((int(k // spec.items), int(k % spec.items)) for k in flat)
    blocked_set = set(blocked)

    users, items, contexts = _draw_pairs(spec, spec.n, blocked_set, rng)
    # Center the truth scores so labels are roughly balanced.
    raw = predict_batch(truth, _one_hot_rows(spec, users, items, contexts))
    truth = FmParams(-float(np.median(raw)), truth.w, truth.V)

    natural = _labeled(spec, truth, users, items, contexts, rng)
    n_train, n_valid, _ = split_sizes(spec.n, spec.ratios)
    order = rng.permutation(spec.n)
    train = natural.subset(np.sort(order[:n_train]))
    valid = natural.subset(np.sort(order[n_train:n_train + n_valid]))
    test = natural.subset(np.sort(order[n_train + n_valid:]))

    planted_users = np.repeat([u for u, _ in blocked], spec.planted_per_pair)
    planted_items = np.repeat([i for _, i in blocked], spec.planted_per_pair)
    planted_contexts = rng.integers(0, spec.contexts, size=planted_users.size)
    planted = _labeled(spec, truth, planted_users, planted_items, planted_contexts, rng)
    test = test.concat(planted)

    logger.verbose_info(f"   {len(train)} train, {len(valid)} valid, {len(test)} test examples "
                        f"({planted.n} planted), dim {spec.dim}")
    return SynthResult(spec, train, valid, test, truth, blocked)


def count_cooccurrences(data: Dataset, i: int, j: int) -> int:
    """Number of examples activating both features i and j."""
    X = data.features
    both = (X[:, i].toarray().ravel() != 0) & (X[:, j].toarray().ravel() != 0)
    return int(np.count_nonzero(both))


def format_blocked(pairs: Sequence[Tuple[int, int]]) -> str:
    return ','.join(f"{i}:{j}" for i, j in pairs)


def parse_blocked(text: str) -> List[Tuple[int, int]]:
    """Inverse of ``format_blocked``."""
    pairs = []
    for token in filter(None, (t.strip() for t in text.split(','))):
        left, _, right = token.partition(':')
        try:
            pairs.append((int(left), int(right)))
        except ValueError:
            raise ValidationError(f"malformed blocked pair '{token}'")
    return pairs


def write_synthetic(result: SynthResult, out_dir: Union[str, Path],
                    logger: Optional[Logger] = None) -> Dict[str, Path]:
    """Write train/valid/test sparse files and the truth checkpoint."""
    out_dir = Path(out_dir)
    blocked = format_blocked(result.blocked_features())
    header = [f" blocked={blocked}", f" seed={result.spec.seed}"]
    paths = {}
    for name in ('train', 'valid', 'test'):
        paths[name] = write_dataset(getattr(result, name), out_dir / f"{name}.libsvm", comments=header)
    metadata = {
        'role': 'truth',
        'blocked_pairs': blocked,
        'seed': result.spec.seed,
        'users': result.spec.users,
        'items': result.spec.items,
        'contexts': result.spec.contexts,
    }
    paths['truth'] = save_checkpoint(out_dir / 'truth.ckpt', result.truth, metadata, logger=logger)
    return paths
