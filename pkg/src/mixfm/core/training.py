"""Minibatch training of the FM with Adam."""

import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mixfm.core.errors import ValidationError
from mixfm.core.model import FmParams, init_params, loss_and_gradients
from mixfm.core.optim import AdamState, adam_step
from mixfm.core.sparse import Dataset


LOSSES = ('logistic',)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings for one training run."""
    epochs: int = 30
    batch_size: int = 256
    learning_rate: float = 0.01
    embedding_size: int = 8
    seed: int = 0
    l2: float = 0.0
    init_std: float = 0.01
    loss: str = 'logistic'

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValidationError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.embedding_size < 1:
            raise ValidationError(f"embedding size must be >= 1, got {self.embedding_size}")
        if self.l2 < 0:
            raise ValidationError(f"l2 must be >= 0, got {self.l2}")
        if self.loss not in LOSSES:
            raise ValidationError(f"unsupported loss '{self.loss}'")

    def initial_params(self, dim: int, rng: np.random.Generator) -> FmParams:
        return init_params(dim, self.embedding_size, rng, std=self.init_std)

    def initial_state(self, params: FmParams) -> AdamState:
        return AdamState.for_params(params, learning_rate=self.learning_rate)


@dataclass(frozen=True)
class EpochStats:
    loss: float
    examples: int
    batches: int
    seconds: float


def train_epoch(params: FmParams, state: AdamState, data: Dataset, cfg: TrainConfig,
                rng: np.random.Generator) -> Tuple[FmParams, AdamState, EpochStats]:
    """One pass over a shuffled copy of ``data`` in minibatches.

    The reported loss is the example-weighted mean of each batch loss
    measured before that batch's update.
    """
    n = len(data)
    if n == 0:
        raise ValidationError("cannot train on an empty dataset")
    if data.dim != params.m:
        raise ValidationError(f"dataset dimension {data.dim} does not match model dimension {params.m}")

    started = time.perf_counter()
    order = rng.permutation(n)
    total = 0.0
    batches = 0
    for start in range(0, n, cfg.batch_size):
        batch = data.subset(order[start:start + cfg.batch_size])
        loss, grads = loss_and_gradients(params, batch, l2=cfg.l2)
        state, params = adam_step(state, params, grads)
        total += loss * len(batch)
        batches += 1
    stats = EpochStats(total / n, n, batches, time.perf_counter() - started)
    return params, state, stats


def train(data: Dataset, cfg: TrainConfig, init_rng: np.random.Generator,
          shuffle_rng: np.random.Generator,
          params: Optional[FmParams] = None) -> Tuple[FmParams, AdamState]:
    """Plain FM training for ``cfg.epochs`` epochs."""
    if params is None:
        params = cfg.initial_params(data.dim, init_rng)
    state = cfg.initial_state(params)
    for _ in range(cfg.epochs):
        params, state, _ = train_epoch(params, state, data, cfg, shuffle_rng)
    return params, state
