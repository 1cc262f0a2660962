"""Seeded experiment harness: repeated trials, sweeps, perturbation and A/B comparison.

Repeat r of every method draws its init/shuffle/mixing streams from
``SeedStreams(seed).child(r)``, so methods are compared on paired seeds.
Trials may run in a process pool; results are always merged in task order.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from mixfm.core.augment import MixConfig, mix_ratio_to_n_prime, train_augmented
from mixfm.core.errors import ValidationError
from mixfm.core.metrics import evaluate, paired_t_test
from mixfm.core.model import FmParams
from mixfm.core.seeding import SeedStreams
from mixfm.core.sparse import Dataset
from mixfm.core.theory import gamma_of
from mixfm.core.training import TrainConfig
from mixfm.utils.logger import Logger


DEFAULT_RATIOS = (0.0, 0.25, 0.5, 1.0, 2.0)
DEFAULT_CANDIDATES = (1, 2, 5, 10)
DEFAULT_EMBEDDING_SIZES = (2, 4, 8, 16, 32, 64, 128)
DEFAULT_NOISE_LEVELS = (0.0, 0.05, 0.1, 0.2, 0.3)
DEFAULT_SMFM_CANDIDATES = 10

# Method name -> augmentation mode.
METHODS = {
    'fm': 'none',
    'copyfm': 'copy',
    'mixfm': 'mix',
    'smfm': 'saliency',
}
COMPARE_METHODS = ('fm', 'copyfm', 'mixfm', 'smfm')
SWEEP_FIELDS = ['x', 'method', 'mean_auc', 'sd_auc', 'delta']


@dataclass(frozen=True, eq=False)
class Splits:
    train: Dataset
    valid: Optional[Dataset] = None
    test: Optional[Dataset] = None

    def __post_init__(self):
        for name in ('valid', 'test'):
            split = getattr(self, name)
            if split is not None and split.dim != self.train.dim:
                raise ValidationError(
                    f"{name} dimension {split.dim} does not match train dimension {self.train.dim}")

    @property
    def holdout(self) -> Dataset:
        """Split used for reported metrics: test, else valid."""
        if self.test is not None:
            return self.test
        if self.valid is not None:
            return self.valid
        raise ValidationError("experiment needs a test or valid split")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by every sweep; grids are only checked when used."""
    train: TrainConfig = field(default_factory=TrainConfig)
    mix: MixConfig = field(default_factory=MixConfig)
    repeats: int = 10
    seed: int = 0
    jobs: int = 1
    ratios: Tuple[float, ...] = DEFAULT_RATIOS
    candidates: Tuple[int, ...] = DEFAULT_CANDIDATES
    embedding_sizes: Tuple[int, ...] = DEFAULT_EMBEDDING_SIZES
    noise_levels: Tuple[float, ...] = DEFAULT_NOISE_LEVELS
    methods: Tuple[str, ...] = ('fm', 'mixfm', 'smfm')

    def __post_init__(self):
        if self.repeats < 1:
            raise ValidationError(f"repeats must be >= 1, got {self.repeats}")
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValidationError(f"unknown method(s): {', '.join(unknown)} (use {', '.join(METHODS)})")

    def method_mix(self, method: str) -> MixConfig:
        """MixConfig for a named method; SMFM takes p=10 when p is left at 1."""
        mode = METHODS[method]
        p = self.mix.p
        if mode == 'saliency' and p == 1:
            p = DEFAULT_SMFM_CANDIDATES
        return replace(self.mix, mode=mode, p=p)


def _require_grid(name: str, grid: Sequence) -> None:
    if not grid:
        raise ValidationError(f"{name} grid is empty")


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TrialTask:
    experiment: str
    method: str
    x: float
    repeat: int
    seed: int
    train_cfg: TrainConfig
    mix: MixConfig
    splits: Splits
    noise_levels: Tuple[float, ...] = ()
    keep_params: bool = False


@dataclass(frozen=True, eq=False)
class TrialResult:
    experiment: str
    method: str
    x: float
    repeat: int
    seed: int
    auc: float
    logloss: float
    gamma: float
    seconds: float
    perturbed_auc: Tuple[float, ...] = ()
    params: Optional[FmParams] = None

    def run_row(self) -> Dict[str, Any]:
        return {'experiment': self.experiment, 'method': self.method, 'x': self.x,
                'seed': self.seed, 'auc': self.auc, 'logloss': self.logloss,
                'gamma': self.gamma, 'seconds': self.seconds}


def perturb_dataset(data: Dataset, epsilon: float, rng: np.random.Generator) -> Dataset:
    """Add Uniform(-eps, eps) noise to every nonzero feature, clamped to [0, 1]."""
    if epsilon < 0:
        raise ValidationError(f"noise level must be >= 0, got {epsilon}")
    if epsilon == 0:
        return data
    X = data.features.copy()
    X.data = np.clip(X.data + rng.uniform(-epsilon, epsilon, size=X.data.size), 0.0, 1.0)
    return data.with_features(X)


def perturbed_aucs(params: FmParams, test: Dataset, levels: Sequence[float],
                   streams: SeedStreams) -> Tuple[float, ...]:
    """AUC under each noise level; level k draws from ``streams.child(k)``."""
    return tuple(
        evaluate(params, perturb_dataset(test, eps, streams.child(k).fresh('perturb'))).auc
        for k, eps in enumerate(levels)
    )


def run_trial(task: TrialTask) -> TrialResult:
    """Train one (method, x, repeat) cell and evaluate it on the holdout split."""
    started = time.perf_counter()
    streams = SeedStreams(task.seed).child(task.repeat)
    params, _ = train_augmented(task.splits.train, task.train_cfg, task.mix, streams=streams)
    holdout = task.splits.holdout
    report = evaluate(params, holdout)
    perturbed = perturbed_aucs(params, holdout, task.noise_levels, streams) if task.noise_levels else ()
    return TrialResult(task.experiment, task.method, task.x, task.repeat, task.seed,
                       report.auc, report.logloss, gamma_of(params),
                       time.perf_counter() - started, perturbed,
                       params if task.keep_params else None)


def run_trials(tasks: Sequence[TrialTask], jobs: int = 1,
               logger: Optional[Logger] = None) -> List[TrialResult]:
    """Run tasks sequentially or in a process pool; output keeps task order."""
    if logger is None:
        logger = Logger(verbose=False)
    if jobs <= 1 or len(tasks) <= 1:
        results = []
        for task in tasks:
            logger.progress(f"   {task.experiment} {task.method} x={task.x:g} repeat {task.repeat}...")
            result = run_trial(task)
            logger.progress_done(f"auc {result.auc:.4f}")
            results.append(result)
        return results
    logger.verbose_info(f"   Running {len(tasks)} trials on {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_trial, tasks))


def _sd(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _group(results: Sequence[TrialResult]) -> Dict[Tuple[float, str], List[TrialResult]]:
    groups: Dict[Tuple[float, str], List[TrialResult]] = {}
    for result in results:
        groups.setdefault((result.x, result.method), []).append(result)
    for group in groups.values():
        group.sort(key=lambda r: r.repeat)
    return groups


def _aucs(group: Sequence[TrialResult]) -> List[float]:
    return [r.auc for r in group]


def _tasks(experiment: str, method: str, x: float, cfg: ExperimentConfig, train_cfg: TrainConfig,
           mix: MixConfig, splits: Splits, **extra) -> List[TrialTask]:
    return [TrialTask(experiment, method, float(x), r, cfg.seed, train_cfg, mix, splits, **extra)
            for r in range(cfg.repeats)]


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep_ratio(splits: Splits, cfg: ExperimentConfig,
                logger: Optional[Logger] = None) -> Tuple[List[Dict[str, Any]], List[TrialResult]]:
    """Mean/sd test AUC of MixFM per n'/n ratio; delta against ratio 0."""
    _require_grid('ratio', cfg.ratios)
    ratios = sorted(set(float(r) for r in cfg.ratios) | {0.0})
    n = len(splits.train)
    tasks = []
    for ratio in ratios:
        mix = replace(cfg.mix, mode='mix', n_prime=mix_ratio_to_n_prime(ratio, n))
        tasks.extend(_tasks('sweep-ratio', 'mixfm', ratio, cfg, cfg.train, mix, splits))
    results = run_trials(tasks, cfg.jobs, logger)
    groups = _group(results)
    baseline = float(np.mean(_aucs(groups[(0.0, 'mixfm')])))
    rows = []
    for ratio in sorted(set(float(r) for r in cfg.ratios)):
        aucs = _aucs(groups[(ratio, 'mixfm')])
        mean = float(np.mean(aucs))
        rows.append({'x': ratio, 'method': 'mixfm', 'mean_auc': mean, 'sd_auc': _sd(aucs),
                     'delta': mean - baseline})
    return rows, results


def sweep_neighbors(splits: Splits, cfg: ExperimentConfig,
                    logger: Optional[Logger] = None) -> Tuple[List[Dict[str, Any]], List[TrialResult]]:
    """Mean/sd test AUC of SMFM per candidate count p; delta against p = 1."""
    _require_grid('candidates', cfg.candidates)
    if any(p < 1 for p in cfg.candidates):
        raise ValidationError("candidate counts must be >= 1")
    grid = sorted(set(int(p) for p in cfg.candidates))
    run_grid = sorted(set(grid) | {1})
    tasks = []
    for p in run_grid:
        mix = replace(cfg.mix, mode='saliency', p=p)
        tasks.extend(_tasks('sweep-neighbors', 'smfm', p, cfg, cfg.train, mix, splits))
    results = run_trials(tasks, cfg.jobs, logger)
    groups = _group(results)
    baseline = float(np.mean(_aucs(groups[(1.0, 'smfm')])))
    rows = []
    for p in grid:
        aucs = _aucs(groups[(float(p), 'smfm')])
        mean = float(np.mean(aucs))
        rows.append({'x': p, 'method': 'smfm', 'mean_auc': mean, 'sd_auc': _sd(aucs),
                     'delta': mean - baseline})
    return rows, results


def sweep_embedding(splits: Splits, cfg: ExperimentConfig,
                    logger: Optional[Logger] = None) -> Tuple[List[Dict[str, Any]], List[TrialResult]]:
    """Mean/sd test AUC and mean gamma per (d, method); delta against FM at the same d."""
    _require_grid('embedding size', cfg.embedding_sizes)
    if any(d < 1 for d in cfg.embedding_sizes):
        raise ValidationError("embedding sizes must be >= 1")
    grid = sorted(set(int(d) for d in cfg.embedding_sizes))
    methods = list(cfg.methods)
    run_methods = methods if 'fm' in methods else ['fm'] + methods
    tasks = []
    for d in grid:
        train_cfg = replace(cfg.train, embedding_size=d)
        for method in run_methods:
            tasks.extend(_tasks('sweep-embedding', method, d, cfg, train_cfg, cfg.method_mix(method), splits))
    results = run_trials(tasks, cfg.jobs, logger)
    groups = _group(results)
    rows = []
    for d in grid:
        baseline = float(np.mean(_aucs(groups[(float(d), 'fm')])))
        for method in methods:
            group = groups[(float(d), method)]
            aucs = _aucs(group)
            mean = float(np.mean(aucs))
            rows.append({'x': d, 'method': method, 'mean_auc': mean, 'sd_auc': _sd(aucs),
                         'delta': mean - baseline,
                         'mean_gamma': float(np.mean([r.gamma for r in group]))})
    return rows, results


def perturb_sweep(splits: Splits, cfg: ExperimentConfig, methods: Sequence[str] = ('fm', 'mixfm'),
                  logger: Optional[Logger] = None) -> Tuple[List[Dict[str, Any]], List[TrialResult]]:
    """AUC reduction under input noise per (level, method), training R seeds per method.

    ``mean_auc`` is the perturbed AUC, ``delta`` the mean reduction from the
    clean AUC (exactly 0 at level 0).
    """
    _require_grid('noise level', cfg.noise_levels)
    levels = tuple(sorted(set(float(e) for e in cfg.noise_levels)))
    if levels[0] < 0:
        raise ValidationError("noise levels must be >= 0")
    tasks = []
    for method in methods:
        if method not in METHODS:
            raise ValidationError(f"unknown method '{method}'")
        tasks.extend(_tasks('perturb', method, 0.0, cfg, cfg.train, cfg.method_mix(method), splits,
                            noise_levels=levels))
    results = run_trials(tasks, cfg.jobs, logger)
    return _perturb_rows(levels, methods, {m: [r for r in results if r.method == m] for m in methods}), results


def _perturb_rows(levels: Sequence[float], methods: Sequence[str],
                  by_method: Mapping[str, Sequence[TrialResult]]) -> List[Dict[str, Any]]:
    rows = []
    for k, eps in enumerate(levels):
        for method in methods:
            trials = by_method[method]
            perturbed = [r.perturbed_auc[k] for r in trials]
            reductions = [r.auc - r.perturbed_auc[k] for r in trials]
            rows.append({'x': eps, 'method': method, 'mean_auc': float(np.mean(perturbed)),
                         'sd_auc': _sd(perturbed), 'delta': float(np.mean(reductions))})
    return rows


def perturb_checkpoints(models: Mapping[str, FmParams], test: Dataset, levels: Sequence[float],
                        repeats: int = 1, seed: int = 0) -> List[Dict[str, Any]]:
    """AUC reduction of already trained models; repeats draw fresh noise."""
    _require_grid('noise level', levels)
    levels = tuple(sorted(set(float(e) for e in levels)))
    if levels[0] < 0:
        raise ValidationError("noise levels must be >= 0")
    by_method = {}
    for method, params in models.items():
        clean = evaluate(params, test).auc
        trials = []
        for r in range(repeats):
            streams = SeedStreams(seed).child(r)
            trials.append(TrialResult('perturb', method, 0.0, r, seed, clean, math.nan,
                                      gamma_of(params), 0.0, perturbed_aucs(params, test, levels, streams)))
        by_method[method] = trials
    return _perturb_rows(levels, list(models), by_method)


def compare_methods(splits: Splits, cfg: ExperimentConfig, methods: Sequence[str] = COMPARE_METHODS,
                    logger: Optional[Logger] = None) -> Tuple[List[Dict[str, Any]], List[TrialResult]]:
    """Paired A/B of every method against FM over R seeds."""
    for method in methods:
        if method not in METHODS:
            raise ValidationError(f"unknown method '{method}'")
    run_methods = list(methods) if 'fm' in methods else ['fm'] + list(methods)
    tasks = []
    for method in run_methods:
        tasks.extend(_tasks('compare', method, 0.0, cfg, cfg.train, cfg.method_mix(method), splits))
    results = run_trials(tasks, cfg.jobs, logger)
    groups = _group(results)
    fm_aucs = _aucs(groups[(0.0, 'fm')])
    rows = []
    for method in methods:
        group = groups[(0.0, method)]
        aucs = _aucs(group)
        losses = [r.logloss for r in group]
        row = {'method': method, 'mean_auc': float(np.mean(aucs)), 'sd_auc': _sd(aucs),
               'mean_logloss': float(np.mean(losses)), 'sd_logloss': _sd(losses),
               'delta': float(np.mean(aucs)) - float(np.mean(fm_aucs))}
        if len(aucs) >= 2:
            test = paired_t_test(aucs, fm_aucs)
            row.update({'t_statistic': test.statistic, 'pvalue': test.pvalue, 'verdict': test.verdict})
        else:
            row.update({'t_statistic': math.nan, 'pvalue': math.nan, 'verdict': 'too-few-repeats'})
        rows.append(row)
    return rows, results


COMPARE_FIELDS = ['method', 'mean_auc', 'sd_auc', 'mean_logloss', 'sd_logloss', 'delta',
                  't_statistic', 'pvalue', 'verdict']
