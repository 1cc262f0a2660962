"""Evaluation metrics: AUC, LogLoss and the paired t-test across repeats."""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Sequence

import numpy as np
from scipy import stats

from mixfm.core.errors import ValidationError
from mixfm.core.model import FmParams, logistic_loss, predict_batch
from mixfm.core.sparse import Dataset


SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class EvalReport:
    """AUC and LogLoss of a model on one dataset.

    ``auc`` is nan when the dataset holds a single class.
    """
    auc: float
    logloss: float
    n_examples: int
    n_positive: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _paired_arrays(a: Sequence[float], b: Sequence[float], what: str):
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValidationError(f"{what}: lengths differ ({a.size} vs {b.size})")
    return a, b


def auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Area under the ROC curve via the Mann-Whitney rank sum.

    Tied scores get half credit (average ranks).
    """
    scores, labels = _paired_arrays(scores, labels, "auc")
    if not np.isin(labels, (0.0, 1.0)).all():
        raise ValidationError("auc needs binary labels")
    positives = labels == 1.0
    n_pos = int(positives.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("auc is undefined with a single class")
    ranks = stats.rankdata(scores)
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def logloss(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Mean logistic loss of raw scores against labels in [0, 1]."""
    scores, labels = _paired_arrays(scores, labels, "logloss")
    if scores.size == 0:
        raise ValidationError("logloss of an empty set")
    return float(np.mean(logistic_loss(scores, labels)))


def evaluate(params: FmParams, data: Dataset) -> EvalReport:
    if len(data) == 0:
        raise ValidationError("cannot evaluate on an empty dataset")
    scores = predict_batch(params, data)
    labels = np.where(data.labels >= 0.5, 1.0, 0.0)
    try:
        area = auc(scores, labels)
    except ValidationError:
        area = math.nan
    return EvalReport(area, logloss(scores, data.labels), len(data), data.n_positive)


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    pvalue: float
    verdict: str
    mean_difference: float
    n: int

    @property
    def significant(self) -> bool:
        return self.pvalue < SIGNIFICANCE_LEVEL

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test of a against b.

    Differences with zero variance have no t statistic: identical inputs give
    verdict 'identical' (p = 1), a constant nonzero shift gives
    'constant-shift' with t = +/-inf and p = 0.
    """
    a, b = _paired_arrays(a, b, "paired t-test")
    n = a.size
    if n < 2:
        raise ValidationError(f"paired t-test needs at least 2 pairs, got {n}")
    diff = a - b
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    if sd <= 1e-12 * max(1.0, abs(mean)):
        if mean == 0.0 and np.all(diff == 0.0):
            return TTestResult(math.nan, 1.0, 'identical', 0.0, n)
        return TTestResult(math.copysign(math.inf, mean), 0.0, 'constant-shift', mean, n)
    statistic = mean / (sd / math.sqrt(n))
    pvalue = float(2.0 * stats.t.sf(abs(statistic), df=n - 1))
    verdict = 'significant' if pvalue < SIGNIFICANCE_LEVEL else 'not-significant'
    return TTestResult(float(statistic), pvalue, verdict, mean, n)
