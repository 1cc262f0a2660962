"""Capacity, Rademacher and generalization-gap calculators for FM and MixFM.

All quadratic forms over the linearized pairwise representation reduce to
per-example pairwise scores q(x); the (d*m)^2-sized vectors and second
moment matrices are never built. Bounds cover the pairwise part of the
model only; the bias and linear terms are outside their scope.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from mixfm.core.errors import ValidationError
from mixfm.core.metrics import logloss
from mixfm.core.model import FmParams, pairwise_scores, predict_batch, sigmoid
from mixfm.core.sparse import Dataset


E = math.e
DEFAULT_MOMENT_SAMPLES = 100_000
MIN_MOMENT_SAMPLES = 10_000

CROSSOVER_CAVEAT = (
    "the FM bound constrains the embedding norm while the MixFM bound constrains the "
    "regularizer value; the comparison sets both capacities to the same number. "
    "Both bounds cover the pairwise term only, not w0 or w"
)


@dataclass(frozen=True)
class BoundInputs:
    gamma: float
    d: int
    tau: int
    n: int
    delta: float = 0.05

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.d < 1:
            raise ValidationError(f"d must be >= 1, got {self.d}")
        if self.tau < 1:
            raise ValidationError(f"tau must be >= 1, got {self.tau}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class BoundReport:
    """Generalization gap R - R_hat <= rademacher_term + confidence_term."""
    variant: str
    gamma: float
    d: int
    tau: int
    n: int
    delta: float
    rademacher_term: float
    confidence_term: float
    total_gap: float
    empirical_risk: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def gamma_of(params: FmParams) -> float:
    """Sum of squared embedding entries."""
    return float(np.sum(params.V * params.V))


def rademacher_bound(inputs: BoundInputs) -> float:
    """sqrt(gamma^2 d tau (tau - 1) / (2n))."""
    t = inputs.tau
    return math.sqrt(inputs.gamma ** 2 * inputs.d * t * (t - 1) / (2.0 * inputs.n))


def confidence_term(n: int, delta: float) -> float:
    return 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def fm_generalization_gap(inputs: BoundInputs, empirical_risk: Optional[float] = None) -> BoundReport:
    rademacher = 2.0 * rademacher_bound(inputs)
    confidence = confidence_term(inputs.n, inputs.delta)
    return BoundReport('fm', inputs.gamma, inputs.d, inputs.tau, inputs.n, inputs.delta,
                       rademacher, confidence, rademacher + confidence, empirical_risk)


def mixfm_generalization_gap(gamma_tilde: float, inputs: BoundInputs,
                             empirical_risk: Optional[float] = None) -> BoundReport:
    """Gap for the class constrained by the Mixup regularizer value ``gamma_tilde``.

    The embedding size does not enter the Rademacher term here.
    """
    if not gamma_tilde >= 0:
        raise ValidationError(f"gamma_tilde must be >= 0, got {gamma_tilde}")
    t = inputs.tau
    rademacher = 2.0 * math.sqrt((1 + E) ** 2 * gamma_tilde * t * (t - 1) / (2.0 * E * inputs.n))
    confidence = confidence_term(inputs.n, inputs.delta)
    return BoundReport('mixfm', gamma_tilde, inputs.d, inputs.tau, inputs.n, inputs.delta,
                       rademacher, confidence, rademacher + confidence, empirical_risk)


def gamma_threshold(d: int) -> float:
    """Capacity above which the MixFM Rademacher term is the smaller one."""
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    return (1 + E) ** 2 / (E * d)


# ---------------------------------------------------------------------------
# Data-dependent quantities
# ---------------------------------------------------------------------------

def interaction_energy(params: FmParams, data: Dataset, centered: bool = False) -> float:
    """Mean squared pairwise score (1/n) sum q(x_i)^2.

    With ``centered`` the variance of q is returned instead, the same
    quadratic form over the mean-centered second moment.
    """
    if len(data) == 0:
        raise ValidationError("interaction energy of an empty dataset")
    q = pairwise_scores(params, data.features)
    if centered:
        return float(np.var(q))
    return float(np.mean(q * q))


def ratio_moment_samples(alpha: float, beta: float, clamped: bool, samples: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Draws of ((1 - l) / l)^4 with l from the mixture
    alpha/(alpha+beta) Beta(alpha+1, beta) + beta/(alpha+beta) Beta(beta+1, alpha),
    folded to max(l, 1 - l) when ``clamped``."""
    if not (alpha > 0 and beta > 0):
        raise ValidationError(f"alpha and beta must be > 0, got ({alpha}, {beta})")
    if samples < MIN_MOMENT_SAMPLES:
        raise ValidationError(f"need at least {MIN_MOMENT_SAMPLES} samples, got {samples}")
    pick_first = rng.random(samples) < alpha / (alpha + beta)
    first = rng.beta(alpha + 1.0, beta, size=samples)
    second = rng.beta(beta + 1.0, alpha, size=samples)
    lam = np.where(pick_first, first, second)
    if clamped:
        lam = np.maximum(lam, 1.0 - lam)
    with np.errstate(divide='ignore', over='ignore'):
        return ((1.0 - lam) / lam) ** 4


def lambda_ratio_moment(alpha: float, beta: float, clamped: bool = True,
                        samples: int = DEFAULT_MOMENT_SAMPLES,
                        rng: Optional[np.random.Generator] = None) -> float:
    """Monte-Carlo estimate of E[((1 - l) / l)^4]; within [0, 1] when clamped."""
    if rng is None:
        rng = np.random.default_rng(0)
    return float(np.mean(ratio_moment_samples(alpha, beta, clamped, samples, rng)))


def _curvature_weight(params: FmParams, data: Dataset) -> float:
    """Mean sigmoid(f)(1 - sigmoid(f)) over the dataset."""
    s = sigmoid(predict_batch(params, data))
    return float(np.mean(s * (1.0 - s)))


def mixup_regularizer(params: FmParams, data: Dataset, alpha: float = 1.0, beta: float = 1.0,
                      samples: int = DEFAULT_MOMENT_SAMPLES,
                      rng: Optional[np.random.Generator] = None,
                      clamped: bool = True, centered: bool = False) -> float:
    """Data-dependent regularizer that Mixup adds to the FM loss (second order)."""
    if len(data) == 0:
        raise ValidationError("regularizer of an empty dataset")
    moment = lambda_ratio_moment(alpha, beta, clamped=clamped, samples=samples, rng=rng)
    return _curvature_weight(params, data) * moment * interaction_energy(params, data, centered)


def regularizer_constraint(params: FmParams, data: Dataset, centered: bool = False) -> float:
    """Empirical capacity of the MixFM class: mean sigmoid(1 - sigmoid) times the energy."""
    if len(data) == 0:
        raise ValidationError("regularizer constraint of an empty dataset")
    return _curvature_weight(params, data) * interaction_energy(params, data, centered)


@dataclass(frozen=True)
class BoundComparison:
    fm: BoundReport
    mixfm: BoundReport
    threshold: float
    verdict: str
    caveat: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            'fm': self.fm.to_dict(),
            'mixfm': self.mixfm.to_dict(),
            'threshold': self.threshold,
            'verdict': self.verdict,
            'caveat': self.caveat,
        }


def compare_bounds(params: FmParams, data: Dataset, delta: float = 0.05) -> BoundComparison:
    """FM and MixFM gap reports of a trained model on its training data.

    The verdict is 'mixfm-tighter' iff gamma_of(params) >= gamma_threshold(d).
    """
    if len(data) == 0:
        raise ValidationError("cannot compute bounds on an empty dataset")
    gamma = gamma_of(params)
    tau = max(data.tau, 1)
    risk = logloss(predict_batch(params, data), data.labels)
    inputs = BoundInputs(gamma, params.d, tau, len(data), delta)
    fm = fm_generalization_gap(inputs, risk)
    mixfm = mixfm_generalization_gap(regularizer_constraint(params, data), inputs, risk)
    threshold = gamma_threshold(params.d)
    verdict = 'mixfm-tighter' if gamma >= threshold else 'fm-tighter'
    return BoundComparison(fm, mixfm, threshold, verdict, CROSSOVER_CAVEAT)
