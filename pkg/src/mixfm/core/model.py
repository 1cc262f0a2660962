"""The 2-way factorization machine.

    f(x) = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j

The pairwise term is evaluated with the linear-time form
``0.5 * sum_k [(sum_i v_ik x_i)^2 - sum_i v_ik^2 x_i^2]`` over the nonzero
entries of x only.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from mixfm.core.errors import NumericalError, ValidationError
from mixfm.core.sparse import Dataset, LabeledExample, SparseVector


INIT_STD = 0.01


@dataclass
class FmParams:
    """Bias w0, linear weights w (m,) and embeddings V (m, d), all float64."""
    w0: float
    w: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.w0 = float(self.w0)
        self.w = np.asarray(self.w, dtype=np.float64)
        self.V = np.asarray(self.V, dtype=np.float64)
        if self.w.ndim != 1 or self.V.ndim != 2 or self.V.shape[0] != self.w.shape[0]:
            raise ValidationError(f"inconsistent shapes w={self.w.shape} V={self.V.shape}")

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def d(self) -> int:
        return self.V.shape[1]

    def copy(self) -> 'FmParams':
        return FmParams(self.w0, self.w.copy(), self.V.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.w0) and np.isfinite(self.w).all() and np.isfinite(self.V).all())

    def same_as(self, other: 'FmParams') -> bool:
        """Bitwise equality of all parameter blocks."""
        return (self.w0 == other.w0 and np.array_equal(self.w, other.w)
                and np.array_equal(self.V, other.V))


def init_params(m: int, d: int, rng: np.random.Generator, std: float = INIT_STD) -> FmParams:
    """w0 = 0, w = 0, V ~ Normal(0, std^2)."""
    if m < 1 or d < 1:
        raise ValidationError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    return FmParams(0.0, np.zeros(m), rng.normal(0.0, std, size=(m, d)))


def _check_dim(params: FmParams, dim: int) -> None:
    if dim != params.m:
        raise ValidationError(f"feature dimension {dim} does not match model dimension {params.m}")


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------

def pairwise_term(params: FmParams, x: SparseVector) -> float:
    """Second-order part q(x) of the score."""
    _check_dim(params, x.dim)
    indices, values = x.as_arrays()
    if indices.size < 2:
        return 0.0
    rows = params.V[indices]
    summed = values @ rows
    squared = (values * values) @ (rows * rows)
    return float(0.5 * (summed @ summed - squared.sum()))


def predict(params: FmParams, x: SparseVector) -> float:
    """Score f(x) in O(d * nnz(x))."""
    _check_dim(params, x.dim)
    indices, values = x.as_arrays()
    linear = float(values @ params.w[indices]) if indices.size else 0.0
    return params.w0 + linear + pairwise_term(params, x)


def predict_naive(params: FmParams, x: SparseVector) -> float:
    """Direct double loop over feature pairs i < j (test oracle)."""
    _check_dim(params, x.dim)
    dense = x.to_dense()
    score = params.w0
    for i in range(params.m):
        score += params.w[i] * dense[i]
    for i in range(params.m):
        for j in range(i + 1, params.m):
            score += float(params.V[i] @ params.V[j]) * dense[i] * dense[j]
    return score


def pairwise_scores(params: FmParams, X: sp.csr_matrix) -> np.ndarray:
    """q(x) for every row of X."""
    _check_dim(params, X.shape[1])
    XV = X @ params.V
    X2V2 = X.multiply(X) @ (params.V * params.V)
    return 0.5 * (np.einsum('ij,ij->i', XV, XV) - X2V2.sum(axis=1))


def predict_batch(params: FmParams, X: Union[sp.csr_matrix, Dataset]) -> np.ndarray:
    """Scores for every row of X (or every example of a dataset)."""
    if isinstance(X, Dataset):
        X = X.features
    _check_dim(params, X.shape[1])
    return params.w0 + X @ params.w + pairwise_scores(params, X)


# ---------------------------------------------------------------------------
# Loss and gradients
# ---------------------------------------------------------------------------

def logistic_loss(score, y):
    """log(1 + exp(f)) - y f, stable for large |f|; y may be a soft label."""
    score = np.asarray(score, dtype=np.float64)
    loss = np.logaddexp(0.0, score) - np.asarray(y, dtype=np.float64) * score
    return float(loss) if loss.ndim == 0 else loss


def sigmoid(score):
    return expit(score)


@dataclass
class FmGradients:
    """Gradient blocks shaped like FmParams."""
    w0: float
    w: np.ndarray
    V: np.ndarray

    def blocks(self):
        return (('w0', np.asarray(self.w0)), ('w', self.w), ('V', self.V))


def _as_batch(batch: Union[Dataset, Sequence[LabeledExample]], dim: int) -> Dataset:
    if isinstance(batch, Dataset):
        return batch
    return Dataset.from_examples(list(batch), dim=dim)


def gradients(params: FmParams, batch: Union[Dataset, Sequence[LabeledExample]],
              l2: float = 0.0) -> FmGradients:
    """Mean gradient of the logistic loss over a nonempty batch.

    dL/df = sigmoid(f) - y; df/dw0 = 1, df/dw_i = x_i,
    df/dv_ik = x_i * sum_j v_jk x_j - v_ik x_i^2. Features absent from the
    batch get exactly zero gradient unless ``l2`` is set.
    """
    return loss_and_gradients(params, batch, l2=l2)[1]


def loss_and_gradients(params: FmParams, batch: Union[Dataset, Sequence[LabeledExample]],
                       l2: float = 0.0) -> Tuple[float, FmGradients]:
    """Mean logistic loss and its gradient, sharing one forward pass."""
    data = _as_batch(batch, params.m)
    if len(data) == 0:
        raise ValidationError("cannot compute gradients of an empty batch")
    X = data.features
    _check_dim(params, X.shape[1])
    n = X.shape[0]

    XV = X @ params.V
    scores = params.w0 + X @ params.w + 0.5 * (
        np.einsum('ij,ij->i', XV, XV) - (X.multiply(X) @ (params.V * params.V)).sum(axis=1))
    g = sigmoid(scores) - data.labels

    grad_w0 = float(g.sum() / n)
    grad_w = (X.T @ g) / n
    grad_V = (X.T @ (g[:, None] * XV) - params.V * (X.multiply(X).T @ g)[:, None]) / n
    grad_w = np.asarray(grad_w).reshape(-1)
    grad_V = np.asarray(grad_V)
    if l2:
        grad_w = grad_w + l2 * params.w
        grad_V = grad_V + l2 * params.V
    loss = float(logistic_loss(scores, data.labels).mean())
    return loss, FmGradients(grad_w0, grad_w, grad_V)


def check_finite(grads: FmGradients) -> None:
    for name, block in grads.blocks():
        if not np.isfinite(block).all():
            raise NumericalError(f"non-finite gradient in parameter block '{name}'")
