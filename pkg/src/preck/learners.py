"""Streaming mini-batch learners for Prec@k.

``perceptron-avg`` and ``perceptron-max`` are perceptron-style rules driven by
the Prec@k mistakes on each batch; ``sgd-avg`` and ``sgd-max`` run projected
stochastic subgradient descent on the avg and max surrogates and return the
running average of their iterates.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import Batch, LinearModel, score_batch
from .metrics import delta, effective_k, overlap, top_k_labeling
from .surrogates import subgradient_avg, subgradient_max


class Method(enum.Enum):
    PERCEPTRON_AVG = "perceptron-avg"
    PERCEPTRON_MAX = "perceptron-max"
    SGD_AVG = "sgd-avg"
    SGD_MAX = "sgd-max"

    @property
    def is_sgd(self) -> bool:
        return self in (Method.SGD_AVG, Method.SGD_MAX)

    @property
    def surrogate(self) -> str:
        return "avg" if self in (Method.PERCEPTRON_AVG, Method.SGD_AVG) else "max"


@dataclass(frozen=True)
class LearnerConfig:
    """Exactly one of ``k`` (fixed) and ``kappa`` (relative to n_plus) is set."""

    method: Method
    k: int | None = None
    kappa: float | None = None
    b: int = 500
    passes: int = 25
    eta0: float = 1.0
    radius: float = 10.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if (self.k is None) == (self.kappa is None):
            raise ValueError("set exactly one of k and kappa")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.kappa is not None and not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if self.b < 1 or self.passes < 1:
            raise ValueError("b and passes must be positive")
        if self.eta0 <= 0 or self.radius <= 0:
            raise ValueError("eta0 and radius must be positive")

    def k_for(self, n_plus: int) -> int:
        return resolve_k(self.k, self.kappa, n_plus)


def resolve_k(k: int | None, kappa: float | None, n_plus: int) -> int:
    """Effective k on a batch with ``n_plus`` positives; 0 means skip the batch."""
    if n_plus == 0:
        return 0
    if k is not None:
        return min(k, n_plus)
    return effective_k(kappa, n_plus)


@dataclass(frozen=True)
class BatchRecord:
    delta: int
    k: int
    skipped: bool
    surrogate: float | None = None


@dataclass
class TrainReport:
    per_batch: list[BatchRecord]
    cumulative: int
    final_model: LinearModel
    averaged_model: LinearModel | None = None
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def model(self) -> LinearModel:
        """The model a caller should deploy: the iterate average for SGD."""
        return self.averaged_model if self.averaged_model is not None else self.final_model

    @property
    def steps(self) -> int:
        return sum(not r.skipped for r in self.per_batch)

    @property
    def max_k(self) -> int:
        return max((r.k for r in self.per_batch if not r.skipped), default=0)


class AllBatchesSkipped(RuntimeError):
    pass


def _check_step(batch: Batch, k: int):
    if not 1 <= k <= batch.n_plus:
        raise ValueError(f"k={k} outside [1, n_plus={batch.n_plus}]")


def _mistakes(model: LinearModel, batch: Batch, k: int):
    s = score_batch(model, batch)
    yhat = top_k_labeling(s, k)
    return s, yhat, delta(batch.y, yhat)


def perceptron_avg_step(model: LinearModel, batch: Batch, k: int) -> tuple[LinearModel, int]:
    """One update of Perceptron@k-avg; returns the input model when Delta_t = 0."""
    _check_step(batch, k)
    s, yhat, d = _mistakes(model, batch, k)
    if d == 0:
        return model, 0
    y = batch.y
    # d > 0 forces n_plus - K >= d, so the denominator is positive
    D = d / (batch.n_plus - overlap(y, yhat))
    coef = D * ((1 - yhat) * y) - ((1 - y) * yhat)
    w = model.w + np.asarray(batch.X.T @ coef).reshape(-1)
    return LinearModel(w), d


def false_negatives(s: np.ndarray, y: np.ndarray, yhat: np.ndarray, m: int) -> np.ndarray:
    """Indices of the ``m`` highest-scored false negatives, ties by index."""
    fn = np.flatnonzero((y == 1) & (yhat == 0))
    order = np.lexsort((fn, -s[fn]))
    return fn[order[:m]]


def perceptron_max_step(model: LinearModel, batch: Batch, k: int) -> tuple[LinearModel, int]:
    """One update of Perceptron@k-max: only the top Delta_t false negatives are added."""
    _check_step(batch, k)
    s, yhat, d = _mistakes(model, batch, k)
    if d == 0:
        return model, 0
    y = batch.y
    coef = -((1 - y) * yhat).astype(np.float64)
    coef[false_negatives(s, y, yhat, d)] += 1.0
    w = model.w + np.asarray(batch.X.T @ coef).reshape(-1)
    return LinearModel(w), d


def project_ball(w: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(w)
    if norm <= radius:
        return w
    return w * (radius / norm)


def sgd_step(model: LinearModel, batch: Batch, k: int, eta_t: float, radius: float,
             surrogate: str = "avg") -> LinearModel:
    """Projected subgradient step; a degenerate batch leaves the model unchanged."""
    model, _ = _sgd_step(model, batch, k, eta_t, radius, surrogate)
    return model


def _sgd_step(model, batch, k, eta_t, radius, surrogate):
    if batch.n_minus == 0 or not 1 <= k <= batch.n_plus:
        return model, None
    grad = subgradient_avg if surrogate == "avg" else subgradient_max
    sg = grad(model, batch, k)
    if not np.any(sg.g):
        return model, sg.value
    return LinearModel(project_ball(model.w - eta_t * sg.g, radius)), sg.value


def train(config: LearnerConfig, stream: Iterable[Batch], init: LinearModel | None = None,
          dim: int | None = None) -> TrainReport:
    """Run one learner over ``stream`` in order.

    Batches without positives are skipped.  Each remaining batch uses
    ``config.k_for(n_plus)``.  SGD uses the step length ``eta0 / sqrt(t)``.
    """
    method = config.method
    model = init.copy() if init is not None else None
    records: list[BatchRecord] = []
    cumulative = 0
    avg_sum = None
    t = 0
    start = time.perf_counter()
    for batch in stream:
        if model is None:
            model = LinearModel.zeros(dim if dim is not None else batch.dim)
        k = config.k_for(batch.n_plus)
        if k == 0:
            records.append(BatchRecord(0, 0, True))
            continue
        t += 1
        if method is Method.PERCEPTRON_AVG:
            model, d = perceptron_avg_step(model, batch, k)
            records.append(BatchRecord(d, k, False))
        elif method is Method.PERCEPTRON_MAX:
            model, d = perceptron_max_step(model, batch, k)
            records.append(BatchRecord(d, k, False))
        else:
            _, _, d = _mistakes(model, batch, k)
            model, value = _sgd_step(model, batch, k, config.eta0 / math.sqrt(t),
                                     config.radius, method.surrogate)
            records.append(BatchRecord(d, k, False, value))
            avg_sum = model.w.copy() if avg_sum is None else avg_sum + model.w
        cumulative += d
    elapsed = time.perf_counter() - start
    if t == 0:
        raise AllBatchesSkipped("every batch in the stream was skipped (no positives)")
    averaged = LinearModel(avg_sum / t) if avg_sum is not None else None
    return TrainReport(records, cumulative, model, averaged, elapsed)
