"""Margin conditions for Prec@k and synthetic datasets that realize them.

Three conditions, from weakest to strongest:

* weak (k, gamma): the k best positives beat every negative by gamma;
* mid (k, gamma): every set of ``n_plus - k + 1`` positives beats every
  negative by gamma on average;
* strong gamma: every positive beats every negative by gamma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Batch, LinearModel, as_labels, as_scores, score_batch


class MarginType(enum.Enum):
    WEAK = "weak"
    MID = "mid"
    STRONG = "strong"


@dataclass(frozen=True)
class MarginKind:
    kind: MarginType
    gamma: float
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", MarginType(self.kind))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kind is not MarginType.STRONG and self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")


@dataclass(frozen=True)
class MarginReport:
    satisfied: bool
    slack: float


def _classes(s, y):
    s = as_scores(s)
    y = as_labels(y)
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    pos, neg = s[y == 1], s[y == 0]
    if neg.size == 0:
        raise ValueError("margin conditions need at least one negative")
    if pos.size == 0:
        raise ValueError("margin conditions need at least one positive")
    return np.sort(pos)[::-1], neg.max()


def _report(achieved: float, gamma: float) -> MarginReport:
    slack = float(achieved - gamma)
    return MarginReport(slack >= 0, slack)


def check_weak_margin(s, y, k: int, gamma: float) -> MarginReport:
    pos, max_neg = _classes(s, y)
    if not 1 <= k <= pos.size:
        raise ValueError(f"k={k} outside [1, n_plus={pos.size}]")
    return _report(pos[k - 1] - max_neg, gamma)


def check_mid_margin(s, y, k: int, gamma: float) -> MarginReport:
    """The binding set is the ``n_plus - k + 1`` lowest-scored positives."""
    pos, max_neg = _classes(s, y)
    if not 1 <= k <= pos.size:
        raise ValueError(f"k={k} outside [1, n_plus={pos.size}]")
    bottom = pos[k - 1:]
    return _report(bottom.mean() - max_neg, gamma)


def check_strong_margin(s, y, gamma: float) -> MarginReport:
    pos, max_neg = _classes(s, y)
    return _report(pos[-1] - max_neg, gamma)


def check_margin(kind: MarginKind, s, y) -> MarginReport:
    if kind.kind is MarginType.WEAK:
        return check_weak_margin(s, y, kind.k, kind.gamma)
    if kind.kind is MarginType.MID:
        return check_mid_margin(s, y, kind.k, kind.gamma)
    return check_strong_margin(s, y, kind.gamma)


def min_subset_mean(x, size: int) -> float:
    """Smallest mean over all subsets of ``x`` with ``size`` elements."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    if not 1 <= size <= x.size:
        raise ValueError("subset size out of range")
    return float(x[:size].mean())


# --- generators -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MarginDataset:
    batch: Batch
    model: LinearModel
    R: float
    kind: MarginKind


def _noise(rng, count, dim, room):
    """Rows orthogonal to e_0 with norms bounded by ``room``."""
    if dim == 1:
        return np.zeros((count, 0))
    z = rng.normal(size=(count, dim - 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radius = rng.uniform(0.0, 1.0, size=count) * room * (1.0 - 1e-12)
    return z * radius[:, None]


def _plant_scores(kind: MarginKind, n: int, n_plus: int, R: float, rng):
    """Scores along the planted axis for positives and negatives."""
    gamma = kind.gamma
    n_minus = n - n_plus
    if kind.kind is MarginType.STRONG:
        free = 2 * R - gamma
        if free < 0:
            raise ValueError(f"strong margin gamma={gamma} needs R >= gamma/2 (R={R})")
        top_neg = -R + free / 2
        neg = rng.uniform(-R, top_neg, size=n_minus)
        neg[0] = top_neg
        pos = rng.uniform(top_neg + gamma, R, size=n_plus)
        pos[0] = top_neg + gamma
        return pos, neg

    k = kind.k
    if n_plus <= k:
        raise ValueError(f"{kind.kind.value} margin generator needs n_plus > k "
                         f"(n_plus={n_plus}, k={k})")
    if kind.kind is MarginType.WEAK:
        free = 2 * R - gamma
        if free <= 0:
            raise ValueError(f"weak margin gamma={gamma} needs R > gamma/2 (R={R})")
        top_neg = -R + 0.75 * free
        neg = rng.uniform(-R + 0.5 * free, top_neg, size=n_minus)
        neg[0] = top_neg
        high = rng.uniform(top_neg + gamma, R, size=k)
        high[0] = top_neg + gamma
        # the remaining positives sit below every negative
        low = np.full(n_plus - k, -R)
        return np.concatenate((high, low)), neg

    # MID: one positive below the top negative, the others high enough that
    # the mean of every bottom set of size m still clears the margin
    m = n_plus - k + 1
    need = m * gamma / (m - 1)
    if need >= 2 * R:
        raise ValueError(f"mid margin infeasible: m={m}, gamma={gamma}, R={R}")
    dip = min(gamma / 2, 0.5 * (2 * R - need) * (m - 1) / m)
    low = -R
    top_neg = low + dip
    # 1e-9 relative headroom so float rounding cannot undercut gamma
    h = top_neg + (m * gamma * (1 + 1e-9) + dip) / (m - 1)
    h = min(h, R)
    neg = rng.uniform(low + dip / 2, top_neg, size=n_minus)
    neg[0] = top_neg
    high = rng.uniform(h, R, size=n_plus - 1)
    return np.concatenate((high, [low])), neg


def generate_margin_dataset(kind: MarginKind, n: int, n_plus: int, dim: int,
                            seed=None, R: float = 1.0) -> MarginDataset:
    """Batch whose planted unit model ``e_0`` realizes ``kind``.

    Every feature vector has norm at most ``R``.  Weak and mid datasets are
    built to fail the next stronger condition, so hierarchy checks are strict.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if not 1 <= n_plus < n:
        raise ValueError(f"need 1 <= n_plus < n, got n_plus={n_plus}, n={n}")
    if R <= 0:
        raise ValueError("R must be positive")
    rng = np.random.default_rng(seed)
    pos, neg = _plant_scores(kind, n, n_plus, R, rng)
    scores = np.concatenate((pos, neg))
    labels = np.concatenate((np.ones(pos.size, np.int8), np.zeros(neg.size, np.int8)))
    room = np.sqrt(np.maximum(R * R - scores * scores, 0.0))
    X = np.column_stack((scores, _noise(rng, n, dim, room)))
    perm = rng.permutation(n)
    batch = Batch(X[perm], labels[perm])
    model = LinearModel(np.eye(1, dim).ravel())

    s = score_batch(model, batch)
    if not check_margin(kind, s, batch.y).satisfied:
        raise RuntimeError(f"generated data violates its {kind} margin")
    if kind.kind is MarginType.MID and check_strong_margin(s, batch.y, kind.gamma).satisfied:
        raise RuntimeError("mid-margin data unexpectedly satisfies the strong margin")
    if kind.kind is MarginType.WEAK and check_mid_margin(s, batch.y, kind.k, kind.gamma).satisfied:
        raise RuntimeError("weak-margin data unexpectedly satisfies the mid margin")
    return MarginDataset(batch, model, R, kind)


def margin_stream(kind: MarginKind, batches: int, b: int, n_plus: int, dim: int,
                  seed: int = 0, R: float = 1.0) -> list[MarginDataset]:
    """Independent margin batches sharing the planted model ``e_0``."""
    ss = np.random.SeedSequence(seed)
    return [generate_margin_dataset(kind, b, n_plus, dim, child, R)
            for child in ss.spawn(batches)]


def mistake_bound(k: int, R: float, gamma: float) -> float:
    """Separable-case bound ``4 k R^2 / gamma^2`` on cumulative Prec@k mistakes."""
    return 4.0 * k * R * R / (gamma * gamma)


def agnostic_mistake_bound(model_norm: float, R: float, k: int, total_surrogate: float) -> float:
    """``(|w| R sqrt(4k) + sqrt(L))^2`` for a comparator with norm ``|w|``."""
    return (model_norm * R * math.sqrt(4 * k) + math.sqrt(max(total_surrogate, 0.0))) ** 2
