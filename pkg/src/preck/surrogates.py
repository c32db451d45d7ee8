"""Surrogate losses for Prec@k: struct, ramp, max and avg.

Every surrogate is a maximum over candidate labelings ``yhat`` with exactly
``k`` ones.  The efficient evaluators below reduce that maximum to a greedy
top-k selection (struct, ramp) or to a sweep over ``k'``, the number of true
positives inside ``yhat`` (max, avg).  :func:`brute_force_eval` enumerates
the candidate labelings directly and serves as the independent oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .core import Batch, LinearModel, as_labels, as_scores, score_batch
from .metrics import effective_k, rank


class SurrogateKind(enum.Enum):
    STRUCT = "struct"
    STRUCT_SCALED = "struct-scaled"
    RAMP = "ramp"
    MAX = "max"
    AVG = "avg"


@dataclass(frozen=True)
class SurrogateValue:
    """Surrogate value plus the true-positive count of a maximizing labeling."""

    value: float
    argmax_khat: int
    normalized: bool = False


@dataclass(frozen=True, eq=False)
class Subgradient:
    g: np.ndarray
    khat: int
    value: float


def _prepare(s, y):
    s = as_scores(s)
    y = as_labels(y)
    if s.size != y.size:
        raise ValueError(f"{s.size} scores but {y.size} labels")
    return s, y


def _check_k_struct(k, n):
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")


def _check_k_pos(k, n_plus):
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n_plus:
        raise ValueError(f"k={k} exceeds the number of positives {n_plus}")


def _top_k(a: np.ndarray, k: int) -> np.ndarray:
    return rank(a)[:k]


def eval_struct(s, y, k: int, scaled: bool = False) -> SurrogateValue:
    """Structural-SVM surrogate.

    Unscaled: ``max_yhat Delta(y, yhat) + sum_i (yhat_i - y_i) s_i``.
    Scaled:   ``1 + max_yhat sum_i yhat_i (s_i/n - y_i/k) - (1/n) sum_i y_i s_i``.
    """
    s, y = _prepare(s, y)
    n = s.size
    _check_k_struct(k, n)
    if scaled:
        gain = s / n - y / k
        sel = _top_k(gain, k)
        value = 1.0 + gain[sel].sum() - np.dot(y, s) / n
    else:
        gain = s + (1 - y)
        sel = _top_k(gain, k)
        value = gain[sel].sum() - np.dot(y, s)
    return SurrogateValue(float(value), int(y[sel].sum()))


def eval_ramp(s, y, k: int) -> SurrogateValue:
    s, y = _prepare(s, y)
    n_plus = int(y.sum())
    _check_k_pos(k, n_plus)
    gain = s + (1 - y)
    sel = _top_k(gain, k)
    pos = np.sort(s[y == 1])[::-1]
    value = gain[sel].sum() - pos[:k].sum()
    return SurrogateValue(float(value), int(y[sel].sum()))


def _sorted_classes(s, y):
    """Indices of positives and negatives, each in descending score order."""
    order = rank(s)
    return order[y[order] == 1], order[y[order] == 0]


def _max_sweep(s_pos, s_neg, k):
    """Values of the max surrogate for each feasible k', ordered by k'."""
    n_plus, n_minus = s_pos.size, s_neg.size
    lo = max(0, k - n_minus)
    kp = np.arange(lo, k + 1)
    m = k - kp
    neg_cum = np.concatenate(([0.0], np.cumsum(s_neg)))
    # bottom-m positives, accumulated from the lowest score upward
    bot_cum = np.concatenate(([0.0], np.cumsum(s_pos[::-1])))
    return kp, m + neg_cum[m] - bot_cum[m]


def _avg_sweep(s_pos, s_neg, k):
    """Values of the avg surrogate for each feasible k', ordered by k'."""
    n_plus, n_minus = s_pos.size, s_neg.size
    lo = max(0, k - n_minus)
    kp = np.arange(lo, k + 1)
    m = k - kp
    neg_cum = np.concatenate(([0.0], np.cumsum(s_neg)))
    # tail[j] = s+_{j+1} + ... + s+_{n_plus}; tail[n_plus] = 0
    tail = np.concatenate((np.cumsum(s_pos[::-1])[::-1], [0.0]))
    denom = n_plus - kp
    D = np.divide(m, denom, out=np.zeros(kp.size), where=denom > 0)
    return kp, D, m - D * tail[kp] + neg_cum[m]


def eval_max(s, y, k: int) -> SurrogateValue:
    s, y = _prepare(s, y)
    _check_k_pos(k, int(y.sum()))
    pos, neg = _sorted_classes(s, y)
    kp, vals = _max_sweep(s[pos], s[neg], k)
    j = int(np.argmax(vals))
    return SurrogateValue(float(vals[j]), int(kp[j]))


def eval_avg(s, y, k: int) -> SurrogateValue:
    s, y = _prepare(s, y)
    _check_k_pos(k, int(y.sum()))
    pos, neg = _sorted_classes(s, y)
    kp, _, vals = _avg_sweep(s[pos], s[neg], k)
    j = int(np.argmax(vals))
    return SurrogateValue(float(vals[j]), int(kp[j]))


def evaluate(kind: SurrogateKind, s, y, k: int) -> SurrogateValue:
    kind = SurrogateKind(kind)
    if kind is SurrogateKind.STRUCT:
        return eval_struct(s, y, k)
    if kind is SurrogateKind.STRUCT_SCALED:
        return eval_struct(s, y, k, scaled=True)
    if kind is SurrogateKind.RAMP:
        return eval_ramp(s, y, k)
    if kind is SurrogateKind.MAX:
        return eval_max(s, y, k)
    return eval_avg(s, y, k)


def normalize(v: SurrogateValue, k: int) -> SurrogateValue:
    if k < 1:
        raise ValueError("k must be positive")
    return replace(v, value=v.value / k, normalized=True)


def eval_normalized(kind: SurrogateKind, s, y, kappa: float) -> SurrogateValue:
    """Surrogate at ``k = effective_k(kappa, n_plus)``, divided by k."""
    n_plus = int(as_labels(y).sum())
    if n_plus < 1:
        raise ValueError("normalized surrogates need at least one positive")
    k = effective_k(kappa, n_plus)
    return normalize(evaluate(kind, s, y, k), k)


def _check_batch(batch: Batch, k: int):
    if batch.n_plus == 0 or batch.n_minus == 0:
        raise ValueError("subgradient needs both positive and negative points")
    _check_k_pos(k, batch.n_plus)


def subgradient_avg(model: LinearModel, batch: Batch, k: int) -> Subgradient:
    """Subgradient of ``w -> eval_avg(X w, y, k)`` at ``model``.

    The maximizing k' is the smallest among ties.
    """
    _check_batch(batch, k)
    s = score_batch(model, batch)
    pos, neg = _sorted_classes(s, batch.y)
    kp, D, vals = _avg_sweep(s[pos], s[neg], k)
    j = int(np.argmax(vals))
    m = k - int(kp[j])
    coef = np.zeros(batch.n)
    coef[neg[:m]] = 1.0
    coef[pos[kp[j]:]] -= D[j]
    g = np.asarray(batch.X.T @ coef).reshape(-1)
    return Subgradient(g, int(kp[j]), float(vals[j]))


def subgradient_max(model: LinearModel, batch: Batch, k: int) -> Subgradient:
    _check_batch(batch, k)
    s = score_batch(model, batch)
    pos, neg = _sorted_classes(s, batch.y)
    kp, vals = _max_sweep(s[pos], s[neg], k)
    j = int(np.argmax(vals))
    m = k - int(kp[j])
    coef = np.zeros(batch.n)
    coef[neg[:m]] = 1.0
    if m:
        coef[pos[-m:]] -= 1.0
    g = np.asarray(batch.X.T @ coef).reshape(-1)
    return Subgradient(g, int(kp[j]), float(vals[j]))


def surrogate_of_model(kind: SurrogateKind, model: LinearModel, batch: Batch, k: int) -> float:
    return evaluate(kind, score_batch(model, batch), batch.y, k).value


# --- brute-force oracle -------------------------------------------------

BRUTE_FORCE_MAX_N = 20
_PAIR_BLOCK = 1 << 21


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        pc = np.concatenate((pc, pc + 1))
    return pc


@lru_cache(maxsize=None)
def _masks_with_popcount(n: int, c: int) -> np.ndarray:
    return np.flatnonzero(_popcounts(n) == c).astype(np.int64)


def _subset_sums(v: np.ndarray) -> np.ndarray:
    """``out[mask] = sum of v[i] over the bits i set in mask``."""
    out = np.zeros(1)
    for x in v:
        out = np.concatenate((out, out + x))
    return out


def _pick(vals: np.ndarray, khat: np.ndarray) -> SurrogateValue:
    best = vals.max()
    near = vals >= best - 1e-12 * max(1.0, abs(best))
    return SurrogateValue(float(best), int(khat[near].min()))


def brute_force_eval(kind: SurrogateKind, s, y, k: int) -> SurrogateValue:
    """Exact surrogate value by enumerating every candidate labeling.

    Candidate labelings are bitmasks over the ``n`` points; sums of scores
    over any subset are read from a table of all ``2**n`` subset sums.
    """
    kind = SurrogateKind(kind)
    s, y = _prepare(s, y)
    n = s.size
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    n_plus = int(y.sum())
    if kind in (SurrogateKind.STRUCT, SurrogateKind.STRUCT_SCALED):
        _check_k_struct(k, n)
    else:
        _check_k_pos(k, n_plus)

    sums = _subset_sums(s)
    pc = _popcounts(n)
    P = int(sum(1 << i for i in range(n) if y[i]))
    sum_pos = sums[P]
    hats = _masks_with_popcount(n, k)
    K = pc[hats & P]
    hat_sum = sums[hats]

    if kind is SurrogateKind.STRUCT:
        return _pick((k - K) + hat_sum - sum_pos, K)
    if kind is SurrogateKind.STRUCT_SCALED:
        ysum_hat = K.astype(np.float64)
        return _pick(1.0 + hat_sum / n - ysum_hat / k - sum_pos / n, K)
    if kind is SurrogateKind.RAMP:
        tildes = hats[(hats & ~P) == 0]
        return _pick((k - K) + hat_sum - sums[tildes].max(), K)
    if kind is SurrogateKind.AVG:
        out_sum = sums[P & ~hats]
        rest = n_plus - K
        coef = np.divide(n_plus - k, rest, out=np.zeros(K.size), where=rest > 0)
        return _pick((k - K) + hat_sum - sum_pos + coef * out_sum, K)

    # MAX: inner maximization over tilde labelings inside the uncovered positives
    tildes = _masks_with_popcount(n, n_plus - k)
    tildes = tildes[(tildes & ~P) == 0]
    tilde_sum = sums[tildes]
    base = (k - K) + hat_sum - sum_pos
    inner = np.empty(hats.size)
    step = max(1, _PAIR_BLOCK // max(1, tildes.size))
    for a in range(0, hats.size, step):
        h = hats[a:a + step]
        ok = (h[:, None] & tildes[None, :]) == 0
        inner[a:a + step] = np.where(ok, tilde_sum[None, :], -np.inf).max(axis=1)
    return _pick(base + inner, K)
