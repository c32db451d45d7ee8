"""Ranking primitives and the Prec@k loss.

Prec@k is used in its loss form throughout: the number of negatives among the
top-k ranked points.  Ties in score are broken by ascending original index so
every ranking is deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from .core import as_labels, as_scores


def rank(s) -> np.ndarray:
    """Permutation sorting ``s`` in descending order, ties by ascending index."""
    s = as_scores(s)
    if s.size == 0:
        raise ValueError("cannot rank an empty score vector")
    # stable sort on -s keeps equal scores in index order
    return np.argsort(-s, kind="stable")


def _check_k(k: int, n: int) -> int:
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    return k


def top_k_labeling(s, k: int) -> np.ndarray:
    s = as_scores(s)
    k = _check_k(k, s.size)
    out = np.zeros(s.size, dtype=np.int8)
    out[rank(s)[:k]] = 1
    return out


def _pair(y1, y2):
    y1 = as_labels(y1)
    y2 = as_labels(y2)
    if y1.size != y2.size:
        raise ValueError(f"label vectors differ in length: {y1.size} vs {y2.size}")
    return y1, y2


def delta(y1, y2) -> int:
    """Number of positions with ``y1 == 0`` and ``y2 == 1``."""
    y1, y2 = _pair(y1, y2)
    return int(np.sum((1 - y1) * y2))


def overlap(y1, y2) -> int:
    """Number of positions where both labelings are 1."""
    y1, y2 = _pair(y1, y2)
    return int(np.sum(y1 * y2))


def prec_at_k(s, y, k: int) -> int:
    s = as_scores(s)
    y = as_labels(y)
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    k = _check_k(k, s.size)
    top = rank(s)[:k]
    return int(k - y[top].sum())


def effective_k(kappa: float, n_plus: int) -> int:
    """``max(1, ceil(kappa * n_plus))`` with a guard against float round-up.

    ``0.7 * 10`` evaluates to ``7.000000000000001``; the tolerance keeps such
    products at their intended integer.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    return max(1, math.ceil(kappa * n_plus - 1e-9))


def prec_at_kappa(s, y, kappa: float) -> float:
    """Prec@k divided by k, where ``k = effective_k(kappa, n_plus)``."""
    y = as_labels(y)
    n_plus = int(y.sum())
    if n_plus < 1:
        raise ValueError("Prec@kappa needs at least one positive")
    k = effective_k(kappa, n_plus)
    return prec_at_k(s, y, k) / k
