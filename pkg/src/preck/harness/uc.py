"""Empirical uniform-convergence study for the normalized measures.

A fixed synthetic population is scored by a fixed set of random unit models.
For each sample size b we draw samples without replacement and record the
largest (over models) gap between the population value and the sample value
of each normalized measure.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..metrics import effective_k, prec_at_k
from ..surrogates import eval_avg, eval_max, eval_ramp

MEASURES = ("prec", "ramp", "avg", "max")
UC_COLUMNS = ("measure", "b", "median_dev", "p90_dev", "trials")

_EVAL = {"ramp": eval_ramp, "avg": eval_avg, "max": eval_max}


@dataclass(frozen=True)
class UCConfig:
    n: int = 20000
    batch_lens: tuple[int, ...] = (125, 500, 2000)
    trials: int = 200
    models: int = 16
    kappa: float = 0.25
    dim: int = 10
    pos_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.trials < 1 or self.models < 1 or self.dim < 1:
            raise ValueError("n, trials, models and dim must be positive")
        for b in self.batch_lens:
            if not 1 <= b <= self.n:
                raise ValueError(f"sample size {b} outside [1, n={self.n}]")
        if not 0.0 < self.pos_fraction < 1.0:
            raise ValueError("pos_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class UCRow:
    measure: str
    b: int
    median_dev: float
    p90_dev: float
    trials: int


def population(cfg: UCConfig):
    """Two-component Gaussian mixture with rows scaled into the unit ball."""
    rng = np.random.default_rng([cfg.seed, 0])
    n_plus = max(1, int(round(cfg.pos_fraction * cfg.n)))
    y = np.zeros(cfg.n, dtype=np.int8)
    y[rng.choice(cfg.n, n_plus, replace=False)] = 1
    shift = np.zeros(cfg.dim)
    shift[0] = 1.0
    X = rng.normal(size=(cfg.n, cfg.dim)) + np.outer(y, shift)
    X /= np.linalg.norm(X, axis=1).max()
    W = rng.normal(size=(cfg.models, cfg.dim))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    return X, y, W


def normalized_measure(measure: str, s: np.ndarray, y: np.ndarray, kappa: float) -> float:
    k = effective_k(kappa, int(y.sum()))
    if measure == "prec":
        return prec_at_k(s, y, k) / k
    return _EVAL[measure](s, y, k).value / k


def deviations(cfg: UCConfig) -> dict[tuple[str, int], np.ndarray]:
    """Per (measure, b), the sup-over-models deviation of every retained trial.

    Samples without a positive point are redrawn.
    """
    X, y, W = population(cfg)
    S = X @ W.T
    pop = {m: np.array([normalized_measure(m, S[:, j], y, cfg.kappa) for j in range(cfg.models)])
           for m in MEASURES}
    out = {}
    for b in cfg.batch_lens:
        rng = np.random.default_rng([cfg.seed, 1, b])
        devs = {m: np.empty(cfg.trials) for m in MEASURES}
        for t in range(cfg.trials):
            idx = rng.choice(cfg.n, b, replace=False)
            while not y[idx].any():
                idx = rng.choice(cfg.n, b, replace=False)
            ys = y[idx]
            for m in MEASURES:
                sample = np.array([normalized_measure(m, S[idx, j], ys, cfg.kappa)
                                   for j in range(cfg.models)])
                devs[m][t] = np.max(np.abs(pop[m] - sample))
        for m in MEASURES:
            out[(m, b)] = devs[m]
    return out


def uc_study(cfg: UCConfig) -> list[UCRow]:
    devs = deviations(cfg)
    rows = []
    for m in MEASURES:
        for b in cfg.batch_lens:
            d = devs[(m, b)]
            rows.append(UCRow(m, b, float(np.median(d)), float(np.percentile(d, 90)), d.size))
    return rows


def decay_checks(rows: list[UCRow], min_ratio: float = 2.0) -> dict[str, bool]:
    """Per measure: median deviation strictly decreasing in b and end-to-end ratio >= min_ratio."""
    result = {}
    for m in MEASURES:
        mine = sorted((r for r in rows if r.measure == m), key=lambda r: r.b)
        med = [r.median_dev for r in mine]
        decreasing = all(a > b for a, b in zip(med, med[1:]))
        ratio_ok = med[-1] == 0.0 or med[0] / med[-1] >= min_ratio
        result[m] = decreasing and ratio_ok
    return result


def rows_to_csv(rows: list[UCRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(UC_COLUMNS)
    for r in rows:
        writer.writerow([r.measure, r.b, f"{r.median_dev:.9g}", f"{r.p90_dev:.9g}", r.trials])
    return buf.getvalue()
