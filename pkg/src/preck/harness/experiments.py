"""Experiment drivers: train/evaluate runs over seeded splits and CSV output."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..core import LinearModel, score_batch
from ..dataio import Dataset, SplitSpec, batcher, split
from ..learners import LearnerConfig, Method, TrainReport, resolve_k, train
from ..margins import (MarginDataset, MarginKind, MarginType, check_mid_margin,
                       check_strong_margin, generate_margin_dataset, mistake_bound)
from ..metrics import prec_at_k

log = logging.getLogger(__name__)

ALL_METHODS = tuple(m.value for m in Method)


@dataclass(frozen=True)
class ExperimentRow:
    method: str
    dataset: str
    k_param: str
    repeat: int
    batch_len: int
    train_time_s: float
    test_prec_loss: float
    test_prec_accuracy: float
    cumulative_mistakes: int
    bound_value: float | None = None


CSV_COLUMNS = tuple(f.name for f in fields(ExperimentRow))
_FLOAT_COLUMNS = {"train_time_s", "test_prec_loss", "test_prec_accuracy", "bound_value"}
_INT_COLUMNS = {"repeat", "batch_len", "cumulative_mistakes"}


def _fmt(name, value):
    if value is None:
        return ""
    if name in _FLOAT_COLUMNS:
        return f"{value:.9g}"
    return str(value)


def write_rows(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(c, getattr(row, c)) for c in CSV_COLUMNS])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()


def read_rows(fh) -> list[ExperimentRow]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        vals = {}
        for c in CSV_COLUMNS:
            raw = rec[c]
            if c in _FLOAT_COLUMNS:
                vals[c] = float(raw) if raw != "" else None
            elif c in _INT_COLUMNS:
                vals[c] = int(raw)
            else:
                vals[c] = raw
        rows.append(ExperimentRow(**vals))
    return rows


def k_param_label(k: int | None, kappa: float | None) -> str:
    return f"k={k}" if k is not None else f"kappa={kappa:g}"


def heldout_loss(model: LinearModel, test: Dataset, k: int | None, kappa: float | None) -> float:
    """Prec@k loss on held-out data, divided by the effective k."""
    k_eff = resolve_k(k, kappa, test.n_plus)
    if k_eff == 0:
        raise ValueError("test split has no positives")
    return prec_at_k(score_batch(model, test), test.y, k_eff) / k_eff


def certified_bound(method: Method, report: TrainReport, stream, planted: MarginDataset):
    """Separable mistake bound for a perceptron run, if every batch realizes the margin."""
    if method.is_sgd:
        return None
    gamma, R = planted.kind.gamma, planted.R
    for batch, rec in zip(stream, report.per_batch):
        if rec.skipped or batch.n_minus == 0:
            continue
        s = score_batch(planted.model, batch)
        if method is Method.PERCEPTRON_AVG:
            ok = check_mid_margin(s, batch.y, rec.k, gamma).satisfied
        else:
            ok = check_strong_margin(s, batch.y, gamma).satisfied
        if not ok:
            return None
    return mistake_bound(report.max_k, R, gamma)


@dataclass(frozen=True)
class RunSpec:
    method: str
    k: int | None
    kappa: float | None
    b: int
    passes: int
    eta0: float
    radius: float
    seed: int
    repeat: int
    split: SplitSpec


def run_one(ds: Dataset, spec: RunSpec, planted: MarginDataset | None = None):
    """Train one method on one split; returns the CSV row and the deployed model."""
    train_ds, test_ds = split(ds, spec.split, spec.repeat)
    cfg = LearnerConfig(spec.method, k=spec.k, kappa=spec.kappa, b=spec.b, passes=spec.passes,
                        eta0=spec.eta0, radius=spec.radius, seed=spec.seed)
    stream = [bt for p in range(spec.passes)
              for bt in batcher(train_ds, spec.b, (spec.seed, spec.repeat), p)]
    report = train(cfg, stream, dim=ds.dim)
    loss = heldout_loss(report.model, test_ds, spec.k, spec.kappa)
    bound = certified_bound(cfg.method, report, stream, planted) if planted is not None else None
    row = ExperimentRow(
        method=cfg.method.value,
        dataset=ds.name,
        k_param=k_param_label(spec.k, spec.kappa),
        repeat=spec.repeat,
        batch_len=spec.b,
        train_time_s=report.wall_clock,
        test_prec_loss=loss,
        test_prec_accuracy=1.0 - loss,
        cumulative_mistakes=report.cumulative,
        bound_value=bound,
    )
    return row, report.model


def _run_job(args):
    ds, spec, planted = args
    return run_one(ds, spec, planted)


def run_grid(ds: Dataset, methods, *, k=None, kappa=None, batch_lens=(500,), passes=25,
             splits=5, seed=0, eta0=1.0, radius=10.0, train_fraction=0.7, workers=1,
             planted: MarginDataset | None = None):
    """Every (method, batch length, repeat) run on a shared split schedule.

    Rows come back sorted by (method order, batch length, repeat) regardless of
    the worker count.
    """
    split_spec = SplitSpec(train_fraction, seed, splits)
    jobs = []
    for mi, method in enumerate(methods):
        Method(method)
        for b in batch_lens:
            for r in range(splits):
                spec = RunSpec(method, k, kappa, b, passes, eta0, radius, seed, r, split_spec)
                jobs.append(((mi, b, r), (ds, spec, planted)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, [j[1] for j in jobs]))
    else:
        results = [_run_job(j[1]) for j in jobs]
    keyed = sorted(zip((j[0] for j in jobs), results), key=lambda kv: kv[0])
    return [row for _, (row, _) in keyed], [model for _, (_, model) in keyed]


def batch_length_variation(rows) -> dict[str, float]:
    """Relative spread ``(max - min) / max`` of mean accuracy across batch lengths."""
    by_method: dict[str, dict[int, list[float]]] = {}
    for row in rows:
        by_method.setdefault(row.method, {}).setdefault(row.batch_len, []).append(
            row.test_prec_accuracy)
    out = {}
    for method, per_b in by_method.items():
        means = [float(np.mean(v)) for v in per_b.values()]
        top = max(means)
        out[method] = (top - min(means)) / top if top > 0 else float("inf")
    return out


def synthetic_dataset(kind: str, *, n=10000, n_plus=500, dim=20, k=250, gamma=1.0,
                      R=1.0, seed=0) -> tuple[Dataset, MarginDataset]:
    mk = MarginKind(MarginType(kind), gamma, k)
    planted = generate_margin_dataset(mk, n, n_plus, dim, seed, R)
    name = f"synthetic-{kind}-n{n}-p{n_plus}-s{seed}"
    return Dataset.from_batch(planted.batch, name), planted


def save_models(path, method: str, rows, models) -> None:
    payload = {
        "method": method,
        "models": [
            {"repeat": row.repeat, "batch_len": row.batch_len, "dim": m.dim, "w": m.w.tolist()}
            for row, m in zip(rows, models)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_models(path) -> list[LinearModel]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [LinearModel(np.array(m["w"])) for m in payload["models"]]


def row_dict(row: ExperimentRow) -> dict:
    return asdict(row)
