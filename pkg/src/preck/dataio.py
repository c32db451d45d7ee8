"""LIBSVM/SVMlight ingestion, seeded train/test splits and mini-batch streams."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .core import Batch, row_norms

MAX_INDEX = 2**31 - 1

_LABELS = {"+1": 1, "1": 1, "-1": 0, "0": 0}


class LibsvmFormatError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class Dataset(Batch):
    """A named collection of labeled points; ``dim`` covers every index."""

    __slots__ = ("name",)

    def __init__(self, X, y, name: str = ""):
        super().__init__(X, y)
        self.name = name

    @classmethod
    def from_batch(cls, batch: Batch, name: str = "") -> "Dataset":
        return cls(batch.X, batch.y, name)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.X[rows], self.y[rows], self.name)

    def __repr__(self):
        return f"Dataset({self.name!r}, n={self.n}, n_plus={self.n_plus}, dim={self.dim})"


def parse_libsvm(text, dim: int | None = None, name: str = "") -> Dataset:
    """Parse LIBSVM text (``str`` or ``bytes``) into a :class:`Dataset`.

    File indices are 1-based and must be strictly ascending on each line.
    Labels ``+1``/``1`` map to 1 and ``-1``/``0`` map to 0.  Zero values are
    dropped.  ``dim`` forces the feature dimension (it must cover every index).
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    labels: list[int] = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    max_idx = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head not in _LABELS:
            if ":" in head:
                raise LibsvmFormatError(lineno, f"missing label before {head!r}")
            raise LibsvmFormatError(lineno, f"unknown label {head!r}")
        labels.append(_LABELS[head])
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmFormatError(lineno, f"expected index:value, got {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmFormatError(lineno, f"malformed pair {tok!r}") from None
            if idx < 1 or idx > MAX_INDEX:
                raise LibsvmFormatError(lineno, f"index {idx} out of range")
            if idx <= prev:
                raise LibsvmFormatError(lineno, f"index {idx} not ascending (after {prev})")
            if not math.isfinite(val):
                raise LibsvmFormatError(lineno, f"non-finite value {val_s!r}")
            prev = idx
            if val != 0.0:
                indices.append(idx - 1)
                values.append(val)
        max_idx = max(max_idx, prev)
        indptr.append(len(indices))
    if dim is None:
        dim = max_idx
    elif dim < max_idx:
        raise ValueError(f"dim={dim} does not cover feature index {max_idx}")
    X = sp.csr_matrix(
        (np.array(values, dtype=np.float64), np.array(indices, dtype=np.int64),
         np.array(indptr, dtype=np.int64)),
        shape=(len(labels), dim),
    )
    return Dataset(X, np.array(labels, dtype=np.int8), name)


def load_libsvm(path, dim: int | None = None) -> Dataset:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_libsvm(data, dim=dim, name=os.path.basename(os.fspath(path)))


def serialize_libsvm(ds: Batch) -> str:
    X = ds.X
    lines = []
    for i in range(ds.n):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        pairs = " ".join(f"{j + 1}:{v!r}" for j, v in
                         zip(X.indices[lo:hi].tolist(), X.data[lo:hi].tolist()))
        label = "+1" if ds.y[i] else "-1"
        lines.append(f"{label} {pairs}" if pairs else label)
    return "".join(line + "\n" for line in lines)


def save_libsvm(ds: Batch, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_libsvm(ds))


def rescale_max_norm(ds: Dataset, R: float = 1.0) -> Dataset:
    """Scale every point by one factor so the largest feature norm equals R."""
    norms = row_norms(ds.X)
    top = norms.max() if norms.size else 0.0
    if top == 0.0:
        return ds
    return Dataset(ds.X * (R / top), ds.y, ds.name)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0
    repeats: int = 5

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")


def split_indices(n: int, spec: SplitSpec, repeat_index: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([spec.seed, repeat_index])
    perm = rng.permutation(n)
    n_train = math.ceil(spec.train_fraction * n - 1e-9)
    return perm[:n_train], perm[n_train:]


def split(ds: Dataset, spec: SplitSpec, repeat_index: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first ``ceil(fraction * n)`` points train."""
    if ds.n == 0:
        raise ValueError("cannot split an empty dataset")
    train_idx, test_idx = split_indices(ds.n, spec, repeat_index)
    return ds.subset(train_idx), ds.subset(test_idx)


def batcher(ds: Batch, b: int, seed=0, pass_index: int = 0) -> list[Batch]:
    """Shuffle once per pass, then cut into consecutive chunks of ``b`` points.

    ``seed`` may be an int or a tuple of ints.
    """
    if b < 1:
        raise ValueError(f"batch length must be positive, got {b}")
    rng = np.random.default_rng([*np.atleast_1d(seed).tolist(), pass_index])
    perm = rng.permutation(ds.n)
    return [Batch(ds.X[perm[i:i + b]], ds.y[perm[i:i + b]]) for i in range(0, ds.n, b)]


def multi_pass_stream(ds: Batch, b: int, passes: int, seed=0) -> Iterator[Batch]:
    for p in range(passes):
        yield from batcher(ds, b, seed, p)
