"""Data types shared across the package: sparse points, batches and linear models.

Data are stored sparse (a CSR matrix per batch), models dense.  There is no
implicit bias term; append a constant feature if one is wanted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401  (registers sp.linalg)


class DimensionError(ValueError):
    """Raised when a model and a data point disagree on dimensionality."""


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Feature vector in canonical sparse form.

    Indices are strictly increasing, all below ``dim``, and no stored value is
    exactly zero.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if idx.shape != val.shape:
            raise ValueError("indices and values must have equal length")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError("sparse index out of range")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("sparse indices must be strictly increasing")
        if not np.all(np.isfinite(val)):
            raise ValueError("sparse values must be finite")
        keep = val != 0.0
        object.__setattr__(self, "indices", idx[keep])
        object.__setattr__(self, "values", val[keep])

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], dim: int) -> "SparseVector":
        pairs = list(pairs)
        idx = [p[0] for p in pairs]
        val = [p[1] for p in pairs]
        return cls(np.array(idx, dtype=np.int64), np.array(val, dtype=np.float64), dim)

    @classmethod
    def from_dense(cls, x: Sequence[float]) -> "SparseVector":
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return cls(nz, x[nz], x.size)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"SparseVector({self.entries()!r}, dim={self.dim})"


@dataclass(frozen=True)
class LabeledPoint:
    x: SparseVector
    y: int

    def __post_init__(self):
        if self.y not in (0, 1) or isinstance(self.y, bool):
            raise ValueError(f"label must be 0 or 1, got {self.y!r}")


class Batch:
    """A finite set of labeled points sharing one feature dimension.

    Rows of ``X`` are the points; ``y`` holds 0/1 labels.
    """

    __slots__ = ("X", "y", "n_plus")

    def __init__(self, X, y):
        X = sp.csr_matrix(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int8).reshape(-1)
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} rows but {y.size} labels")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        X.eliminate_zeros()
        X.sort_indices()
        self.X = X
        self.y = y
        self.n_plus = int(y.sum())

    @classmethod
    def from_points(cls, points: Sequence[LabeledPoint], dim: int | None = None) -> "Batch":
        points = list(points)
        if dim is None:
            if not points:
                raise ValueError("dim is required for an empty batch")
            dim = points[0].x.dim
        if any(p.x.dim != dim for p in points):
            raise DimensionError("all points in a batch must share one dim")
        indptr = np.zeros(len(points) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([p.x.nnz for p in points])
        indices = np.concatenate([p.x.indices for p in points]) if points else np.zeros(0, np.int64)
        data = np.concatenate([p.x.values for p in points]) if points else np.zeros(0)
        X = sp.csr_matrix((data, indices, indptr), shape=(len(points), dim))
        return cls(X, [p.y for p in points])

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def n_minus(self) -> int:
        return self.n - self.n_plus

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    @property
    def points(self) -> list[LabeledPoint]:
        X = self.X
        return [
            LabeledPoint(
                SparseVector(X.indices[X.indptr[i]:X.indptr[i + 1]],
                             X.data[X.indptr[i]:X.indptr[i + 1]], self.dim),
                int(self.y[i]),
            )
            for i in range(self.n)
        ]

    def subset(self, rows) -> "Batch":
        rows = np.asarray(rows, dtype=np.int64)
        return Batch(self.X[rows], self.y[rows])

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Batch):
            return NotImplemented
        return (
            self.X.shape == other.X.shape
            and np.array_equal(self.y, other.y)
            and (self.X != other.X).nnz == 0
        )

    def __repr__(self):
        return f"Batch(n={self.n}, n_plus={self.n_plus}, dim={self.dim})"


@dataclass(eq=False)
class LinearModel:
    """Dense weight vector; scores are ``s_i = <w, x_i>``."""

    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64).reshape(-1)
        if w.size < 1:
            raise ValueError("model dimension must be positive")
        if not np.all(np.isfinite(w)):
            raise ValueError("model weights must be finite")
        self.w = w

    @classmethod
    def zeros(cls, dim: int) -> "LinearModel":
        return cls(np.zeros(dim))

    @property
    def dim(self) -> int:
        return int(self.w.size)

    def copy(self) -> "LinearModel":
        return LinearModel(self.w.copy())

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return np.array_equal(self.w, other.w)

    def __repr__(self):
        return f"LinearModel(dim={self.dim}, norm={l2_norm(self.w):.6g})"


def dot(model: LinearModel, x: SparseVector) -> float:
    if x.dim != model.dim:
        raise DimensionError(f"point dim {x.dim} != model dim {model.dim}")
    return float(np.dot(model.w[x.indices], x.values))


def score_batch(model: LinearModel, batch: Batch) -> np.ndarray:
    if batch.dim != model.dim:
        raise DimensionError(f"batch dim {batch.dim} != model dim {model.dim}")
    return np.asarray(batch.X @ model.w, dtype=np.float64).reshape(-1)


def l2_norm(v) -> float:
    if isinstance(v, SparseVector):
        return float(np.linalg.norm(v.values))
    if isinstance(v, LinearModel):
        return float(np.linalg.norm(v.w))
    if sp.issparse(v):
        return float(sp.linalg.norm(v))
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64).reshape(-1)))


def row_norms(X) -> np.ndarray:
    """Euclidean norm of every row of a (sparse or dense) matrix."""
    if sp.issparse(X):
        return np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).reshape(-1))
    return np.linalg.norm(np.asarray(X), axis=1)


def as_scores(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s


def as_labels(y) -> np.ndarray:
    y = np.asarray(y).reshape(-1)
    if y.size and not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return y.astype(np.int8)
