"""One-dimensional instance on which the scaled struct surrogate misleads.

Six points on the real line, three positives at -1, -1, -2 and three
negatives at -3.  Any positive weight ranks a positive first, so Prec@1 is 0
for ``w > 0``; the scaled struct surrogate nevertheless keeps decreasing as
``w`` goes to minus infinity, dips below Prec@1 and turns negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..metrics import prec_at_k
from ..surrogates import eval_avg, eval_max, eval_ramp, eval_struct

POINTS = np.array([-1.0, -1.0, -2.0, -3.0, -3.0, -3.0])
LABELS = np.array([1, 1, 1, 0, 0, 0], dtype=np.int8)
K = 1
TOL = 1e-9


def default_grid() -> np.ndarray:
    # integer tenths keep every grid point exact to the printed digit
    return np.arange(-150, 151) / 10.0


@dataclass(frozen=True)
class GridRow:
    w: float
    struct: float
    avg: float
    ramp: float
    max: float
    prec: int


def evaluate_grid(grid=None) -> list[GridRow]:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    rows = []
    for w in grid:
        s = w * POINTS
        rows.append(GridRow(
            w=float(w),
            struct=eval_struct(s, LABELS, K, scaled=True).value,
            avg=eval_avg(s, LABELS, K).value,
            ramp=eval_ramp(s, LABELS, K).value,
            max=eval_max(s, LABELS, K).value,
            prec=prec_at_k(s, LABELS, K),
        ))
    return rows


def check_assertions(rows: list[GridRow]) -> dict[str, bool]:
    """The four gate conditions, keyed (a) to (d)."""
    w = np.array([r.w for r in rows])
    struct = np.array([r.struct for r in rows])
    prec = np.array([r.prec for r in rows])
    argmin_w = w[int(np.argmin(struct))]
    a = bool(argmin_w < 0 and np.all(prec[w > 0] == 0) and np.all(prec[w < 0] == 1))
    b = bool(np.any(struct < prec - TOL))
    below = w < -6
    c = bool(below.any() and np.all(struct[below] < 0))
    d = all(min(r.ramp, r.avg, r.max) >= r.prec - TOL for r in rows)
    return {
        "a: struct argmin is negative while Prec@1 prefers w > 0": a,
        "b: struct dips below Prec@1 somewhere": b,
        "c: struct is negative for every w < -6": c,
        "d: ramp, avg and max never dip below Prec@1": d,
    }


def format_table(rows: list[GridRow]) -> str:
    lines = ["w,struct_scaled,avg,ramp,max,prec_at_1"]
    for r in rows:
        lines.append(f"{r.w:.9g},{r.struct:.9g},{r.avg:.9g},{r.ramp:.9g},{r.max:.9g},{r.prec}")
    return "\n".join(lines) + "\n"
