"""Property suites: oracle equivalence, hierarchy, convexity, subgradients, margins.

Each check returns a :class:`PropertyResult`; a failed check carries the
first offending instance so it can be replayed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

from ..core import Batch, LinearModel, score_batch
from ..margins import (MarginKind, MarginType, check_mid_margin, check_strong_margin,
                       check_weak_margin, generate_margin_dataset, min_subset_mean)
from ..metrics import prec_at_k
from ..surrogates import (SurrogateKind, _avg_sweep, _max_sweep, _sorted_classes,
                          brute_force_eval, eval_avg, eval_max, eval_ramp, evaluate,
                          subgradient_avg, subgradient_max)

SLACK = 1e-9
POSITIVE_KINDS = (SurrogateKind.RAMP, SurrogateKind.MAX, SurrogateKind.AVG)
STRUCT_KINDS = (SurrogateKind.STRUCT, SurrogateKind.STRUCT_SCALED)

Evaluator = Callable[[np.ndarray, np.ndarray, int], float]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    checked: int
    counterexample: str | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name} ({self.checked} checks)"
        if self.counterexample:
            text += f"\n       counterexample: {self.counterexample}"
        return text


def default_evaluators() -> dict[SurrogateKind, Evaluator]:
    return {kind: (lambda s, y, k, _kind=kind: evaluate(_kind, s, y, k).value)
            for kind in SurrogateKind}


def _fmt(s, y, k) -> str:
    return f"s={np.asarray(s).tolist()} y={np.asarray(y).tolist()} k={k}"


def _labelings(n: int) -> Iterator[np.ndarray]:
    bits = np.arange(n)
    for mask in range(1 << n):
        yield ((mask >> bits) & 1).astype(np.int8)


def _sweep_scores(rng, n: int, tie_heavy: bool) -> np.ndarray:
    if tie_heavy:
        return rng.integers(-3, 4, size=n) * 0.5
    return rng.normal(scale=2.0, size=n)


def exhaustive_instances(max_n: int, seed: int = 0):
    """Every label vector for every n <= max_n, one seeded score vector each.

    Score vectors alternate between a tie-heavy half-integer grid and
    continuous draws.
    """
    for n in range(1, max_n + 1):
        for idx, y in enumerate(_labelings(n)):
            rng = np.random.default_rng([seed, n, idx])
            yield _sweep_scores(rng, n, tie_heavy=idx % 2 == 0), y


def random_instances(count: int, max_n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        y = (rng.random(n) < rng.uniform(0.05, 0.95)).astype(np.int8)
        if y.sum() == 0:
            y[rng.integers(n)] = 1
        yield _sweep_scores(rng, n, tie_heavy=bool(rng.integers(2))), y


def check_oracle_equivalence(max_n: int = 12, seed: int = 0,
                             evaluators: Mapping[SurrogateKind, Evaluator] | None = None,
                             tol: float = 1e-9) -> PropertyResult:
    evals = default_evaluators()
    evals.update(evaluators or {})
    checked = 0
    for s, y in exhaustive_instances(max_n, seed):
        n, n_plus = s.size, int(y.sum())
        for k in range(1, n + 1):
            kinds = STRUCT_KINDS + (POSITIVE_KINDS if k <= n_plus else ())
            for kind in kinds:
                got = evals[kind](s, y, k)
                want = brute_force_eval(kind, s, y, k).value
                checked += 1
                if not abs(got - want) <= tol:
                    return PropertyResult("efficient surrogates equal brute force", False, checked,
                                          f"{kind.value} {_fmt(s, y, k)}: "
                                          f"efficient={got!r} oracle={want!r}")
    return PropertyResult("efficient surrogates equal brute force", True, checked)


def _hierarchy_violation(s, y, k, evals):
    chain = [
        ("prec", float(prec_at_k(s, y, k))),
        ("ramp", evals[SurrogateKind.RAMP](s, y, k)),
        ("avg", evals[SurrogateKind.AVG](s, y, k)),
        ("max", evals[SurrogateKind.MAX](s, y, k)),
    ]
    for (na, a), (nb, b) in zip(chain, chain[1:]):
        if b - a < -SLACK:
            return f"{na}={a!r} > {nb}={b!r} at {_fmt(s, y, k)}"
    return None


def check_hierarchy(max_n: int = 12, random_count: int = 100_000, random_max_n: int = 64,
                    seed: int = 0,
                    evaluators: Mapping[SurrogateKind, Evaluator] | None = None) -> PropertyResult:
    """Prec@k <= ramp <= avg <= max on the exhaustive sweep plus random instances."""
    evals = default_evaluators()
    evals.update(evaluators or {})
    name = "Prec@k <= ramp <= avg <= max"
    checked = 0
    for s, y in exhaustive_instances(max_n, seed):
        for k in range(1, int(y.sum()) + 1):
            checked += 1
            bad = _hierarchy_violation(s, y, k, evals)
            if bad:
                return PropertyResult(name, False, checked, bad)
    rng = np.random.default_rng([seed, 1])
    for s, y in random_instances(random_count, random_max_n, seed + 1):
        k = int(rng.integers(1, int(y.sum()) + 1))
        checked += 1
        bad = _hierarchy_violation(s, y, k, evals)
        if bad:
            return PropertyResult(name, False, checked, bad)
    return PropertyResult(name, True, checked)


def _random_batch(rng, n_min=4, n_max=24, dim_max=6, integer=False) -> Batch:
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        y = (rng.random(n) < 0.4).astype(np.int8)
        if 0 < y.sum() < n:
            break
    dim = int(rng.integers(2, dim_max + 1))
    X = rng.integers(-2, 3, size=(n, dim)).astype(float) if integer else rng.normal(size=(n, dim))
    return Batch(X, y)


_CONVEX_KINDS = (SurrogateKind.AVG, SurrogateKind.MAX, SurrogateKind.STRUCT,
                 SurrogateKind.STRUCT_SCALED)


def check_convexity(trials: int = 2000, seed: int = 0) -> PropertyResult:
    rng = np.random.default_rng([seed, 2])
    name = "avg, max and struct are convex in w"
    checked = 0
    for t in range(trials):
        batch = _random_batch(rng, integer=t % 2 == 0)
        k = int(rng.integers(1, batch.n_plus + 1))
        w1, w2 = rng.normal(scale=2.0, size=(2, batch.dim))
        lam = float(rng.random())
        for kind in _CONVEX_KINDS:
            f = lambda w: evaluate(kind, batch.X @ w, batch.y, k).value  # noqa: E731
            lhs = f(lam * w1 + (1 - lam) * w2)
            rhs = lam * f(w1) + (1 - lam) * f(w2)
            checked += 1
            if lhs > rhs + SLACK:
                return PropertyResult(name, False, checked,
                                      f"{kind.value}: f(mix)={lhs!r} > {rhs!r}, lambda={lam}")
    return PropertyResult(name, True, checked)


_SURR = {"avg": (eval_avg, subgradient_avg), "max": (eval_max, subgradient_max)}


def check_subgradient_inequality(pairs: int = 1000, seed: int = 0) -> PropertyResult:
    """``f(w') >= f(w) + <g(w), w' - w>`` for the avg and max surrogates."""
    rng = np.random.default_rng([seed, 3])
    name = "subgradient inequality for avg and max"
    checked = 0
    for t in range(pairs):
        batch = _random_batch(rng, integer=t % 2 == 0)
        k = int(rng.integers(1, batch.n_plus + 1))
        w, w2 = rng.normal(scale=2.0, size=(2, batch.dim))
        if t % 5 == 0:
            w = np.zeros(batch.dim)
        for label, (ev, sub) in _SURR.items():
            g = sub(LinearModel(w), batch, k).g
            f_w = ev(batch.X @ w, batch.y, k).value
            f_w2 = ev(batch.X @ w2, batch.y, k).value
            checked += 1
            if f_w2 < f_w + g @ (w2 - w) - SLACK:
                return PropertyResult(name, False, checked,
                                      f"{label}: f(w')={f_w2!r} < {f_w + g @ (w2 - w)!r}")
    return PropertyResult(name, True, checked)


def _unique_argmax_and_no_ties(model, batch, k, kind, gap):
    s = score_batch(model, batch)
    srt = np.sort(s)
    if srt.size > 1 and np.min(np.diff(srt)) <= gap:
        return False
    pos, neg = _sorted_classes(s, batch.y)
    if kind == "avg":
        _, _, vals = _avg_sweep(s[pos], s[neg], k)
    else:
        _, vals = _max_sweep(s[pos], s[neg], k)
    if vals.size == 1:
        return True
    top2 = np.sort(vals)[-2:]
    return top2[1] - top2[0] > gap


def check_subgradient_fd(triples: int = 50, seed: int = 0, h: float = 1e-6,
                         rtol: float = 1e-4, atol: float = 1e-7) -> PropertyResult:
    """Subgradients match central finite differences where the surrogate is smooth."""
    rng = np.random.default_rng([seed, 4])
    name = "subgradients match central finite differences"
    checked = 0
    for kind, (ev, sub) in _SURR.items():
        found = 0
        while found < triples:
            batch = _random_batch(rng, n_min=6, n_max=30)
            k = int(rng.integers(1, batch.n_plus + 1))
            model = LinearModel(rng.normal(size=batch.dim))
            if not _unique_argmax_and_no_ties(model, batch, k, kind, 1e-3):
                continue
            found += 1
            g = sub(model, batch, k).g
            for j in range(batch.dim):
                e = np.zeros(batch.dim)
                e[j] = h
                fd = (ev(batch.X @ (model.w + e), batch.y, k).value
                      - ev(batch.X @ (model.w - e), batch.y, k).value) / (2 * h)
                checked += 1
                if abs(fd - g[j]) > max(rtol * abs(g[j]), atol):
                    return PropertyResult(name, False, checked,
                                          f"{kind} coord {j}: g={g[j]!r} fd={fd!r}")
    return PropertyResult(name, True, checked)


def check_margin_links(instances: int = 100, seed: int = 0, tol: float = 1e-9) -> PropertyResult:
    """Ramp/avg/max vanish on weak/mid/strong margin data under the planted model."""
    name = "surrogates vanish under their margin condition (gamma = 1)"
    links = [(MarginType.WEAK, eval_ramp), (MarginType.MID, eval_avg),
             (MarginType.STRONG, eval_max)]
    rng = np.random.default_rng([seed, 5])
    checked = 0
    for mtype, ev in links:
        for i in range(instances):
            n = int(rng.integers(12, 80))
            n_plus = int(rng.integers(4, max(5, n // 2)))
            k = int(rng.integers(1, n_plus - 1)) if n_plus > 2 else 1
            kind = MarginKind(mtype, 1.0, k)
            data = generate_margin_dataset(kind, n, n_plus, int(rng.integers(2, 8)),
                                           seed=[seed, i, n])
            s = score_batch(data.model, data.batch)
            eval_k = k if mtype is not MarginType.STRONG else int(rng.integers(1, n_plus + 1))
            v = ev(s, data.batch.y, eval_k).value
            checked += 1
            if abs(v) > tol:
                return PropertyResult(name, False, checked,
                                      f"{mtype.value}: surrogate={v!r} at {_fmt(s, data.batch.y, eval_k)}")
    return PropertyResult(name, True, checked)


def check_margin_hierarchy(instances: int = 10_000, seed: int = 0) -> PropertyResult:
    """strong => mid => weak at equal gamma, for every k <= n_plus."""
    rng = np.random.default_rng([seed, 6])
    name = "strong margin => mid margin => weak margin"
    checked = 0
    for _ in range(instances):
        n = int(rng.integers(2, 16))
        y = (rng.random(n) < 0.5).astype(np.int8)
        if y.sum() == 0 or y.sum() == n:
            continue
        s = rng.normal(size=n)
        s[y == 1] += rng.uniform(0, 3)
        gamma = float(rng.uniform(0.05, 1.5))
        strong = check_strong_margin(s, y, gamma).satisfied
        for k in range(1, int(y.sum()) + 1):
            mid = check_mid_margin(s, y, k, gamma).satisfied
            weak = check_weak_margin(s, y, k, gamma).satisfied
            checked += 1
            if (strong and not mid) or (mid and not weak):
                return PropertyResult(name, False, checked,
                                      f"strong={strong} mid={mid} weak={weak} gamma={gamma} "
                                      f"{_fmt(s, y, k)}")
    return PropertyResult(name, True, checked)


def _min_subset_mean_exhaustive(x, size):
    return min(sum(c) / size for c in itertools.combinations(x, size))


def check_rank_inequality(samples: int = 1000, max_size: int = 10, seed: int = 0) -> PropertyResult:
    """Smallest k-subset mean never exceeds the smallest k'-subset mean for k <= k'."""
    rng = np.random.default_rng([seed, 7])
    name = "min k-subset mean <= min k'-subset mean (k <= k')"
    checked = 0
    for _ in range(samples):
        n = int(rng.integers(1, max_size + 1))
        x = rng.integers(-3, 4, size=n).tolist()
        mins = [None] + [_min_subset_mean_exhaustive(x, size) for size in range(1, n + 1)]
        for size in range(1, n + 1):
            checked += 1
            if abs(min_subset_mean(x, size) - mins[size]) > 1e-12:
                return PropertyResult(name, False, checked,
                                      f"min_subset_mean(x={x}, {size}) != exhaustive {mins[size]}")
        for k in range(1, n + 1):
            for kp in range(k, n + 1):
                checked += 1
                if mins[k] > mins[kp] + 1e-12:
                    return PropertyResult(name, False, checked, f"x={x} k={k} k'={kp}")
    return PropertyResult(name, True, checked)


def run_all(max_n: int = 12, random_count: int = 100_000, seed: int = 0,
            evaluators: Mapping[SurrogateKind, Evaluator] | None = None) -> list[PropertyResult]:
    return [
        check_oracle_equivalence(max_n, seed, evaluators),
        check_hierarchy(max_n, random_count, seed=seed, evaluators=evaluators),
        check_convexity(seed=seed),
        check_subgradient_inequality(seed=seed),
        check_subgradient_fd(seed=seed),
        check_margin_links(seed=seed),
        check_margin_hierarchy(seed=seed),
        check_rank_inequality(seed=seed),
    ]
