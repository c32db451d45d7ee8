"""Acceptance gates.  Each test prints one PASS/FAIL line, visible even under capture.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time
import warnings

import numpy as np
import pytest

from preck.harness import counterexample as ce
from preck.harness import uc, verify
from preck.harness.experiments import batch_length_variation, run_grid, synthetic_dataset
from preck.learners import LearnerConfig, train
from preck.margins import MarginKind, margin_stream, mistake_bound


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n[criterion {number}] {status}: {title}" + (f" ({detail})" if detail else ""))
        return ok
    return emit


def test_c1_oracle_equivalence(report):
    start = time.perf_counter()
    res = verify.check_oracle_equivalence(max_n=12, tol=1e-9)
    elapsed = time.perf_counter() - start
    ok = res.passed and elapsed < 120
    report(1, "efficient surrogates equal brute force for every n <= 12 and feasible k", ok,
           f"{res.checked} comparisons in {elapsed:.1f}s" + (f"; {res.counterexample}"
                                                            if res.counterexample else ""))
    assert res.passed, res.counterexample
    assert elapsed < 120


def test_c2_hierarchy(report):
    res = verify.check_hierarchy(max_n=12, random_count=100_000, random_max_n=64)
    report(2, "Prec@k <= ramp <= avg <= max on the exhaustive sweep plus 1e5 random instances",
           res.passed, f"{res.checked} instances")
    assert res.passed, res.counterexample


def test_c3_counterexample(report):
    checks = ce.check_assertions(ce.evaluate_grid())
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(3, "scaled struct surrogate counterexample, conditions (a) to (d)", ok,
           "all four hold" if ok else f"failed: {failed}")
    assert ok, failed


def test_c4_consistency_at_zero(report):
    res = verify.check_margin_links(instances=100, tol=1e-9)
    report(4, "ramp/avg/max vanish at the planted model under weak/mid/strong margins",
           res.passed, f"{res.checked} instances")
    assert res.passed, res.counterexample


def test_c5_mistake_bounds(report):
    start = time.perf_counter()
    worst = 0.0
    violations = []
    runs = 0
    for method, mtype in (("perceptron-avg", "mid"), ("perceptron-max", "strong")):
        for gamma in (0.5, 1.0, 2.0):
            R = max(1.0, gamma)
            for k in range(1, 6):
                bound = mistake_bound(k, R, gamma)
                for seed in range(10):
                    stream = margin_stream(MarginKind(mtype, gamma, k), 200, 50, 10, 5,
                                           seed=seed, R=R)
                    rep = train(LearnerConfig(method, k=k), [d.batch for d in stream])
                    runs += 1
                    worst = max(worst, rep.cumulative / bound)
                    # integer mistake count against the bound's floor
                    if rep.cumulative > int(np.floor(bound + 1e-9)):
                        violations.append((method, gamma, k, seed, rep.cumulative, bound))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 300
    report(5, "cumulative mistakes within 4kR^2/gamma^2 for both perceptrons", ok,
           f"{runs} runs, worst mistakes/bound = {worst:.3f}, {elapsed:.1f}s")
    assert not violations, violations[:5]
    assert elapsed < 300


def test_c6_subgradients(report):
    fd = verify.check_subgradient_fd(triples=50, rtol=1e-4, atol=1e-7)
    ineq = verify.check_subgradient_inequality(pairs=1000)
    ok = fd.passed and ineq.passed
    report(6, "subgradients match finite differences and satisfy the first-order inequality",
           ok, f"{fd.checked} coordinates, {ineq.checked} pairs")
    assert fd.passed, fd.counterexample
    assert ineq.passed, ineq.counterexample


def test_c7_uniform_convergence(report):
    start = time.perf_counter()
    cfg = uc.UCConfig(n=20000, batch_lens=(125, 500, 2000), trials=200)
    rows = uc.uc_study(cfg)
    checks = uc.decay_checks(rows, min_ratio=2.0)
    elapsed = time.perf_counter() - start
    med = {(r.measure, r.b): r.median_dev for r in rows}
    ratios = ", ".join(f"{m} {med[(m, 125)] / med[(m, 2000)]:.2f}" for m in uc.MEASURES)
    ok = all(checks.values()) and elapsed < 300
    report(7, "median deviation decreasing in b with dev(125)/dev(2000) >= 2", ok,
           f"ratios: {ratios}; {elapsed:.1f}s")
    assert all(checks.values()), checks
    assert elapsed < 300


def test_c8_end_to_end_bench(report):
    start = time.perf_counter()
    ds, planted = synthetic_dataset("weak", n=10000, n_plus=500, dim=20, k=250, gamma=1.0,
                                    seed=0)
    methods = ["perceptron-avg", "perceptron-max", "sgd-avg", "sgd-max"]
    rows, _ = run_grid(ds, methods, kappa=0.25, batch_lens=(500,), passes=25, splits=5,
                       seed=0, planted=planted)
    elapsed = time.perf_counter() - start
    loss = {m: [r.test_prec_loss for r in rows if r.method == m] for m in methods}
    avg_zero = all(v == 0.0 for m in ("perceptron-avg", "sgd-avg") for v in loss[m])
    ok = avg_zero and elapsed < 600 and len(rows) == 20
    summary = ", ".join(f"{m} mean loss {np.mean(v):.4f}" for m, v in loss.items())
    report(8, "four-method bench at kappa 0.25, b 500, 25 passes, 5 splits", ok,
           f"{summary}; {elapsed:.1f}s")

    # soft target: accuracy spread across batch lengths
    sweep, _ = run_grid(ds, ["perceptron-avg", "sgd-avg"], kappa=0.25,
                        batch_lens=(100, 500, 1000), passes=25, splits=5, seed=0)
    var = batch_length_variation(sweep)
    soft_ok = all(v < 0.05 for v in var.values())
    detail = ", ".join(f"{m} {v:.4f}" for m, v in var.items())
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        if not soft_ok:
            warnings.warn(f"batch-length accuracy variation above 5%: {detail}")
    report("8 (soft)", "batch-length sweep over b in {100, 500, 1000}",
           soft_ok, f"relative variation {detail}" + ("" if soft_ok else ", warning only"))

    assert avg_zero, loss
    assert elapsed < 600


def test_c9_margin_hierarchy_and_rank_inequality(report):
    hier = verify.check_margin_hierarchy(instances=10_000)
    rank = verify.check_rank_inequality(samples=1000, max_size=10)
    ok = hier.passed and rank.passed
    report(9, "strong => mid => weak margins and the subset-mean rank inequality", ok,
           f"{hier.checked} margin checks, {rank.checked} rank checks")
    assert hier.passed, hier.counterexample
    assert rank.passed, rank.counterexample

