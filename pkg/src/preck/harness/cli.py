"""Command-line entry point: ``preck <subcommand> [flags]``.

Exit codes: 0 success, 1 a property or assertion failed (or every batch was
skipped), 2 usage error or unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..dataio import LibsvmFormatError, load_libsvm, rescale_max_norm, save_libsvm
from ..learners import AllBatchesSkipped
from ..margins import MarginType
from . import counterexample, uc, verify
from .experiments import (ALL_METHODS, batch_length_variation, rows_to_csv, run_grid,
                          save_models, synthetic_dataset)

log = logging.getLogger("preck")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
_MARGIN_KINDS = [m.value for m in MarginType]


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _add_synthetic_flags(p: argparse.ArgumentParser, required_kind: bool = False) -> None:
    g = p.add_argument_group("synthetic data")
    g.add_argument("--synthetic", choices=_MARGIN_KINDS, required=required_kind,
                   help="generate a margin dataset instead of reading --data")
    g.add_argument("--n", type=int, default=10000, help="points (default 10000)")
    g.add_argument("--n-plus", type=int, default=500, help="positives (default 500)")
    g.add_argument("--dim", type=int, default=20)
    g.add_argument("--margin-k", type=int, default=250,
                   help="k of the weak/mid margin (default 250)")
    g.add_argument("--gamma", type=float, default=1.0)
    g.add_argument("--R", type=float, default=1.0, help="feature norm bound")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="LIBSVM file")
    p.add_argument("--rescale", type=float, metavar="R",
                   help="scale --data so the largest feature norm equals R")
    kgroup = p.add_mutually_exclusive_group(required=True)
    kgroup.add_argument("--k", type=int)
    kgroup.add_argument("--kappa", type=float)
    p.add_argument("--passes", type=int, default=25)
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta0", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--workers", type=int, default=1)
    _add_synthetic_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="preck", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one method over seeded splits")
    p.add_argument("--method", required=True, choices=ALL_METHODS)
    p.add_argument("--b", type=int, default=500, help="batch length")
    p.add_argument("--model-out", help="write the trained models as JSON")
    _add_run_flags(p)

    p = sub.add_parser("bench", help="compare methods under a shared split schedule")
    p.add_argument("--method", nargs="+", default=list(ALL_METHODS), choices=ALL_METHODS)
    p.add_argument("--b", type=int, nargs="+", default=[500],
                   help="one or more batch lengths")
    _add_run_flags(p)

    p = sub.add_parser("counterexample", help="scaled struct surrogate vs Prec@1 on a 1-D instance")
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--max-n", type=int, default=12, help="largest n in the exhaustive sweep")
    p.add_argument("--random", type=int, default=100_000,
                   help="random instances for the hierarchy check")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("uc-study", help="sample-vs-population deviation as b grows")
    p.add_argument("--n", type=int, default=20000, help="population size")
    p.add_argument("--b", type=int, nargs="+", default=[125, 500, 2000])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--models", type=int, default=16)
    p.add_argument("--kappa", type=float, default=0.25)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("make-data", help="write a margin-realizable dataset in LIBSVM format")
    _add_synthetic_flags(p, required_kind=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="LIBSVM output path")
    return parser


def _dataset(args):
    if (args.data is None) == (args.synthetic is None):
        raise UsageError("give exactly one of --data and --synthetic")
    if args.data is not None:
        try:
            ds = load_libsvm(args.data)
        except OSError as exc:
            raise UsageError(f"cannot read {args.data}: {exc.strerror}") from None
        except LibsvmFormatError as exc:
            raise UsageError(f"{args.data}: {exc}") from None
        if args.rescale is not None:
            if args.rescale <= 0:
                raise UsageError("--rescale must be positive")
            ds = rescale_max_norm(ds, args.rescale)
        return ds, None
    if args.rescale is not None:
        raise UsageError("--rescale applies to --data only")
    return synthetic_dataset(args.synthetic, n=args.n, n_plus=args.n_plus, dim=args.dim,
                             k=args.margin_k, gamma=args.gamma, R=args.R, seed=args.seed)


def _run(args, methods, batch_lens):
    ds, planted = _dataset(args)
    log.info("dataset %s: n=%d n_plus=%d dim=%d", ds.name, ds.n, ds.n_plus, ds.dim)
    return run_grid(ds, methods, k=args.k, kappa=args.kappa, batch_lens=batch_lens,
                    passes=args.passes, splits=args.splits, seed=args.seed, eta0=args.eta0,
                    radius=args.radius, train_fraction=args.train_fraction,
                    workers=args.workers, planted=planted)


def cmd_train(args) -> int:
    rows, models = _run(args, [args.method], [args.b])
    _emit(rows_to_csv(rows), args.out)
    if args.model_out:
        save_models(args.model_out, args.method, rows, models)
    return EXIT_OK


def cmd_bench(args) -> int:
    rows, _ = _run(args, args.method, args.b)
    _emit(rows_to_csv(rows), args.out)
    if len(args.b) > 1:
        for method, var in batch_length_variation(rows).items():
            flag = "" if var < 0.05 else "  (above 5%)"
            print(f"{method}: relative accuracy variation across b = {var:.4f}{flag}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    rows = counterexample.evaluate_grid()
    _emit(counterexample.format_table(rows), args.out)
    checks = counterexample.check_assertions(rows)
    for label, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}", file=sys.stderr)
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_verify(args, evaluators=None) -> int:
    if args.max_n < 1 or args.random < 0:
        raise UsageError("--max-n must be positive and --random non-negative")
    results = verify.run_all(max_n=args.max_n, random_count=args.random, seed=args.seed,
                             evaluators=evaluators)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_uc_study(args) -> int:
    cfg = uc.UCConfig(n=args.n, batch_lens=tuple(args.b), trials=args.trials,
                      models=args.models, kappa=args.kappa, dim=args.dim, seed=args.seed)
    _emit(uc.rows_to_csv(uc.uc_study(cfg)), args.out)
    return EXIT_OK


def cmd_make_data(args) -> int:
    ds, _ = synthetic_dataset(args.synthetic, n=args.n, n_plus=args.n_plus, dim=args.dim,
                              k=args.margin_k, gamma=args.gamma, R=args.R, seed=args.seed)
    save_libsvm(ds, args.out)
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "bench": cmd_bench,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
    "uc-study": cmd_uc_study,
    "make-data": cmd_make_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"preck {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AllBatchesSkipped as exc:
        print(f"preck {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
