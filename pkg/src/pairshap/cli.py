"""Command-line interface.

Subcommands: exact, sample, asymptotics, experiment, blocks, bilinear-test.
Data goes to stdout (JSON by default, TSV where tabular); error names and
messages go to stderr.  Exit codes: 0 success, 2 bad input or request
outside the supported range, 3 numerical failure.  Every randomized
subcommand requires an explicit --seed.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import asymptotics, exact, experiments, kernel, permutation
from .errors import InputError, NumericError, SchemaError
from .games import GameEvaluator, parse_spec


def _load_spec(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read value function file {path!r}: {exc}") from exc
    return parse_spec(text)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path!r}: {exc}") from exc


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_exact(args) -> int:
    spec = _load_spec(args.vf)
    routes = {
        "subset": exact.shapley_subset,
        "permutation": exact.shapley_all_permutations,
        "kernel": exact.shapley_kernel_exact,
    }
    chosen = list(routes) if args.method == "all" else [args.method]
    results = {name: routes[name](GameEvaluator(spec)).phi for name in chosen}
    if args.tsv:
        print("method\tj\tphi")
        for name in chosen:
            for j, value in enumerate(results[name], start=1):
                print(f"{name}\t{j}\t{float(value)!r}")
        return 0
    payload = {"q": spec.q, "phi": {name: [float(v) for v in results[name]] for name in chosen}}
    if len(chosen) > 1:
        worst = 0.0
        vectors = list(results.values())
        for a in range(len(vectors)):
            for b in range(a + 1, len(vectors)):
                worst = max(worst, float(abs(vectors[a] - vectors[b]).max()))
        payload["max_pairwise_discrepancy"] = worst
    _emit(payload)
    return 0


def _cmd_sample(args) -> int:
    spec = _load_spec(args.vf)
    ev = GameEvaluator(spec)
    if args.method == "kernel":
        vector, batch = kernel.estimate_kernel(ev, args.n, paired=args.paired, seed=args.seed)
    else:
        vector = permutation.estimate_permutation(ev, args.n, paired=args.paired, seed=args.seed)
        batch = None
    evaluations = ev.eval_count

    if args.stderr_from == "exact":
        fresh = GameEvaluator(spec)
        if args.method == "kernel":
            report = asymptotics.kernel_matrices_exact(fresh, paired=args.paired)[2]
        else:
            report = asymptotics.permutation_covariance_exact(fresh, paired=args.paired)
    else:
        if args.method == "kernel":
            report = asymptotics.kernel_matrices_plugin(batch, vector)[2]
        else:
            report = asymptotics.permutation_covariance_plugin(
                ev, args.n, seed=args.seed, paired=args.paired
            )
    stderr_vec = asymptotics.predicted_stderr(report, args.n)

    _emit(
        {
            "q": spec.q,
            "method": vector.method_tag,
            "n": args.n,
            "seed": args.seed,
            "phi": [float(v) for v in vector.phi],
            "stderr": [float(v) for v in stderr_vec],
            "stderr_source": report.provenance,
            "evaluations": evaluations,
        }
    )
    return 0


def _plugin_report(spec, method: str, n: int, seed):
    ev = GameEvaluator(spec)
    if method == "permutation-paired":
        return asymptotics.permutation_covariance_plugin(ev, n, seed=seed, paired=True)
    paired = method == "kernel-paired"
    vector, batch = kernel.estimate_kernel(ev, n, paired=paired, seed=seed)
    return asymptotics.kernel_matrices_plugin(batch, vector)[2]


def _cmd_asymptotics(args) -> int:
    spec = _load_spec(args.vf)
    if args.plugin is not None:
        if args.seed is None:
            raise SchemaError("--plugin requires --seed")
        report = _plugin_report(spec, args.method, args.plugin, args.seed)
    else:
        ev = GameEvaluator(spec)
        if args.method == "permutation-paired":
            report = asymptotics.permutation_covariance_exact(ev, paired=True)
        else:
            report = asymptotics.kernel_matrices_exact(ev, paired=args.method == "kernel-paired")[2]
    payload = asymptotics.report_to_dict(report)
    if args.adjusted:
        payload["adjusted_eigenvalues"] = [
            float(v) for v in asymptotics.dimension_adjusted_eigs(report)
        ]
    _emit(payload)
    return 0


def _cmd_experiment(args) -> int:
    doc = _load_json(args.config)
    summary = experiments.run_from_config(doc, jobs=args.jobs)
    _emit(summary)
    return 0


def _cmd_blocks(args) -> int:
    spec = _load_spec(args.vf)
    ev = GameEvaluator(spec)
    if args.plugin is not None:
        if args.seed is None:
            raise SchemaError("--plugin requires --seed")
        report = asymptotics.permutation_covariance_plugin(ev, args.plugin, seed=args.seed, paired=True)
    else:
        report = asymptotics.permutation_covariance_exact(ev, paired=True)
    blocks = asymptotics.detect_blocks(report, args.threshold)
    _emit(
        {
            "q": spec.q,
            "threshold": args.threshold,
            "provenance": report.provenance,
            "blocks": [[j + 1 for j in block] for block in blocks],
        }
    )
    return 0


def _cmd_bilinear_test(args) -> int:
    spec = _load_spec(args.vf)
    verdict = kernel.bilinearity_test(GameEvaluator(spec), args.trials, args.tol, seed=args.seed)
    _emit(
        {
            "q": spec.q,
            "trials": verdict.trials,
            "tol": verdict.tol,
            "consistent": verdict.consistent,
            "max_discrepancy": verdict.max_discrepancy,
            "verdict": "bilinear-consistent" if verdict.consistent else "not-bilinear-consistent",
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairshap",
        description="Exact and sampled Shapley values with dispersion diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact Shapley values by one or all routes")
    p.add_argument("--vf", required=True, help="value function JSON file")
    p.add_argument("--method", choices=["subset", "permutation", "kernel", "all"], default="all")
    p.add_argument("--tsv", action="store_true", help="tabular TSV instead of JSON")
    p.set_defaults(handler=_cmd_exact)

    p = sub.add_parser("sample", help="sampling estimate with standard errors")
    p.add_argument("--vf", required=True)
    p.add_argument("--method", choices=["kernel", "permutation"], required=True)
    p.add_argument("--paired", action="store_true")
    p.add_argument("--n", type=int, required=True, help="draws (pairs when --paired)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stderr-from", choices=["exact", "plugin"], default="exact", dest="stderr_from")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("asymptotics", help="asymptotic covariance report")
    p.add_argument("--vf", required=True)
    p.add_argument(
        "--method", choices=["kernel", "kernel-paired", "permutation-paired"], required=True
    )
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--exact", action="store_true", help="enumerate exactly (default)")
    grp.add_argument("--plugin", type=int, metavar="N", help="plug-in estimate from N draws")
    p.add_argument("--seed", type=int, help="required with --plugin")
    p.add_argument("--adjusted", action="store_true", help="also report cost-adjusted eigenvalues")
    p.set_defaults(handler=_cmd_asymptotics)

    p = sub.add_parser("experiment", help="run an experiment config and write CSV")
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for replicates")
    p.set_defaults(handler=_cmd_experiment)

    p = sub.add_parser("blocks", help="player groups from the paired-walk covariance")
    p.add_argument("--vf", required=True)
    p.add_argument("--threshold", type=float, required=True)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--exact", action="store_true", help="enumerate exactly (default)")
    grp.add_argument("--plugin", type=int, metavar="N", help="plug-in estimate from N draws")
    p.add_argument("--seed", type=int, help="required with --plugin")
    p.set_defaults(handler=_cmd_blocks)

    p = sub.add_parser("bilinear-test", help="probe basis invariance of paired solves")
    p.add_argument("--vf", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(handler=_cmd_bilinear_test)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
