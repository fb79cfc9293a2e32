"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 internal error.
Errors are printed as one line, ``error[<kind>]: <message>``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import HetmedError, InputError
from .estimators import SimexConfig, estimate_slope
from .inference import analyze
from .io import (
    emit_plot_data, emit_result, parse_aggregate_csv, parse_individual_csv, parse_weights,
    records_to_json, records_to_text, write_aggregate_csv, write_tree,
)
from .subgroups import GroupDefinition, TreeConfig, discover, estimate_group_effects, group_by_rules

ALL_ESTIMATORS = ("naive", "attenuation", "bces", "bces_pairs", "bces_wild", "simex")
ESTIMATOR_CHOICES = ALL_ESTIMATORS + ("polynomial", "adjusted", "adjusted_simex", "all")
CI_MODES = {"paper": "paper_literal", "product": "endpoint_product"}

_DEFAULTS = {
    "seed": 0, "alpha": 0.05, "ci_mode": "product", "estimator": "simex", "out": None,
    "weights": None, "format": "json",
}


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _alpha(text):
    value = float(text)
    if not 0 < value <= 0.5:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 0.5]")
    return value


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="random seed (default 0)")
    g.add_argument("--alpha", type=_alpha, default=argparse.SUPPRESS, help="test level (default 0.05)")
    g.add_argument("--ci-mode", choices=sorted(CI_MODES), default=argparse.SUPPRESS,
                   help="ACME interval construction (default product)")
    g.add_argument("--estimator", choices=ESTIMATOR_CHOICES, default=argparse.SUPPRESS,
                   help="slope estimator (default simex)")
    g.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    g.add_argument("--weights", type=Path, default=argparse.SUPPRESS,
                   help="CSV with group_id,weight overriding the sample-size weights")
    g.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS,
                   help="stdout format (default json)")
    return p


def _simex_options(p):
    g = p.add_argument_group("estimator options")
    g.add_argument("--simex-B", type=int, default=200, help="replicates per SIMEX noise level")
    g.add_argument("--simex-grid", type=_floats, default=(0.0, 0.5, 1.0, 1.5, 2.0),
                   help="comma-separated noise levels starting at 0")
    g.add_argument("--simex-se", choices=("jackknife", "bootstrap"), default="jackknife")
    g.add_argument("--bootstrap-B", type=int, default=999, help="BCES bootstrap replicates")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="hetmed", parents=[common],
        description="Causal mediation effects from heterogeneous subgroup treatment effects.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", parents=[common], help="estimate the ACME from aggregate subgroup effects")
    est.add_argument("input", type=Path, help="CSV with group_id,gamma_hat,se_gamma,tau_hat,se_tau,n")
    _simex_options(est)

    disc = sub.add_parser("discover", parents=[common],
                          help="find subgroups in unit-level data, then estimate the ACME")
    disc.add_argument("input", type=Path, help="CSV with treatment,mediator,outcome and covariates")
    disc.add_argument("--target", choices=("mediator", "outcome"), default="mediator")
    disc.add_argument("--min-leaf", type=int, default=50)
    disc.add_argument("--max-depth", type=int, default=4)
    disc.add_argument("--honest-fraction", type=float, default=0.5)
    disc.add_argument("--min-split-z", type=float, default=4.0)
    disc.add_argument("--holdout-fraction", type=float, default=1 / 3,
                      help="share of units held out for effect estimation (0 reuses all units)")
    disc.add_argument("--group-column", default="group")
    disc.add_argument("--rule", action="append", default=[], metavar="NAME=EXPR",
                      help="explicit group, e.g. 'young=age<=30'; conjunctions with '&'")
    disc.add_argument("--use-labels", action="store_true", help="group by the label column instead of a tree")
    _simex_options(disc)

    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo experiments")
    sim.add_argument("experiment", choices=("table2", "calibrate", "power"))
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--kappas", type=_floats, default=(0, 1, 2, 3, 4))
    sim.add_argument("--n-per-group", type=int, default=500)
    sim.add_argument("--K", dest="K_list", type=_ints, default=(5, 10, 30, 50, 100))
    sim.add_argument("--beta", type=float, default=0.0)
    sim.add_argument("--estimators", default="bces,bces_pairs,bces_wild,simex")
    sim.add_argument("--base-groups", type=int, default=10)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--k-max", type=int, default=10)

    sub.add_parser("version", parents=[common], help="print the version")
    return parser


def _resolve(args):
    for k, v in _DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    return args


def _simex_config(args):
    return SimexConfig(zeta_grid=args.simex_grid, B=args.simex_B, seed=args.seed, se_method=args.simex_se)


def _estimators(args):
    return ALL_ESTIMATORS if args.estimator == "all" else (args.estimator,)


def _run_estimators(dataset, args):
    results = {}
    first_error = None
    names = _estimators(args)
    config = _simex_config(args)
    ci_mode = CI_MODES[args.ci_mode]
    for name in names:
        try:
            fit = estimate_slope(dataset, name, seed=args.seed, simex_config=config, bootstrap_B=args.bootstrap_B)
            results[name] = analyze(dataset, fit, args.alpha, ci_mode)
        except HetmedError as exc:
            first_error = first_error or exc
            results[name] = f"error[{exc.kind}]: {exc}"
    if all(isinstance(r, str) for r in results.values()):
        raise first_error
    return results


def _meta(args, **extra):
    meta = {
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "alpha": args.alpha,
        "ci_mode": CI_MODES[args.ci_mode],
        "estimator": args.estimator,
    }
    for key in ("simex_B", "simex_grid", "simex_se", "bootstrap_B"):
        if hasattr(args, key):
            value = getattr(args, key)
            meta[key] = list(value) if isinstance(value, tuple) else value
    if getattr(args, "input", None) is not None:
        meta["input"] = Path(args.input).name
    if args.weights is not None:
        meta["weights"] = Path(args.weights).name
    meta.update(extra)
    return meta


def _emit(args, results, meta, dataset=None):
    text_json = emit_result(results, "json", meta)
    text_table = emit_result(results, "table", meta)
    if args.out is None:
        sys.stdout.write(text_json if args.format == "json" else text_table)
        return
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(text_json, encoding="utf-8")
        (out / "result.tsv").write_text(text_table, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"unwritable path: {out} ({exc.strerror})") from None
    if dataset is not None:
        for name, r in results.items():
            if not isinstance(r, str):
                emit_plot_data(dataset, r.beta_fit, out, prefix=f"plot_{name}")
    sys.stdout.write(text_json if args.format == "json" else text_table)


def cmd_estimate(args):
    if not args.input.exists():
        raise InputError(f"cannot read {args.input}: no such file")
    dataset = parse_aggregate_csv(args.input, args.weights)
    results = _run_estimators(dataset, args)
    _emit(args, results, _meta(args, K=dataset.K), dataset)


def cmd_discover(args):
    if not args.input.exists():
        raise InputError(f"cannot read {args.input}: no such file")
    data = parse_individual_csv(args.input, args.group_column)
    tree = None
    if args.rule:
        groups = []
        for spec in args.rule:
            name, sep, expr = spec.partition("=")
            if not sep:
                raise InputError(f"rule must look like NAME=EXPR, got {spec!r}")
            groups.append(GroupDefinition.parse(name.strip(), expr))
        dataset = estimate_group_effects(data, group_by_rules(data, groups))
    elif args.use_labels:
        dataset = estimate_group_effects(data)
    else:
        config = TreeConfig(args.min_leaf, args.max_depth, args.honest_fraction, args.seed, args.min_split_z)
        tree, dataset = discover(data, config, args.target, args.holdout_fraction)
    if args.weights is not None:
        dataset = dataset.with_weights(parse_weights(args.weights, dataset.group_ids))
    results = _run_estimators(dataset, args)
    if args.out is not None:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            if tree is not None:
                write_tree(tree, out / "tree.txt")
            write_aggregate_csv(dataset, out / "effects.csv")
        except OSError as exc:
            raise InputError(f"unwritable path: {out} ({exc.strerror})") from None
    _emit(args, results, _meta(args, K=dataset.K, n_units=data.n), dataset)


def cmd_simulate(args):
    from . import simulation

    if args.experiment == "table2":
        rows = simulation.run_table2(args.kappas, args.reps or 50, args.seed, args.n_per_group,
                                     alpha=args.alpha)
        extra = {"kappas": list(args.kappas), "n_per_group": args.n_per_group, "reps": args.reps or 50}
    elif args.experiment == "calibrate":
        estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
        rows = simulation.run_calibration(args.beta, args.K_list, args.reps or 500, estimators,
                                          args.alpha, args.seed)
        extra = {"beta": args.beta, "K": list(args.K_list), "estimators": list(estimators),
                 "reps": args.reps or 500}
    else:
        est = "simex" if args.estimator == "all" else args.estimator
        curve = simulation.power_curve(args.base_groups, args.n, args.k_max, args.reps or 500, args.seed,
                                       beta=args.beta if args.beta else 2.0, estimator=est, alpha=args.alpha)
        rows = [simulation.PowerRow(k, a, g) for k, a, g in zip(curve.k, curve.add_groups, curve.grow_groups)]
        extra = {"base_groups": args.base_groups, "n": args.n, "k_max": args.k_max,
                 "reps": curve.reps, "beta": curve.beta, "estimator": est}
    meta = {"version": __version__, "command": f"simulate {args.experiment}", "seed": args.seed,
            "alpha": args.alpha, **extra}
    text_tsv = "".join(f"# {k}={meta[k]}\n" for k in sorted(meta)) + records_to_text(rows)
    text_json = records_to_json(rows, meta)
    if args.out is not None:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{args.experiment}.tsv").write_text(text_tsv, encoding="utf-8")
            (out / f"{args.experiment}.json").write_text(text_json, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"unwritable path: {out} ({exc.strerror})") from None
    sys.stdout.write(text_json if args.format == "json" else text_tsv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
    except SystemExit as exc:
        # argparse usage errors are input errors
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "version":
            print(f"hetmed {__version__}")
        elif args.command == "estimate":
            cmd_estimate(args)
        elif args.command == "discover":
            cmd_discover(args)
        else:
            cmd_simulate(args)
    except HetmedError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"error[internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
