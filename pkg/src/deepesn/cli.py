"""Command-line front-end: dataset generation, single-model evaluation, benchmark runs.

Exit codes: 0 on success, 1 on runtime failure or partial completion,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .datasets import (
    Dataset,
    DivergenceError,
    MGParams,
    generate_mackey_glass,
    generate_narma10,
    load_laser,
    save_series,
)
from .experiment import (
    FULL_BUDGET,
    REDUCED_BUDGET,
    SearchSpace,
    evaluate_trial,
    format_report,
    run_benchmark_suite,
    trial_log_table,
)
from .topology import ScalingSpec, parse_topology

LASER_PATH_ENV = "DEEPESN_LASER_PATH"
GENERATED_TASKS = ("narma10", "mg17", "mg30")
ALL_TASKS = GENERATED_TASKS + ("laser",)
ALL_TOPOLOGIES = ("sparse", "permutation", "ring", "chain")
SEARCH_RHO_MAX = 1.0


class UsageError(Exception):
    """Invalid invocation detected after argument parsing."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _csv(text: str) -> list[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _mg_params(task: str) -> MGParams:
    return MGParams(tau=17.0) if task == "mg17" else MGParams(tau=30.0)


def make_task(
    name: str,
    *,
    seed: int,
    length: int,
    laser_path: str | None = None,
    train_len: int = 5000,
    washout: int = 100,
    validation_len: int = 1000,
) -> tuple[Dataset, dict]:
    """Build one benchmark dataset plus its generator metadata.

    NARMA10 occasionally diverges for an unlucky seed; the next seed is
    tried (and recorded) until generation succeeds.
    """
    splits = dict(train_len=train_len, washout=washout, validation_len=validation_len)
    if name == "narma10":
        attempt = seed
        while True:
            try:
                dataset = generate_narma10(length, attempt, **splits)
                break
            except DivergenceError:
                print(f"warning: narma10 seed {attempt} diverged, retrying with {attempt + 1}",
                      file=sys.stderr)
                attempt += 1
        meta = {"dataset.narma10.seed": attempt, "dataset.narma10.length": length}
        return dataset, meta
    if name in ("mg17", "mg30"):
        params = _mg_params(name)
        dataset = generate_mackey_glass(params, length, name=name, **splits)
        meta = {
            f"dataset.{name}.tau": params.tau,
            f"dataset.{name}.step": params.step,
            f"dataset.{name}.subsample": params.subsample,
            f"dataset.{name}.initial_history": params.initial_history,
            f"dataset.{name}.discard": params.discard,
            f"dataset.{name}.length": length,
        }
        return dataset, meta
    if name == "laser":
        if not laser_path:
            raise UsageError(
                f"the laser task needs a data file: pass --laser-path or set {LASER_PATH_ENV}"
            )
        dataset = load_laser(laser_path, **splits)
        return dataset, {"dataset.laser.path": str(laser_path), "dataset.laser.samples": len(dataset) + 1}
    raise UsageError(f"unknown task {name!r}; expected one of {', '.join(ALL_TASKS)}")


def cmd_generate(args) -> int:
    if args.task == "laser":
        raise UsageError(
            "the laser series is measured data and cannot be generated; "
            "point --laser-path (or the environment) at an existing file instead"
        )
    dataset, meta = make_task(
        args.task,
        seed=args.seed,
        length=args.length,
        train_len=args.train_len,
        washout=args.washout,
        validation_len=args.validation_len,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs_path = out / f"{args.task}_inputs.txt"
    targets_path = out / f"{args.task}_targets.txt"
    save_series(dataset.inputs, inputs_path)
    save_series(dataset.targets, targets_path)
    sidecar = {
        "task": args.task,
        "generator": {str(k): v for k, v in meta.items()},
        "splits": {
            "train_len": dataset.train_len,
            "washout": dataset.washout,
            "validation_len": dataset.validation_len,
        },
        "tool": f"deepesn {__version__}",
    }
    meta_path = out / f"{args.task}_meta.json"
    meta_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="ascii")
    print(f"wrote {inputs_path}, {targets_path} and {meta_path} ({len(dataset)} steps)")
    return 0


def cmd_eval(args) -> int:
    if args.rho > SEARCH_RHO_MAX:
        print(
            f"warning: rho={args.rho} is above the usual search range (0.1, {SEARCH_RHO_MAX}]; "
            "dynamics may be unstable",
            file=sys.stderr,
        )
    laser_path = args.laser_path or os.environ.get(LASER_PATH_ENV)
    dataset, _ = make_task(
        args.task,
        seed=args.data_seed,
        length=args.length,
        laser_path=laser_path,
        train_len=args.train_len,
        washout=args.washout,
        validation_len=args.validation_len,
    )
    topology = parse_topology(args.topology, fan_in=args.fan_in)
    hyper = ScalingSpec(rho=args.rho, omega_in=args.omega_in, omega_il=args.omega_il)
    trial = evaluate_trial(
        dataset,
        topology,
        args.layers,
        hyper,
        args.guesses,
        args.seed,
        total_units=args.units,
        interlayer_fan_in=args.fan_in,
    )
    lines = [
        f"task={trial.task} topology={trial.topology} layers={trial.num_layers} "
        f"rho={hyper.rho:g} omega_in={hyper.omega_in:g} omega_il={hyper.omega_il:g} "
        f"guesses={trial.guesses} seed={args.seed}",
        f"validation MSE: {trial.validation_mse_mean:.6e} (std {trial.validation_mse_std:.3e})",
        f"test MSE:       {trial.test_mse_mean:.6e} (std {trial.test_mse_std:.3e})",
    ]
    text = "\n".join(lines)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval_result.txt").write_text(text + "\n", encoding="ascii")
    return 1 if trial.failed else 0


def cmd_benchmark(args) -> int:
    if args.budget == "full":
        space = FULL_BUDGET
    else:
        space = REDUCED_BUDGET
    overrides = {}
    if args.configs is not None:
        overrides["configs_per_layer"] = args.configs
    if args.guesses is not None:
        overrides["guesses"] = args.guesses
    if args.layers is not None:
        overrides["layer_counts"] = tuple(int(l) for l in args.layers)
    if overrides:
        space = SearchSpace(
            configs_per_layer=overrides.get("configs_per_layer", space.configs_per_layer),
            guesses=overrides.get("guesses", space.guesses),
            layer_counts=overrides.get("layer_counts", space.layer_counts),
        )

    laser_path = args.laser_path or os.environ.get(LASER_PATH_ENV)
    tasks, metadata, partial = [], {}, False
    for name in args.tasks:
        try:
            dataset, meta = make_task(
                name,
                seed=args.data_seed,
                length=args.length,
                laser_path=laser_path,
                train_len=args.train_len,
                washout=args.washout,
                validation_len=args.validation_len,
            )
        except (UsageError, OSError, ValueError) as exc:
            print(f"warning: skipping task {name}: {exc}", file=sys.stderr)
            partial = True
            continue
        tasks.append(dataset)
        metadata.update(meta)
    if not tasks:
        print("error: no tasks left to run", file=sys.stderr)
        return 1

    report = run_benchmark_suite(
        tasks,
        args.topologies,
        space,
        args.seed,
        workers=args.workers,
        total_units=args.units,
        metadata=metadata,
        progress=not args.quiet,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_text = format_report(report)
    (out / "report.txt").write_text(report_text, encoding="ascii")
    (out / "trials.tsv").write_text(trial_log_table(report), encoding="ascii")
    print(report_text)
    print(f"report written to {out / 'report.txt'}; trial log to {out / 'trials.tsv'}")
    if report.failures:
        partial = True
    return 1 if partial else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepesn",
        description="Deep echo state networks with structured reservoir topologies.",
    )
    parser.add_argument("--version", action="version", version=f"deepesn {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_split_flags(sub):
        sub.add_argument("--length", type=_positive_int, default=10000, help="series length in steps")
        sub.add_argument("--train-len", type=_positive_int, default=5000, help="training split length")
        sub.add_argument("--washout", type=_nonnegative_int, default=100, help="initial steps excluded from fits")
        sub.add_argument("--validation-len", type=_nonnegative_int, default=1000,
                         help="validation tail of the training split")

    gen = commands.add_parser("generate", help="write a generated task to disk as text series")
    gen.add_argument("task", choices=ALL_TASKS)
    gen.add_argument("--seed", type=_nonnegative_int, default=0)
    gen.add_argument("--out", default=".", help="output directory")
    add_split_flags(gen)
    gen.set_defaults(func=cmd_generate)

    ev = commands.add_parser("eval", help="score one explicit configuration")
    ev.add_argument("--task", choices=ALL_TASKS, required=True)
    ev.add_argument("--topology", choices=ALL_TOPOLOGIES, required=True)
    ev.add_argument("--layers", type=_positive_int, required=True)
    ev.add_argument("--rho", type=_positive_float, required=True)
    ev.add_argument("--omega-in", type=_positive_float, required=True)
    ev.add_argument("--omega-il", type=_positive_float, required=True)
    ev.add_argument("--guesses", type=_positive_int, default=10)
    ev.add_argument("--seed", type=_nonnegative_int, default=0, help="master seed for the network guesses")
    ev.add_argument("--data-seed", type=_nonnegative_int, default=1, help="seed for dataset generation")
    ev.add_argument("--units", type=_positive_int, default=500, help="total reservoir units")
    ev.add_argument("--fan-in", type=_positive_int, default=5)
    ev.add_argument("--laser-path", default=None)
    ev.add_argument("--out", default=None, help="also write the result into this directory")
    add_split_flags(ev)
    ev.set_defaults(func=cmd_eval)

    bench = commands.add_parser("benchmark", help="random-search benchmark over tasks and topologies")
    bench.add_argument("--tasks", type=_csv, default=list(GENERATED_TASKS),
                       help=f"comma-separated tasks from: {', '.join(ALL_TASKS)}")
    bench.add_argument("--topologies", type=_csv, default=list(ALL_TOPOLOGIES))
    bench.add_argument("--budget", choices=("full", "reduced"), default="full",
                       help="full: 50 configs x 10 guesses; reduced: 10 x 3")
    bench.add_argument("--configs", type=_positive_int, default=None, help="override configs per layer count")
    bench.add_argument("--guesses", type=_positive_int, default=None, help="override guesses per config")
    bench.add_argument("--layers", type=_csv, default=None, help="override deep layer counts, e.g. 2,3")
    bench.add_argument("--seed", type=_nonnegative_int, default=42, help="master seed")
    bench.add_argument("--data-seed", type=_nonnegative_int, default=1)
    bench.add_argument("--units", type=_positive_int, default=500)
    bench.add_argument("--workers", type=_positive_int, default=1)
    bench.add_argument("--laser-path", default=None)
    bench.add_argument("--out", default="results", help="output directory")
    bench.add_argument("--quiet", action="store_true", help="suppress progress lines on stderr")
    add_split_flags(bench)
    bench.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())
