"""Command-line entry point: ``python -m opsched`` or ``opsched``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .decoder import schedule_csv
from .experiments import (
    ExperimentSpec,
    compute_rdi,
    expand_instances,
    re_table,
    read_lower_bounds,
    read_summary,
    run_experiments,
    summarize,
    write_results,
    write_summary,
)
from .generator import GeneratorParams, generate_instance, lops2_params
from .instance import InstanceError, InstanceValidationError, load_instance, serialize_instance
from .metaheuristics import SolverParams, solve


def _budget_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--time-limit", type=float, help="wall-clock seconds per run")
    group.add_argument("--iterations", type=int, help="schedule decodes per run (bit-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opsched", description="Online printing shop scheduling toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--k", type=int, help="large-instance index 51..100")
    src.add_argument("--params", help="JSON file of generator parameters")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("file")

    p = sub.add_parser("solve", help="run one method on one instance")
    p.add_argument("file")
    p.add_argument("--method", default="tsde")
    _budget_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", help="write the per-operation schedule CSV here")

    p = sub.add_parser("run", help="repeated runs over a set of instances")
    p.add_argument("--instances", required=True, help="glob of instance files")
    p.add_argument("--methods", required=True, help="comma list, e.g. de,ga,ils,ts,tsde or de:zeta=0.5")
    p.add_argument("--reps", type=int, default=1)
    _budget_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: OPS_THREADS or CPU count)")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = sub.add_parser("rdi", help="relative deviation index across methods/configurations")
    p.add_argument("-i", "--input", required=True, help="directory holding summary.csv")

    p = sub.add_parser("re", help="relative error of best makespans against lower bounds")
    p.add_argument("-i", "--input", required=True, help="directory holding summary.csv")
    p.add_argument("--lb-file", required=True, help="CSV with columns instance,lb")
    return parser


def _generate(args) -> int:
    if args.k is not None:
        params = lops2_params(args.k, args.seed)
    else:
        doc = json.loads(Path(args.params).read_text(encoding="utf-8"))
        if args.seed is not None:
            doc["seed"] = args.seed
        for key in ("p_range", "setup_range", "release_range", "period_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        params = GeneratorParams(**doc)
    inst = generate_instance(params)
    Path(args.output).write_text(serialize_instance(inst), encoding="utf-8")
    print(f"wrote {args.output}: n={inst.n} o={inst.o} m={inst.m} fixed={len(inst.fixed)}")
    return 0


def _validate(args) -> int:
    try:
        inst = load_instance(args.file)
    except InstanceValidationError as exc:
        for v in exc.report.violations:
            print(v)
        return 1
    except InstanceError as exc:
        print(f"{args.file}: {exc}")
        return 1
    print(f"{args.file}: ok (n={inst.n} o={inst.o} m={inst.m})")
    return 0


def _solve(args) -> int:
    inst = load_instance(args.file)
    params = SolverParams(method=args.method, time_limit=args.time_limit, max_evals=args.iterations, seed=args.seed)
    res = solve(inst, params)
    print(f"{params.method} makespan={res.makespan} evaluations={res.evaluations} seconds={res.seconds:.2f}")
    if args.schedule:
        Path(args.schedule).write_text(schedule_csv(res.schedule), encoding="utf-8")
    return 0


def _run(args) -> int:
    spec = ExperimentSpec(
        instances=expand_instances(args.instances),
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        reps=args.reps,
        time_limit=args.time_limit,
        iterations=args.iterations,
        seed=args.seed,
        threads=args.threads,
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_experiments(spec)
    write_results(rows, out / "results.csv")
    write_summary(summarize(rows), out / "summary.csv")
    print(f"{len(rows)} runs written to {out}")
    return 0


def _rdi(args) -> int:
    summary = read_summary(Path(args.input) / "summary.csv")
    per, mean = compute_rdi({(s.method, s.instance): s.average for s in summary})
    print("config,instance,rdi")
    for (cfg, inst), v in sorted(per.items()):
        print(f"{cfg},{inst},{v!r}")
    for cfg, v in mean.items():
        print(f"{cfg},mean,{v!r}")
    return 0


def _re(args) -> int:
    summary = read_summary(Path(args.input) / "summary.csv")
    rows, mean = re_table(summary, read_lower_bounds(args.lb_file))
    print("method,instance,re")
    for method, inst, v in sorted(rows):
        print(f"{method},{inst},{v!r}")
    for method, v in mean.items():
        print(f"{method},mean,{v!r}")
    return 0


_COMMANDS = {"generate": _generate, "validate": _validate, "solve": _solve, "run": _run, "rdi": _rdi, "re": _re}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InstanceError, ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
