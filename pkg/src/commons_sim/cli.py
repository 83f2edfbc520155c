"""commons-sim command line front end."""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .agent import SeedingError
from .engine import PRESETS, resolve_workers, run_scenario, satisfaction_sweep, scenario_presets
from .knapsack import (
    InvalidArgumentError,
    UnsupportedInstanceError,
    load_instance,
    random_instance,
    solve_bruteforce,
    solve_dp,
)
from .runio import (
    RunFileError,
    build_report,
    dump_json,
    load_scenario,
    now_iso,
    run_summary,
    scenario_to_dict,
    write_report,
    write_run,
)

EXIT_INVALID = 2
EXIT_SEEDING = 3
EXIT_RUN_FILES = 4


def parse_seeds(text: str) -> list:
    """'1..5,9' -> [1, 2, 3, 4, 5, 9]; ranges are inclusive."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise InvalidArgumentError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise InvalidArgumentError("no seeds given")
    return seeds


def parse_levels(text: str) -> list:
    levels = [float(x) for x in text.split(",") if x.strip()]
    if not levels:
        raise InvalidArgumentError("no satisfaction levels given")
    for s in levels:
        if not 0.0 < s <= 1.0:
            raise InvalidArgumentError(f"satisfaction level {s} outside (0, 1]")
    return levels


def cmd_preset(args) -> int:
    cfg = scenario_presets(args.name, args.seed)
    sys.stdout.write(dump_json(scenario_to_dict(cfg)))
    return 0


def cmd_gen_instance(args) -> int:
    inst = random_instance(args.items, args.seed)
    text = json.dumps(inst.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.method == "bruteforce":
        cert = solve_bruteforce(inst)
    else:
        try:
            cert = solve_dp(inst)
        except UnsupportedInstanceError:
            if args.exact_only or args.method == "dp":
                raise
            cert = solve_bruteforce(inst)
    sol = cert.solution
    print(f"{sol.bitstring()} weight {sol.total_weight} value {cert.optimal_value:.8f}")
    return 0


def _simulate_one(cfg, out_dir, threads):
    started = now_iso()
    result = run_scenario(cfg, threads)
    write_run(result, out_dir, started)
    return run_summary(result, scenario_to_dict(cfg))


def _median_crossing(values, horizon):
    # runs without a crossing rank after every run that has one
    keyed = sorted(v if v is not None else horizon + 1 for v in values)
    med = statistics.median_low(keyed)
    return None if med > horizon else med


def cmd_simulate(args) -> int:
    cfg = load_scenario(args.scenario)
    out = Path(args.out)
    if args.seeds is None:
        if args.seed is not None:
            cfg = replace(cfg, master_seed=args.seed)
        summary = _simulate_one(cfg, out, args.threads)
        print(f"crossing_generation: {summary['crossing_generation']}")
        return 0
    seeds = parse_seeds(args.seeds)
    configs = [replace(cfg, master_seed=s) for s in seeds]
    dirs = [out / f"seed-{s}" for s in seeds]
    workers = min(resolve_workers(args.workers), len(seeds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_simulate_one, configs, dirs, [1] * len(seeds)))
    else:
        summaries = [_simulate_one(c, d, args.threads) for c, d in zip(configs, dirs)]
    crossings = []
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "seeds_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "max_resource", "crossing_generation", "agents_at_optimum_final"])
        for seed, s in zip(seeds, summaries):
            i = s["max_resource"]
            cross = s["crossing_generation"][i - 1] if i is not None else None
            crossings.append(cross)
            w.writerow([seed, "" if i is None else i, "" if cross is None else cross, s["agents_at_optimum_final"]])
    med = _median_crossing(crossings, cfg.generations)
    print(f"runs: {len(seeds)}  median crossing generation (max resource): {'none' if med is None else med}")
    return 0


def cmd_sweep(args) -> int:
    levels = parse_levels(args.levels)
    seeds = parse_seeds(args.seeds)
    base = load_scenario(args.scenario)
    rows = satisfaction_sweep(levels, base, seeds, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_type", "level", "seed", "max_resource_consumption", "mean", "stddev"])
        for row in rows:
            for seed, total in row["values"]:
                w.writerow(["run", repr(row["level"]), seed, total, "", ""])
        for row in rows:
            w.writerow(["aggregate", repr(row["level"]), "", "", repr(row["mean"]), repr(row["stddev"])])
    for row in rows:
        print(f"level {row['level']:.2f}  mean {row['mean']:.1f}  stddev {row['stddev']:.1f}")
    return 0


def cmd_report(args) -> int:
    report = build_report(args.run_dir)
    written = write_report(report, args.run_dir)
    for name, d in report["divide"].items():
        gap = "undefined" if d["relative_gap"] is None else f"{d['relative_gap']:.3f}"
        print(f"{name:18s} bottom {d['bottom_sum']:.4g}  top {d['top_sum']:.4g}  gap {gap}")
    print("wrote " + ", ".join(written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commons-sim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("preset", help="print a preset scenario as JSON")
    sp.add_argument("name", choices=PRESETS)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_preset)

    sp = sub.add_parser("gen-instance", help="random instance with half-total capacity")
    sp.add_argument("--items", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen_instance)

    sp = sub.add_parser("solve", help="exact optimum of an instance file")
    sp.add_argument("instance")
    sp.add_argument("--method", choices=("auto", "dp", "bruteforce"), default="auto")
    sp.add_argument("--exact-only", action="store_true", help="refuse instances the DP cannot solve")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("simulate", help="run a scenario and write CSV/summary/manifest")
    sp.add_argument("scenario")
    sp.add_argument("--out", required=True)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int)
    group.add_argument("--seeds", help="seed list, e.g. 1..50 or 1,4,7")
    sp.add_argument("--threads", type=int, help="threads stepping agents (default COMMONS_SIM_THREADS or 1)")
    sp.add_argument("--workers", type=int, help="processes for multi-seed runs")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="satisfaction-level sweep")
    sp.add_argument("scenario")
    sp.add_argument("--levels", default="0.5,0.6,0.7,0.8,0.9,1.0")
    sp.add_argument("--seeds", default="1..30")
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="metrics bundle for a completed run directory")
    sp.add_argument("run_dir")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidArgumentError, UnsupportedInstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SeedingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEEDING
    except (RunFileError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FILES


if __name__ == "__main__":
    sys.exit(main())
