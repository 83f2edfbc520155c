"""Run the three preset scenarios over a block of paired seeds.

Writes results/scenarios.csv (one row per preset and seed) and prints the median
crossing generation of the most consumed resource per preset.
"""
import argparse
import csv
import statistics
from pathlib import Path

from commons_sim.engine import PRESETS, run_scenario, scenario_presets


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", default="results/scenarios.csv")
    args = ap.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    medians = {}
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["preset", "seed", "max_resource", "crossing_generation", "final_cumulative", "agents_at_optimum"])
        for name in PRESETS:
            crossings = []
            for seed in range(1, args.seeds + 1):
                res = run_scenario(scenario_presets(name, seed))
                cum = res.ledger.cumulative
                i = max(range(len(cum)), key=lambda k: (cum[k], -k))
                cross = res.ledger.crossing_generation[i]
                crossings.append(cross if cross is not None else res.config.generations + 1)
                w.writerow([name, seed, i + 1, "" if cross is None else cross, cum[i],
                            res.records[-1].agents_at_optimum])
            medians[name] = statistics.median(crossings)
    for name, med in medians.items():
        print(f"{name:12s} median crossing {med if med <= 2000 else 'none'}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
