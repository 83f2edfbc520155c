"""Economic-divide summary for baseline runs under linear and exponential utility.

Prints group-sum gaps (as reported by group_divide) next to per-capita ratios,
since the 20/80 split compares groups of unequal size.
"""
import argparse
import statistics

from commons_sim.engine import run_scenario, scenario_presets
from commons_sim.metrics import UtilityParams, exponential_utility, group_divide, linear_utility


def per_capita_gap(utilities, split):
    ranked = sorted(utilities)
    cut = int(split * len(ranked))
    bottom = sum(ranked[:cut]) / cut
    top = sum(ranked[cut:]) / (len(ranked) - cut)
    return top / bottom - 1 if bottom else float("nan")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--exp-scale", type=float, default=None, help="default: generations / 10")
    args = ap.parse_args()
    rows = []
    for seed in range(1, args.seeds + 1):
        res = run_scenario(scenario_presets("optimal", seed))
        n_g = res.config.generations
        p = UtilityParams(exp_scale=args.exp_scale or n_g / 10)
        lin = [linear_utility(g, p) for g in res.optimum_generations]
        exp = [exponential_utility(g, n_g, p) for g in res.optimum_generations]
        first = sorted(g[0] for g in res.optimum_generations if g)
        rows.append((
            group_divide(lin, 0.5).relative_gap,
            group_divide(exp, 0.8).relative_gap,
            per_capita_gap(lin, 0.5),
            per_capita_gap(exp, 0.8),
            first[-1] - first[0],
        ))
        print(f"seed {seed:3d}  lin50/50 {rows[-1][0]:+.3f}  exp20/80 {rows[-1][1]:+.3f}  "
              f"per-capita lin {rows[-1][2]:+.3f} exp {rows[-1][3]:+.3f}  first-optimum spread {rows[-1][4]}")
    med = [statistics.median(col) for col in zip(*rows)]
    print(f"median        lin50/50 {med[0]:+.3f}  exp20/80 {med[1]:+.3f}  "
          f"per-capita lin {med[2]:+.3f} exp {med[3]:+.3f}  spread {med[4]}")


if __name__ == "__main__":
    main()
