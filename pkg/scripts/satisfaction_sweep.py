"""Satisfaction-level sweep on the baseline preset; prints mean/stddev per level."""
import argparse

from commons_sim.engine import satisfaction_sweep, scenario_presets


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--levels", default="0.5,0.6,0.7,0.8,0.9,1.0")
    args = ap.parse_args()
    levels = [float(x) for x in args.levels.split(",")]
    rows = satisfaction_sweep(levels, scenario_presets("optimal", 0), range(1, args.seeds + 1))
    base = rows[0]["mean"]
    for r in rows:
        print(f"s={r['level']:.2f}  mean={r['mean']:.4g}  sd={r['stddev']:.3g}  vs lowest {r['mean'] / base - 1:+.1%}")


if __name__ == "__main__":
    main()
