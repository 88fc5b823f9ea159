"""RMSE-versus-n curves for the MI and chain families.

    python scripts/run_rmse.py --out results/rmse            # desk scale, 50 trials
    python scripts/run_rmse.py --out results/rmse --full     # 300 trials
"""

import argparse

from gli.estim import default_threads
from gli.exper import FAMILIES, ExperimentConfig, run_rmse


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--families", default="mi_scenario1,mi_scenario2,chain1,chain2")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-sweeps", type=int, default=1)
    ap.add_argument("--out", default="results/rmse")
    args = ap.parse_args()
    for fam in args.families.split(","):
        if fam not in FAMILIES:
            raise SystemExit(f"unknown family {fam}")
        cfg = ExperimentConfig(fam, trials=args.trials, seed=args.seed, max_sweeps=args.max_sweeps,
                               threads=default_threads(), out_dir=args.out, full_scale=args.full)
        for meas, c in run_rmse(cfg).items():
            cells = "  ".join(f"{n}:{r:.4f}" for n, r in zip(c.ns, c.rmse))
            print(f"{fam:13s} {meas:4s} slope {c.slope():+.3f}  {cells}")


if __name__ == "__main__":
    main()
