"""Redundancy/synergy scenarios: estimates over several seeds next to the population values."""

import argparse
import json
from pathlib import Path

import numpy as np

from gli.estim import FitConfig
from gli.exper import SCENARIOS, run_scenario, scenario_truth

KEYS = ("tc_normalized", "ii", "ii_lo", "ii_hi", "dtc", "oinfo")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--names", default=",".join(SCENARIOS[:4]))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--max-sweeps", type=int, default=2)
    ap.add_argument("--out", default="results/scenarios")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.names.split(","):
        truth = scenario_truth(name)
        reps = [run_scenario(name, s, args.n, FitConfig(max_sweeps=args.max_sweeps, seed=s))
                for s in range(args.seeds)]
        est = {k: [r["estimate"][k] for r in reps] for k in KEYS}
        print(name)
        for k in KEYS:
            v = np.array(est[k])
            print(f"  {k:14s} truth {truth[k]:+.4f}  estimate {v.mean():+.4f} +- {v.std(ddof=1) if v.size > 1 else 0:.4f}")
        (out / f"{name}.json").write_text(json.dumps({"truth": truth, "runs": reps}, indent=1, sort_keys=True))


if __name__ == "__main__":
    main()
