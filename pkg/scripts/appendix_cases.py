"""MI density matrices and von Neumann entropies for the two three-layer cases.

Prints the population matrix (quadrature) and the fitted one from fresh data.
"""

import argparse

import numpy as np

from gli.estim import FitConfig
from gli.exper import run_scenario, scenario_truth
from gli.mimat import from_raw, spectrum_entropy

np.set_printoptions(precision=4, suppress=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    for case in ("appendix_case1", "appendix_case2"):
        t = scenario_truth(case, 2048)
        mi = from_raw(t["mi_raw"])
        print(f"{case}: population")
        print(mi.raw)
        print("  eigenvalues", mi.eigenvalues, " vN", spectrum_entropy(mi.eigenvalues))
        for s in range(args.seeds):
            rep = run_scenario(case, s, args.n, FitConfig(max_sweeps=2, seed=s))
            m = rep["mi_matrix"]
            print(f"  seed {s}: eigenvalues {np.array(m['eigenvalues'])}  "
                  f"vN {rep['von_neumann']['value']:.4f} normalized {rep['von_neumann']['normalized']:.4f}")


if __name__ == "__main__":
    main()
