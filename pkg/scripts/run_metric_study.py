"""Convergence of the discrete metric terms on the warped cube for both approaches."""

import argparse
from pathlib import Path

from esdg_mortar.harness.experiments import METRIC_CELLS, run_metric_convergence
from esdg_mortar.harness.report import write_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ngeo", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--levels", type=int, default=3, choices=range(2, len(METRIC_CELLS) + 1))
    ap.add_argument("--out-dir", default="results/metric")
    a = ap.parse_args()
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for approach in (1, 2):
        res = run_metric_convergence(approach, tuple(a.ngeo), METRIC_CELLS[:a.levels])
        for r in res:
            print(f"approach {approach} ngeo={r.n_geo} h={r.h:g} l2={r.l2:.4e} rate={r.rate:.2f}")
        write_metric(res, out / f"approach{approach}.csv")


if __name__ == "__main__":
    main()
