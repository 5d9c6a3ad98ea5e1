"""Spatial entropy conservation of discontinuous data on curved non-conforming meshes."""

import argparse

from esdg_mortar.harness.experiments import run_entropy_check
from esdg_mortar.harness.report import write_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default=None)
    a = ap.parse_args()
    res = run_entropy_check(2, seed=a.seed) + run_entropy_check(3, seed=a.seed)
    for r in res:
        print(f"{r.dim}D N={r.N} {r.quad:8s} {r.formulation:14s} relative={r.relative:.2e}")
    print(f"max relative {max(r.relative for r in res):.2e}")
    if a.out:
        write_entropy(res, a.out, seed=a.seed)


if __name__ == "__main__":
    main()
