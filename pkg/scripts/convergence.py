"""Broken H1 errors and observed rates for u = sin(pi x) sin(pi y) on (-1, 1)^2."""

import argparse

from dgprecond.experiments import convergence_study

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32])
    args = ap.parse_args()
    for method in ("sipg", "ldg"):
        for p in args.p:
            t = convergence_study(method, p, args.n)
            rates = ["-"] + [f"{r:.3f}" for r in t.rates]
            print(f"{method} p={p}")
            for n, e, r in zip(t.n, t.errors, rates):
                print(f"  n={n:4d}  error={e:.4e}  rate={r}")
