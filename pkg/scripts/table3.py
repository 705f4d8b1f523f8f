"""Condition numbers and CG/PCG iteration counts as functions of alpha (p = 2)."""

from _common import parser, print_table, save

from dgprecond.experiments import ExperimentSpec, run

if __name__ == "__main__":
    ap = parser(__doc__)
    ap.add_argument("--rhs", default="random-solution", choices=("random-solution", "load"))
    args = ap.parse_args()
    rows = []
    for method in ("sipg", "ldg"):
        spec = ExperimentSpec(method=method, p=(2,), n=args.n, alpha=(2, 5, 10, 1e2, 1e3, 1e4), rhs=args.rhs,
                              tasks=("condition-numbers", "iterations"))
        part = run(spec)
        print(f"\n{method.upper()}")
        print_table(part, ["alpha", "K_A", "cg_iters", "K_TDG", "K_TDG_spectral", "pcg_iters"])
        rows += part
    save(rows, args.out)
