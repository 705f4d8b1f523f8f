"""Condition numbers and CG/PCG iteration counts as functions of p (alpha = 10)."""

from _common import parser, print_table, save

from dgprecond.experiments import ExperimentSpec, run

if __name__ == "__main__":
    ap = parser(__doc__)
    ap.add_argument("--rhs", default="random-solution", choices=("random-solution", "load"))
    args = ap.parse_args()
    rows = []
    for method in ("sipg", "ldg"):
        spec = ExperimentSpec(method=method, p=range(2, 7), n=args.n, rhs=args.rhs,
                              tasks=("condition-numbers", "iterations"))
        part = run(spec)
        print(f"\n{method.upper()}")
        print_table(part, ["p", "K_A", "cg_iters", "K_TDG", "K_TDG_spectral", "pcg_iters"])
        rows += part
    save(rows, args.out)
