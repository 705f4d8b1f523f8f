"""Jacobi and Schwarz constants as functions of p for SIPG and LDG (alpha = 10)."""

from _common import parser, print_table, save

from dgprecond.experiments import ExperimentSpec, run

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    rows = []
    for method in ("sipg", "ldg"):
        spec = ExperimentSpec(method=method, p=range(2, 7), n=args.n, tasks=("constants",))
        part = run(spec)
        print(f"\n{method.upper()}")
        print_table(part, ["p", "c1_jacobi", "c2_jacobi_kerQ", "c2_jacobi_full_VB", "c1_schwarz", "c2_schwarz"])
        rows += part
    save(rows, args.out)
