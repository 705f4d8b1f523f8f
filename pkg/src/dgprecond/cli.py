"""Command line runner for the (p, alpha) sweeps.

Example::

    dgprecond --method sipg --p 2:6 --alpha 10 --tasks condition-numbers,iterations --out t2.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from .assembly import DGConfig, assemble, export_matrix_market
from .dgspace import build_dofmap
from .experiments import RHS_CHOICES, TASKS, ExperimentSpec, ResultRow, run
from .mesh import build_mesh


def parse_p(values: list[str]) -> tuple[int, ...]:
    out = []
    for v in values:
        if ":" in v:
            lo, hi = (int(s) for s in v.split(":"))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {v!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(v))
    return tuple(sorted(set(out)))


def parse_beta(s: str) -> tuple[float, float]:
    parts = s.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"beta must be 'bx,by', got {s!r}")
    return float(parts[0]), float(parts[1])


def parse_tasks(s: str) -> tuple[str, ...]:
    tasks = tuple(t.strip() for t in s.split(",") if t.strip())
    bad = [t for t in tasks if t not in TASKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown tasks {bad}; choose from {','.join(TASKS)}")
    return tasks


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgprecond", description=__doc__.splitlines()[0])
    ap.add_argument("--method", choices=("sipg", "ldg"), default="sipg")
    ap.add_argument("--p", action="append", default=None, help="degree, repeatable, or a range a:b")
    ap.add_argument("--n", type=int, default=16, help="elements per direction (default 16)")
    ap.add_argument("--alpha", action="append", type=float, default=None, help="penalty scaling, repeatable")
    ap.add_argument("--beta", type=parse_beta, default=None, help="LDG auxiliary vector 'bx,by' (default 1,1 for LDG)")
    ap.add_argument("--tasks", type=parse_tasks, default=TASKS[:3], help=f"comma list from {','.join(TASKS)}")
    ap.add_argument("--tol", type=float, default=1e-8, help="relative residual reduction for CG/PCG")
    ap.add_argument("--eig-tol", type=float, default=1e-4)
    ap.add_argument("--rhs", choices=RHS_CHOICES, default="random-solution")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", default="-", help="report path, '-' for stdout")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--omit-timing", action="store_true", help="write wall_time_seconds as 0 for byte-stable reports")
    ap.add_argument("--export-matrix", metavar="PATH", default=None,
                    help="write A and rhs of the first case in matrix-market format")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return f"{v:.6g}"
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        return float(f"{v:.6g}") if math.isfinite(v) else None
    return v


def format_rows(rows: list[ResultRow], fmt: str) -> str:
    names = ResultRow.field_names()
    if fmt == "json":
        data = [{k: _json_value(getattr(r, k)) for k in names} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in names])
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        spec = ExperimentSpec(
            method=args.method,
            p=parse_p(args.p or ["2"]),
            n=args.n,
            alpha=tuple(args.alpha or [10.0]),
            beta=args.beta,
            tasks=args.tasks,
            rel_tol=args.tol,
            eig_tol=args.eig_tol,
            seed=args.seed,
            rhs=args.rhs,
        )
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"dgprecond: {exc}", file=sys.stderr)
        return 2

    if args.export_matrix:
        p, alpha = spec.cases()[0]
        mesh = build_mesh(spec.n)
        system = assemble(mesh, build_dofmap(mesh, p), DGConfig(spec.method, alpha, spec.effective_beta))
        export_matrix_market(system, args.export_matrix)

    def progress(row):
        status = "failed" if row.error else "done"
        logging.info("p=%d alpha=%g %s in %.1fs", row.p, row.alpha, status, row.wall_time_seconds)

    rows = run(spec, on_row=progress)
    if args.omit_timing:
        for r in rows:
            r.wall_time_seconds = 0.0
    text = format_rows(rows, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 1 if any(r.error for r in rows) else 0


if __name__ == "__main__":
    sys.exit(main())
