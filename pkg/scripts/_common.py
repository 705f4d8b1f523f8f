"""Shared helpers for the sweep scripts."""

import argparse
import pathlib

from dgprecond.cli import format_rows


def parser(doc: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=doc)
    ap.add_argument("--n", type=int, default=16, help="elements per direction")
    ap.add_argument("--out", type=pathlib.Path, default=None, help="optional CSV path")
    return ap


def print_table(rows, columns):
    widths = [max(len(c), 10) for c in columns]
    print("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
    for r in rows:
        cells = []
        for c, w in zip(columns, widths):
            v = getattr(r, c)
            cells.append(("" if v is None else f"{v:.6g}" if isinstance(v, float) else str(v)).rjust(w))
        print("  ".join(cells))


def save(rows, path):
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_rows(rows, "csv"))
