"""Classify the tangency case along a b-slice at fixed a and write a CSV."""
import argparse
import sys
from collections import Counter
from pathlib import Path

from lozi.cli import to_csv, write_atomic
from lozi.return_map import tangency_slice


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.95)
    ap.add_argument("--b-lo", type=float, default=-0.06)
    ap.add_argument("--b-hi", type=float, default=-0.04)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--out", type=Path, default=Path("tangency_scan.csv"))
    args = ap.parse_args(argv)

    rows = tangency_slice(args.a, args.b_lo, args.b_hi, args.samples)
    write_atomic(args.out, to_csv(["a", "b", "p", "case", "error"],
                                  [[r.a, r.b, r.p, r.case, r.error] for r in rows]))
    counts = Counter(r.case for r in rows)
    print(dict(sorted(counts.items())), file=sys.stderr)
    # where the case changes along the slice
    for prev, r in zip(rows, rows[1:]):
        if prev.case != r.case:
            print(f"  {prev.case} -> {r.case} between b={prev.b:.6f} and b={r.b:.6f}",
                  file=sys.stderr)


if __name__ == "__main__":
    main()
