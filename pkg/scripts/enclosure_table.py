"""Area law and Hausdorff bounds for the nested enclosures f^n(H).

Example:
    python scripts/enclosure_table.py --a 1.78 --b -0.5 --steps 15 --gap 5
"""
import argparse
import sys
import time
from pathlib import Path

from lozi.cli import to_csv, write_atomic
from lozi.core import Params
from lozi.invariant_sets import attractor_enclosure, build_trapping_set


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=1.78)
    ap.add_argument("--b", type=float, default=-0.5)
    ap.add_argument("--steps", type=int, default=15)
    ap.add_argument("--gap", type=int, default=5)
    ap.add_argument("--out", type=Path, default=Path("enclosure_table.csv"))
    args = ap.parse_args(argv)

    p = Params(args.a, args.b)
    t0 = time.perf_counter()
    H = build_trapping_set(p, compute_q=False)
    enc = attractor_enclosure(p, H, args.steps)
    rows = []
    for st in enc.steps:
        expected = H.area * abs(p.b) ** st.n
        lo = hi = None
        if st.n + args.gap < len(enc):
            gb = enc.hausdorff_bound(st.n, st.n + args.gap)
            lo, hi = gb.lower, gb.upper
        rows.append([st.n, len(st.pieces), st.area, abs(st.area - expected) / expected,
                     st.bound, lo, hi])
        print(f"n={st.n:2d} pieces={len(st.pieces):6d} area_err={rows[-1][3]:.1e} "
              f"bound={st.bound:.3e} dH=[{lo if lo is None else f'{lo:.2e}'}, "
              f"{hi if hi is None else f'{hi:.2e}'}]", file=sys.stderr)
    write_atomic(args.out, to_csv(["n", "pieces", "area", "area_rel_error", "bound",
                                   "dH_lower", "dH_upper"], rows))
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
