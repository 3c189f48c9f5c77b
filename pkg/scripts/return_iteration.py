"""Iterate the first-return map on H0 and compare with W^u_X inside H0."""
import argparse
import json
import sys

from lozi.core import Params
from lozi.return_map import classify_tangency, compute_return_structure, intersection_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.95)
    ap.add_argument("--b", type=float, default=-0.05)
    ap.add_argument("--budget", type=int, default=8, help="applications of the return map")
    ap.add_argument("--piece-budget", type=int, default=20_000)
    args = ap.parse_args(argv)

    p = Params(args.a, args.b)
    rs = compute_return_structure(p)
    case = classify_tangency(p, rs).case
    rep = intersection_check(p, rs, args.budget, piece_budget=args.piece_budget)
    print(json.dumps({"a": p.a, "b": p.b, "p": rs.p, "case": case, **rep.to_dict()}, indent=2))
    if rep.truncated:
        print(f"stopped after {len(rep.distances)} of {args.budget} steps", file=sys.stderr)


if __name__ == "__main__":
    main()
