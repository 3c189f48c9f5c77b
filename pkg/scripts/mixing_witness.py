"""Box-transition witness for mixing and the stable-manifold density ladder."""
import argparse
import json

from lozi.core import Params
from lozi.diagnostics import mixing_witness, stable_density_in_G


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.78)
    ap.add_argument("--b", type=float, default=-0.5)
    ap.add_argument("--grid", type=int, default=32)
    ap.add_argument("--orbit", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--generations", type=int, nargs="+", default=[12, 14, 16, 18, 20, 22])
    args = ap.parse_args(argv)

    p = Params(args.a, args.b)
    tm = mixing_witness(p, args.grid, args.orbit, args.seed)
    dens = [stable_density_in_G(p, generations=g).to_dict() for g in args.generations]
    print(json.dumps({"mixing": tm.to_dict(), "stable_density": dens}, indent=2))


if __name__ == "__main__":
    main()
