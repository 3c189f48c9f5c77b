"""Command-line front end.

Every command writes its files into the output directory (``--out``, else
``$LOZI_OUTPUT_DIR``, else the current directory) and prints a JSON summary
on stdout.  Exit status is 0 on success, 1 on a numerical failure (with a
JSON error object on stdout) or a failed verification, and 2 on bad usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .cones import cone_suite, k_region_checks
from .constructions import build_geometry, verify_fM_in_H0, verify_G_invariance
from .core import LoziError, Params, check_conditions, p1, p2, p3, p4, spectra
from .geometry import (ConvexPolygon, ccw, hausdorff_distance, piecewise_affine_image,
                       sample_interior, uncovered_area)
from .invariant_sets import (attractor_enclosure, attractor_point_cloud, build_trapping_set,
                             grow_manifold)
from .return_map import (classify_tangency, compute_return_structure, first_return_times,
                         verify_cell_geometry)
from .svg import Figure

log = logging.getLogger("lozi")

OUT_ENV = "LOZI_OUTPUT_DIR"
ROUND_TRIP_TOL = 1e-12


# -- output ------------------------------------------------------------------

def _plain(x):
    """Numpy scalars and arrays to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if math.isfinite(v) else ""
    return str(v)


def to_csv(header: List[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


class Output:
    def __init__(self, root: Path, timestamp: bool):
        self.root = root
        self.timestamp = timestamp
        self.files: List[str] = []

    def write(self, name: str, text: str):
        self.files.append(str(write_atomic(self.root / name, text)))

    def json(self, name: str, obj):
        self.write(name, to_json(obj))

    def csv(self, name: str, header, rows):
        self.write(name, to_csv(header, rows))

    def svg(self, name: str, fig: Figure):
        self.write(name, fig.render(timestamp=self.timestamp))


def provenance(args, **budgets) -> dict:
    return {"a": getattr(args, "a", None), "b": getattr(args, "b", None),
            "seed": args.seed, "budgets": budgets}


def polygons(polys) -> list:
    return [ccw(np.asarray(v.vertices if isinstance(v, ConvexPolygon) else v)).tolist()
            for v in polys]


# -- commands ----------------------------------------------------------------

def cmd_check_params(args, out: Output) -> int:
    p = Params(args.a, args.b)
    res = {**provenance(args), **check_conditions(p).to_dict()}
    out.json("check-params.json", res)
    print(to_json(res), end="")
    return 0


def cmd_geometry(args, out: Output) -> int:
    p = Params(args.a, args.b)
    geom = build_geometry(p)
    inv = verify_G_invariance(p, geom)
    res = {**provenance(args), **geom.to_dict(),
           "H0": polygons([geom.H0]), "G": polygons([geom.G]),
           "residuals": geom.residuals(),
           "G_invariance": {"contained": inv.contained, "defect_area": inv.defect_area},
           "fM_in_H0": verify_fM_in_H0(p, geom),
           "area_G": geom.G.area, "area_H0": geom.H0.area}
    res["H0"], res["G"] = res["H0"][0], res["G"][0]
    out.json("geometry.json", res)

    fig = Figure(title=f"G, f(G) and H0 at (a, b) = ({p.a}, {p.b})")
    for piece in piecewise_affine_image(p, geom.G, "forward").pieces:
        fig.polygon(piece.vertices, stroke="#c0392b", fill="#e6b0aa", opacity=0.6)
    fig.polygon(geom.G.vertices, stroke="#1f4e9a", width=1.5)
    fig.polygon(geom.H0.vertices, stroke="#1e8449", fill="#a9dfbf", opacity=0.4)
    for name in geom.POINTS:
        z = getattr(geom, name)
        fig.dots([z], color="black", r=2.5)
        fig.label(z, name)
    out.svg("geometry.svg", fig)
    print(to_json({"files": out.files, "G_invariance": res["G_invariance"],
                   "warnings": geom.warnings}), end="")
    return 0


def _enclosure_rows(p: Params, steps: int, gap: int, budget: int):
    H = build_trapping_set(p, compute_q=False)
    enc = attractor_enclosure(p, H, steps, piece_budget=budget)
    rows = []
    for st in enc.steps:
        expected = H.area * abs(p.b) ** st.n
        lo = hi = None
        if gap > 0 and st.n + gap < len(enc):
            gb = enc.hausdorff_bound(st.n, st.n + gap)
            lo, hi = gb.lower, gb.upper
        rows.append([st.n, len(st.pieces), st.area, expected, abs(st.area - expected) / expected,
                     st.bound, st.n + gap if lo is not None else None, lo, hi])
    return H, enc, rows


def cmd_attractor(args, out: Output) -> int:
    p = Params(args.a, args.b)
    cloud = attractor_point_cloud(p, args.burn_in, args.samples, args.seed).points
    out.csv("attractor.csv", ["x", "y"], cloud)
    fig = Figure(title=f"Attractor for (a, b) = ({p.a}, {p.b})")
    fig.dots(cloud, r=0.5)
    out.svg("attractor.svg", fig)
    summary = {**provenance(args, samples=args.samples, burn_in=args.burn_in,
                            enclosure_steps=args.enclosure_steps, dh_gap=args.dh_gap,
                            piece_budget=args.piece_budget)}
    if args.enclosure_steps > 0:
        H, enc, rows = _enclosure_rows(p, args.enclosure_steps, args.dh_gap, args.piece_budget)
        out.csv("enclosure.csv", ["n", "pieces", "area", "expected_area", "area_rel_error",
                                  "bound", "m", "dH_lower", "dH_upper"], rows)
        summary.update(trapping_p=H.p, trapping_area=H.area,
                       self_map_defect=H.self_map_defect, enclosure_truncated=enc.truncated,
                       H=polygons(H.pieces.pieces))
    out.json("attractor.json", summary)
    summary.pop("H", None)
    print(to_json({"files": out.files, **summary}), end="")
    return 0


def cmd_manifold(args, out: Output) -> int:
    p = Params(args.a, args.b)
    geom = build_geometry(p)
    man = grow_manifold(p, args.base, args.kind, args.generations, args.length_budget, geom=geom)
    stem = f"manifold_{args.kind}_{args.base}"
    out.csv(f"{stem}.csv", ["x", "y"], man.vertices)
    fig = Figure(title=f"{args.kind} manifold of {args.base} at ({p.a}, {p.b})")
    fig.polygon(geom.G.vertices, stroke="#999999")
    fig.polyline(man.vertices, stroke="#1f4e9a", width=0.5)
    out.svg(f"{stem}.svg", fig)
    res = {**provenance(args, generations=args.generations, length_budget=args.length_budget),
           "base": args.base, "kind": args.kind, "length": man.length,
           "vertices": len(man.vertices), "generations_used": man.generations,
           "truncated": man.truncated, "seed_certified": man.seed_certified}
    out.json(f"{stem}.json", res)
    print(to_json({"files": out.files, **res}), end="")
    return 0


def cmd_return_map(args, out: Output) -> int:
    p = Params(args.a, args.b)
    geom = build_geometry(p)
    rs = compute_return_structure(p, geom.H0, max_time=args.max_time)
    tang = classify_tangency(p, rs, geom)
    res = {**provenance(args, max_time=args.max_time), **rs.to_dict(),
           "tangency": tang.to_dict(),
           "cell_areas": {str(c.n): c.area for c in rs.cells}}
    out.json("return-map.json", res)

    # H0 is very flat for small |b|, so the axes are scaled separately
    fig = Figure(width=800, height=500, equal_aspect=False,
                 title=f"Return cells in H0 at ({p.a}, {p.b}), case {tang.case}")
    fig.polygon(geom.H0.vertices, stroke="black", width=1.5)
    for c in rs.cells:
        for q in c.pieces:
            fig.polygon(q.source, stroke="#888888", width=0.4)
        if c.R is not None:
            fig.polyline(c.R, stroke="#7d3c98", width=0.8, dash="3,2")
    if any(c.n == 2 for c in rs.cells):
        c2 = rs.cell(2)
        for q in c2.pieces:
            fig.polygon(q.source, stroke="#1f4e9a", fill="#aed6f1", opacity=0.7)
            fig.polygon(q.image_vertices(), stroke="#c0392b", fill="#f5b7b1", opacity=0.7)
    for c in rs.cells:
        fig.label(c.hull().mean(axis=0), str(c.n), size=9)
    out.svg("return-map.svg", fig)
    print(to_json({"files": out.files, "p": rs.p, "case": tang.case,
                   "coverage": rs.coverage, "complete": rs.complete}), end="")
    return 0


def _sweep_point(job) -> list:
    a, b, da, db, samples, burn_in, seed, cases = job
    p = Params(a, b)
    cond = check_conditions(p)
    row = [a, b, cond.c1, cond.c2, cond.c3, cond.c5, cond.c6, cond.in_U_minus,
           None, None, None, None, None, ""]
    errors = []
    if cond.c3:
        try:
            H = build_trapping_set(p)
            row[8], row[9] = H.p, H.q
        except LoziError as exc:
            errors.append(f"trapping: {exc}")
    if cases and cond.in_U_minus:
        try:
            rs = compute_return_structure(p)
            row[10] = classify_tangency(p, rs).case
        except LoziError as exc:
            errors.append(f"return map: {exc}")
    try:
        base = attractor_point_cloud(p, burn_in, samples, seed).points
    except LoziError as exc:
        base = None
        errors.append(f"cloud: {exc}")
    for k, (a2, b2), step in ((11, (a + da, b), da), (12, (a, b + db), db)):
        if base is None or step == 0:
            continue
        try:
            nb = attractor_point_cloud(Params(a2, b2), burn_in, samples, seed).points
            row[k] = hausdorff_distance(base, nb)
        except LoziError as exc:
            errors.append(f"neighbour ({a2:g}, {b2:g}): {exc}")
    row[13] = "; ".join(errors)
    return row


def cmd_sweep(args, out: Output) -> int:
    (a0, a1, na), (b0, b1, nb) = args.a_range, args.b_range
    A = np.linspace(a0, a1, na)
    B = np.linspace(b0, b1, nb)
    da = float(A[1] - A[0]) if na > 1 else 0.0
    db = float(B[1] - B[0]) if nb > 1 else 0.0
    # the last row and column have no neighbour inside the grid
    jobs = [(float(a), float(b), da if i < na - 1 else 0.0, db if j < nb - 1 else 0.0,
             args.samples, args.burn_in, args.seed, args.cases)
            for i, a in enumerate(A) for j, b in enumerate(B)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    header = ["a", "b", "c1", "c2", "c3", "c5", "c6", "in_U_minus", "p", "q", "case",
              "dH_next_a", "dH_next_b", "error"]
    out.csv("sweep.csv", header, rows)
    res = {"a": None, "b": None, "seed": args.seed,
           "budgets": {"samples": args.samples, "burn_in": args.burn_in},
           "a_range": [a0, a1, na], "b_range": [b0, b1, nb], "points": len(rows),
           "in_U_minus": int(sum(bool(r[7]) for r in rows))}
    out.json("sweep.json", res)
    print(to_json({"files": out.files, **res}), end="")
    return 0


def cmd_region_plot(args, out: Output) -> int:
    a = np.linspace(args.a_min, args.a_max, args.samples)
    lo_b, hi_b = -1.0, 0.25
    fig = Figure(width=800, height=560, equal_aspect=False,
                 title="Region C6 with the curves p1 to p4")
    # C6: sqrt 2 < a < 2 and max(p3, p4) < b < 0
    s2 = math.sqrt(2.0)
    ar = np.linspace(max(s2, args.a_min), min(2.0, args.a_max), args.samples)
    if len(ar) > 1 and ar[0] < ar[-1]:
        lower = [max(v for v in (p3(x), p4(x)) if v is not None) for x in ar]
        upper = np.zeros_like(ar)
        ok = np.array(lower) < 0
        verts = np.vstack([np.column_stack([ar[ok], np.array(lower)[ok]]),
                           np.column_stack([ar[ok], upper[ok]])[::-1]])
        if len(verts) >= 3:
            fig.polygon(verts, stroke="none", fill="#aed6f1", opacity=0.8)
    colors = {"p1": "#1e8449", "p2": "#b9770e", "p3": "#7d3c98", "p4": "#c0392b"}
    curves = {}
    for name, f in (("p1", p1), ("p2", p2), ("p3", p3), ("p4", p4)):
        vals = np.array([np.nan if f(x) is None else f(x) for x in a])
        keep = np.isfinite(vals) & (vals >= lo_b) & (vals <= hi_b)
        if keep.sum() >= 2:
            pts = np.column_stack([a[keep], vals[keep]])
            fig.polyline(pts, stroke=colors[name], width=1.5)
            fig.label(pts[-1], name, color=colors[name])
        curves[name] = [[float(x), None if not np.isfinite(v) else float(v)] for x, v in zip(a, vals)]
    fig.polyline([[args.a_min, 0.0], [args.a_max, 0.0]], stroke="black")
    fig.polyline([[args.a_min, lo_b], [args.a_min, hi_b]], stroke="black")
    for t in np.linspace(args.a_min, args.a_max, 5):
        fig.label([t, lo_b - 0.06], f"a={t:.2f}", size=10)
    for t in (-1.0, -0.75, -0.5, -0.25, 0.0):
        fig.label([args.a_min, t], f"b={t:.2f}", size=10)
    for m in args.mark or []:
        fig.dots([m], color="black", r=3)
        fig.label(m, f"({m[0]:g}, {m[1]:g})", size=10)
    out.svg("region.svg", fig)
    res = {"a": None, "b": None, "seed": args.seed,
           "budgets": {"samples": args.samples}, "curves": curves}
    out.json("region.json", res)
    print(to_json({"files": out.files}), end="")
    return 0


# -- verification ------------------------------------------------------------

def _check(results: Dict[str, dict], name: str, fn):
    try:
        ok, detail = fn()
        results[name] = {"ok": bool(ok), **_plain(detail)}
    except LoziError as exc:
        results[name] = {"ok": False, "error": str(exc)}


def invariant_suite(p: Params, cone_samples: int = 10_000, enclosure_steps: int = 8,
                    oracle_points: int = 1000, seed: int = 0) -> Dict[str, dict]:
    """All instance checks at one parameter; each entry carries an ``ok`` flag."""
    res: Dict[str, dict] = {}
    cond = check_conditions(p)
    res["in_region"] = {"ok": bool(cond.in_U_minus), **cond.to_dict()}

    def spectra_check():
        sp = spectra(p)
        e1 = abs(sp.alpha + sp.beta - p.a) / max(1.0, abs(p.a))
        e2 = abs(sp.alpha * sp.beta + p.b) / max(1.0, abs(p.b))
        return (e1 < 1e-12 and e2 < 1e-12 and 0 < sp.alpha < 1 < sp.beta), \
            {"sum_error": e1, "product_error": e2, "alpha": sp.alpha, "beta": sp.beta}
    _check(res, "spectra", spectra_check)

    geom = build_geometry(p)

    def construction():
        r = geom.residuals()
        return max(r.values()) < 1e-10 and verify_fM_in_H0(p, geom), \
            {"residuals": r, "degenerate": geom.degenerate}
    _check(res, "construction", construction)

    def g_inv():
        inv = verify_G_invariance(p, geom)
        return inv.contained, {"defect_area": inv.defect_area}
    _check(res, "G_invariance", g_inv)

    def k_region():
        kr = k_region_checks(p, geom)
        return kr.preimage_contained and kr.G_in_K, \
            {"gamma": kr.gamma, "boundary_residual": kr.boundary_residual}
    _check(res, "k_region", k_region)

    def cones():
        c = cone_suite(p, cone_samples, seed)
        ok = (c["min_expansion_unstable"] >= c["beta"] * (1 - 1e-10)
              and c["min_expansion_stable"] >= c["inv_alpha"] * (1 - 1e-10)
              and c["violations"] == 0)
        return ok, c
    _check(res, "cones", cones)

    H = None

    def trapping():
        nonlocal H
        H = build_trapping_set(p, geom, compute_q=False)
        return H.stabilized and H.self_map_defect < 1e-8 * H.area, \
            {"p": H.p, "area": H.area, "self_map_defect": H.self_map_defect}
    _check(res, "trapping", trapping)

    def enclosure():
        if H is None:
            raise LoziError("no trapping set")
        enc = attractor_enclosure(p, H, enclosure_steps)
        errs = [abs(st.area - H.area * abs(p.b) ** st.n) / (H.area * abs(p.b) ** st.n)
                for st in enc.steps]
        return (not enc.truncated) and max(errs) < 1e-8, \
            {"steps": len(enc) - 1, "max_area_rel_error": max(errs)}
    _check(res, "enclosure_area", enclosure)

    def manifold():
        man = grow_manifold(p, "X", "unstable", geom=geom)
        return man.seed_certified, {"length": man.length, "generations": man.generations}
    _check(res, "manifold_seed", manifold)

    if cond.in_U_minus:
        rs = None

        def partition():
            nonlocal rs
            rs = compute_return_structure(p, geom.H0)
            Z = sample_interior(geom.H0, oracle_points, np.random.default_rng(seed))
            agree = float(np.mean(rs.assign(Z) == first_return_times(p, Z, geom.H0)))
            return rs.complete and agree == 1.0, \
                {"coverage": rs.coverage, "p": rs.p, "oracle_agreement": agree}
        _check(res, "return_partition", partition)

        def cells():
            if rs is None:
                raise LoziError("no return structure")
            rep = verify_cell_geometry(rs, geom)
            return rep.checks.get("ordering", False) and rep.checks.get("adjacency", False) \
                and rep.checks.get("kinks_on_axis", False), rep.to_dict()
        _check(res, "cell_geometry", cells)
    return res


def _from_file_checks(data: dict) -> Dict[str, dict]:
    """Recompute containment and area results from serialized polygons and
    compare them with a fresh computation at the same parameters."""
    p = Params(float(data["a"]), float(data["b"]))
    res: Dict[str, dict] = {}

    def close(x, y):
        return abs(x - y) <= ROUND_TRIP_TOL

    if "G" in data and "H0" in data:
        geom = build_geometry(p)
        G, H0 = ConvexPolygon(data["G"]), ConvexPolygon(data["H0"])
        img = piecewise_affine_image(p, G, "forward")
        defect = sum(uncovered_area(G, q) for q in img.pieces)
        fresh = verify_G_invariance(p, geom)
        res["geometry_round_trip"] = {
            "ok": close(G.area, geom.G.area) and close(H0.area, geom.H0.area)
            and close(defect, fresh.defect_area) and (defect < 1e-9) == fresh.contained,
            "area_G": [G.area, geom.G.area], "area_H0": [H0.area, geom.H0.area],
            "defect_area": [defect, fresh.defect_area]}
    if "cells" in data:
        H0 = ConvexPolygon(data["H0"])
        rs = compute_return_structure(p, H0)
        fresh = {c.n: c.area for c in rs.cells}
        got = {int(c["n"]): sum(ConvexPolygon(v).area for v in c["C"]) for c in data["cells"]}
        out_file = sum(uncovered_area(H0, ConvexPolygon(v)) for c in data["cells"] for v in c["U"])
        out_fresh = sum(uncovered_area(H0, q.image()) for q in rs.all_pieces())
        worst = max(abs(got.get(n, 0.0) - fresh.get(n, 0.0)) for n in set(got) | set(fresh))
        res["return_map_round_trip"] = {
            "ok": worst <= ROUND_TRIP_TOL and close(out_file, out_fresh),
            "max_cell_area_difference": worst,
            "images_outside_H0": [out_file, out_fresh]}
    if "H" in data:
        H = build_trapping_set(p, compute_q=False)
        pieces = [ConvexPolygon(v) for v in data["H"]]
        area = sum(q.area for q in pieces)
        res["trapping_round_trip"] = {"ok": close(area, H.area), "area": [area, H.area]}
    if not res:
        raise LoziError("file holds no polygons to check (expected G/H0, cells or H)")
    return res


def cmd_verify(args, out: Output) -> int:
    if args.from_file:
        data = json.loads(Path(args.from_file).read_text())
        checks = _from_file_checks(data)
        res = {"a": data["a"], "b": data["b"], "seed": data.get("seed", args.seed),
               "budgets": data.get("budgets", {}), "source": str(args.from_file)}
    else:
        p = Params(args.a, args.b)
        checks = invariant_suite(p, args.cone_samples, args.enclosure_steps,
                                 args.oracle_points, args.seed)
        res = provenance(args, cone_samples=args.cone_samples,
                         enclosure_steps=args.enclosure_steps, oracle_points=args.oracle_points)
    res["ok"] = all(c["ok"] for c in checks.values())
    res["checks"] = checks
    out.json("verify.json", res)
    print(to_json({"files": out.files, "ok": res["ok"],
                   "failed": [k for k, c in checks.items() if not c["ok"]]}), end="")
    return 0 if res["ok"] else 1


# -- argument parsing --------------------------------------------------------

def positive_int(s: str) -> int:
    v = int(float(s))
    if v <= 0 or v != float(s):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s!r}")
    return v


def positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def finite_float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {s!r}")
    return v


class GridRange(argparse.Action):
    """LO HI N for a parameter grid."""

    def __call__(self, parser, ns, values, option_string=None):
        try:
            lo, hi, n = float(values[0]), float(values[1]), positive_int(values[2])
        except (ValueError, argparse.ArgumentTypeError):
            parser.error(f"{option_string} expects LO HI N with N a positive integer")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            parser.error(f"{option_string}: bounds must be finite")
        setattr(ns, self.dest, (lo, hi, n))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None,
                        help=f"output directory (default ${OUT_ENV} or the current directory)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timestamp", action=argparse.BooleanOptionalAction, default=True,
                        help="write a generation-time comment into SVG files")
    common.add_argument("-v", "--verbose", action="store_true")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--a", type=finite_float, required=True)
    params.add_argument("--b", type=finite_float, required=True)

    ap = argparse.ArgumentParser(prog="lozi", description="Lozi map attractor toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-params", parents=[common, params],
                       help="parameter conditions as JSON")
    s.set_defaults(func=cmd_check_params)

    s = sub.add_parser("geometry", parents=[common, params],
                       help="named points and the triangles H0 and G")
    s.set_defaults(func=cmd_geometry)

    s = sub.add_parser("attractor", parents=[common, params],
                       help="point cloud, plot and enclosure table")
    s.add_argument("--samples", type=positive_int, default=100_000)
    s.add_argument("--burn-in", type=nonneg_int, default=1000)
    s.add_argument("--enclosure-steps", type=nonneg_int, default=10)
    s.add_argument("--dh-gap", type=nonneg_int, default=5,
                   help="compare step n with step n + gap (0 skips the distances)")
    s.add_argument("--piece-budget", type=positive_int, default=100_000)
    s.set_defaults(func=cmd_attractor)

    s = sub.add_parser("manifold", parents=[common, params], help="grow a manifold polyline")
    s.add_argument("--base", choices=["X", "Y"], default="X")
    s.add_argument("--kind", choices=["unstable", "stable"], default="unstable")
    s.add_argument("--generations", type=positive_int, default=200)
    s.add_argument("--length-budget", type=positive_float, default=1e4)
    s.set_defaults(func=cmd_manifold)

    s = sub.add_parser("return-map", parents=[common, params],
                       help="first-return cells in H0 and the tangency case")
    s.add_argument("--max-time", type=positive_int, default=60)
    s.set_defaults(func=cmd_return_map)

    s = sub.add_parser("sweep", parents=[common], help="CSV over a parameter grid")
    s.add_argument("--a-range", nargs=3, action=GridRange, required=True, metavar=("LO", "HI", "N"))
    s.add_argument("--b-range", nargs=3, action=GridRange, required=True, metavar=("LO", "HI", "N"))
    s.add_argument("--samples", type=positive_int, default=20_000)
    s.add_argument("--burn-in", type=nonneg_int, default=1000)
    s.add_argument("--cases", action=argparse.BooleanOptionalAction, default=True,
                   help="classify the tangency case at points inside the region")
    s.add_argument("--workers", type=positive_int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("region-plot", parents=[common], help="SVG of the parameter region")
    s.add_argument("--a-min", type=finite_float, default=1.0)
    s.add_argument("--a-max", type=finite_float, default=2.0)
    s.add_argument("--samples", type=positive_int, default=400)
    s.add_argument("--mark", nargs=2, type=finite_float, action="append", metavar=("A", "B"),
                   help="mark a parameter point (repeatable)")
    s.set_defaults(func=cmd_region_plot)

    s = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    s.add_argument("--a", type=finite_float)
    s.add_argument("--b", type=finite_float)
    s.add_argument("--from-file", type=Path, default=None,
                   help="re-check polygons from a geometry, attractor or return-map JSON file")
    s.add_argument("--cone-samples", type=positive_int, default=10_000)
    s.add_argument("--enclosure-steps", type=positive_int, default=8)
    s.add_argument("--oracle-points", type=positive_int, default=1000)
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify" and args.from_file is None and (args.a is None or args.b is None):
        ap.error("verify needs --a and --b, or --from-file")
    if args.command == "region-plot" and not args.a_min < args.a_max:
        ap.error("--a-min must be below --a-max")
    root = args.out or Path(os.environ.get(OUT_ENV) or ".")
    try:
        root.mkdir(parents=True, exist_ok=True)
        probe = tempfile.NamedTemporaryFile(dir=root, prefix=".lozi-probe-")
        probe.close()
    except OSError as exc:
        ap.error(f"output directory {root} is not writable: {exc}")
    out = Output(root, args.timestamp)
    try:
        return args.func(args, out)
    except (LoziError, FloatingPointError, np.linalg.LinAlgError, OSError, KeyError,
            json.JSONDecodeError) as exc:
        print(to_json({"error": type(exc).__name__, "message": str(exc),
                       "command": args.command}), end="")
        return 1


if __name__ == "__main__":
    sys.exit(main())
