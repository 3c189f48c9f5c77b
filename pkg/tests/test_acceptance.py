"""Acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line (also collected in the terminal summary)
and then asserts the same condition.  Tolerances and runtime limits are
pinned as module constants.
"""
import time
from collections import Counter

import numpy as np
import pytest

from lozi.cones import cone_suite
from lozi.constructions import (build_geometry, fM_minus_L_geometric, fM_minus_L_identity,
                                verify_G_invariance)
from lozi.core import Params, check_conditions, spectra, substitute_r
from lozi.diagnostics import (expansion_law_holds, find_crossing_segment,
                              random_unstable_segments, stable_density_in_G)
from lozi.geometry import sample_interior
from lozi.invariant_sets import (attractor_enclosure, attractor_point_cloud, build_trapping_set,
                                 cloud_manifold_distance, continuity_sweep, linear_path)
from lozi.return_map import (compute_return_structure, first_return_times, tangency_slice,
                             verify_cell_geometry)

pytestmark = pytest.mark.slow

FIG1 = Params(1.78, -0.5)
THIN = Params(1.95, -0.05)

SPECTRA_TOL = 1e-12
CLOSED_FORM_TOL = 1e-10
DEFECT_TOL = 1e-9
CONE_SLACK = 1e-10
TRAP_TOL = 1e-8
AREA_TOL = 1e-8
SAMPLING_SLACK = 0.05
COVERAGE = 1 - 1e-6
ATTRACTOR_DH = 0.05
EXPANSION_TOL = 1e-6


def sample_region(pred, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = Params(float(rng.uniform(1.0, 2.0)), float(rng.uniform(-1.0, 0.0)))
        if pred(check_conditions(p)):
            out.append(p)
    return out


def test_spectra_identities_on_grid(report):
    t = time.perf_counter()
    worst_sum = worst_prod = 0.0
    ordered = True
    count = 0
    for a in np.linspace(1.0, 2.0, 101)[1:]:
        for b in np.linspace(-1.0, 0.0, 102)[1:-1]:
            p = Params(float(a), float(b))
            if not check_conditions(p).c1:
                continue
            sp = spectra(p)
            worst_sum = max(worst_sum, abs(sp.alpha + sp.beta - a) / a)
            worst_prod = max(worst_prod, abs(sp.alpha * sp.beta + b) / abs(b))
            ordered &= 0 < sp.alpha < 1 < sp.beta
            count += 1
    dt = time.perf_counter() - t
    ok = worst_sum < SPECTRA_TOL and worst_prod < SPECTRA_TOL and ordered and dt < 1.0
    report(1, ok, f"{count} grid points, sum err {worst_sum:.1e}, product err {worst_prod:.1e}, "
                  f"ordering {ordered}, {dt:.2f}s")
    assert ok


def test_closed_form_cross_check(report):
    t = time.perf_counter()
    worst, count = 0.0, 0
    for a in np.linspace(1.0, 2.0, 51)[1:]:
        for r in np.linspace(0.0, 1.0, 52)[1:-1]:
            if not check_conditions(Params(float(a), substitute_r(a, r))).c1:
                continue
            worst = max(worst, abs(fM_minus_L_identity(a, r) - fM_minus_L_geometric(a, r)))
            count += 1
    value = fM_minus_L_geometric(1.75, 0.5)
    dt = time.perf_counter() - t
    ok = worst < CLOSED_FORM_TOL and abs(value - 0.35) < CLOSED_FORM_TOL and dt < 1.0
    report(2, ok, f"{count} grid points, max diff {worst:.1e}, value at (1.75, 0.5) = {value:.15f}, "
                  f"{dt:.2f}s")
    assert ok


def test_G_invariance_at_random_parameters(report):
    t = time.perf_counter()
    params = [FIG1] + sample_region(lambda c: c.c3, 199, seed=0)
    reps = [verify_G_invariance(p) for p in params]
    worst = max(r.defect_area for r in reps)
    contained = all(r.contained for r in reps)
    dt = time.perf_counter() - t
    ok = contained and worst < DEFECT_TOL and dt < 10.0
    report(3, ok, f"{len(params)} parameters, all contained {contained}, max defect {worst:.1e}, "
                  f"{dt:.2f}s")
    assert ok


def test_cone_suite(report):
    t = time.perf_counter()
    params = sample_region(lambda c: c.in_U_minus, 20, seed=1)
    worst_u = worst_s = np.inf
    violations = 0
    for i, p in enumerate(params):
        r = cone_suite(p, 100_000, seed=i)
        worst_u = min(worst_u, r["min_expansion_unstable"] / r["beta"])
        worst_s = min(worst_s, r["min_expansion_stable"] / r["inv_alpha"])
        violations += r["violations"]
    dt = time.perf_counter() - t
    ok = (worst_u >= 1 - CONE_SLACK and worst_s >= 1 - CONE_SLACK and violations == 0
          and dt < 30.0)
    report(4, ok, f"20 parameters x 1e5 vectors, min ratio/beta {worst_u:.12f}, "
                  f"min ratio*alpha {worst_s:.12f}, violations {violations}, {dt:.1f}s")
    assert ok


def test_trapping_and_enclosure(report):
    t = time.perf_counter()
    lines, ok = [], True
    for p in (FIG1, THIN):
        H = build_trapping_set(p, compute_q=False)
        trap_ok = H.self_map_defect < TRAP_TOL * H.area
        enc = attractor_enclosure(p, H, 15)
        complete = len(enc) == 16 and not enc.truncated
        area_err = max(abs(st.area - H.area * abs(p.b) ** st.n) / (H.area * abs(p.b) ** st.n)
                       for st in enc.steps)
        ratios = []
        for n in (0, 5, 10):
            gb = enc.hausdorff_bound(n, n + 5)
            ratios.append(gb.upper / enc[n].bound)
        bound_ok = max(ratios) <= 1 + SAMPLING_SLACK
        ok &= trap_ok and complete and area_err < AREA_TOL and bound_ok
        lines.append(f"({p.a}, {p.b}): defect {H.self_map_defect:.1e}, steps {len(enc) - 1}, "
                     f"area err {area_err:.1e}, d_H/bound {max(ratios):.3f}")
    dt = time.perf_counter() - t
    ok &= dt < 120.0
    report(5, ok, "; ".join(lines) + f"; {dt:.1f}s")
    assert ok


def test_return_map_partition(report):
    t = time.perf_counter()
    geom = build_geometry(THIN)
    rs = compute_return_structure(THIN, geom.H0)
    Z = sample_interior(geom.H0, 10_000, np.random.default_rng(0))
    agree = float(np.mean(rs.assign(Z) == first_return_times(THIN, Z, geom.H0)))
    order = verify_cell_geometry(rs, geom).checks["ordering"]
    dt = time.perf_counter() - t
    ok = rs.coverage >= COVERAGE and agree == 1.0 and order and dt < 120.0
    report(6, ok, f"coverage {rs.coverage:.12f}, oracle agreement {agree:.4f} on 1e4 points, "
                  f"ordering {order}, cells 1..{rs.p}, {dt:.1f}s")
    assert ok


def test_tangency_classifier_slice(report):
    t = time.perf_counter()
    first = tangency_slice(1.95, -0.06, -0.04, 50)
    second = tangency_slice(1.95, -0.06, -0.04, 50)
    inside = all(check_conditions(Params(r.a, r.b)).in_U_minus for r in first)
    total = all(r.case in ("T1", "T2", "unclassified") for r in first)
    repeat = [(r.case, r.p) for r in first] == [(r.case, r.p) for r in second]
    counts = Counter(r.case for r in first)
    both = counts["T1"] > 0 and counts["T2"] > 0
    single = len(counts) == 1
    dt = time.perf_counter() - t
    ok = inside and total and repeat and (both or single) and dt < 300.0
    scan = "one case on the whole slice" if single else "T1 and T2 both occur"
    report(7, ok, f"50 samples in region {inside}, counts {dict(sorted(counts.items()))}, "
                  f"repeat agreement {repeat}, {scan}, {dt:.1f}s")
    assert ok


def test_attractor_matches_unstable_manifold(report):
    t = time.perf_counter()
    cloud = attractor_point_cloud(FIG1, 1000, 100_000, seed=0).points
    d1 = cloud_manifold_distance(FIG1, cloud, length_budget=1e4)
    d2 = cloud_manifold_distance(FIG1, cloud, length_budget=2e4)
    dt = time.perf_counter() - t
    ok = d1.hausdorff < ATTRACTOR_DH and d2.hausdorff < d1.hausdorff and dt < 60.0
    report(8, ok, f"d_H at length 1e4 = {d1.hausdorff:.4f} "
                  f"(cloud->W^u {d1.cloud_to_manifold:.4f}, W^u->cloud {d1.manifold_to_cloud:.4f}), "
                  f"at 2e4 = {d2.hausdorff:.4f}, {dt:.1f}s")
    assert ok


def test_continuity_under_refinement(report):
    t = time.perf_counter()

    def max_step(steps):
        rows = continuity_sweep(linear_path((1.78, -0.5), (1.80, -0.48), steps),
                                samples=100_000, seed=0)
        pairs = [r.d_prev for prev, r in zip(rows, rows[1:])
                 if prev.in_U_minus and r.in_U_minus and r.d_prev is not None]
        outside = sum(not r.in_U_minus for r in rows)
        return max(pairs), len(pairs), outside

    coarse, n20, out20 = max_step(20)
    fine, n40, out40 = max_step(40)
    dt = time.perf_counter() - t
    ok = fine < coarse and dt < 300.0
    report(9, ok, f"max successive d_H {coarse:.4f} (20 steps, {n20} pairs in region, "
                  f"{out20} points outside) -> {fine:.4f} (40 steps, {n40} pairs, "
                  f"{out40} outside), {dt:.1f}s")
    assert ok


def test_diagnostics(report):
    t = time.perf_counter()
    segs = random_unstable_segments(FIG1, 100, seed=0)
    reps = [find_crossing_segment(FIG1, s, max_n=60) for s in segs]
    found = sum(r.crossings for r in reps)
    worst_n = max((r.n for r in reps if r.n is not None), default=None)
    growth = all(expansion_law_holds(FIG1, r, EXPANSION_TOL) for r in reps)
    ladder = [stable_density_in_G(FIG1, generations=g).fraction for g in (12, 14, 16, 18, 20)]
    monotone = all(x <= y for x, y in zip(ladder, ladder[1:]))
    dt = time.perf_counter() - t
    ok = found == 100 and growth and monotone and dt < 120.0
    report(10, ok, f"crossings {found}/100 (max n {worst_n}), expansion law {growth}, "
                   f"density ladder {[round(x, 3) for x in ladder]}, {dt:.1f}s")
    assert ok
