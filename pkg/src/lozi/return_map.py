"""First-return map to the triangle H0 and its cell structure.

A point z of H0 has return time n when f^n(z) is the first forward iterate
back in H0.  The cell C_n collects the points with return time n and
U_n = f^n(C_n).  Cells are computed by pushing tracked pieces of H0 forward
and cutting each image by H0 at every step, so each cell is a union of
convex pieces on which f^n is affine.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .constructions import GeometryBundle, build_geometry
from .core import LoziError, Params, apply
from .geometry import (ConvexPolygon, PolygonUnion, ccw, clip_segment, clip_segments,
                       clip_vertices, convex_hull, points_to_polyline_distance,
                       points_to_segments_distance, sample_closed_polyline,
                       sample_open_polyline, signed_area, uncovered_area)
from .invariant_sets import grow_manifold, stable_manifold_in
from .tracked import TrackedPiece, split_by_region, step_pieces

log = logging.getLogger(__name__)

COVERAGE_TARGET = 1.0 - 1e-6
CORNER_ANGLE = 1e-6       # turning angle (radians) below which a hull vertex is not a corner


@dataclass
class Cell:
    n: int
    pieces: List[TrackedPiece]
    R: Optional[np.ndarray] = None     # kink segment in C_n, shape (2, 2)
    T: Optional[np.ndarray] = None     # its image, on y = 0

    @property
    def C(self) -> PolygonUnion:
        return PolygonUnion([q.source_polygon() for q in self.pieces])

    @property
    def U(self) -> PolygonUnion:
        return PolygonUnion([q.image() for q in self.pieces])

    @property
    def area(self) -> float:
        return float(sum(q.source_area for q in self.pieces))

    def side(self, which: str) -> List[TrackedPiece]:
        """Pieces of C_n^l (image below y = 0) or C_n^r (image above)."""
        # f^n(z)_y = b * x(f^(n-1) z) and b < 0, so the last sign decides
        want = 1 if which == "l" else -1
        return [q for q in self.pieces if q.word[-1] == want]

    @property
    def kinked(self) -> bool:
        return len({q.word[-1] for q in self.pieces}) == 2

    def hull(self) -> np.ndarray:
        return convex_hull(np.vstack([q.source for q in self.pieces]))


@dataclass
class ReturnStructure:
    params: Params
    H0: ConvexPolygon
    cells: List[Cell]
    coverage: float               # captured area / area(H0)
    dropped_area: float
    complete: bool
    trapping_p: Optional[int] = None
    case_tag: str = "unclassified"

    @property
    def p(self) -> int:
        return max(c.n for c in self.cells)

    def cell(self, n: int) -> Cell:
        for c in self.cells:
            if c.n == n:
                return c
        raise KeyError(n)

    def all_pieces(self) -> List[TrackedPiece]:
        return [q for c in self.cells for q in c.pieces]

    def assign(self, Z: np.ndarray) -> np.ndarray:
        """Return time of each point by cell membership (0 when in no cell)."""
        Z = np.atleast_2d(Z)
        out = np.zeros(len(Z), dtype=int)
        for c in self.cells:
            for q in c.pieces:
                free = out == 0
                if not free.any():
                    return out
                hit = q.source_polygon().contains_points(Z[free], tol=0.0)
                out[np.nonzero(free)[0][hit]] = c.n
        return out

    def h(self, Z: np.ndarray) -> np.ndarray:
        """The first-return map through the cell maps (NaN outside every cell)."""
        Z = np.atleast_2d(Z)
        out = np.full(Z.shape, np.nan)
        for q in self.all_pieces():
            todo = np.isnan(out[:, 0])
            if not todo.any():
                break
            hit = q.source_polygon().contains_points(Z[todo], tol=0.0)
            idx = np.nonzero(todo)[0][hit]
            out[idx] = q.map(Z[idx])
        return out

    def to_dict(self) -> dict:
        return {
            "a": self.params.a, "b": self.params.b,
            "p": self.p, "trapping_p": self.trapping_p, "case": self.case_tag,
            "coverage": self.coverage, "complete": self.complete,
            "H0": self.H0.vertices.tolist(),
            "cells": [{
                "n": c.n,
                "C": [ccw(q.source).tolist() for q in c.pieces],
                "U": [ccw(q.image_vertices()).tolist() for q in c.pieces],
                "words": ["".join("+" if s > 0 else "-" for s in q.word) for q in c.pieces],
                "R": None if c.R is None else c.R.tolist(),
                "T": None if c.T is None else c.T.tolist(),
            } for c in self.cells],
        }


def compute_return_structure(p: Params, H0: ConvexPolygon = None, max_time: int = 60,
                             min_rel_area: float = 1e-15,
                             trapping_p: Optional[int] = None) -> ReturnStructure:
    """Cells of the first-return map to H0.

    Pieces still outside H0 are pushed on until none remain or ``max_time``
    is reached; pieces below ``min_rel_area * area(H0)`` are dropped and
    their area reported.
    """
    if H0 is None:
        H0 = build_geometry(p).H0
    A0 = H0.area
    min_area = min_rel_area * A0
    active = [TrackedPiece.identity(H0)]
    found: Dict[int, List[TrackedPiece]] = {}
    dropped_area = 0.0
    for n in range(1, max_time + 1):
        active, _ = step_pieces(p, active)
        nxt = []
        for pc in active:
            inside, outside = split_by_region(pc, H0, 0.0)
            if inside is not None and inside.source_area > min_area:
                found.setdefault(n, []).append(inside)
            elif inside is not None:
                dropped_area += inside.source_area
            for o in outside:
                if o.source_area > min_area:
                    nxt.append(o)
                else:
                    dropped_area += o.source_area
        active = nxt
        if not active:
            break
    if not found:
        raise LoziError("no point of H0 returns within max_time")
    captured = sum(q.source_area for qs in found.values() for q in qs)
    coverage = captured / A0
    complete = not active and coverage >= COVERAGE_TARGET
    if active:
        log.warning("return structure incomplete after %d steps: coverage %.3g", max_time, coverage)
    cells = [_with_kink(Cell(n, found[n])) for n in sorted(found)]
    rs = ReturnStructure(p, H0, cells, coverage, dropped_area, complete, trapping_p)
    if trapping_p is not None and trapping_p != rs.p:
        log.info("largest return time %d differs from the trapping index %d", rs.p, trapping_p)
    return rs


def _with_kink(cell: Cell) -> Cell:
    """Locate R_n, where f^n(z)_y = 0, as a segment across the cell.

    The line is the same for every piece (f^n is continuous), and it runs
    along piece edges, so it is clipped against the hull of the whole cell.
    """
    if not cell.kinked:
        return cell
    q = cell.pieces[0]
    row, off = q.M[1], q.c[1]
    if not np.any(row):
        return cell
    d = np.array([-row[1], row[0]]) / np.hypot(*row)
    z0 = -off * row / (row @ row)
    big = 10.0 * (1.0 + float(np.abs(q.source).max()) + float(np.hypot(*z0)))
    seg = clip_segment(ConvexPolygon(cell.hull()), z0 - big * d, z0 + big * d)
    if seg is None or np.hypot(*(seg[1] - seg[0])) == 0:
        return cell
    cell.R = seg
    cell.T = seg @ q.M.T + q.c
    return cell


# -- pointwise oracle --------------------------------------------------------

def first_return_times(p: Params, Z: np.ndarray, H0: ConvexPolygon,
                       max_time: int = 200) -> np.ndarray:
    """Return time of each point by direct iteration (0 if none within max_time)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    out = np.zeros(len(Z), dtype=int)
    W = Z.copy()
    for n in range(1, max_time + 1):
        W = apply(p, W)
        back = (out == 0) & H0.contains_points(W, tol=0.0)
        out[back] = n
        if np.all(out > 0):
            break
    return out


# -- cell geometry -----------------------------------------------------------

@dataclass
class CellGeometryReport:
    checks: Dict[str, Optional[bool]] = field(default_factory=dict)
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks), "details": _jsonable(self.details)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def corners(hull: np.ndarray, min_angle: float = CORNER_ANGLE) -> np.ndarray:
    """Hull vertices where the boundary actually turns."""
    e = np.roll(hull, -1, axis=0) - hull
    ang = np.arctan2(e[:, 1], e[:, 0])
    turn = np.abs((ang - np.roll(ang, 1) + np.pi) % (2 * np.pi) - np.pi)
    return hull[turn > min_angle]


def row_extent(pieces: List[TrackedPiece], eta: float) -> Optional[Tuple[float, float]]:
    """Leftmost and rightmost x of a union of pieces on the line y = eta."""
    lo, hi = np.inf, -np.inf
    for q in pieces:
        v = q.source
        v = clip_vertices(v, (0.0, 1.0), eta)
        v = clip_vertices(v, (0.0, -1.0), -eta)
        if len(v):
            lo = min(lo, float(v[:, 0].min()))
            hi = max(hi, float(v[:, 0].max()))
    return (lo, hi) if lo <= hi else None


@dataclass
class Manifolds:
    """Sampled W^u_Y (one polyline) and W^s_X (segments inside G)."""
    unstable_Y: np.ndarray
    stable_X: np.ndarray


def sample_manifolds(p: Params, geom: GeometryBundle, stable_generations: int = 40,
                     max_segments: int = 50_000) -> Manifolds:
    wu = grow_manifold(p, "Y", "unstable", generations=200, length_budget=1e4, geom=geom)
    ws = stable_manifold_in(p, geom.G, stable_generations, max_segments=max_segments)
    return Manifolds(wu.vertices, ws.segments)


def verify_cell_geometry(rs: ReturnStructure, geom: GeometryBundle,
                         manifolds: Manifolds = None, rows: int = 201,
                         tol: float = None) -> CellGeometryReport:
    """Shape, side and order checks on the cells C_2 .. C_p.

    Sides are matched to W^u_Y and W^s_X by distance, with tolerance
    ``1e-3 * diam(H0)`` by default; this is a diagnostic, not a proof.
    """
    p = rs.params
    manifolds = manifolds or sample_manifolds(p, geom)
    diam = rs.H0.diameter()
    tol = 1e-3 * diam if tol is None else tol
    rep = CellGeometryReport()
    P = rs.p
    sides = {}
    shape_ok = True
    for c in rs.cells:
        if c.n < 2:
            continue
        cor = corners(c.hull())
        want = 3 if c.n == P else 4
        shape_ok &= len(cor) == want
        # hull equals the union when the cell is convex
        convex = abs(abs(signed_area(c.hull())) - c.area) <= 1e-9 * max(c.area, 1e-300)
        kinds = []
        for i in range(len(cor)):
            a, b = cor[i], cor[(i + 1) % len(cor)]
            pts = sample_open_polyline(np.array([a, b]), np.hypot(*(b - a)) / 16)
            du = float(points_to_polyline_distance(pts, manifolds.unstable_Y).max())
            if len(manifolds.stable_X):
                ds = float(points_to_segments_distance(pts, manifolds.stable_X).max())
            else:
                ds = np.inf
            if min(du, ds) > tol:
                kinds.append("?")
            else:
                kinds.append("u" if du <= ds else "s")
        sides[c.n] = {"corners": len(cor), "convex": bool(convex), "sides": "".join(kinds)}
    rep.details["cells"] = sides
    rep.checks["shapes"] = shape_ok
    expect_ok = True
    for n, s in sides.items():
        k = s["sides"]
        if "?" in k:
            expect_ok = None if expect_ok is not False else False
            continue
        want = 1 if n == P else 2
        expect_ok &= k.count("s") == want and k.count("u") == 2
    rep.checks["sides_on_manifolds"] = expect_ok

    # left-to-right order and shared stable sides
    ys = rs.H0.vertices[:, 1]
    etas = np.linspace(ys.min(), ys.max(), rows + 2)[1:-1]
    worst_order, worst_gap = -np.inf, 0.0
    for c in rs.cells:
        if c.n < 2 or c.n + 1 > P:
            continue
        nxt = rs.cell(c.n + 1)
        for eta in etas:
            e1 = row_extent(c.pieces, eta)
            e2 = row_extent(nxt.pieces, eta)
            if e1 is None or e2 is None:
                continue
            worst_order = max(worst_order, e1[1] - e2[0])
            worst_gap = max(worst_gap, abs(e1[1] - e2[0]))
    rep.details["order_violation"] = worst_order
    rep.details["adjacency_gap"] = worst_gap
    rep.checks["ordering"] = bool(worst_order <= 1e-9)
    rep.checks["adjacency"] = bool(worst_gap <= 1e-9 * max(1.0, diam))

    # halves of each cell: C^l left of C^r, images below and above y = 0
    halves_ok, signs_ok = True, True
    for c in rs.cells:
        if c.n < 2:
            continue
        for q in c.pieces:
            y = q.image().centroid[1]
            signs_ok &= (y < 0) == (q.word[-1] == 1)
        if not c.kinked:
            continue
        for eta in etas:
            l, r = row_extent(c.side("l"), eta), row_extent(c.side("r"), eta)
            if l is not None and r is not None:
                halves_ok &= l[1] <= r[0] + 1e-9
    rep.checks["halves_ordered"] = bool(halves_ok)
    rep.checks["image_signs"] = bool(signs_ok)

    # R_n maps onto the horizontal axis
    kink = 0.0
    for c in rs.cells:
        if c.R is None:
            continue
        s = sample_open_polyline(c.R, np.hypot(*(c.R[1] - c.R[0])) / 32)
        for q in c.pieces:
            inside = q.source_polygon().contains_points(s, tol=1e-12)
            if inside.any():
                kink = max(kink, float(np.abs(q.map(s[inside])[:, 1]).max()))
    rep.details["kink_residual"] = kink
    rep.checks["kinks_on_axis"] = bool(kink < 1e-9)
    return rep


# -- tangency cases ----------------------------------------------------------

@dataclass
class TangencyReport:
    case: str
    p: int
    Cp_kinked: bool
    Up_in_C2_defect: float        # area of U_p outside C_2, relative to area(U_p)
    Up_plus_meets_C2: Optional[bool]
    hA_in_C2: Optional[bool]
    axis_in_Cp_r: bool             # h(H0) meets y = 0 only inside C_p^r
    axis_in_Cp_l: bool             # ... only inside C_p^l
    axis_image_in_U2: bool         # h(H0 on y = 0) inside U_2

    def to_dict(self) -> dict:
        return _jsonable(dict(self.__dict__))


def classify_tangency(p: Params, rs: ReturnStructure, geom: GeometryBundle = None,
                      tol: float = 1e-8) -> TangencyReport:
    """Sort the return structure into the two tangency cases.

    T2: C_p is a single unkinked piece and U_p lies in C_2.
    T1: C_p is kinked, its upper image U_p^+ meets C_2 and h(A) is in C_2.
    Anything else is unclassified.  The axis containment tests are reported
    alongside as diagnostics.
    """
    geom = geom or build_geometry(p)
    P = rs.p
    Cp = rs.cell(P)
    C2 = rs.cell(2).C
    Up = [q.image() for q in Cp.pieces]
    up_area = sum(q.area for q in Cp.pieces)
    outside = sum(uncovered_area(C2, u) for u in Up)
    defect = outside / up_area if up_area > 0 else 0.0

    hA = None
    for q in rs.all_pieces():
        if q.source_polygon().contains(geom.A, 1e-12):
            hA = q.map(geom.A)
            break
    hA_in = None if hA is None else bool(C2.contains(hA, 1e-12))

    plus = Cp.side("r")
    meets = None
    if plus:
        meets = any(C2.contains(v, 1e-12) for q in plus for v in q.image_vertices())

    # where h(H0) crosses the horizontal axis, and where that lies
    axis_pts = []
    for c in rs.cells:
        if c.T is not None:
            axis_pts.append(c.T)
    axis_pts = np.vstack(axis_pts) if axis_pts else np.zeros((0, 2))
    in_r = bool(len(axis_pts)) and all(_in_union(Cp.side("r"), z) for z in axis_pts)
    in_l = bool(len(axis_pts)) and all(_in_union(Cp.side("l"), z) for z in axis_pts)
    seg = clip_segment(rs.H0, np.array([-10.0, 0.0]), np.array([10.0, 0.0]))
    img_ok = False
    if seg is not None:
        s = sample_open_polyline(seg, np.hypot(*(seg[1] - seg[0])) / 64)
        hs = rs.h(s)
        ok = ~np.isnan(hs[:, 0])
        U2 = rs.cell(2).U
        img_ok = bool(ok.all() and U2.contains_points(hs, 1e-9).all())

    if not Cp.kinked and Cp.pieces[0].word[-1] == 1 and defect <= tol:
        case = "T2"
    elif Cp.kinked and meets and hA_in:
        case = "T1"
    else:
        case = "unclassified"
    rs.case_tag = case
    return TangencyReport(case, P, Cp.kinked, defect, meets, hA_in, in_r, in_l, img_ok)


def _in_union(pieces: List[TrackedPiece], z) -> bool:
    return any(q.source_polygon().contains(z, 1e-12) for q in pieces)


@dataclass
class SliceRow:
    a: float
    b: float
    p: Optional[int]
    case: str
    error: Optional[str] = None


def tangency_slice(a: float, b_lo: float, b_hi: float, samples: int) -> List[SliceRow]:
    """Classify every parameter on a b-slice; failures become unclassified rows."""
    rows = []
    for b in np.linspace(b_lo, b_hi, samples):
        p = Params(float(a), float(b))
        try:
            rs = compute_return_structure(p)
            rows.append(SliceRow(p.a, p.b, rs.p, classify_tangency(p, rs).case))
        except LoziError as exc:
            rows.append(SliceRow(p.a, p.b, None, "unclassified", str(exc)))
    return rows


# -- iterating h on H0 -------------------------------------------------------

def _apply_return(rs: ReturnStructure, pieces: List[TrackedPiece], min_area: float,
                  limit: int = None) -> Optional[List[TrackedPiece]]:
    """h applied to tracked pieces; None once more than ``limit`` pieces appear."""
    cells = rs.all_pieces()
    boxes = np.array([q.source_polygon().bbox for q in cells])
    out = []
    for P in pieces:
        img = P.image_vertices()
        lo, hi = img.min(axis=0), img.max(axis=0)
        hit = np.nonzero((boxes[:, 0] <= hi[0]) & (boxes[:, 2] >= lo[0])
                         & (boxes[:, 1] <= hi[1]) & (boxes[:, 3] >= lo[1]))[0]
        for i in hit:
            Q = cells[i]
            v = P.source
            for hp in Q.source_polygon().halfplanes():
                nrm, off = P.pullback(hp)
                v = clip_vertices(v, nrm, off)
                if len(v) < 3:
                    break
            if len(v) < 3 or abs(signed_area(v)) <= min_area:
                continue
            out.append(TrackedPiece(v, Q.M @ P.M, Q.M @ P.c + Q.c, P.word + Q.word,
                                    P.tag, P.jdet * Q.jdet))
        if limit is not None and len(out) > limit:
            return None
    return out


@dataclass
class IntersectionReport:
    distances: List[float]          # sampled Hausdorff distance after each application of h
    resolution: List[float]         # sample spacing behind each distance
    pieces: List[int]
    areas: List[float]
    truncated: bool

    @property
    def final(self) -> float:
        return self.distances[-1]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _thin(points: np.ndarray, r: float) -> np.ndarray:
    """One representative point per r x r grid cell."""
    k = np.floor(points / r).astype(np.int64)
    k -= k.min(axis=0)
    _, first = np.unique(k[:, 0] * (int(k[:, 1].max()) + 1) + k[:, 1], return_index=True)
    return points[np.sort(first)]


def _distinct(polys: List[np.ndarray], r: float) -> List[np.ndarray]:
    """Drop polygons whose bounding boxes agree with an earlier one to within r."""
    keys = np.array([np.concatenate([v.min(axis=0), v.max(axis=0)]) for v in polys])
    _, first = np.unique(np.round(keys / r).astype(np.int64), axis=0, return_index=True)
    return [polys[i] for i in np.sort(first)]


def intersection_check(p: Params, rs: ReturnStructure, budget: int,
                       piece_budget: int = 20_000, spacing: float = None,
                       manifold=None, min_rel_area: float = 1e-14,
                       max_samples: int = 1_000_000) -> IntersectionReport:
    """Iterate h on H0 and compare h^k(H0) with W^u_X inside H0.

    ``budget`` is the number of applications of h.  Both sets are sampled:
    piece boundaries and manifold segments at ``spacing`` (coarsened to keep
    about ``max_samples`` boundary points), one point per grid cell of that
    size, so each distance is accurate to about twice its resolution.  Each
    application of h multiplies the piece count roughly by the number of
    cells, so the run stops early, flagged as truncated, once
    ``piece_budget`` is exceeded.
    """
    H0 = rs.H0
    spacing = spacing or 1e-4 * H0.diameter()
    manifold = manifold if manifold is not None else grow_manifold(p, "X", "unstable").vertices
    segs = clip_segments(H0, np.stack([manifold[:-1], manifold[1:]], axis=1))
    segs = segs[np.any(segs[:, 0] != segs[:, 1], axis=1)]
    if not len(segs):
        raise LoziError("unstable manifold sample misses H0")
    # strands closer than the spacing are one strand at this resolution
    _, first = np.unique(np.round(segs.reshape(-1, 4) / spacing).astype(np.int64), axis=0,
                         return_index=True)
    segs = segs[np.sort(first)]
    wcache = {}
    min_area = min_rel_area * H0.area
    cur = [TrackedPiece.identity(H0)]
    dists, res, counts, areas = [], [], [], []
    truncated = False
    for _ in range(budget):
        nxt = _apply_return(rs, cur, min_area, piece_budget)
        if nxt is None:
            truncated = True
            log.warning("h iteration stopped after %d steps: piece budget %d exceeded",
                        len(dists), piece_budget)
            break
        cur = nxt
        imgs = _distinct([q.image_vertices() for q in cur], spacing)
        per = float(sum(np.hypot(*np.diff(np.vstack([v, v[:1]]), axis=0).T).sum() for v in imgs))
        step = max(spacing, per / max_samples)
        bpts = _thin(np.concatenate([sample_closed_polyline(v, step) for v in imgs]), step)
        if step not in wcache:
            wcache[step] = _thin(np.concatenate([sample_open_polyline(s, step) for s in segs]), step)
        wpts = wcache[step]
        d1, _ = cKDTree(bpts).query(wpts)
        d2, _ = cKDTree(wpts).query(bpts)
        dists.append(float(max(d1.max(), d2.max())))
        res.append(step)
        counts.append(len(cur))
        areas.append(float(sum(q.area for q in cur)))
    return IntersectionReport(dists, res, counts, areas, truncated)
