"""Trapping regions, nested enclosures of the attractor and invariant manifolds."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .constructions import GeometryBundle, build_geometry
from .cones import local_manifold_predicate
from .core import (LoziError, Params, apply_inverse, check_conditions, fixed_points, orbit,
                   spectra)
from .geometry import (ConvexPolygon, PolygonUnion, Polyline, clip_many, clip_segments,
                       clip_vertices, hausdorff_distance, points_to_polyline_distance,
                       polyline_image, sample_closed_polyline, sample_open_polyline,
                       signed_area, subtract_union)
from .tracked import TrackedPiece, step_pieces

log = logging.getLogger(__name__)

ESCAPE_RADIUS = 10.0


# -- trapping region ---------------------------------------------------------

@dataclass
class TrappingSet:
    """H = union of f^j(H0) for j <= p, stored as disjoint convex pieces.

    ``levels[i]`` is the first j for which piece i was added, so the union of
    the first j images is ``pieces_up_to(j)``.
    """
    pieces: PolygonUnion
    levels: List[int]
    p: int
    q: Optional[int]
    area: float
    self_map_defect: float
    stabilized: bool
    geometry: GeometryBundle

    def pieces_up_to(self, j: int) -> PolygonUnion:
        return PolygonUnion([pc for pc, lv in zip(self.pieces.pieces, self.levels) if lv <= j])

    @property
    def H_X(self) -> Optional[PolygonUnion]:
        return None if self.q is None else self.pieces_up_to(self.q)

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "area": self.area,
                "self_map_defect": self.self_map_defect, "stabilized": self.stabilized,
                "pieces": [pc.vertices.tolist() for pc in self.pieces.pieces],
                "levels": list(self.levels)}


def build_trapping_set(p: Params, geom: GeometryBundle = None, max_iter: int = 60,
                       tol: float = 1e-8, manifold_length: float = 200.0,
                       compute_q: bool = True, max_pieces: int = 20_000) -> TrappingSet:
    """Grow H = H0 u f(H0) u ... until the next image adds nothing.

    p is the smallest j with f^(j+1)(H0) inside the union so far, up to an
    uncovered area below ``tol`` times the area of f^(j+1)(H0).
    """
    geom = geom or build_geometry(p)
    H = PolygonUnion([geom.H0])
    levels = [0]
    cur = [TrackedPiece.identity(geom.H0)]
    p_found, stabilized = None, False
    for j in range(1, max_iter + 1):
        cur, _ = step_pieces(p, cur)
        if len(cur) > max_pieces:
            raise LoziError(f"trapping region not found: {len(cur)} pieces after {j} steps")
        total = sum(c.area for c in cur)
        added = []
        for c in cur:
            added.extend(subtract_union(c.image(), H))
        unc = sum(r.area for r in added)
        if unc <= tol * total:
            p_found, stabilized = j - 1, True
            break
        for r in added:
            H.pieces.append(r)
            levels.append(j)
    if p_found is None:
        p_found = max_iter
        log.warning("trapping region did not stabilize in %d steps", max_iter)
    defect = _self_map_defect(p, H)
    ts = TrappingSet(H, levels, p_found, None, H.area, defect, stabilized, geom)
    if compute_q:
        ts.q = _containment_level(p, ts, manifold_length)
    return ts


def _self_map_defect(p: Params, H: PolygonUnion) -> float:
    pieces = [TrackedPiece.identity(pc) for pc in H.pieces]
    img, _ = step_pieces(p, pieces)
    return float(sum(sum(r.area for r in subtract_union(c.image(), H)) for c in img))


def _containment_level(p: Params, ts: TrappingSet, length: float) -> Optional[int]:
    """Smallest j with a long piece of W^u_X inside the union of f^i(H0), i <= j."""
    man = grow_manifold(p, "X", "unstable", length_budget=length, geom=ts.geometry)
    pts = man.polyline.samples(1e-2)
    need = np.full(len(pts), -1)
    for pc, lv in sorted(zip(ts.pieces.pieces, ts.levels), key=lambda t: t[1]):
        todo = need < 0
        if not todo.any():
            break
        hit = pc.contains_points(pts[todo], 1e-9)
        idx = np.nonzero(todo)[0][hit]
        need[idx] = lv
    if (need < 0).any():
        return None
    return int(need.max())


# -- enclosures --------------------------------------------------------------

@dataclass
class EnclosureStep:
    n: int
    pieces: List[TrackedPiece]
    area: float
    bound: float
    dropped: int

    def images(self) -> List[ConvexPolygon]:
        return [pc.image() for pc in self.pieces]

    def segments(self) -> np.ndarray:
        segs = []
        for pc in self.pieces:
            v = pc.image_vertices()
            segs.append(np.stack([v, np.roll(v, -1, axis=0)], axis=1))
        return np.concatenate(segs) if segs else np.zeros((0, 2, 2))

    def samples(self, spacing: float) -> np.ndarray:
        return np.concatenate([sample_closed_polyline(pc.image_vertices(), spacing)
                               for pc in self.pieces])


@dataclass
class EnclosureSequence:
    params: Params
    steps: List[EnclosureStep]
    K: float
    truncated: bool = False

    def __getitem__(self, n: int) -> EnclosureStep:
        return self.steps[n]

    def __len__(self):
        return len(self.steps)

    def hausdorff(self, n: int, m: int, spacing: float = None,
                  max_samples: int = 400_000) -> Tuple[float, float]:
        """Sampled Hausdorff distance between f^n(H) and f^m(H), and the spacing used.

        Only boundaries are sampled: for nested sets the farthest point of the
        larger one from the smaller one can be taken on its boundary.
        """
        a, b = self.steps[n], self.steps[m]
        perim = sum(_perimeter(pc.image_vertices()) for pc in a.pieces + b.pieces)
        floor = perim / max_samples
        spacing = floor if spacing is None else max(spacing, floor)
        return hausdorff_distance(a.samples(spacing), b.samples(spacing)), float(spacing)

    def hausdorff_bound(self, n: int, m: int, rel_tol: float = 0.05,
                        abs_tol: float = None) -> "GapBound":
        """Two-sided estimate of d_H(f^n(H), f^m(H)) for m > n.

        Inside a piece P = f^n(S) of step n, the later set is
        f^n(f^(m-n)(H) intersected with S).  Projecting it onto the long axis
        of P gives covered intervals, and every point of P over a covered
        interval is within the width of P of f^m(H).  The uncovered stretches
        are settled by branch and bound against all of f^m(H), using that the
        distance to a convex piece is convex along a segment.  Image
        coordinates are taken relative to a vertex of S, so thin images lose
        no precision.  The other directed distance is zero because f^m(H) is
        inside f^n(H).

        Returns a lower bound (attained distance at some point) and an upper
        bound with upper <= max((1 + rel_tol) * lower, abs_tol).  ``abs_tol``
        defaults to ``rel_tol`` times the area bound of step n, which is all
        a comparison with that bound needs; pass a smaller value to measure
        the distance itself more tightly.
        """
        if m <= n:
            raise LoziError("need m > n")
        k = m - n
        if k >= len(self.steps):
            raise LoziError(f"step {k} not computed")
        if abs_tol is None:
            abs_tol = rel_tol * self.steps[n].bound
        inner = [pc.image() for pc in self.steps[k].pieces]
        return _gap_bound(self.steps[n].pieces, inner, self.K * abs(self.params.b) ** m,
                          rel_tol, abs_tol)


@dataclass
class GapBound:
    lower: float             # distance attained at evaluated points (within 1e-3 abs_tol)
    upper: float             # certified
    max_width: float         # covered stretches are within this of the later set
    gaps: int                # uncovered stretches settled by branch and bound
    nodes: int
    inner_area: float        # area of f^m(H) recovered piece by piece
    expected_area: float     # |b|^m area(H)


class _PieceSet:
    """Convex polygons with exact point distances and a probe-point index.

    Boundary probes are spaced at most ``s`` apart.  If some polygon is at
    distance e from z, the nearest one owns a probe within
    max(e, w / 2) + s / 2, where w is the largest polygon width: from
    outside, its closest boundary point is at most e away; from inside, the
    boundary is at most half its width away.
    """

    def __init__(self, V: np.ndarray, count: np.ndarray, max_probes: int = 2_000_000):
        k = np.arange(V.shape[1])
        last = np.take_along_axis(V, (count - 1)[:, None, None].repeat(2, axis=2), axis=1)
        V = np.where((k[None, :] < count[:, None])[..., None], V, last)   # pad with last vertex
        nxt = np.where(k[None, :] + 1 < count[:, None], k[None, :] + 1, 0)
        W = np.take_along_axis(V, nxt[..., None].repeat(2, axis=2), axis=1)
        self.V, self.W, self.count = V, W, count
        self.lo = V.min(axis=1)
        self.hi = V.max(axis=1)
        self.width = float(_min_widths(V, W).max()) if len(V) else 0.0
        per = np.hypot(*(W - V).transpose(2, 0, 1)).sum(axis=1)
        self.s = max(float(per.sum()) / max_probes, 1e-15)
        self._tree = None

    def _index(self):
        # probes are only needed by the nearest-point queries, so build lazily
        if self._tree is None:
            probes, owner = [], []
            for i in range(len(self.V)):
                pts = sample_closed_polyline(self.V[i, :self.count[i]], self.s)
                probes.append(pts)
                owner.append(np.full(len(pts), i))
            self._owner = np.concatenate(owner)
            self._tree = cKDTree(np.concatenate(probes))
        return self._tree, self._owner

    def dist(self, z, idx: np.ndarray) -> np.ndarray:
        """Exact distances from point z to the polygons ``idx`` (0 inside)."""
        P, Q = self.V[idx], self.W[idx]
        e = Q - P
        r = z - P
        cross = e[..., 0] * r[..., 1] - e[..., 1] * r[..., 0]
        inside = np.all(cross >= 0, axis=1)
        ee = np.einsum("ijk,ijk->ij", e, e)
        t = np.clip(np.einsum("ijk,ijk->ij", r, e) / np.where(ee == 0, 1.0, ee), 0.0, 1.0)
        q = r - t[..., None] * e
        d = np.sqrt(np.einsum("ijk,ijk->ij", q, q)).min(axis=1)
        d[inside] = 0.0
        return d

    def near(self, z, radius: float) -> np.ndarray:
        """Polygons owning a probe within ``radius`` of z."""
        tree, owner = self._index()
        return np.unique(owner[tree.query_ball_point(z, radius)])

    def in_box(self, lo, hi) -> np.ndarray:
        """Polygons whose bounding box meets the box [lo, hi]."""
        ok = (self.lo[:, 0] <= hi[0]) & (self.hi[:, 0] >= lo[0])
        ok &= (self.lo[:, 1] <= hi[1]) & (self.hi[:, 1] >= lo[1])
        return np.nonzero(ok)[0]

    def candidates(self, z, k: int = 16) -> np.ndarray:
        tree, owner = self._index()
        _, first = tree.query(z, k=min(k, len(owner)))
        return np.unique(owner[np.atleast_1d(first)])

    def nearest(self, z, negligible: float = 0.0) -> float:
        """Distance from z to the union; exact unless below ``negligible``."""
        z = np.asarray(z, dtype=float)
        est = float(self.dist(z, self.candidates(z)).min())
        if est <= negligible:
            return est
        idx = self.near(z, max(est, 0.5 * self.width) + 0.5 * self.s + 1e-15)
        if len(idx) == 0:
            return est
        return min(est, float(self.dist(z, idx).min()))


def _min_widths(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Minimal widths of padded convex polygons (smallest extent over edge normals)."""
    e = W - V
    ln = np.hypot(e[..., 0], e[..., 1])
    ok = ln > 0
    nrm = np.stack([-e[..., 1], e[..., 0]], axis=-1) / np.where(ok, ln, 1.0)[..., None]
    proj = np.einsum("bkc,bjc->bkj", V, nrm)      # vertex k on the normal of edge j
    ext = proj.max(axis=1) - proj.min(axis=1)
    return np.where(ok, ext, np.inf).min(axis=1).clip(max=1e300) * (ok.sum(axis=1) >= 3)


def _gap_bound(outer: List[TrackedPiece], inner: List[ConvexPolygon], expected: float,
               rel_tol: float, abs_tol: float) -> GapBound:
    boxes = np.array([q.bbox.ravel() for q in inner])
    nin = np.array([len(q.vertices) for q in inner])
    Vin = np.zeros((len(inner), nin.max(), 2))
    for i, q in enumerate(inner):
        Vin[i, :nin[i]] = q.vertices
    # every (outer piece, inner piece) pair whose source boxes meet
    owner, which, hp_n, hp_o, w0s, Ms, os_, axes, widths, rels = ([] for _ in range(10))
    for k, P in enumerate(outer):
        S = P.source_polygon()
        sb = S.bbox.ravel()
        cand = np.nonzero((boxes[:, 0] <= sb[2]) & (boxes[:, 2] >= sb[0])
                          & (boxes[:, 1] <= sb[3]) & (boxes[:, 3] >= sb[1]))[0]
        w0 = S.vertices[0]
        rel = (S.vertices - w0) @ P.M.T
        axis, width = _long_axis(rel)
        hps = S.halfplanes()
        hp_n.append(np.array([h.normal for h in hps]))
        hp_o.append(np.array([h.offset for h in hps]))
        w0s.append(w0)
        Ms.append(P.M)
        os_.append(P.map(w0))
        axes.append(axis)
        widths.append(width)
        rels.append(rel)
        owner.append(np.full(len(cand), k))
        which.append(cand)
    owner = np.concatenate(owner)
    which = np.concatenate(which)
    V, cnt = Vin[which], nin[which]
    nh = max(len(h) for h in hp_n)
    N = np.zeros((len(outer), nh, 2))
    O = np.full((len(outer), nh), -1.0)          # padding: 0 . z >= -1 always holds
    for k in range(len(outer)):
        N[k, :len(hp_n[k])] = hp_n[k]
        O[k, :len(hp_o[k])] = hp_o[k]
    for h in range(nh):
        V, cnt = clip_many(V, cnt, N[owner, h], O[owner, h])
    kk = np.arange(V.shape[1])
    V = np.where((kk[None, :] < cnt[:, None])[..., None], V, V[:, :1])
    nxt = np.roll(V, -1, axis=1)
    area2 = np.abs((V[..., 0] * nxt[..., 1] - V[..., 1] * nxt[..., 0]).sum(axis=1))
    good = (cnt >= 3) & (area2 > 0)
    owner, V, cnt, area2 = owner[good], V[good], cnt[good], area2[good]
    det = np.array([abs(P.det) for P in outer])
    area = float((0.5 * area2 * det[owner]).sum())
    w0s, Ms, os_, axes = map(np.array, (w0s, Ms, os_, axes))
    R = np.einsum("bij,bkj->bki", Ms[owner], V - w0s[owner][:, None, :])
    tt = np.einsum("bkc,bc->bk", R, axes[owner])
    tlo, thi = tt.min(axis=1), tt.max(axis=1)
    later = os_[owner][:, None, :] + R
    split = np.searchsorted(owner, np.arange(len(outer) + 1))

    max_width = 0.0
    regions: List[np.ndarray] = []        # fat parts of step n, for branch and bound
    gaps = []                             # thin uncovered stretches
    for k in range(len(outer)):
        rel, o, axis, width = rels[k], os_[k], axes[k], widths[k]
        if width > abs_tol:
            regions.append(o + rel)
            continue
        max_width = max(max_width, width)
        t_out = rel @ axis
        ivals = list(zip(tlo[split[k]:split[k + 1]], thi[split[k]:split[k + 1]]))
        for lo, hi in _uncovered(float(t_out.min()), float(t_out.max()), ivals):
            part = clip_vertices(rel, axis, lo)
            part = clip_vertices(part, -axis, -hi)
            if len(part) >= 2:
                gaps.append((o + part, axis, width))
    lower, upper, nodes = 0.0, max_width, 0
    if regions or gaps:
        F = _PieceSet(later, cnt)
        worst = []
        for part, axis, width in gaps:
            tau, centre = _slab_cover(F, part, axis, width, abs_tol)
            if tau is None:
                regions.append(part)
            else:
                upper = max(upper, tau)
                worst.append((tau, centre))
        # distances actually attained, at the centres of the worst gaps
        everything = np.arange(len(F.V))
        for _, c in sorted(worst, key=lambda t: -t[0])[:20]:
            lower = max(lower, float(F.dist(c, everything).min()))
        if regions:
            reg_lower, reg_upper, nodes = _branch_and_bound(F, regions, rel_tol, abs_tol)
            lower = max(lower, reg_lower)
            upper = max(upper, reg_upper)
    return GapBound(lower, upper, max_width, len(gaps) + len(regions), nodes, area, expected)


def _slab_cover(F: "_PieceSet", part: np.ndarray, axis: np.ndarray, width: float,
                tol: float):
    """Smallest e such that pieces within e of the gap's axis cover its length.

    ``part`` is a thin stretch of a step-n piece with long axis ``axis``.  A
    later piece Q whose vertices are all within e of that axis, and whose
    projection covers [lo, hi], has for every t in [lo, hi] a point within
    e + width of each point of the stretch over t.  Returns (bound, centre),
    or (None, centre) when no bound below ``tol`` exists this way.
    """
    nrm = np.array([-axis[1], axis[0]])
    c = part.mean(axis=0)
    t = (part - c) @ axis
    lo, hi = float(t.min()), float(t.max())
    pad = tol + width
    idx = F.in_box(part.min(axis=0) - pad, part.max(axis=0) + pad)
    if len(idx) == 0:
        return None, c
    V = F.V[idx] - c
    tq = V @ axis
    pq = V @ nrm
    mid = 0.5 * float(((part - c) @ nrm).max() + ((part - c) @ nrm).min())
    e = np.abs(pq - mid).max(axis=1) + width
    a = np.maximum(tq.min(axis=1), lo)
    b = np.minimum(tq.max(axis=1), hi)
    keep = (a <= b) & (e <= tol)
    if not keep.any():
        return None, c
    e, a, b = e[keep], a[keep], b[keep]
    order = np.argsort(e)
    e, a, b = e[order], a[order], b[order]
    if not _covers(a, b, lo, hi):
        return None, c
    i, j = 0, len(e) - 1          # smallest prefix that covers
    while i < j:
        m = (i + j) // 2
        if _covers(a[:m + 1], b[:m + 1], lo, hi):
            j = m
        else:
            i = m + 1
    return float(e[j]), c


def _covers(a: np.ndarray, b: np.ndarray, lo: float, hi: float) -> bool:
    order = np.argsort(a)
    a, b = a[order], b[order]
    if a[0] > lo:
        return False
    reach = np.maximum.accumulate(b)
    # a gap opens where the next start passes everything reached so far
    if np.any(a[1:] > reach[:-1]):
        return False
    return bool(reach[-1] >= hi)


def _long_axis(rel: np.ndarray) -> Tuple[np.ndarray, float]:
    """Direction of the longest vertex difference and the extent across it."""
    d = rel[:, None, :] - rel[None, :, :]
    i, j = np.unravel_index(np.argmax((d ** 2).sum(-1)), d.shape[:2])
    ax = d[i, j]
    nrm = math.hypot(*ax)
    if nrm == 0:
        return np.array([1.0, 0.0]), 0.0
    ax = ax / nrm
    perp = rel @ np.array([-ax[1], ax[0]])
    return ax, float(perp.max() - perp.min())


def _uncovered(lo: float, hi: float, ivals) -> List[Tuple[float, float]]:
    if not ivals:
        return [(lo, hi)]
    out = []
    iv = sorted(ivals)
    reach = lo
    for a, b in iv:
        if a > reach:
            out.append((reach, a))
        reach = max(reach, b)
    if hi > reach:
        out.append((reach, hi))
    return out


def _split_long(v: np.ndarray):
    """Cut a convex vertex list by the perpendicular bisector of its longest chord."""
    d = v[:, None, :] - v[None, :, :]
    i, j = np.unravel_index(np.argmax((d ** 2).sum(-1)), d.shape[:2])
    ax = v[i] - v[j]
    c = 0.5 * float(ax @ (v[i] + v[j]))
    return clip_vertices(v, ax, c), clip_vertices(v, -ax, -c)


def _branch_and_bound(F: "_PieceSet", regions, rel_tol: float, abs_tol: float):
    """Sup of d(z, F) over a list of convex regions, to relative accuracy.

    The distance to one convex piece Q is a convex function, so over a convex
    region R its sup sits at a vertex of R; min over Q of max over vertices
    of d(v, Q) therefore bounds sup over R of d(., F) from above.
    """
    lower = 0.0
    stack = list(regions)
    ub_all = 0.0
    nodes = 0
    while stack:
        R = stack.pop()
        nodes += 1
        dv = np.array([F.nearest(v, 1e-3 * abs_tol) for v in R])
        lower = max(lower, float(dv.max()))
        cen = R.mean(axis=0)
        rad = float(np.hypot(*(R - cen).T).max())
        lip = float(dv.max()) + 2.0 * rad
        idx = F.near(cen, float(dv.max()) + rad + abs_tol + 1.5 * F.s)
        ub = lip
        if len(idx):
            D = np.stack([F.dist(v, idx) for v in R])
            ub = min(ub, float(D.max(axis=0).min()))
        target = max((1.0 + rel_tol) * lower, abs_tol)
        if ub <= target or rad < 1e-14:
            ub_all = max(ub_all, ub)
            continue
        for part in _split_long(R):
            if len(part) >= 2:
                stack.append(part)
    return lower, ub_all, nodes


def _perimeter(v: np.ndarray) -> float:
    return float(np.hypot(*(np.roll(v, -1, axis=0) - v).T).sum())


def attractor_enclosure(p: Params, H: TrappingSet, n: int, piece_budget: int = 100_000,
                        min_rel_area: float = 1e-14) -> EnclosureSequence:
    """f^k(H) for k = 0..n as tracked pieces.

    Areas come from the Jacobian, so they stay exact after the images become
    thinner than double precision can represent.  ``bound`` is
    2 sqrt(K / pi) |b|^(k/2) with K = area(H).
    """
    K = H.area
    cur = [TrackedPiece.identity(pc, i) for i, pc in enumerate(H.pieces.pieces)]
    min_area = min_rel_area * K
    steps = [EnclosureStep(0, cur, sum(c.area for c in cur), 2.0 * math.sqrt(K / math.pi), 0)]
    truncated = False
    for k in range(1, n + 1):
        nxt, dropped = step_pieces(p, cur, min_area)
        if len(nxt) > piece_budget:
            log.warning("enclosure stopped at step %d: %d pieces exceed budget", k - 1, len(nxt))
            truncated = True
            break
        cur = nxt
        bound = 2.0 * math.sqrt(K / math.pi) * abs(p.b) ** (k / 2.0)
        steps.append(EnclosureStep(k, cur, sum(c.area for c in cur), bound, dropped))
    return EnclosureSequence(p, steps, K, truncated)


# -- invariant manifolds -----------------------------------------------------

@dataclass
class ManifoldPolyline:
    polyline: Polyline
    base: str
    kind: str
    base_point: np.ndarray
    generations: int
    truncated: bool
    seed_certified: bool

    @property
    def vertices(self) -> np.ndarray:
        return self.polyline.vertices

    @property
    def length(self) -> float:
        return self.polyline.length


def _trim(v: np.ndarray, base: np.ndarray, budget: float) -> Tuple[np.ndarray, bool]:
    """Keep the arc of length ``budget`` centred (in arc length) on ``base``."""
    seg = np.hypot(*np.diff(v, axis=0).T)
    total = float(seg.sum())
    if total <= budget:
        return v, False
    s = np.concatenate([[0.0], np.cumsum(seg)])
    i0 = int(np.argmin(np.hypot(*(v - base).T)))
    s0 = s[i0]
    lo = max(0.0, s0 - budget / 2)
    hi = min(total, s0 + budget / 2)
    # give unused budget on one side to the other
    if lo == 0.0:
        hi = min(total, budget)
    elif hi == total:
        lo = max(0.0, total - budget)
    xs = np.interp([lo, hi], s, v[:, 0])
    ys = np.interp([lo, hi], s, v[:, 1])
    inner = (s > lo) & (s < hi)
    out = np.vstack([[xs[0], ys[0]], v[inner], [xs[1], ys[1]]])
    return out, True


def grow_manifold(p: Params, base: str = "X", kind: str = "unstable",
                  generations: int = 200, length_budget: float = 1e4,
                  seed_halflength: float = None, geom: GeometryBundle = None) -> ManifoldPolyline:
    """Grow W^u or W^s of a fixed point as a polyline.

    A short segment along the eigendirection is mapped forward (unstable) or
    backward (stable) until the length budget or the generation count is
    reached.  Beyond the budget only the arc nearest the base point is kept.
    """
    if kind not in ("stable", "unstable"):
        raise LoziError(f"kind must be 'stable' or 'unstable', got {kind!r}")
    if base not in ("X", "Y"):
        raise LoziError(f"base must be 'X' or 'Y', got {base!r}")
    if kind == "stable" and p.b == 0:
        raise LoziError("stable growth needs b != 0 (f is not invertible)")
    if seed_halflength is not None and seed_halflength <= 0:
        raise LoziError("seed_halflength must be positive")
    sp = spectra(p)
    fp = fixed_points(p)
    z0 = fp.X if base == "X" else fp.Y
    lam = sp.beta if kind == "unstable" else sp.alpha
    # at X the eigenvalues are -alpha and -beta
    v = np.array([-lam if base == "X" else lam, p.b])
    v = v / np.hypot(*v)
    if seed_halflength is None:
        geom = geom or build_geometry(p)
        seed_halflength = 1e-6 * geom.G.diameter()
    seed = np.array([z0 - seed_halflength * v, z0, z0 + seed_halflength * v])
    certified = _seed_ok(p, seed, kind)
    line = Polyline(seed)
    direction = "forward" if kind == "unstable" else "inverse"
    truncated = False
    gens = 0
    for _ in range(generations):
        nxt = polyline_image(p, line, direction)
        if not np.all(np.isfinite(nxt.vertices)) or np.abs(nxt.vertices).max() > 1e12:
            truncated = True
            break
        verts, cut = _trim(nxt.vertices, z0, length_budget)
        line = Polyline(verts)
        gens += 1
        if cut:
            truncated = True
            break
    return ManifoldPolyline(line, base, kind, z0, gens, truncated, certified)


def _seed_ok(p: Params, seed: np.ndarray, kind: str, horizon: int = 30) -> bool:
    """Local-manifold certificate on the seed endpoints.

    The seed must stay off the switching axis of its direction of iteration,
    and each endpoint must pass the distance-to-axis test with theta set to
    half its own distance.
    """
    k = 0 if kind == "unstable" else 1
    s = np.sign(seed[:, k])
    if not (np.all(s == s[0]) and s[0] != 0):
        return False
    # the predicate iterates the opposite way from the growth
    pred = "stable" if kind == "unstable" else "unstable"
    for z in (seed[0], seed[-1]):
        theta = 0.5 * abs(z[1] if pred == "unstable" else z[0])
        if theta == 0 or not local_manifold_predicate(p, z, theta, horizon, pred):
            return False
    return True


@dataclass
class ManifoldSegments:
    """W^s_X inside a forward-invariant convex region, as loose segments."""
    segments: np.ndarray          # (m, 2, 2)
    generations: int
    truncated: bool

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.segments[:, 1] - self.segments[:, 0]).T).sum())


def stable_manifold_in(p: Params, region: ConvexPolygon, generations: int,
                       seed_halflength: float = None, max_segments: int = 200_000) -> ManifoldSegments:
    """Backward growth of W^s_X clipped to ``region`` after every step.

    Clipping loses nothing when f(region) is inside region: a point of the
    region whose forward orbit reaches the local manifold stays in the
    region on the way.  Each generation contains the previous one, because
    the seed sits inside its own preimage.
    """
    if p.b == 0:
        raise LoziError("stable growth needs b != 0 (f is not invertible)")
    sp = spectra(p)
    X = fixed_points(p).X
    v = np.array([-sp.alpha, p.b])
    v = v / np.hypot(*v)
    h = seed_halflength if seed_halflength is not None else 1e-6 * region.diameter()
    S = clip_segments(region, np.array([[X - h * v, X + h * v]]))
    done, truncated = 0, False
    for _ in range(generations):
        y0, y1 = S[:, 0, 1], S[:, 1, 1]
        cross = (y0 * y1) < 0
        if cross.any():
            c = S[cross]
            t = c[:, 0, 1] / (c[:, 0, 1] - c[:, 1, 1])
            q = c[:, 0] + t[:, None] * (c[:, 1] - c[:, 0])
            q[:, 1] = 0.0
            S = np.concatenate([S[~cross], np.stack([c[:, 0], q], axis=1),
                                np.stack([q, c[:, 1]], axis=1)])
        S = clip_segments(region, apply_inverse(p, S))
        S = S[np.any(S[:, 0] != S[:, 1], axis=1)]
        if len(S) > max_segments:
            truncated = True
            break
        done += 1
    return ManifoldSegments(S, done, truncated)


# -- sampled attractor -------------------------------------------------------

@dataclass
class PointCloud:
    points: np.ndarray
    params: Params
    seed: int
    burn_in: int


def attractor_point_cloud(p: Params, burn_in: int = 1000, samples: int = 100_000,
                          seed: int = 0, start=None) -> PointCloud:
    """Orbit of a point near X after ``burn_in`` steps.

    The start is X displaced by a random vector of length 1e-3 unless
    ``start`` is given.
    """
    rng = np.random.default_rng(seed)
    if start is None:
        X = fixed_points(p).X
        ang = rng.uniform(0.0, 2.0 * math.pi)
        start = X + 1e-3 * np.array([math.cos(ang), math.sin(ang)])
    pts = orbit(p, np.asarray(start, dtype=float), burn_in + samples - 1)[burn_in:]
    if not np.all(np.isfinite(pts)) or np.abs(pts).max() > ESCAPE_RADIUS:
        raise LoziError("parameters outside attracting regime: orbit left [-10, 10]^2")
    return PointCloud(pts, p, seed, burn_in)


@dataclass
class CloudManifoldDistance:
    cloud_to_manifold: float      # exact, from every cloud point to the polyline
    manifold_to_cloud: float      # from polyline samples to the cloud
    spacing: float                # polyline sample spacing (adds at most spacing / 2)
    length: float
    vertices: int

    @property
    def hausdorff(self) -> float:
        return max(self.cloud_to_manifold, self.manifold_to_cloud)


def cloud_manifold_distance(p: Params, cloud: np.ndarray, length_budget: float = 1e4,
                            spacing: float = 5e-3, geom: GeometryBundle = None
                            ) -> CloudManifoldDistance:
    """Hausdorff distance between an orbit sample and the arc of W^u_X of the given length."""
    man = grow_manifold(p, "X", "unstable", length_budget=length_budget, geom=geom)
    v = man.vertices
    d1 = float(points_to_polyline_distance(cloud, v).max())
    # one sample per spacing-sized grid cell is enough at this resolution
    pts = sample_open_polyline(v, spacing)
    key = np.floor(pts / spacing).astype(np.int64)
    key -= key.min(axis=0)
    _, first = np.unique(key[:, 0] * (int(key[:, 1].max()) + 1) + key[:, 1], return_index=True)
    d2 = float(cKDTree(cloud).query(pts[first])[0].max())
    return CloudManifoldDistance(d1, d2, spacing, man.length, len(v))


@dataclass
class SweepRow:
    a: float
    b: float
    in_U_minus: bool
    escaped: bool
    d_prev: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def continuity_sweep(path: Sequence[Tuple[float, float]], burn_in: int = 1000,
                     samples: int = 100_000, seed: int = 0) -> List[SweepRow]:
    """Point clouds along a parameter path and Hausdorff distances between neighbours."""
    rows: List[SweepRow] = []
    prev = None
    for a, b in path:
        p = Params(float(a), float(b))
        inside = check_conditions(p).in_U_minus
        try:
            cloud = attractor_point_cloud(p, burn_in, samples, seed).points
            escaped = False
        except LoziError:
            cloud, escaped = None, True
        d = None
        if cloud is not None and prev is not None:
            d = hausdorff_distance(cloud, prev)
        rows.append(SweepRow(float(a), float(b), inside, escaped, d))
        prev = cloud
    return rows


def linear_path(start, end, steps: int) -> List[Tuple[float, float]]:
    t = np.linspace(0.0, 1.0, steps + 1)
    s, e = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    return [tuple(s + ti * (e - s)) for ti in t]
