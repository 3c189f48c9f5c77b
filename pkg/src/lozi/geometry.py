"""Planar primitives: convex polygons, unions of convex pieces, polylines.

Regions are always kept as unions of convex pieces.  The Lozi map is affine on
each side of a line, so cutting a convex set along that line and mapping the
halves keeps everything convex; no general polygon booleans are needed.

Predicates take an explicit tolerance.  Coordinates of every object in this
package are O(1), so absolute tolerances are meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .core import LoziError, Params

DEFAULT_TOL = 1e-9
MIN_PIECE_AREA = 1e-14


# -- raw vertex-array helpers -----------------------------------------------

def signed_area(verts: np.ndarray) -> float:
    if len(verts) < 3:
        return 0.0
    # shift to the first vertex to limit cancellation
    v = verts - verts[0]
    x, y = v[:, 0], v[:, 1]
    # terms touching the first vertex vanish after the shift
    return 0.5 * float(np.dot(x[1:-1], y[2:]) - np.dot(x[2:], y[1:-1]))


def ccw(verts) -> np.ndarray:
    """The same vertex loop, reversed if it runs clockwise."""
    v = np.asarray(verts, dtype=float)
    return v[::-1].copy() if signed_area(v) < 0 else v


def _dedupe(verts: List[np.ndarray], eps: float) -> np.ndarray:
    out = []
    for v in verts:
        if not out or abs(v[0] - out[-1][0]) > eps or abs(v[1] - out[-1][1]) > eps:
            out.append(v)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= eps and abs(out[0][1] - out[-1][1]) <= eps:
        out.pop()
    return np.array(out, dtype=float).reshape(-1, 2)


def clip_vertices(verts: np.ndarray, normal, offset: float) -> np.ndarray:
    """Sutherland-Hodgman step: ``verts`` intersected with {normal . z >= offset}."""
    n = len(verts)
    if n == 0:
        return verts
    normal = np.asarray(normal, dtype=float)
    d = verts @ normal - offset
    scale = float(np.hypot(*normal)) * max(1.0, float(np.abs(verts).max()))
    eps = 1e-13 * scale
    d = np.where(np.abs(d) <= eps, 0.0, d)
    if np.all(d >= 0):
        return verts
    if np.all(d <= 0):
        if np.any(d == 0) and n >= 1:
            return verts[d == 0]
        return verts[:0]
    out = []
    for i in range(n):
        j = (i + 1) % n
        di, dj = d[i], d[j]
        if di >= 0:
            out.append(verts[i])
        if (di > 0 > dj) or (di < 0 < dj):
            t = di / (di - dj)
            out.append(verts[i] + t * (verts[j] - verts[i]))
    return _dedupe(out, 1e-15 * max(1.0, float(np.abs(verts).max())))


def clip_many(V: np.ndarray, count: np.ndarray, normal: np.ndarray,
              offset: np.ndarray):
    """Batched :func:`clip_vertices`: row i of ``V`` (its first ``count[i]``
    vertices) intersected with {normal[i] . z >= offset[i]}.

    Returns the clipped (V, count), padded to the longest row.  Rows may keep
    repeated vertices, which do not change areas or extents.
    """
    B, K, _ = V.shape
    if B == 0:
        return V, count
    i = np.arange(K)
    valid = i[None, :] < count[:, None]
    j = np.where(i[None, :] + 1 < count[:, None], i[None, :] + 1, 0)
    Vj = np.take_along_axis(V, j[..., None], axis=1)
    d = np.einsum("bkc,bc->bk", V, normal) - offset[:, None]
    scale = np.hypot(normal[:, 0], normal[:, 1]) * np.maximum(
        1.0, np.abs(np.where(valid[..., None], V, 0.0)).max(axis=(1, 2)))
    d = np.where(np.abs(d) <= 1e-13 * scale[:, None], 0.0, d)
    dj = np.take_along_axis(d, j, axis=1)
    keep = valid & (d >= 0)
    cross = valid & (((d > 0) & (dj < 0)) | ((d < 0) & (dj > 0)))
    t = np.where(cross, d / np.where(cross, d - dj, 1.0), 0.0)
    X = V + t[..., None] * (Vj - V)
    out = np.stack([V, X], axis=2).reshape(B, 2 * K, 2)
    mask = np.stack([keep, cross], axis=2).reshape(B, 2 * K)
    order = np.argsort(~mask, axis=1, kind="stable")
    out = np.take_along_axis(out, order[..., None], axis=1)
    count = mask.sum(axis=1)
    width = max(int(count.max()), 1)
    return out[:, :width], count


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; returns CCW hull without collinear points."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    for q in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return np.array(lower[:-1] + upper[:-1])


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlane:
    """The closed set {z : normal . z >= offset}."""
    normal: Tuple[float, float]
    offset: float

    def __post_init__(self):
        if self.normal[0] == 0 and self.normal[1] == 0:
            raise LoziError("half-plane normal must be nonzero")

    @classmethod
    def through(cls, point, direction, inside_point=None) -> "HalfPlane":
        """Half-plane bounded by the line through ``point`` along ``direction``.

        The side containing ``inside_point`` is kept (left side if omitted).
        """
        d = np.asarray(direction, dtype=float)
        nrm = np.array([-d[1], d[0]])
        off = float(nrm @ np.asarray(point, dtype=float))
        if inside_point is not None and nrm @ np.asarray(inside_point) < off:
            nrm, off = -nrm, -off
        return cls((float(nrm[0]), float(nrm[1])), off)

    def value(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) @ np.asarray(self.normal) - self.offset

    def contains(self, z, tol: float = DEFAULT_TOL) -> bool:
        return bool(self.value(z) >= -tol * math.hypot(*self.normal))

    def flipped(self) -> "HalfPlane":
        return HalfPlane((-self.normal[0], -self.normal[1]), -self.offset)


X_AXIS_UP = HalfPlane((0.0, 1.0), 0.0)      # y >= 0
Y_AXIS_RIGHT = HalfPlane((1.0, 0.0), 0.0)   # x >= 0


class ConvexPolygon:
    """Convex polygon with counterclockwise vertices.

    Fewer than three vertices, or zero area, marks the polygon degenerate
    (a segment or a point); such shapes are allowed but flagged.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices, check: bool = False):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) >= 3 and signed_area(v) < 0:
            v = v[::-1].copy()
        self.vertices = v
        if check and not self.is_convex():
            raise LoziError("vertices do not describe a convex polygon")

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return cls(convex_hull(points))

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()})"

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 3 or self.area <= 0.0

    @property
    def empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def area(self) -> float:
        return abs(signed_area(self.vertices))

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        if len(v) < 3 or self.area == 0:
            return v.mean(axis=0)
        o = v[0]
        w = v - o
        cr = w[:, 0] * np.roll(w[:, 1], -1) - np.roll(w[:, 0], -1) * w[:, 1]
        a = cr.sum() / 2
        cx = ((w[:, 0] + np.roll(w[:, 0], -1)) * cr).sum() / (6 * a)
        cy = ((w[:, 1] + np.roll(w[:, 1], -1)) * cr).sum() / (6 * a)
        return o + np.array([cx, cy])

    @property
    def bbox(self) -> np.ndarray:
        return np.concatenate([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    def edges(self):
        v = self.vertices
        return list(zip(v, np.roll(v, -1, axis=0)))

    def halfplanes(self) -> List[HalfPlane]:
        """Inward half-planes, one per edge."""
        out = []
        for p, q in self.edges():
            d = q - p
            if d[0] == 0 and d[1] == 0:
                continue
            nrm = np.array([-d[1], d[0]])
            out.append(HalfPlane((float(nrm[0]), float(nrm[1])), float(nrm @ p)))
        return out

    def is_convex(self, tol: float = 1e-12) -> bool:
        v = self.vertices
        if len(v) < 3:
            return True
        e = np.roll(v, -1, axis=0) - v
        cr = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        scale = max(1.0, float(np.abs(v).max())) ** 2
        return bool(np.all(cr >= -tol * scale))

    def clip(self, hp: HalfPlane) -> "ConvexPolygon":
        return ConvexPolygon(clip_vertices(self.vertices, hp.normal, hp.offset))

    def intersect(self, other: "ConvexPolygon") -> "ConvexPolygon":
        v = self.vertices
        for hp in other.halfplanes():
            v = clip_vertices(v, hp.normal, hp.offset)
            if len(v) == 0:
                break
        return ConvexPolygon(v)

    def contains(self, z, tol: float = DEFAULT_TOL) -> bool:
        z = np.asarray(z, dtype=float)
        v = self.vertices
        if len(v) == 0:
            return False
        if len(v) < 3:
            return point_segment_distance(z, v[0], v[-1]) <= tol
        e = np.roll(v, -1, axis=0) - v
        w = z - v
        cr = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
        return bool(np.all(cr >= -tol * np.hypot(e[:, 0], e[:, 1])))

    def contains_points(self, z, tol: float = DEFAULT_TOL) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        v = self.vertices
        if len(v) < 3:
            return np.array([self.contains(q, tol) for q in z], dtype=bool)
        ok = np.ones(len(z), dtype=bool)
        for p, q in self.edges():
            e = q - p
            ln = math.hypot(*e)
            if ln == 0:
                continue
            cr = e[0] * (z[:, 1] - p[1]) - e[1] * (z[:, 0] - p[0])
            ok &= cr >= -tol * ln
        return ok

    def distance_to_boundary(self, z) -> float:
        return min(point_segment_distance(z, p, q) for p, q in self.edges())

    def diameter(self) -> float:
        return diameter(self.vertices)

    def boundary_samples(self, spacing: float) -> np.ndarray:
        return sample_closed_polyline(self.vertices, spacing)

    def affine(self, M, c) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices @ np.asarray(M).T + np.asarray(c))


def split_by_line(poly: ConvexPolygon, line: HalfPlane):
    """Split along the boundary of ``line``; returns (inside part, outside part).

    Empty parts are returned as ``None``.
    """
    a = poly.clip(line)
    b = poly.clip(line.flipped())
    return (a if len(a) >= 3 and a.area > 0 else None,
            b if len(b) >= 3 and b.area > 0 else None)


def difference(p: ConvexPolygon, q: ConvexPolygon) -> List[ConvexPolygon]:
    """``p`` minus ``q`` as a list of interior-disjoint convex pieces."""
    if not _bbox_overlap(p.bbox, q.bbox):
        return [p]
    out = []
    rest = p.vertices
    for hp in q.halfplanes():
        outside = clip_vertices(rest, (-hp.normal[0], -hp.normal[1]), -hp.offset)
        if len(outside) >= 3 and abs(signed_area(outside)) > 0:
            out.append(ConvexPolygon(outside))
        rest = clip_vertices(rest, hp.normal, hp.offset)
        if len(rest) < 3:
            break
    return out


def _bbox_overlap(b1, b2, tol: float = 0.0) -> bool:
    return not (b1[2] < b2[0] - tol or b2[2] < b1[0] - tol or
                b1[3] < b2[1] - tol or b2[3] < b1[1] - tol)


@dataclass
class PolygonUnion:
    """A finite union of convex pieces.

    ``dropped`` counts pieces discarded for having negligible area, and
    ``dropped_area`` their total area.
    """
    pieces: List[ConvexPolygon] = field(default_factory=list)
    dropped: int = 0
    dropped_area: float = 0.0

    def __len__(self):
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    @property
    def area(self) -> float:
        return float(sum(p.area for p in self.pieces))

    @property
    def bbox(self) -> np.ndarray:
        if not self.pieces:
            return np.array([np.inf, np.inf, -np.inf, -np.inf])
        b = np.array([p.bbox for p in self.pieces])
        return np.concatenate([b[:, :2].min(axis=0), b[:, 2:].max(axis=0)])

    def vertices(self) -> np.ndarray:
        if not self.pieces:
            return np.zeros((0, 2))
        return np.concatenate([p.vertices for p in self.pieces])

    def contains(self, z, tol: float = DEFAULT_TOL) -> bool:
        z = np.asarray(z, dtype=float)
        for p in self.pieces:
            bb = p.bbox
            if bb[0] - tol <= z[0] <= bb[2] + tol and bb[1] - tol <= z[1] <= bb[3] + tol:
                if p.contains(z, tol):
                    return True
        return False

    def contains_points(self, z, tol: float = DEFAULT_TOL) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        ok = np.zeros(len(z), dtype=bool)
        for p in self.pieces:
            bb = p.bbox
            sel = (~ok & (z[:, 0] >= bb[0] - tol) & (z[:, 0] <= bb[2] + tol)
                   & (z[:, 1] >= bb[1] - tol) & (z[:, 1] <= bb[3] + tol))
            if sel.any():
                idx = np.nonzero(sel)[0]
                ok[idx] = p.contains_points(z[idx], tol)
        return ok

    def boundary_samples(self, spacing: float) -> np.ndarray:
        if not self.pieces:
            return np.zeros((0, 2))
        return np.concatenate([p.boundary_samples(spacing) for p in self.pieces])

    def diameter(self) -> float:
        return diameter(self.vertices())


def as_union(shape) -> PolygonUnion:
    if isinstance(shape, PolygonUnion):
        return shape
    return PolygonUnion([shape])


def subtract_union(inner: ConvexPolygon, outer: PolygonUnion,
                   min_area: float = 0.0) -> List[ConvexPolygon]:
    """Pieces of ``inner`` not covered by ``outer``."""
    rest = [inner]
    for q in outer.pieces:
        if not rest:
            break
        qb = q.bbox
        nxt = []
        for r in rest:
            if _bbox_overlap(r.bbox, qb):
                nxt.extend(d for d in difference(r, q) if d.area > min_area)
            else:
                nxt.append(r)
        rest = nxt
    return rest


def contains(shape, z, tol: float = DEFAULT_TOL) -> bool:
    return shape.contains(z, tol)


def contains_polygon(outer, inner: ConvexPolygon, tol: float = DEFAULT_TOL) -> bool:
    """True when area(inner minus outer) < tol * area(inner)."""
    return uncovered_area(outer, inner) < tol * max(inner.area, 1e-300)


def uncovered_area(outer, inner: ConvexPolygon) -> float:
    return float(sum(r.area for r in subtract_union(inner, as_union(outer))))


def disjoint_union(pieces: Iterable[ConvexPolygon], min_area: float = 0.0) -> PolygonUnion:
    """Union of possibly overlapping convex pieces as interior-disjoint pieces."""
    out = PolygonUnion()
    for p in pieces:
        for r in subtract_union(p, out):
            if r.area > min_area:
                out.pieces.append(r)
            else:
                out.dropped += 1
                out.dropped_area += r.area
    return out


# -- the map on sets ---------------------------------------------------------

def _branch(p: Params, sigma: int, direction: str):
    if direction == "forward":
        return np.array([[-sigma * p.a, 1.0], [p.b, 0.0]]), np.array([1.0, 0.0])
    # inverse on the half-plane sign(y) = sigma:  x = v / b,  y = u - 1 + a |v / b|
    if p.b == 0:
        raise LoziError("degenerate family, not invertible (b = 0)")
    s = sigma * (1.0 if p.b > 0 else -1.0)  # sign of v / b
    return np.array([[0.0, 1.0 / p.b], [1.0, s * p.a / p.b]]), np.array([0.0, -1.0])


def _switch(direction: str) -> HalfPlane:
    if direction == "forward":
        return Y_AXIS_RIGHT
    if direction == "inverse":
        return X_AXIS_UP
    raise LoziError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def piecewise_affine_image(p: Params, poly, direction: str = "forward",
                           min_area: float = MIN_PIECE_AREA) -> PolygonUnion:
    """Image of a convex polygon (or a union) under f or f^-1."""
    line = _switch(direction)
    out = PolygonUnion()
    src = poly.pieces if isinstance(poly, PolygonUnion) else [poly]
    if isinstance(poly, PolygonUnion):
        out.dropped, out.dropped_area = poly.dropped, poly.dropped_area
    for piece in src:
        if piece.degenerate:
            # segments and points: map vertices branchwise, keep the flag
            img = apply_direction(p, piece.vertices, direction)
            out.pieces.append(ConvexPolygon(img))
            continue
        for sigma, part in zip((1, -1), split_by_line(piece, line)):
            if part is None:
                continue
            M, c = _branch(p, sigma, direction)
            img = part.affine(M, c)
            if img.area < min_area:
                out.dropped += 1
                out.dropped_area += img.area
                continue
            out.pieces.append(img)
    return out


def apply_direction(p: Params, z, direction: str) -> np.ndarray:
    from .core import apply, apply_inverse
    return apply(p, z) if direction == "forward" else apply_inverse(p, z)


@dataclass
class Polyline:
    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.vertices)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.vertices, axis=0).T)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    def samples(self, spacing: float) -> np.ndarray:
        return sample_open_polyline(self.vertices, spacing)

    def straight_pieces(self, tol: float = 1e-12) -> List[np.ndarray]:
        """Maximal straight sub-segments as (2, 2) endpoint arrays."""
        v = self.vertices
        if len(v) < 2:
            return []
        out = []
        start = 0
        for i in range(1, len(v) - 1):
            d1 = v[i] - v[start]
            d2 = v[i + 1] - v[i]
            cr = d1[0] * d2[1] - d1[1] * d2[0]
            if abs(cr) > tol * (np.hypot(*d1) * np.hypot(*d2) + 1e-300):
                out.append(np.array([v[start], v[i]]))
                start = i
        out.append(np.array([v[start], v[-1]]))
        return out


def polyline_image(p: Params, line: Polyline, direction: str = "forward") -> Polyline:
    """Image of a polyline, with a vertex inserted at each switching-axis crossing."""
    sw = _switch(direction)
    nrm = np.asarray(sw.normal)
    k = int(np.argmax(np.abs(nrm)))
    v = line.vertices
    d = v @ nrm
    cross = np.nonzero(((d[:-1] > 0) & (d[1:] < 0)) | ((d[:-1] < 0) & (d[1:] > 0)))[0]
    if len(cross):
        t = d[cross] / (d[cross] - d[cross + 1])
        q = v[cross] + t[:, None] * (v[cross + 1] - v[cross])
        q[:, k] = 0.0
        v = np.insert(v, cross + 1, q, axis=0)
    img = apply_direction(p, v, direction)
    keep = np.ones(len(img), dtype=bool)
    keep[1:] = np.any(np.diff(img, axis=0) != 0, axis=1)
    return Polyline(img[keep])


# -- distances ---------------------------------------------------------------

def hausdorff_distance(s1, s2) -> float:
    """Symmetric Hausdorff distance between two finite samplings."""
    d12, d21 = directed_hausdorff_pair(s1, s2)
    return max(d12, d21)


def directed_hausdorff_pair(s1, s2) -> Tuple[float, float]:
    a = _as_points(s1)
    b = _as_points(s2)
    if len(a) == 0 or len(b) == 0:
        raise LoziError("Hausdorff distance of an empty set")
    d12 = float(cKDTree(b).query(a)[0].max())
    d21 = float(cKDTree(a).query(b)[0].max())
    return d12, d21


def _as_points(s) -> np.ndarray:
    if isinstance(s, Polyline):
        return s.vertices
    if isinstance(s, PolygonUnion):
        return s.vertices()
    if isinstance(s, ConvexPolygon):
        return s.vertices
    return np.asarray(s, dtype=float).reshape(-1, 2)


def point_segment_distance(z, p, q) -> float:
    z, p, q = (np.asarray(t, dtype=float) for t in (z, p, q))
    d = q - p
    dd = float(d @ d)
    if dd == 0:
        return float(np.hypot(*(z - p)))
    t = min(1.0, max(0.0, float((z - p) @ d) / dd))
    return float(np.hypot(*(z - p - t * d)))


def points_to_polyline_distance(z, vertices) -> np.ndarray:
    """Distance from each point in ``z`` to the polyline through ``vertices``."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    v = np.asarray(vertices, dtype=float)
    if len(v) == 1:
        return np.hypot(*(z - v[0]).T)
    p, q = v[:-1], v[1:]
    if len(z) * len(p) > 5_000_000:
        # long folded lines pack many strands together: probe finely
        total = float(np.hypot(*(q - p).T).sum())
        return points_to_segments_distance(z, np.stack([p, q], axis=1),
                                           probe_spacing=max(total / 1e6, 1e-300))
    d = q - p
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0, 1.0, dd)
    best = np.full(len(z), np.inf)
    chunk = max(1, 2_000_000 // max(len(p), 1))
    for s in range(0, len(z), chunk):
        zz = z[s:s + chunk, None, :]
        t = np.clip(np.einsum("kij,ij->ki", zz - p, d) / dd, 0.0, 1.0)
        r = zz - p - t[..., None] * d
        best[s:s + chunk] = np.sqrt(np.einsum("kij,kij->ki", r, r)).min(axis=1)
    return best


def _seg_dist(z, p, q) -> np.ndarray:
    d = q - p
    dd = np.einsum("...j,...j->...", d, d)
    t = np.einsum("...j,...j->...", z - p, d) / np.where(dd == 0, 1.0, dd)
    t = np.clip(t, 0.0, 1.0)
    r = z - p - t[..., None] * d
    return np.sqrt(np.einsum("...j,...j->...", r, r))


def points_to_segments_distance(z, segments, probe_spacing: float = None,
                                k: int = 16) -> np.ndarray:
    """Exact distance from each point to a union of segments.

    ``segments`` has shape (m, 2, 2).  Candidate segments come from a KD-tree
    over probe points spaced at most ``probe_spacing`` apart along every
    segment.  The nearest segment always owns a probe within
    d* + probe_spacing / 2 of the point, where d* is the exact distance, so
    checking every segment with a probe in that ball is enough.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    S = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(S) == 0:
        raise LoziError("distance to an empty set of segments")
    lens = np.hypot(*(S[:, 1] - S[:, 0]).T)
    if probe_spacing is None:
        # about four probes per segment on average; the median would be tiny
        # when many edges are short cross-cuts of thin pieces
        probe_spacing = max(float(lens.sum()) / (4 * len(S)), 1e-300)
    cnt = np.maximum(1, np.ceil(lens / probe_spacing).astype(np.int64)) + 1
    owner = np.repeat(np.arange(len(S)), cnt)
    start = np.cumsum(cnt) - cnt
    t = (np.arange(int(cnt.sum())) - np.repeat(start, cnt)) / np.repeat(cnt - 1, cnt)
    probes = S[owner, 0] + t[:, None] * (S[owner, 1] - S[owner, 0])
    tree = cKDTree(probes)
    exact = np.full(len(z), np.inf)
    todo = np.arange(len(z))
    kk = k
    # widen the k-nearest search for points near dense bundles of segments,
    # then fall back to exact ball queries
    while len(todo):
        kk = min(kk, len(probes))
        dist, idx = tree.query(z[todo], k=kk)
        dist = dist.reshape(len(todo), kk)
        cand = owner[idx.reshape(len(todo), kk)]
        d = _seg_dist(z[todo][:, None, :], S[cand, 0], S[cand, 1]).min(axis=1)
        exact[todo] = np.minimum(exact[todo], d)
        if kk == len(probes):
            break
        need = dist[:, -1] <= exact[todo] + 0.5 * probe_spacing
        todo = todo[need]
        if kk >= 4096 or len(todo) * kk * 16 > 4e6:
            break
        kk *= 16
    for i in todo if kk < len(probes) else ():
        ids = tree.query_ball_point(z[i], exact[i] + 0.5 * probe_spacing + 1e-15)
        segs = np.unique(owner[ids])
        exact[i] = min(exact[i], float(_seg_dist(z[i], S[segs, 0], S[segs, 1]).min()))
    return exact


def segments_hausdorff(samples_a, segs_a, samples_b, segs_b) -> Tuple[float, float]:
    """Directed distances (A to B, B to A) with sampled sources and exact targets."""
    return (float(points_to_segments_distance(samples_a, segs_b).max()),
            float(points_to_segments_distance(samples_b, segs_a).max()))


def segment_intersection(p1, p2, q1, q2, tol: float = 1e-12) -> Optional[np.ndarray]:
    """Intersection point of segments p1p2 and q1q2, or None."""
    p1, p2, q1, q2 = (np.asarray(t, dtype=float) for t in (p1, p2, q1, q2))
    r, s = p2 - p1, q2 - q1
    den = r[0] * s[1] - r[1] * s[0]
    if abs(den) <= tol * np.hypot(*r) * np.hypot(*s):
        return None
    w = q1 - p1
    t = (w[0] * s[1] - w[1] * s[0]) / den
    u = (w[0] * r[1] - w[1] * r[0]) / den
    if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
        return p1 + t * r
    return None


def line_intersection(p, d, q, e) -> np.ndarray:
    """Intersection of the lines p + t d and q + s e."""
    A = np.column_stack([d, -np.asarray(e, dtype=float)])
    t, _ = np.linalg.solve(A, np.asarray(q, dtype=float) - np.asarray(p, dtype=float))
    return np.asarray(p, dtype=float) + t * np.asarray(d, dtype=float)


def clip_segment(poly: ConvexPolygon, p, q) -> Optional[np.ndarray]:
    """Part of segment pq inside a convex polygon (Cyrus-Beck), or None."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    d = q - p
    t0, t1 = 0.0, 1.0
    for hp in poly.halfplanes():
        nrm = np.asarray(hp.normal)
        num = hp.offset - nrm @ p
        den = nrm @ d
        if den == 0:
            if num > 0:
                return None
            continue
        t = num / den
        if den > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return np.array([p + t0 * d, p + t1 * d])


def clip_segments(poly: ConvexPolygon, S: np.ndarray) -> np.ndarray:
    """Batched :func:`clip_segment` for segments of shape (m, 2, 2); empty parts dropped."""
    S = np.asarray(S, dtype=float).reshape(-1, 2, 2)
    p, d = S[:, 0], S[:, 1] - S[:, 0]
    t0 = np.zeros(len(S))
    t1 = np.ones(len(S))
    alive = np.ones(len(S), dtype=bool)
    for hp in poly.halfplanes():
        nrm = np.asarray(hp.normal)
        num = hp.offset - p @ nrm
        den = d @ nrm
        par = den == 0
        alive &= ~(par & (num > 0))
        t = np.where(par, 0.0, num / np.where(par, 1.0, den))
        t0 = np.where(~par & (den > 0), np.maximum(t0, t), t0)
        t1 = np.where(~par & (den < 0), np.minimum(t1, t), t1)
    alive &= t0 <= t1
    out = np.stack([p + t0[:, None] * d, p + t1[:, None] * d], axis=1)
    return out[alive]


def diameter(points) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return 0.0
    h = convex_hull(pts) if len(pts) > 3 else pts
    diff = h[:, None, :] - h[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1)).max())


def sample_open_polyline(v: np.ndarray, spacing: float) -> np.ndarray:
    """Vertices plus evenly spaced points on each segment, gaps at most ``spacing``."""
    v = np.asarray(v, dtype=float)
    if len(v) < 2:
        return v.copy()
    seg = np.diff(v, axis=0)
    k = np.maximum(1, np.ceil(np.hypot(*seg.T) / spacing).astype(np.int64))
    idx = np.repeat(np.arange(len(seg)), k)
    start = np.cumsum(k) - k
    t = (np.arange(int(k.sum())) - np.repeat(start, k) + 1) / np.repeat(k, k)
    pts = v[idx] + t[:, None] * seg[idx]
    return np.concatenate([v[:1], pts])


def sample_closed_polyline(v: np.ndarray, spacing: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if len(v) < 2:
        return v.copy()
    return sample_open_polyline(np.vstack([v, v[:1]]), spacing)[:-1]


def sample_interior(poly: ConvexPolygon, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random points in a convex polygon via fan triangulation."""
    v = poly.vertices
    tri = [(v[0], v[i], v[i + 1]) for i in range(1, len(v) - 1)]
    areas = np.array([abs(signed_area(np.array(t))) for t in tri])
    idx = rng.choice(len(tri), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a = np.array([t[0] for t in tri])[idx]
    b = np.array([t[1] for t in tri])[idx]
    c = np.array([t[2] for t in tri])[idx]
    return (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c


def sample_union(u: PolygonUnion, n: int, rng: np.random.Generator) -> np.ndarray:
    areas = np.array([p.area for p in u.pieces])
    counts = rng.multinomial(n, areas / areas.sum())
    parts = [sample_interior(p, k, rng) for p, k in zip(u.pieces, counts) if k]
    return np.concatenate(parts) if parts else np.zeros((0, 2))
