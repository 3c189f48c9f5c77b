"""Numerical witnesses for the chaotic behaviour on the attractor.

None of these prove anything: they grow segments until a straight piece
crosses both axes, look for a primitive power of a box-transition graph,
and measure how much of G the stable manifold of X comes close to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .cones import push_unstable_direction
from .constructions import GeometryBundle, build_geometry
from .core import LoziError, Params, spectra
from .geometry import Polyline, points_to_segments_distance, polyline_image, sample_interior
from .invariant_sets import attractor_point_cloud, stable_manifold_in


# -- segments crossing both axes ---------------------------------------------

@dataclass
class CrossingReport:
    n: Optional[int]                     # iterations used, None on failure
    sub_segment: Optional[np.ndarray]    # straight piece of f^n(I) meeting both axes
    crossings: bool
    lengths: List[float] = field(default_factory=list)    # polyline length per step
    inside_G: List[bool] = field(default_factory=list)    # whether step k stays in G
    pieces: List[int] = field(default_factory=list)       # straight pieces per step

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["sub_segment"] = None if self.sub_segment is None else self.sub_segment.tolist()
        return d


def crosses_both_axes(seg: np.ndarray) -> bool:
    (x0, y0), (x1, y1) = seg
    return x0 * x1 <= 0 and y0 * y1 <= 0


def find_crossing_segment(p: Params, I, max_n: int = 60, geom: GeometryBundle = None,
                          max_vertices: int = 1_000_000) -> CrossingReport:
    """Grow the segment I forward until a straight piece meets both axes.

    Every image is a broken line; only its maximal straight pieces are
    tested.  Lengths are recorded at every step for the expansion check.
    """
    geom = geom or build_geometry(p)
    line = Polyline(np.asarray(I, dtype=float).reshape(2, 2))
    lengths, inside, pieces = [], [], []
    for n in range(max_n + 1):
        straight = line.straight_pieces()
        lengths.append(line.length)
        inside.append(bool(geom.G.contains_points(line.vertices, 1e-12).all()))
        pieces.append(len(straight))
        for s in straight:
            if crosses_both_axes(s):
                return CrossingReport(n, s, True, lengths, inside, pieces)
        if n == max_n or len(line) > max_vertices:
            break
        line = polyline_image(p, line, "forward")
    return CrossingReport(None, None, False, lengths, inside, pieces)


def random_unstable_segments(p: Params, count: int, length: float = 1e-3, seed: int = 0,
                             geom: GeometryBundle = None, warmup: int = 30) -> np.ndarray:
    """Segments of the given length in G along pushed-forward unstable-cone vectors.

    A uniform point of G is carried ``warmup`` steps forward with a cone
    vector; the segment is centred on the end point and kept if it lies in G.
    """
    geom = geom or build_geometry(p)
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 100 * count:
            raise LoziError("could not place unstable segments inside G")
        z0 = sample_interior(geom.G, 1, rng)[0]
        z, v = push_unstable_direction(p, z0, warmup)
        seg = np.array([z - 0.5 * length * v, z + 0.5 * length * v])
        if geom.G.contains_points(seg, 0.0).all() and not crosses_both_axes(seg):
            out.append(seg)
    return np.array(out)


def expansion_law_holds(p: Params, rep: CrossingReport, rel_tol: float = 1e-6) -> bool:
    """length(f^(2k) I) >= beta^(2k) length(I) for every even step spent inside G."""
    beta = spectra(p).beta
    L0 = rep.lengths[0]
    for k2 in range(0, len(rep.lengths), 2):
        if not all(rep.inside_G[:k2 + 1]):
            break
        if rep.lengths[k2] < beta ** k2 * L0 * (1 - rel_tol):
            return False
    return True


# -- box transitions ---------------------------------------------------------

@dataclass
class TransitionMatrix:
    m: int
    bbox: np.ndarray                   # (xmin, ymin, xmax, ymax) of the grid
    counts: sparse.csr_matrix          # m^2 x m^2 transition counts
    visited: np.ndarray                # boxes the orbit entered
    core: np.ndarray                   # largest strongly connected set of visited boxes
    primitive_power: Optional[int]
    orbit_len: int
    seed: int

    def to_dict(self) -> dict:
        return {"m": self.m, "bbox": self.bbox.tolist(), "visited": int(len(self.visited)),
                "core": int(len(self.core)), "transitions": int(self.counts.sum()),
                "primitive_power": self.primitive_power, "orbit_len": self.orbit_len,
                "seed": self.seed}


def box_index(points: np.ndarray, bbox: np.ndarray, m: int) -> np.ndarray:
    x0, y0, x1, y1 = bbox
    i = np.clip(((points[:, 0] - x0) / (x1 - x0) * m).astype(int), 0, m - 1)
    j = np.clip(((points[:, 1] - y0) / (y1 - y0) * m).astype(int), 0, m - 1)
    return i * m + j


def primitive_power(A: np.ndarray, max_power: int) -> Optional[int]:
    """Smallest k <= max_power with every entry of A^k positive (boolean powers)."""
    A = (A > 0).astype(np.float64)
    if A.size == 0:
        return None
    P = A.copy()
    for k in range(1, max_power + 1):
        if P.all():
            return k
        P = ((P @ A) > 0).astype(np.float64)
    return None


def mixing_witness(p: Params, grid_m: int = 32, orbit_len: int = 1_000_000, seed: int = 0,
                   burn_in: int = 1000, geom: GeometryBundle = None) -> TransitionMatrix:
    """Box-transition graph of a long orbit over an m x m grid on G's bounding box.

    The power search runs on the largest strongly connected set of visited
    boxes; boxes seen only on the way in or at the very end are left out.
    """
    if grid_m < 1 or orbit_len < 2:
        raise LoziError("grid_m must be >= 1 and orbit_len >= 2")
    geom = geom or build_geometry(p)
    v = geom.G.vertices
    bbox = np.concatenate([v.min(axis=0), v.max(axis=0)])
    pts = attractor_point_cloud(p, burn_in, orbit_len, seed).points
    idx = box_index(pts, bbox, grid_m)
    n = grid_m * grid_m
    C = sparse.coo_matrix((np.ones(len(idx) - 1, dtype=np.int64), (idx[:-1], idx[1:])),
                          shape=(n, n)).tocsr()
    visited = np.unique(idx)
    sub = C[visited][:, visited]
    ncomp, labels = connected_components(sub, directed=True, connection="strong")
    big = np.argmax(np.bincount(labels))
    core = visited[labels == big]
    A = C[core][:, core].toarray()
    power = primitive_power(A, 2 * n)
    return TransitionMatrix(grid_m, bbox, C, visited, core, power, orbit_len, seed)


# -- density of the stable manifold ------------------------------------------

@dataclass
class DensityReport:
    fraction: float
    boxes: int                # grid boxes whose centre lies in G
    generations: int
    segments: int
    truncated: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def grid_centres_in(poly, m: int):
    v = poly.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    step = (hi - lo) / m
    xs = lo[0] + (np.arange(m) + 0.5) * step[0]
    ys = lo[1] + (np.arange(m) + 0.5) * step[1]
    C = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    return C[poly.contains_points(C, 0.0)], float(math.hypot(*step))


def stable_density_in_G(p: Params, geom: GeometryBundle = None, generations: int = 24,
                        grid_m: int = 64, max_segments: int = 200_000) -> DensityReport:
    """Fraction of grid boxes of G within one box diagonal of W^s_X.

    A box belongs to G when its centre does.  W^s_X is grown backward and
    clipped to G, so later generations contain earlier ones and the
    fraction can only grow.
    """
    geom = geom or build_geometry(p)
    C, diag = grid_centres_in(geom.G, grid_m)
    ws = stable_manifold_in(p, geom.G, generations, max_segments=max_segments)
    if not len(C):
        raise LoziError("grid too coarse: no box centre inside G")
    if not len(ws.segments):
        return DensityReport(0.0, len(C), ws.generations, 0, ws.truncated)
    d = points_to_segments_distance(C, ws.segments)
    return DensityReport(float((d <= diag).mean()), len(C), ws.generations,
                         len(ws.segments), ws.truncated)
