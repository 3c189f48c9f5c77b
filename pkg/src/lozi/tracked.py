"""Iterating sets as (source piece, affine map) pairs.

On a convex piece where the first ``k`` iterates stay on fixed sides of the
y-axis, f^k is a single affine map ``z -> M z + c``.  Keeping the source piece
and the map, instead of only the image polygon, has two advantages:

* cuts by x = 0 (or by the edges of a target region) are pulled back to the
  source, where the geometry is well conditioned;
* the image area is |det M| * area(source) exactly, even when the image is a
  sliver far thinner than double precision can resolve in image coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .core import Params
from .geometry import ConvexPolygon, HalfPlane, clip_vertices, signed_area


@dataclass
class TrackedPiece:
    source: np.ndarray            # CCW vertices in source coordinates
    M: np.ndarray
    c: np.ndarray
    word: Tuple[int, ...] = ()    # signs of x along the orbit, one per step
    tag: int = 0                  # index of the source region it came from
    jdet: float = 1.0             # det M, carried as a product of -b (one per step)

    @classmethod
    def identity(cls, poly: ConvexPolygon, tag: int = 0) -> "TrackedPiece":
        return cls(poly.vertices.copy(), np.eye(2), np.zeros(2), (), tag, 1.0)

    @property
    def steps(self) -> int:
        return len(self.word)

    @property
    def source_area(self) -> float:
        return abs(signed_area(self.source))

    @property
    def det(self) -> float:
        # np.linalg.det(M) cancels badly once the entries grow like beta^n
        return self.jdet

    @property
    def area(self) -> float:
        """Area of the image, via the Jacobian."""
        return abs(self.det) * self.source_area

    def image_vertices(self) -> np.ndarray:
        return self.source @ self.M.T + self.c

    def image(self) -> ConvexPolygon:
        return ConvexPolygon(self.image_vertices())

    def source_polygon(self) -> ConvexPolygon:
        return ConvexPolygon(self.source)

    def map(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.M.T + self.c

    def pullback(self, hp: HalfPlane) -> Tuple[np.ndarray, float]:
        """Source-space (normal, offset) of {z : image(z) in hp}."""
        n = np.asarray(hp.normal, dtype=float)
        return self.M.T @ n, hp.offset - float(n @ self.c)

    def clip_image(self, hp: HalfPlane) -> "TrackedPiece":
        nrm, off = self.pullback(hp)
        return self.with_source(clip_vertices(self.source, nrm, off))

    def with_source(self, verts: np.ndarray) -> "TrackedPiece":
        return TrackedPiece(verts, self.M, self.c, self.word, self.tag, self.jdet)

    def valid(self, min_area: float) -> bool:
        return len(self.source) >= 3 and self.source_area > min_area


def step_piece(p: Params, piece: TrackedPiece, min_area: float = 0.0) -> List[TrackedPiece]:
    """Apply f once: split where the image crosses x = 0, compose branches."""
    out = []
    row, cx = piece.M[0], piece.c[0]
    for sigma in (1, -1):
        verts = clip_vertices(piece.source, sigma * row, -sigma * cx)
        if len(verts) < 3 or abs(signed_area(verts)) <= min_area:
            continue
        J = np.array([[-sigma * p.a, 1.0], [p.b, 0.0]])
        out.append(TrackedPiece(verts, J @ piece.M, J @ piece.c + np.array([1.0, 0.0]),
                                piece.word + (sigma,), piece.tag, -piece.jdet * p.b))
    return out


def step_pieces(p: Params, pieces: Sequence[TrackedPiece],
                min_area: float = 0.0) -> Tuple[List[TrackedPiece], int]:
    """One forward step for every piece; returns (pieces, number dropped)."""
    out: List[TrackedPiece] = []
    dropped = 0
    for piece in pieces:
        new = step_piece(p, piece, 0.0)
        for q in new:
            if q.source_area > min_area:
                out.append(q)
            else:
                dropped += 1
    return out, dropped


def split_by_region(piece: TrackedPiece, region: ConvexPolygon,
                    min_area: float = 0.0):
    """Split by whether the image lies in ``region``.

    Returns (inside piece or None, list of interior-disjoint outside pieces).
    """
    rest = piece.source
    outside = []
    for hp in region.halfplanes():
        nrm, off = piece.pullback(hp)
        out_v = clip_vertices(rest, -nrm, -off)
        if len(out_v) >= 3 and abs(signed_area(out_v)) > min_area:
            outside.append(piece.with_source(out_v))
        rest = clip_vertices(rest, nrm, off)
        if len(rest) < 3:
            rest = rest[:0]
            break
    inside = piece.with_source(rest) if len(rest) >= 3 and abs(signed_area(rest)) > min_area else None
    return inside, outside


def affine_for_word(p: Params, word: Sequence[int]):
    """(M, c) of the composition of branches listed in ``word``."""
    M = np.eye(2)
    c = np.zeros(2)
    for sigma in word:
        J = np.array([[-sigma * p.a, 1.0], [p.b, 0.0]])
        M = J @ M
        c = J @ c + np.array([1.0, 0.0])
    return M, c
