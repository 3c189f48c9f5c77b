import numpy as np
import pytest

from lozi.constructions import build_geometry
from lozi.core import Params, iterate
from lozi.geometry import sample_interior
from lozi.tracked import TrackedPiece, affine_for_word, split_by_region, step_pieces


def test_step_pieces_track_the_map(fig1, rng):
    H0 = build_geometry(fig1).H0
    pieces = [TrackedPiece.identity(H0)]
    for _ in range(6):
        pieces, _ = step_pieces(fig1, pieces)
    assert sum(q.source_area for q in pieces) == pytest.approx(H0.area, rel=1e-12)
    assert sum(q.area for q in pieces) == pytest.approx(H0.area * 0.5 ** 6, rel=1e-12)
    for q in pieces[:20]:
        Z = sample_interior(q.source_polygon(), 20, rng)
        assert np.allclose(q.map(Z), iterate(fig1, Z, 6), atol=1e-12)
        M, c = affine_for_word(fig1, q.word)
        assert np.allclose(M, q.M) and np.allclose(c, q.c)


def test_split_by_region_partitions_source(fig1):
    g = build_geometry(fig1)
    piece, = step_pieces(fig1, [TrackedPiece.identity(g.G)])[0][:1]
    inside, outside = split_by_region(piece, g.H0)
    total = (inside.source_area if inside else 0.0) + sum(o.source_area for o in outside)
    assert total == pytest.approx(piece.source_area, rel=1e-12)


def test_jacobian_determinant_is_positive_power_of_minus_b(fig1):
    q = TrackedPiece.identity(build_geometry(fig1).H0)
    for n in range(1, 5):
        q = step_pieces(fig1, [q])[0][0]
        assert q.det == pytest.approx((-fig1.b) ** n)
        assert np.linalg.det(q.M) == pytest.approx(q.det, rel=1e-10)
