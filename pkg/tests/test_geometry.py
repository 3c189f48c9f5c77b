import numpy as np
import pytest

from lozi.core import LoziError, Params, apply
from lozi.geometry import (ConvexPolygon, HalfPlane, PolygonUnion, Polyline, ccw, clip_many,
                           clip_segments, clip_vertices, convex_hull, difference,
                           hausdorff_distance, piecewise_affine_image, points_to_polyline_distance,
                           points_to_segments_distance, polyline_image, sample_interior,
                           signed_area, split_by_line, subtract_union, uncovered_area)

SQUARE = ConvexPolygon([[0, 0], [1, 0], [1, 1], [0, 1]])


def test_orientation_normalised():
    cw = ConvexPolygon([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert signed_area(cw.vertices) > 0
    assert np.allclose(ccw(cw.vertices[::-1]), cw.vertices)


def test_clip_half_square():
    half = SQUARE.clip(HalfPlane((1.0, 0.0), 0.5))
    assert half.area == pytest.approx(0.5)
    assert half.vertices[:, 0].min() == pytest.approx(0.5)


def test_split_by_line_preserves_area():
    a, b = split_by_line(SQUARE, HalfPlane((1.0, 1.0), 0.7))
    assert a.area + b.area == pytest.approx(1.0)


def test_difference_and_subtract_union():
    inner = ConvexPolygon([[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]])
    parts = difference(SQUARE, inner)
    assert sum(p.area for p in parts) == pytest.approx(0.75)
    assert uncovered_area(SQUARE, inner) == pytest.approx(0.0, abs=1e-15)
    assert sum(p.area for p in subtract_union(SQUARE, PolygonUnion([inner]))) == pytest.approx(0.75)


def test_convex_hull_drops_interior_points(rng):
    pts = rng.uniform(0, 1, size=(200, 2))
    pts = np.vstack([pts, [[0, 0], [1, 0], [1, 1], [0, 1]]])
    assert ConvexPolygon(convex_hull(pts)).area == pytest.approx(1.0)


def test_clip_many_matches_single_clips(rng):
    polys = [ConvexPolygon.from_points(rng.uniform(-1, 1, size=(8, 2))).vertices for _ in range(40)]
    cnt = np.array([len(v) for v in polys])
    V = np.zeros((len(polys), cnt.max(), 2))
    for i, v in enumerate(polys):
        V[i, :len(v)] = v
        V[i, len(v):] = v[-1]
    normals = rng.normal(size=(len(polys), 2))
    offsets = rng.uniform(-0.3, 0.3, size=len(polys))
    W, wc = clip_many(V, cnt, normals, offsets)
    for i, v in enumerate(polys):
        ref = clip_vertices(v, normals[i], offsets[i])
        got = W[i, :wc[i]]
        assert abs(abs(signed_area(got)) - abs(signed_area(ref))) < 1e-12


def test_clip_segments_keeps_inside_parts():
    S = np.array([[[-1, 0.5], [2, 0.5]], [[3, 3], [4, 4]]], dtype=float)
    out = clip_segments(SQUARE, S)
    assert out.shape == (1, 2, 2)
    assert np.allclose(sorted(out[0][:, 0]), [0, 1])


def test_segment_distance_matches_brute_force(rng):
    S = rng.uniform(-1, 1, size=(300, 2, 2))
    Z = rng.uniform(-1.5, 1.5, size=(400, 2))
    got = points_to_segments_distance(Z, S)
    d = S[:, 1] - S[:, 0]
    t = np.clip(np.einsum("kij,ij->ki", Z[:, None] - S[:, 0], d) / np.einsum("ij,ij->i", d, d), 0, 1)
    ref = np.hypot(*(Z[:, None] - S[:, 0] - t[..., None] * d).transpose(2, 0, 1)).min(axis=1)
    assert np.allclose(got, ref, atol=1e-14)


def test_polyline_distance_both_paths_agree(rng):
    v = np.cumsum(rng.normal(size=(3000, 2)), axis=0) * 0.01
    Z = rng.uniform(v.min(), v.max(), size=(2000, 2))
    small = points_to_polyline_distance(Z[:100], v)
    big = points_to_polyline_distance(Z, v)     # large enough to use the KD-tree path
    assert np.allclose(small, big[:100], atol=1e-14)


def test_hausdorff_of_shifted_sets():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert hausdorff_distance(a, a + [0.0, 0.25]) == pytest.approx(0.25)
    with pytest.raises(LoziError):
        hausdorff_distance(a, np.zeros((0, 2)))


def test_image_of_polygon_matches_pointwise(fig1, rng):
    poly = ConvexPolygon([[-0.5, -0.2], [0.6, -0.3], [0.4, 0.5], [-0.3, 0.4]])
    img = piecewise_affine_image(fig1, poly, "forward")
    assert img.area == pytest.approx(abs(fig1.b) * poly.area, rel=1e-12)
    Z = sample_interior(poly, 500, rng)
    assert img.contains_points(apply(fig1, Z), 1e-12).all()


def test_polyline_image_folds_at_axis(fig1):
    line = Polyline(np.array([[-0.5, 0.1], [0.5, 0.1]]))
    img = polyline_image(fig1, line)
    assert len(img) == 3
    assert np.allclose(img.vertices[1], apply(fig1, [0.0, 0.1]))
    assert len(img.straight_pieces()) == 2
