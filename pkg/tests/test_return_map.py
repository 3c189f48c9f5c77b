import numpy as np
import pytest

from lozi.constructions import build_geometry
from lozi.core import Params, iterate
from lozi.geometry import sample_interior
from lozi.return_map import (classify_tangency, compute_return_structure, corners,
                             first_return_times, intersection_check, verify_cell_geometry)


@pytest.fixture(scope="module")
def rs_thin():
    return compute_return_structure(Params(1.95, -0.05))


def test_cells_cover_H0(rs_thin):
    assert rs_thin.complete
    assert rs_thin.coverage >= 1 - 1e-6
    assert rs_thin.cell(2).n == 2 and rs_thin.p == max(c.n for c in rs_thin.cells)


def test_cells_agree_with_iteration(rs_thin, rng):
    p = rs_thin.params
    Z = sample_interior(rs_thin.H0, 2000, rng)
    n = rs_thin.assign(Z)
    assert np.array_equal(n, first_return_times(p, Z, rs_thin.H0))
    h = rs_thin.h(Z)
    for k in np.unique(n):
        sel = n == k
        assert np.allclose(h[sel], iterate(p, Z[sel], int(k)), atol=1e-12)


def test_kink_lines_map_to_axis(rs_thin):
    for c in rs_thin.cells:
        if c.R is not None:
            assert np.abs(c.T[:, 1]).max() < 1e-9


def test_cell_geometry(rs_thin):
    rep = verify_cell_geometry(rs_thin, build_geometry(rs_thin.params))
    assert rep.ok, rep.to_dict()


def test_tangency_cases():
    for (a, b), case in (((1.95, -0.05), "T2"), ((1.95, -0.044), "T1")):
        p = Params(a, b)
        rep = classify_tangency(p, compute_return_structure(p))
        assert rep.case == case


def test_corners_ignore_collinear_vertices():
    sq = np.array([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert len(corners(sq)) == 4


def test_intersection_check_shrinks(rs_thin):
    rep = intersection_check(rs_thin.params, rs_thin, 2)
    assert len(rep.distances) == 2
    assert rep.areas[1] < rep.areas[0]
    assert rep.distances[1] <= rep.distances[0] + 2 * max(rep.resolution)


def test_to_dict_polygons_are_ccw(rs_thin):
    from lozi.geometry import signed_area
    d = rs_thin.to_dict()
    for c in d["cells"]:
        for v in c["C"] + c["U"]:
            assert signed_area(np.array(v)) > 0
