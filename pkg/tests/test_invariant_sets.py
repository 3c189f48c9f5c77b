import numpy as np
import pytest

from lozi.constructions import build_geometry
from lozi.core import LoziError, Params, apply
from lozi.geometry import sample_interior
from lozi.invariant_sets import (attractor_enclosure, attractor_point_cloud, build_trapping_set,
                                 cloud_manifold_distance, continuity_sweep, grow_manifold,
                                 linear_path, stable_manifold_in)


@pytest.fixture(scope="module")
def trap_thin():
    return build_trapping_set(Params(1.95, -0.05))


def test_trapping_set_is_forward_invariant(trap_thin):
    assert trap_thin.stabilized
    assert trap_thin.self_map_defect < 1e-8 * trap_thin.area
    assert trap_thin.q is not None and trap_thin.q <= trap_thin.p


def test_trapping_set_contains_images(trap_thin, rng):
    p = Params(1.95, -0.05)
    Z = np.vstack([sample_interior(pc, 20, rng) for pc in trap_thin.pieces.pieces])
    assert trap_thin.pieces.contains_points(apply(p, Z), 1e-9).all()


def test_trapping_set_gives_up_outside_region():
    with pytest.raises(LoziError):
        build_trapping_set(Params(1.8, -0.52), max_pieces=2000)


def test_enclosure_area_law(trap_thin):
    p = Params(1.95, -0.05)
    enc = attractor_enclosure(p, trap_thin, 6)
    for st in enc.steps:
        expected = trap_thin.area * 0.05 ** st.n
        assert st.area == pytest.approx(expected, rel=1e-10)


def test_hausdorff_bound_brackets_sampled_distance(trap_thin):
    p = Params(1.95, -0.05)
    enc = attractor_enclosure(p, trap_thin, 3)
    gb = enc.hausdorff_bound(0, 3, abs_tol=1e-4)
    sampled, spacing = enc.hausdorff(0, 3)
    assert gb.lower <= gb.upper
    assert gb.lower - 1e-9 <= sampled + spacing
    assert sampled <= gb.upper + spacing
    assert gb.upper <= enc[0].bound


def test_unstable_manifold_seed_and_budget(fig1):
    m = grow_manifold(fig1, "X", "unstable", length_budget=50.0)
    assert m.seed_certified and m.truncated
    assert m.length == pytest.approx(50.0, rel=1e-9)
    G = build_geometry(fig1).G
    assert G.contains_points(m.vertices, 1e-9).all()


def test_stable_manifold_growth_guards(fig1):
    with pytest.raises(LoziError):
        grow_manifold(Params(1.5, 0.0), kind="stable")
    with pytest.raises(LoziError):
        grow_manifold(fig1, seed_halflength=-1.0)
    with pytest.raises(LoziError):
        grow_manifold(fig1, base="Q")


def test_stable_manifold_in_G_is_nested(fig1):
    G = build_geometry(fig1).G
    short = stable_manifold_in(fig1, G, 14)
    longer = stable_manifold_in(fig1, G, 16)
    assert longer.length >= short.length
    mid = 0.5 * (short.segments[:, 0] + short.segments[:, 1])
    from lozi.geometry import points_to_segments_distance
    assert points_to_segments_distance(mid, longer.segments).max() < 1e-9


def test_point_cloud_is_deterministic(fig1):
    a = attractor_point_cloud(fig1, 100, 500, seed=4).points
    b = attractor_point_cloud(fig1, 100, 500, seed=4).points
    assert np.array_equal(a, b)
    with pytest.raises(LoziError):
        attractor_point_cloud(Params(2.5, -0.5), 100, 100)


def test_cloud_near_manifold(fig1):
    cloud = attractor_point_cloud(fig1, 1000, 5000).points
    d = cloud_manifold_distance(fig1, cloud, length_budget=2000.0)
    assert d.manifold_to_cloud < 0.2
    assert d.hausdorff == max(d.cloud_to_manifold, d.manifold_to_cloud)


def test_continuity_sweep_marks_escapes():
    rows = continuity_sweep(linear_path((1.78, -0.5), (1.8, -0.48), 4), samples=2000)
    assert len(rows) == 5
    assert rows[0].d_prev is None and not rows[0].escaped
    assert rows[-1].escaped and not rows[-1].in_U_minus
