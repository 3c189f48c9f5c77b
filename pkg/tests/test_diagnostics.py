import numpy as np
import pytest

from lozi.core import LoziError
from lozi.diagnostics import (crosses_both_axes, expansion_law_holds, find_crossing_segment,
                              mixing_witness, primitive_power, random_unstable_segments,
                              stable_density_in_G)


def test_crossing_predicate():
    assert crosses_both_axes(np.array([[-1.0, -1.0], [1.0, 1.0]]))
    assert not crosses_both_axes(np.array([[0.1, -1.0], [1.0, 1.0]]))


def test_crossing_found_and_expansion(fig1):
    segs = random_unstable_segments(fig1, 5, seed=2)
    for s in segs:
        rep = find_crossing_segment(fig1, s)
        assert rep.crossings and rep.n <= 60
        assert crosses_both_axes(rep.sub_segment)
        assert expansion_law_holds(fig1, rep)


def test_primitive_power():
    cyc = np.array([[0, 1], [1, 0]])
    assert primitive_power(cyc, 10) is None
    assert primitive_power(np.array([[1, 1], [1, 0]]), 10) == 2


def test_mixing_witness(fig1):
    tm = mixing_witness(fig1, grid_m=8, orbit_len=50_000)
    assert tm.primitive_power is not None
    assert len(tm.core) <= len(tm.visited)
    with pytest.raises(LoziError):
        mixing_witness(fig1, grid_m=0)


def test_stable_density_monotone(fig1):
    f = [stable_density_in_G(fig1, generations=g, grid_m=24).fraction for g in (12, 16, 20)]
    assert f == sorted(f)
