import numpy as np
import pytest

from lozi.cones import (ConeField, cone_map_check, cone_suite, estimate_direction,
                        k_region_checks, largest_certified_theta, local_manifold_predicate,
                        measure_bound_constants, push_unstable_direction)
from lozi.core import LoziError, Params, fixed_points, spectra


def test_cone_membership_of_boundaries(fig1):
    for kind in ("stable", "unstable"):
        cf = ConeField(kind, fig1)
        for u in cf.boundary():
            assert cf.contains(u)


def test_cone_suite_expansion(fig1):
    rep = cone_suite(fig1, 20_000, seed=3)
    assert rep["violations"] == 0
    assert rep["min_expansion_unstable"] >= rep["beta"] * (1 - 1e-10)
    assert rep["min_expansion_stable"] >= rep["inv_alpha"] * (1 - 1e-10)


def test_single_cone_check(fig1):
    rep = cone_map_check(fig1, [0.2, 0.1], [1.0, 0.0], "unstable")
    assert rep.in_cone_before and rep.in_cone_after and rep.componentwise
    assert rep.expansion >= spectra(fig1).beta * (1 - 1e-12)


def test_unstable_direction_at_X_is_eigenvector(fig1):
    X = fixed_points(fig1).X
    est = estimate_direction(fig1, X, "unstable")
    sp = spectra(fig1)
    e = np.array([-sp.beta, fig1.b])
    e /= np.hypot(*e)
    assert abs(abs(est.direction @ e) - 1.0) < 1e-10


def test_pushed_direction_stays_in_cone(fig1):
    z, v = push_unstable_direction(fig1, [0.1, 0.05], 25)
    assert ConeField("unstable", fig1).contains(v)


def test_local_manifold_certificate(fig1):
    X = fixed_points(fig1).X
    theta = largest_certified_theta(fig1, X, 30, "stable")
    assert theta > 0
    assert local_manifold_predicate(fig1, X, 0.5 * theta, 30, "stable")
    with pytest.raises(LoziError):
        local_manifold_predicate(fig1, X, 0.0, 10)


def test_k_region(fig1):
    rep = k_region_checks(fig1)
    assert rep.preimage_contained and rep.G_in_K
    c = measure_bound_constants(fig1)
    assert c.delta >= max(c.area_G, 0)
