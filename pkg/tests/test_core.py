import math

import numpy as np
import pytest

from lozi.core import (LoziError, Params, apply, apply_inverse, branch_affine, check_conditions,
                       eigenvector, fixed_points, iterate, jacobian_branch, orbit, p3, spectra,
                       substitute_r, unsubstitute_r)


def test_params_reject_non_finite():
    with pytest.raises(LoziError):
        Params(float("nan"), -0.5)
    with pytest.raises(LoziError):
        Params(1.5, float("inf"))


def test_apply_matches_formula(fig1):
    z = np.array([0.3, -0.2])
    assert np.allclose(apply(fig1, z), [1 - 0.2 - 1.78 * 0.3, -0.5 * 0.3])


def test_inverse_round_trip(fig1, rng):
    Z = rng.uniform(-3, 3, size=(500, 2))
    assert np.allclose(apply_inverse(fig1, apply(fig1, Z)), Z, atol=1e-12)
    assert np.allclose(apply(fig1, apply_inverse(fig1, Z)), Z, atol=1e-12)


def test_inverse_undefined_for_zero_b():
    with pytest.raises(LoziError):
        apply_inverse(Params(1.5, 0.0), [0.1, 0.2])


def test_orbit_and_iterate_agree(fig1):
    z0 = np.array([0.1, 0.1])
    o = orbit(fig1, z0, 10)
    assert o.shape == (11, 2)
    assert np.allclose(o[-1], iterate(fig1, z0, 10))


def test_spectra_identities(fig1):
    sp = spectra(fig1)
    assert math.isclose(sp.alpha + sp.beta, fig1.a, rel_tol=1e-14)
    assert math.isclose(sp.alpha * sp.beta, -fig1.b, rel_tol=1e-14)
    assert 0 < sp.alpha < 1 < sp.beta


def test_spectra_needs_real_roots():
    with pytest.raises(LoziError):
        spectra(Params(0.5, -0.5))


def test_fixed_points_are_fixed(fig1):
    fp = fixed_points(fig1)
    assert fp.X[0] > 0 > fp.Y[0]
    assert np.allclose(apply(fig1, fp.X), fp.X, atol=1e-14)
    assert np.allclose(apply(fig1, fp.Y), fp.Y, atol=1e-14)


def test_eigenvectors_at_Y(fig1):
    sp = spectra(fig1)
    J = jacobian_branch(fig1, "left")
    for lam in (sp.alpha, sp.beta):
        v = eigenvector(fig1, lam)
        assert np.allclose(J @ v, lam * v, atol=1e-13)


def test_branch_affine_matches_apply(fig1):
    for sigma, z in ((1, np.array([0.4, 0.2])), (-1, np.array([-0.4, 0.2]))):
        M, c = branch_affine(fig1, sigma)
        assert np.allclose(M @ z + c, apply(fig1, z))


def test_conditions_at_figure_parameters(fig1):
    rep = check_conditions(fig1)
    assert rep.c1 and rep.c2 and rep.c3 and rep.c5 and rep.c6 and rep.in_U_minus
    assert rep.c4 is None
    assert rep.to_dict()["in_U_minus"] is True


def test_conditions_fail_outside():
    rep = check_conditions(Params(1.8, -0.48))
    assert not rep.c6 and not rep.in_U_minus
    assert p3(1.5) is None


def test_r_substitution_round_trip():
    for a in (1.2, 1.75, 2.0):
        for r in (0.0, 0.3, 0.9):
            assert math.isclose(unsubstitute_r(a, substitute_r(a, r)), r, abs_tol=1e-12)
    with pytest.raises(LoziError):
        substitute_r(1.5, 1.6)
