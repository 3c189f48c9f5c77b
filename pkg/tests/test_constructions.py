import json
import warnings

import numpy as np
import pytest

from lozi.constructions import (b_above_stable_line_margin, build_geometry, fM_minus_L_geometric,
                                fM_minus_L_identity, stable_line_value, verify_fM_in_H0,
                                verify_G_invariance, x_above_AB)
from lozi.core import LoziError, Params, apply
from lozi.geometry import point_segment_distance


def test_named_points_satisfy_their_relations(fig1):
    g = build_geometry(fig1)
    assert max(g.residuals().values()) < 1e-12
    assert g.A[1] == 0.0 and g.M[0] == 0.0
    # D and E sit on the stable line of X, Z on that of Y
    assert point_segment_distance(g.X, g.E, g.D) < 1e-12
    assert abs(stable_line_value(fig1, g.Z)) < 1e-12


def test_triangles_are_ccw_and_nested(fig1):
    g = build_geometry(fig1)
    assert g.G.area > g.H0.area > 0
    for v in g.H0.vertices:
        assert g.G.contains(v, 1e-12)


def test_fM_inside_H0(fig1, thin):
    assert verify_fM_in_H0(fig1)
    assert verify_fM_in_H0(thin)


def test_G_forward_invariant(fig1):
    rep = verify_G_invariance(fig1)
    assert rep.contained and rep.defect_area < 1e-9
    assert rep.image_area == pytest.approx(abs(fig1.b) * build_geometry(fig1).G.area, rel=1e-12)


def test_closed_form_value():
    assert fM_minus_L_identity(1.75, 0.5) == pytest.approx(0.35, abs=1e-15)
    assert fM_minus_L_geometric(1.75, 0.5) == pytest.approx(0.35, abs=1e-12)


def test_strict_mode_raises_outside_region():
    with pytest.raises(LoziError):
        build_geometry(Params(1.8, -0.48), strict=True)


def test_warning_recorded_outside_region():
    g = build_geometry(Params(1.8, -0.48))
    assert g.warnings


def test_to_dict_is_json(fig1):
    d = build_geometry(fig1).to_dict()
    assert json.loads(json.dumps(d))["degenerate"] is False


def test_margins_have_expected_sign(fig1):
    g = build_geometry(fig1)
    assert b_above_stable_line_margin(fig1) > 0
    assert np.isfinite(x_above_AB(g))
