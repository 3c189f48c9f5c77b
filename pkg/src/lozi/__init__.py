"""Geometry and dynamics of orientation-preserving Lozi maps f(x, y) = (1 + y - a|x|, bx)."""
from .core import (LoziError, Params, apply, apply_inverse, check_conditions, fixed_points,
                   iterate, orbit, spectra)
from .constructions import GeometryBundle, build_geometry, verify_G_invariance
from .invariant_sets import (attractor_enclosure, attractor_point_cloud, build_trapping_set,
                             continuity_sweep, grow_manifold, stable_manifold_in)
from .return_map import classify_tangency, compute_return_structure

__all__ = [
    "LoziError", "Params", "apply", "apply_inverse", "check_conditions", "fixed_points",
    "iterate", "orbit", "spectra", "GeometryBundle", "build_geometry", "verify_G_invariance",
    "attractor_enclosure", "attractor_point_cloud", "build_trapping_set", "continuity_sweep",
    "grow_manifold", "stable_manifold_in", "classify_tangency", "compute_return_structure",
]
