from .frames import RigidMotion
from .ops import (TouchingSet, classify_point, closest_point, distance_to_boundary, enclosed_volume,
                  make_shape, outward_normal, surface_measure, touching_set)
from .shapes import (INSIDE, ON_BOUNDARY, OUTSIDE, Ball, Boundary, GraphPatch, HalfspaceCap,
                     PolylineLoop, StarBoundary, TriangleMesh)

__all__ = [
    "RigidMotion", "TouchingSet", "classify_point", "closest_point", "distance_to_boundary",
    "enclosed_volume", "make_shape", "outward_normal", "surface_measure", "touching_set",
    "INSIDE", "ON_BOUNDARY", "OUTSIDE", "Ball", "Boundary", "GraphPatch", "HalfspaceCap",
    "PolylineLoop", "StarBoundary", "TriangleMesh",
]
