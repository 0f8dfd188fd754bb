"""Shape construction and the geometric queries used by the pipelines."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import CenterNotInterior, InvalidShape
from . import discrete
from .frames import unit
from .radial import EllipsoidRadius, HarmonicRadius, profile_from_dict
from .shapes import (INSIDE, Ball, GraphPatch, HalfspaceCap, PolylineLoop, StarBoundary,
                     TriangleMesh)


@dataclass(frozen=True)
class TouchingSet:
    center: np.ndarray
    radius: float
    points: np.ndarray
    tolerance: float
    merge_radius: float

    def __len__(self):
        return len(self.points)

    def representatives(self, k):
        """Up to k points spread over the set (farthest-point sampling from the first)."""
        P = self.points
        if len(P) <= k:
            return P
        chosen = [0]
        d = np.linalg.norm(P - P[0], axis=1)
        while len(chosen) < k:
            i = int(np.argmax(d))
            chosen.append(i)
            d = np.minimum(d, np.linalg.norm(P - P[i], axis=1))
        return P[chosen]


def _rotation_from(spec, n):
    rot = spec.get("rotation")
    if rot is None:
        return None
    if n == 2 and np.isscalar(rot):
        c, s = np.cos(rot), np.sin(rot)
        return np.array([[c, -s], [s, c]])
    Q = np.asarray(rot, dtype=float)
    if Q.shape != (n, n) or not np.allclose(Q @ Q.T, np.eye(n), atol=1e-10) or np.linalg.det(Q) < 0:
        raise InvalidShape("rotation must be a proper orthogonal matrix")
    return Q


def _finalize(star, spec):
    rep = spec.get("representation", "analytic")
    if rep == "analytic":
        return star
    if rep != "discrete":
        raise InvalidShape(f"unknown representation {rep!r}")
    from ..quadrature.core import discretize

    elements = int(spec.get("elements", 4096 if star.n == 2 else 20480))
    if elements < 3:
        raise InvalidShape("mesh resolution below minimum")
    return discretize(star, elements, curved=bool(spec.get("curved", False)))


def make_shape(spec):
    """Build a Boundary from a JSON-style shape description."""
    spec = dict(spec)
    kind = spec.get("kind")
    n = int(spec.get("n", len(spec["center"]) if "center" in spec else 2))
    if n < 2:
        raise InvalidShape("dimension must be >= 2")
    center = np.asarray(spec.get("center", np.zeros(n)), dtype=float)
    if len(center) != n:
        raise InvalidShape("center length does not match n")
    Q = _rotation_from(spec, n)
    if kind == "ball":
        radius = float(spec.get("radius", 1.0))
        return _finalize(Ball(center, radius, Q), spec)
    if kind in ("ellipse", "ellipsoid"):
        axes = np.asarray(spec["semi_axes"], dtype=float)
        if len(axes) != n or np.any(axes <= 0):
            raise InvalidShape("semi_axes must be n positive numbers")
        star = StarBoundary(center, EllipsoidRadius(axes), Q, kind, {"semi_axes": axes.tolist()})
        return _finalize(star, spec)
    if kind in ("perturbed_circle", "perturbed_sphere"):
        if kind == "perturbed_circle" and n != 2:
            raise InvalidShape("perturbed_circle is planar")
        if kind == "perturbed_sphere" and n != 3:
            raise InvalidShape("perturbed_sphere needs n = 3")
        radius = float(spec.get("radius", 1.0))
        amp = float(spec.get("amplitude", 0.1))
        if radius <= 0 or abs(amp) >= 1:
            raise InvalidShape("need radius > 0 and |amplitude| < 1")
        harmonic = spec.get("harmonic", "sectoral")
        radial = HarmonicRadius(radius, amp, int(spec.get("mode", 3)), harmonic, float(spec.get("phase", 0.0)))
        return _finalize(StarBoundary(center, radial, Q, kind, {"amplitude": amp}), spec)
    if kind == "polyline":
        if "file" in spec:
            pts = discrete.read_polyline_csv(spec["file"])
        else:
            pts = np.asarray(spec["points"], dtype=float)
        return PolylineLoop(pts)
    if kind == "mesh":
        if "file" in spec:
            V, F = discrete.read_off(spec["file"])
        else:
            V, F = np.asarray(spec["vertices"], dtype=float), np.asarray(spec["faces"])
        return TriangleMesh(V, F)
    if kind == "halfspace_cap":
        normal = spec.get("normal")
        if normal is None:
            normal = np.eye(n)[-1]
        bound = float(spec.get("bounding_radius", 100.0))
        if bound <= 0:
            raise InvalidShape("bounding_radius must be positive")
        return HalfspaceCap(np.asarray(normal, dtype=float), float(spec.get("offset", 0.0)), bound)
    if kind == "graph_patch":
        normal = spec.get("normal")
        if normal is None:
            normal = np.eye(n)[-1]
        prof = profile_from_dict(spec.get("profile"))
        return GraphPatch(
            np.asarray(spec.get("origin", np.zeros(n)), dtype=float), np.asarray(normal, dtype=float),
            prof, float(spec.get("radius", 1.0)), spec.get("window"), lipschitz=spec.get("lipschitz"),
            height=float(spec.get("height", 0.0)),
        )
    raise InvalidShape(f"unknown shape kind {kind!r}")


def surface_measure(b):
    return b.measure


def enclosed_volume(b):
    return b.volume


def classify_point(b, p, tol=1e-9):
    p = np.asarray(p, dtype=float)
    if len(p) != b.n or not np.all(np.isfinite(p)):
        raise InvalidShape("point must be finite with length n")
    return b.classify(p, tol)


def distance_to_boundary(b, p):
    return b.distance(np.asarray(p, dtype=float))


def closest_point(b, p):
    return b.closest_point(np.asarray(p, dtype=float))[0]


def _cluster(P, d, radius):
    if len(P) == 1:
        return P
    pairs = cKDTree(P).query_pairs(radius, output_type="ndarray")
    m = len(P)
    G = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m)) if len(pairs) else coo_matrix((m, m))
    k, labels = connected_components(G, directed=False)
    reps = []
    for c in range(k):
        members = np.nonzero(labels == c)[0]
        reps.append(members[np.argmin(d[members])])
    return P[np.sort(reps)]


def touching_set(b, x0, tol=None, merge=None):
    """Points of the boundary at minimal distance r from x0, near-duplicates merged."""
    x0 = np.asarray(x0, dtype=float)
    if classify_point(b, x0, 0.0) != INSIDE:
        raise CenterNotInterior(f"x0 = {x0.tolist()} is not inside the domain")
    cand = np.atleast_2d(b.touching_candidates(x0))
    d = np.linalg.norm(cand - x0, axis=1)
    r = float(np.min(d))
    if r <= 0:
        raise CenterNotInterior("x0 lies on the boundary")
    tol = 1e-6 * r if tol is None else float(tol)
    merge = 1e-3 * r if merge is None else float(merge)
    keep = d <= r + tol
    pts = _cluster(cand[keep], d[keep], merge)
    return TouchingSet(x0, r, pts, tol, merge)


def outward_normal(b, z):
    """Outward unit normal at a boundary point z."""
    z = np.asarray(z, dtype=float)
    if isinstance(b, StarBoundary):
        return b.normals(unit(z - b.center)[None])[0]
    if isinstance(b, GraphPatch):
        y, _ = b.local(z)
        return b.surface_y(y[None])[2][0]
    if isinstance(b, PolylineLoop):
        if b.curve is not None:
            return outward_normal(b.curve, z)
        C, u = discrete.closest_on_segments(b.A, b.B, z)
        i = int(np.argmin(np.linalg.norm(C - z, axis=1)))
        return b.element_points(np.array([i]), np.array([u[i]]))[2][0]
    if isinstance(b, TriangleMesh):
        if b.projector is not None:
            return outward_normal(b.projector, z)
        T = b.triangles()
        C = discrete.closest_on_triangles(T[:, 0], T[:, 1], T[:, 2], z)
        i = int(np.argmin(np.linalg.norm(C - z, axis=1)))
        cr = np.cross(T[i, 1] - T[i, 0], T[i, 2] - T[i, 0])
        return cr / np.linalg.norm(cr)
    raise InvalidShape(f"unsupported boundary {type(b).__name__}")
