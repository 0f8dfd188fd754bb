from dataclasses import dataclass

import numpy as np

from ..config import QuadConfig
from ..errors import InvalidShape, NonFiniteIntegrand
from ..geometry import discrete
from ..geometry.shapes import GraphPatch, PolylineLoop, StarBoundary, TriangleMesh
from . import grids

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _pole(b, region, near):
    anchor = region[0] if region is not None else near
    if anchor is None:
        if isinstance(b, StarBoundary):
            return b.points(b.Q[:, :1].T)[0]
        return b.origin + b.height * b.nu
    anchor = np.asarray(anchor, dtype=float)
    return b.closest_point(anchor)[0]


def boundary_grid(b, cfg=None, region=None, near=None, h_min=None, inner=0.0, toward=(),
                  keep_inside=True, pole=None):
    """Quadrature grid over the boundary (or its part inside/outside ``region`` = (z, R)).

    Analytic charts are centered at ``pole`` (a boundary point) when given, else at
    the boundary point closest to the region center or to ``near``.
    """
    cfg = cfg or QuadConfig()
    if region is not None and not float(region[1]) > 0:
        return grids.empty_grid(b.n)
    if isinstance(b, PolylineLoop):
        return grids.polyline_grid(b, cfg, near, h_min, region, keep_inside)
    if isinstance(b, TriangleMesh):
        return grids.mesh_grid(b, cfg, near, h_min, region, keep_inside)
    pole = _pole(b, region, near) if pole is None else np.asarray(pole, dtype=float)
    if near is not None and h_min is None:
        h_min = max(np.linalg.norm(np.asarray(near, dtype=float) - pole), 1e-12 * b.size) / 8
    pts = [p for p in toward if p is not None]
    if isinstance(b, StarBoundary):
        chart = b.chart(pole - b.center, pts)
    elif isinstance(b, GraphPatch):
        chart = b.chart(pole, pts)
    else:
        raise InvalidShape(f"unsupported boundary {type(b).__name__}")
    return grids.chart_grid(chart, cfg, h_min, inner, region, keep_inside)


def integrate_grid(grid, f, with_normals=False):
    if len(grid) == 0:
        return QuadratureResult(0.0, 0.0, 0)
    vals = f(grid.X, grid.N) if with_normals else f(grid.X)
    vals = np.asarray(vals, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        fw = vals * grid.W
        value = float(np.sum(fw))
        coarse = float(vals @ grid.Wc)
    if not (np.isfinite(value) and np.isfinite(coarse)):
        used = (grid.W != 0) | (grid.Wc != 0)
        if not np.all(np.isfinite(vals[used])):
            bad = grid.X[used][~np.isfinite(vals[used])][0]
            raise NonFiniteIntegrand(f"integrand is not finite at {bad.tolist()}")
        vals = np.where(used, vals, 0.0)
        fw = vals * grid.W
        value = float(np.sum(fw))
        coarse = float(vals @ grid.Wc)
    err = abs(value - coarse) + 50 * _EPS * float(np.sum(np.abs(fw)))
    return QuadratureResult(value, err, int(len(grid)))


def integrate_boundary(b, f, region=None, cfg=None, near=None, h_min=None, inner=0.0, toward=(),
                       with_normals=False, keep_inside=True):
    """Surface integral of ``f`` over the boundary, or over its part inside ``region`` = (z, R).

    ``near`` marks a point where the integrand is nearly singular; elements are
    graded toward it down to size ``h_min``.  With ``with_normals`` the integrand
    is called as ``f(X, N)``.
    """
    grid = boundary_grid(b, cfg, region, near, h_min, inner, toward, keep_inside)
    return integrate_grid(grid, f, with_normals)


def graded_refine(b, near, cfg=None, h_min=None):
    """Discrete boundary whose elements near ``near`` shrink geometrically (size <= grading * distance)."""
    cfg = cfg or QuadConfig()
    near = np.asarray(near, dtype=float)
    if h_min is None:
        h_min = 1e-6 * b.size
    if isinstance(b, StarBoundary):
        b = discretize(b, cfg.elements)
    if isinstance(b, PolylineLoop):
        idx, u0, _ = grids.refine_polyline(b, near, cfg.grading, h_min, cfg.max_depth)
        if b.curve is None:
            X, _, _ = b.element_points(idx, u0)
            return PolylineLoop(X, validate=False, label=b.label)
        lo, hi = b._theta_bounds()
        th = lo[idx] + u0 * (hi[idx] - lo[idx])
        U = np.column_stack([np.cos(th), np.sin(th)])
        return PolylineLoop(b.curve.points(U), b.curve, th, validate=False, label=b.label)
    if isinstance(b, TriangleMesh):
        T = grids.refine_mesh(b.triangles(), near, cfg.grading, h_min, cfg.max_depth)
        V = T.reshape(-1, 3)
        F = np.arange(len(V)).reshape(-1, 3)
        return TriangleMesh(V, F, b.projector, validate=False, label=b.label)
    raise InvalidShape(f"{b.kind} cannot be discretized")


def discretize(star, elements, curved=True):
    """Polyline (n = 2) or icosphere mesh (n = 3) with vertices on a star surface."""
    if star.n == 2:
        th = 2 * np.pi * np.arange(elements) / elements
        # parameters are global polar angles of the local-frame angles
        ang = np.arctan2(star.Q[1, 0], star.Q[0, 0])
        th = th + ang
        U = np.column_stack([np.cos(th), np.sin(th)])
        X = star.points(U)
        if curved:
            return PolylineLoop(X, star, th, validate=False, label=star.label)
        return PolylineLoop(X, label=star.label)
    if star.n == 3:
        m = max(1, int(np.ceil(np.sqrt(elements / 20))))
        V, F = discrete.icosphere(m)
        V = V @ star.Q.T
        X = star.points(V)
        return TriangleMesh(X, F, star if curved else None, validate=False, label=star.label)
    raise InvalidShape("discrete representations exist only for n = 2 and n = 3")
