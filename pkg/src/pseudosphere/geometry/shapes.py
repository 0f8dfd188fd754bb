"""Boundary representations.

Analytic kinds (star-shaped surfaces, balls, graph patches) expose polar charts
used by the quadrature engine; discrete kinds (polylines, triangle meshes)
expose elements.  Every kind is immutable and supports rigid motions with
dilation via ``transformed``.
"""

from functools import cached_property

import numpy as np
from scipy.optimize import least_squares, root

from ..constants import ball_boundary_measure, ball_volume
from ..errors import InvalidShape, PatchHasNoVolume
from . import discrete
from .frames import RigidMotion, complement_basis, unit
from .radial import ConstantRadius, FlatProfile, ScaledProfile, ScaledRadius

INSIDE, OUTSIDE, ON_BOUNDARY = "Inside", "Outside", "OnBoundary"


def _polish(stationary, res, a0):
    """Root-polish a least-squares foot point; keep it only if it is no farther."""
    pol = root(stationary, a0, method="hybr", options={"xtol": 1e-15})
    a = pol.x
    if not np.all(np.isfinite(a)) or np.linalg.norm(stationary(a)) >= np.linalg.norm(stationary(a0)):
        return a0
    if np.linalg.norm(res(a)) > np.linalg.norm(res(a0)) * (1 + 1e-12):
        return a0
    return a


def fibonacci_sphere(count):
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    phi = np.pi * (1 + 5**0.5) * k
    s = np.sqrt(1 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def sphere_directions(n, count, seed=12345):
    """Deterministic, roughly uniform unit vectors in R^n."""
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        return fibonacci_sphere(count)
    G = np.random.default_rng(seed).standard_normal((count, n))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


class Boundary:
    kind = "boundary"
    closed = True
    analytic = True
    n = 0

    # measure/volume results are (value, error)
    @cached_property
    def measure_result(self):
        from ..quadrature.core import integrate_boundary

        res = integrate_boundary(self, lambda X: np.ones(len(X)))
        return res.value, res.error_estimate

    @property
    def measure(self):
        return self.measure_result[0]

    @cached_property
    def volume_result(self):
        if not self.closed:
            raise PatchHasNoVolume(f"{self.kind} does not enclose a volume")
        from ..quadrature.core import integrate_boundary

        c = self.reference_point
        res = integrate_boundary(
            self, lambda X, N: np.einsum("ij,ij->i", X - c, N) / self.n, with_normals=True
        )
        return res.value, res.error_estimate

    @property
    def volume(self):
        return self.volume_result[0]

    @property
    def reference_point(self):
        return np.zeros(self.n)

    def distance(self, p):
        return self.closest_point(p)[1]


# ---------------------------------------------------------------------------
# star-shaped analytic surfaces


class StarBoundary(Boundary):
    """{c + rho(u) u : |u| = 1} with rho evaluated in a rotated local frame."""

    kind = "star"

    def __init__(self, center, radial, rotation=None, label="star", params=None):
        self.center = np.asarray(center, dtype=float)
        self.n = len(self.center)
        if self.n < 2:
            raise InvalidShape("dimension must be >= 2")
        self.radial = radial
        self.Q = np.eye(self.n) if rotation is None else np.asarray(rotation, dtype=float)
        self.label = label
        self.params = dict(params or {})
        if self.n >= 4 and not radial.zonal:
            raise InvalidShape("dimensions n >= 4 support only rotationally symmetric analytic kinds")
        test = self.rho(sphere_directions(self.n, 512))
        if not np.all(np.isfinite(test)) or np.any(test <= 0):
            raise InvalidShape("radial function must be positive and finite")

    @property
    def reference_point(self):
        return self.center

    # local <-> global directions
    def rho(self, U):
        return self.radial.value(U @ self.Q)

    def grad_rho(self, U):
        return self.radial.grad(U @ self.Q) @ self.Q.T

    def surface(self, U):
        """Points, area density w.r.t. the unit sphere, and outward normals."""
        r = self.rho(U)
        g = self.grad_rho(U)
        X = self.center + r[:, None] * U
        nv = r[:, None] * U - g
        nn = np.linalg.norm(nv, axis=1)
        dens = r ** (self.n - 2) * nn
        return X, dens, nv / nn[:, None]

    def points(self, U):
        return self.center + self.rho(U)[:, None] * U

    def normals(self, U):
        return self.surface(U)[2]

    def sample_dirs(self, count):
        return sphere_directions(self.n, count) @ self.Q.T

    def project(self, Y):
        D = Y - self.center
        U = D / np.linalg.norm(D, axis=1, keepdims=True)
        return self.points(U)

    def project_jvp(self, Y, E):
        """Directional derivative of the radial projection at Y along E (both (K, n))."""
        D = Y - self.center
        d = np.linalg.norm(D, axis=1, keepdims=True)
        U = D / d
        dU = (E - U * np.sum(U * E, axis=1, keepdims=True)) / d
        r = self.rho(U)[:, None]
        g = self.grad_rho(U)
        return r * dU + U * np.sum(g * dU, axis=1, keepdims=True)

    @cached_property
    def slope(self):
        U = self.sample_dirs(4096 if self.n == 2 else 8192)
        return float(np.max(np.linalg.norm(self.grad_rho(U), axis=1) / self.rho(U)))

    @cached_property
    def size(self):
        return float(np.max(self.rho(self.sample_dirs(2048))))

    def chart(self, pole, toward=()):
        """Polar chart about the direction ``pole``; ``toward`` points fix the azimuth plane."""
        p = unit(pole)
        e1 = None
        for q in toward:
            v = np.asarray(q, dtype=float) - self.center
            v = v - (v @ p) * p
            if np.linalg.norm(v) > 1e-9 * (1 + np.linalg.norm(q)):
                e1 = unit(v)
                break
        B = complement_basis(p @ self.Q) @ self.Q.T
        if e1 is None:
            e1 = B[0]
            e2 = B[1] if self.n > 2 else np.zeros(self.n)
        elif self.n == 2:
            e2 = np.zeros(2)
        else:
            rest = B - np.outer(B @ e1, e1)
            k = int(np.argmax(np.linalg.norm(rest, axis=1)))
            e2 = unit(rest[k])
        return StarChart(self, p, e1, e2)

    def direction_of(self, X):
        D = np.atleast_2d(X) - self.center
        return D / np.linalg.norm(D, axis=1, keepdims=True)

    def classify(self, p, tol=1e-9):
        p = np.asarray(p, dtype=float)
        d = np.linalg.norm(p - self.center)
        if d == 0:
            return INSIDE
        u = (p - self.center)[None] / d
        g = d - self.rho(u)[0]
        if abs(g) <= tol:
            return ON_BOUNDARY
        if abs(g) <= 2 * tol * np.sqrt(1 + self.slope**2) and self.closest_point(p)[1] <= tol:
            return ON_BOUNDARY
        return OUTSIDE if g > 0 else INSIDE

    def _refine(self, p, u0):
        E = complement_basis(u0)

        def res(a):
            return self.points(unit(u0 + a @ E)[None])[0] - p

        sol = least_squares(res, np.zeros(self.n - 1), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)

        # the distance is flat at its minimum; polish on the tangential part of X - p
        def tangential(a):
            U = unit(u0 + a @ E)[None]
            d = self.points(U)[0] - p
            N = self.normals(U)[0]
            return E @ (d - (d @ N) * N)

        a = _polish(tangential, res, sol.x)
        u = unit(u0 + a @ E)
        X = self.points(u[None])[0]
        return X, u, float(np.linalg.norm(X - p))

    def _sample_distances(self, p, count):
        U = self.sample_dirs(count)
        return U, np.linalg.norm(self.points(U) - p, axis=1)

    def closest_point(self, p, hint=None):
        p = np.asarray(p, dtype=float)
        if hint is not None:
            X, u, dist = self._refine(p, unit(hint))
            return X, dist, u
        U, d = self._sample_distances(p, 2048 if self.n == 2 else 6000)
        best = None
        for i in np.argsort(d)[:6]:
            cand = self._refine(p, U[i])
            if best is None or cand[2] < best[2]:
                best = cand
        X, u, dist = best
        return X, dist, u

    def touching_candidates(self, x0):
        """Refined local minimizers of |X - x0| near the global minimum."""
        x0 = np.asarray(x0, dtype=float)
        count = 4096 if self.n == 2 else 20000
        U, d = self._sample_distances(x0, count)
        if self.n == 2:
            left, right = np.roll(d, 1), np.roll(d, -1)
            is_min = (d <= left) & (d <= right)
        else:
            from scipy.spatial import cKDTree

            _, nb = cKDTree(U).query(U, k=9)
            is_min = np.all(d[:, None] <= d[nb[:, 1:]], axis=1)
        band = d.min() * (1 + 1e-2)
        idx = np.nonzero(is_min & (d <= band))[0]
        pts = [self._refine(x0, U[i])[0] for i in idx]
        return np.array(pts)

    def transformed(self, motion: RigidMotion):
        return type(self)._rebuild(self, motion)

    @staticmethod
    def _rebuild(b, M):
        return StarBoundary(
            M.apply(b.center), ScaledRadius(b.radial, M.scale), M.rotation @ b.Q, b.label, b.params
        )

    def describe(self):
        return {"kind": self.label, "n": self.n, "center": self.center.tolist(), "radial": self.radial.describe()}


class Ball(StarBoundary):
    kind = "ball"

    def __init__(self, center, radius, rotation=None):
        if not radius > 0 or not np.isfinite(radius):
            raise InvalidShape("radius must be positive and finite")
        self.radius = float(radius)
        super().__init__(center, ConstantRadius(radius), rotation, label="ball")

    @cached_property
    def measure_result(self):
        return ball_boundary_measure(self.n, self.radius), 0.0

    @cached_property
    def volume_result(self):
        return ball_volume(self.n, self.radius), 0.0

    @property
    def slope(self):
        return 0.0

    @property
    def size(self):
        return self.radius

    def classify(self, p, tol=1e-9):
        g = np.linalg.norm(np.asarray(p, dtype=float) - self.center) - self.radius
        if abs(g) <= tol:
            return ON_BOUNDARY
        return OUTSIDE if g > 0 else INSIDE

    def closest_point(self, p):
        p = np.asarray(p, dtype=float)
        v = p - self.center
        d = np.linalg.norm(v)
        u = v / d if d > 0 else self.Q[:, 0]
        return self.center + self.radius * u, abs(d - self.radius), u

    def touching_candidates(self, x0):
        x0 = np.asarray(x0, dtype=float)
        v = x0 - self.center
        if np.linalg.norm(v) <= 1e-12 * self.radius:
            if self.n == 2:
                U = sphere_directions(2, 4096)
            elif self.n == 3:
                U = fibonacci_sphere(2000)
            else:
                U = np.vstack([np.eye(self.n), -np.eye(self.n)])
            return self.center + self.radius * (U @ self.Q.T)
        return (self.center + self.radius * unit(v))[None]

    @staticmethod
    def _rebuild(b, M):
        return Ball(M.apply(b.center), b.radius * M.scale, M.rotation @ b.Q)

    def describe(self):
        return {"kind": "ball", "n": self.n, "center": self.center.tolist(), "radius": self.radius}


class StarChart:
    """u(s, w) = cos(s) p + sin(s) (w0 e1 + w1 e2), s in [0, pi]."""

    polar_power_offset = 0

    def __init__(self, star, p, e1, e2):
        self.b = star
        self.n = star.n
        self.p, self.e1, self.e2 = p, e1, e2
        r = star.rho(p[None])[0]
        g = np.linalg.norm(star.grad_rho(p[None])[0])
        self.metric = float(np.hypot(r, g))

    def s_max(self, om):
        return np.full(len(om), np.pi)

    def point(self, s, om):
        dirs = om[:, 0:1] * self.e1 + om[:, 1:2] * self.e2
        U = np.cos(s)[:, None] * self.p + np.sin(s)[:, None] * dirs
        X, dens, N = self.b.surface(U)
        return X, dens * np.abs(np.sin(s)) ** (self.n - 2), N


# ---------------------------------------------------------------------------
# graph patches


class GraphPatch(Boundary):
    """Local boundary piece {o + y T + psi(y) nu : |y| < R0}; the domain lies below (along -nu).

    Points outside the cylinder |y| < R0, a < height < b are treated as exterior.
    """

    kind = "graph_patch"
    closed = False

    def __init__(self, origin, normal, profile, radius, window=None, tangent=None, height=0.0,
                 lipschitz=None, label="graph_patch", validate=True):
        self.origin = np.asarray(origin, dtype=float)
        self.n = len(self.origin)
        self.nu = unit(normal)
        self.T = complement_basis(self.nu) if tangent is None else np.asarray(tangent, dtype=float)
        self.profile = profile
        self.radius = float(radius)
        self.height = float(height)
        if not self.radius > 0:
            raise InvalidShape("patch radius must be positive")
        self.window = tuple(window) if window is not None else (self.height - 4 * self.radius, self.height + 4 * self.radius)
        self.label = label
        if self.n >= 4 and not profile.radial:
            raise InvalidShape("dimensions n >= 4 support only radial graph profiles")
        if validate:
            self._validate(lipschitz)
        self.lipschitz = lipschitz

    def _validate(self, L):
        rng = np.random.default_rng(7)
        Y = self._disc_samples(4000, rng)
        h = self.psi(Y)
        if not np.all(np.isfinite(h)):
            raise InvalidShape("profile is not finite on the disc")
        a, b = self.window
        if not (a < b and np.all(h > a) and np.all(h < b)):
            raise InvalidShape("profile leaves the window (a, b)")
        if L is not None:
            Y2 = self._disc_samples(4000, rng)
            lhs = np.abs(self.psi(Y) - self.psi(Y2))
            rhs = L * np.linalg.norm(Y - Y2, axis=1)
            if np.any(lhs > rhs * (1 + 1e-9) + 1e-14):
                raise InvalidShape("profile violates the declared Lipschitz constant")

    def _disc_samples(self, count, rng):
        m = self.n - 1
        G = rng.standard_normal((count, m))
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        rad = self.radius * rng.uniform(0, 1, count) ** (1 / m)
        return G * rad[:, None]

    def psi(self, Y):
        return self.height + self.profile.value(Y)

    def surface_y(self, Y):
        g = self.profile.grad(Y)
        X = self.origin + Y @ self.T + self.psi(Y)[:, None] * self.nu
        nv = self.nu - g @ self.T
        nn = np.linalg.norm(nv, axis=1)
        return X, nn, nv / nn[:, None]

    def points(self, Y):
        return self.surface_y(Y)[0]

    def local(self, p):
        d = np.asarray(p, dtype=float) - self.origin
        return d @ self.T.T, d @ self.nu

    @cached_property
    def slope(self):
        Y = self._disc_samples(4000, np.random.default_rng(3))
        return float(np.max(np.linalg.norm(self.profile.grad(Y), axis=1)))

    @property
    def size(self):
        return self.radius

    @property
    def reference_point(self):
        return self.origin

    def chart(self, pole, toward=()):
        """Polar chart in tangent coordinates about the boundary point ``pole``."""
        y0, _ = self.local(pole)
        m = self.n - 1
        e1 = None
        for q in toward:
            v, _ = self.local(q)
            v = v - y0
            if np.linalg.norm(v) > 1e-9 * (1 + np.linalg.norm(q)):
                e1 = unit(v)
                break
        if m == 1:
            return GraphChart(self, y0, np.ones(1), np.zeros(1))
        if e1 is None:
            e1 = np.eye(m)[0]
        if m == 2:
            e2 = np.array([-e1[1], e1[0]])
        else:
            B = complement_basis(e1)
            e2 = B[0]
        return GraphChart(self, y0, e1, e2)

    def classify(self, p, tol=1e-9):
        y, h = self.local(p)
        a, b = self.window
        if np.linalg.norm(y) >= self.radius or not a < h < b:
            return OUTSIDE
        g = h - self.psi(y[None])[0]
        if abs(g) <= tol:
            return ON_BOUNDARY
        if abs(g) <= 2 * tol * np.sqrt(1 + self.slope**2) and self.closest_point(p)[1] <= tol:
            return ON_BOUNDARY
        return OUTSIDE if g > 0 else INSIDE

    def _refine(self, p, y0):
        def res(y):
            return self.points(y[None])[0] - p

        sol = least_squares(res, y0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)

        def stationary(y):
            d = self.points(y[None])[0] - p
            return self.T @ d + self.profile.grad(y[None])[0] * (self.nu @ d)

        y = _polish(stationary, res, sol.x)
        if np.linalg.norm(y) > self.radius:
            y = y * self.radius / np.linalg.norm(y)
        X = self.points(y[None])[0]
        return X, float(np.linalg.norm(X - p)), y

    def _samples(self, count):
        m = self.n - 1
        if m == 1:
            return np.linspace(-self.radius, self.radius, count)[:, None] * (1 - 1e-12)
        if m == 2:
            k = int(np.sqrt(count))
            r = self.radius * np.sqrt((np.arange(k) + 0.5) / k)
            th = 2 * np.pi * np.arange(k) / k
            R, TH = np.meshgrid(r, th, indexing="ij")
            return np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])
        return self._disc_samples(count, np.random.default_rng(11))

    def closest_point(self, p):
        p = np.asarray(p, dtype=float)
        y, h = self.local(p)
        if isinstance(self.profile, FlatProfile) and np.linalg.norm(y) <= self.radius:
            X = self.origin + y @ self.T + self.height * self.nu
            return X, abs(h - self.height), y
        Y = self._samples(4000)
        d = np.linalg.norm(self.points(Y) - p, axis=1)
        best = None
        for i in np.argsort(d)[:4]:
            cand = self._refine(p, Y[i])
            if best is None or cand[1] < best[1]:
                best = cand
        return best

    def touching_candidates(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if isinstance(self.profile, FlatProfile):
            return self.closest_point(x0)[0][None]
        Y = self._samples(20000)
        d = np.linalg.norm(self.points(Y) - x0, axis=1)
        from scipy.spatial import cKDTree

        _, nb = cKDTree(Y).query(Y, k=min(9, len(Y)))
        is_min = np.all(d[:, None] <= d[nb[:, 1:]], axis=1)
        idx = np.nonzero(is_min & (d <= d.min() * (1 + 1e-2)))[0]
        return np.array([self._refine(x0, Y[i])[0] for i in idx])

    def transformed(self, M: RigidMotion):
        s = M.scale
        return type(self)._rebuild(self, M, s)

    @staticmethod
    def _rebuild(b, M, s):
        return GraphPatch(
            M.apply(b.origin), M.apply_vector(b.nu), ScaledProfile(b.profile, s), b.radius * s,
            (b.window[0] * s, b.window[1] * s), tangent=b.T @ M.rotation.T, height=b.height * s,
            lipschitz=b.lipschitz, label=b.label, validate=False,
        )

    def describe(self):
        return {
            "kind": self.label, "n": self.n, "origin": self.origin.tolist(), "normal": self.nu.tolist(),
            "radius": self.radius, "window": list(self.window), "profile": self.profile.describe(),
        }


class HalfspaceCap(GraphPatch):
    """Disc of radius ``bounding_radius`` in the hyperplane {<x, normal> = offset}."""

    kind = "halfspace_cap"

    def __init__(self, normal, offset=0.0, bounding_radius=100.0, tangent=None):
        nu = unit(normal)
        super().__init__(offset * nu, nu, FlatProfile(), bounding_radius, tangent=tangent,
                         lipschitz=0.0, label="halfspace_cap", validate=False)
        self.offset = float(offset)

    @cached_property
    def measure_result(self):
        return ball_volume(self.n - 1, self.radius), 0.0

    @staticmethod
    def _rebuild(b, M, s):
        out = GraphPatch._rebuild(b, M, s)
        out.label = "halfspace_cap"
        return out


class GraphChart:
    """Y(s, w) = y0 + s (w0 e1 + w1 e2) in tangent coordinates, clipped to |Y| < R0."""

    def __init__(self, patch, y0, e1, e2):
        self.b = patch
        self.n = patch.n
        self.y0, self.e1, self.e2 = y0, e1, e2
        g = patch.profile.grad(y0[None])[0]
        self.metric = float(np.sqrt(1 + g @ g))

    def _dirs(self, om):
        return om[:, 0:1] * self.e1 + om[:, 1:2] * self.e2

    def s_max(self, om):
        D = self._dirs(om)
        b = D @ self.y0
        c = self.y0 @ self.y0 - self.b.radius**2
        return -b + np.sqrt(np.maximum(b * b - c, 0.0))

    def point(self, s, om):
        Y = self.y0 + s[:, None] * self._dirs(om)
        X, nn, N = self.b.surface_y(Y)
        return X, nn * np.abs(s) ** (self.n - 2), N


# ---------------------------------------------------------------------------
# discrete kinds


class PolylineLoop(Boundary):
    """Closed simple polygon in the plane, optionally with exact arcs of a star curve."""

    kind = "polyline"
    analytic = False
    n = 2

    def __init__(self, vertices, curve=None, params=None, validate=True, label="polyline"):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise InvalidShape("polyline needs at least 3 points in the plane")
        if np.allclose(V[0], V[-1]) and len(V) > 3:
            V = V[:-1]
            if params is not None:
                params = params[:-1]
        self.curve = curve
        self.params = None if params is None else np.asarray(params, dtype=float)
        self.label = label
        if validate:
            self._validate(V)
        area = 0.5 * np.sum(V[:, 0] * np.roll(V[:, 1], -1) - np.roll(V[:, 0], -1) * V[:, 1])
        if area < 0:
            if curve is not None:
                raise InvalidShape("curved polylines must be counter-clockwise")
            V = V[::-1].copy()
        self.V = V

    @staticmethod
    def _validate(V):
        from shapely.geometry import LinearRing

        if not np.all(np.isfinite(V)):
            raise InvalidShape("non-finite polyline vertex")
        seg = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
        if np.any(seg == 0):
            raise InvalidShape("repeated consecutive vertex")
        if not LinearRing(V).is_simple:
            raise InvalidShape("polyline is not simple")

    @property
    def size(self):
        return float(np.max(np.linalg.norm(self.V - self.V.mean(axis=0), axis=1)))

    @property
    def reference_point(self):
        return self.V.mean(axis=0)

    @property
    def count(self):
        return len(self.V)

    @property
    def A(self):
        return self.V

    @property
    def B(self):
        return np.roll(self.V, -1, axis=0)

    def _theta_bounds(self):
        th = self.params
        hi = np.roll(th, -1)
        hi[-1] = th[0] + 2 * np.pi
        return th, hi

    def element_points(self, idx, u):
        """Points, |dX/du| and outward normals at local params u in element idx."""
        if self.curve is None:
            A, B = self.A[idx], self.B[idx]
            d = B - A
            L = np.linalg.norm(d, axis=1)
            X = A + u[:, None] * d
            N = np.column_stack([d[:, 1], -d[:, 0]]) / L[:, None]
            return X, L, N
        lo, hi = self._theta_bounds()
        th = lo[idx] + u * (hi[idx] - lo[idx])
        U = np.column_stack([np.cos(th), np.sin(th)])
        X, dens, N = self.curve.surface(U)
        return X, dens * (hi[idx] - lo[idx]), N

    def element_sizes(self):
        return np.linalg.norm(self.B - self.A, axis=1)

    @cached_property
    def measure_result(self):
        if self.curve is None:
            L = self.element_sizes()
            return float(np.sum(L)), 1e-15 * float(np.sum(L))
        return Boundary.measure_result.func(self)

    @cached_property
    def volume_result(self):
        if self.curve is None:
            x, y = self.V[:, 0], self.V[:, 1]
            a = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
            return float(a), 1e-15 * abs(a)
        return Boundary.volume_result.func(self)

    def classify(self, p, tol=1e-9):
        p = np.asarray(p, dtype=float)
        if self.curve is not None:
            return self.curve.classify(p, tol)
        if self.closest_point(p)[1] <= tol:
            return ON_BOUNDARY
        return INSIDE if discrete.winding_number(self.V, p) != 0 else OUTSIDE

    def closest_point(self, p):
        p = np.asarray(p, dtype=float)
        if self.curve is not None:
            X, d, u = self.curve.closest_point(p)
            return X, d, u
        C, u = discrete.closest_on_segments(self.A, self.B, p)
        d = np.linalg.norm(C - p, axis=1)
        i = int(np.argmin(d))
        return C[i], float(d[i]), (i, float(u[i]))

    def touching_candidates(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if self.curve is not None:
            return self.curve.touching_candidates(x0)
        C, _ = discrete.closest_on_segments(self.A, self.B, x0)
        d = np.linalg.norm(C - x0, axis=1)
        keep = d <= d.min() * (1 + 1e-5)
        return C[keep]

    def transformed(self, M: RigidMotion):
        curve = None if self.curve is None else self.curve.transformed(M)
        params = None
        if curve is not None:
            # local angles shift by the rotation angle
            ang = np.arctan2(M.rotation[1, 0], M.rotation[0, 0])
            params = self.params + ang
        return PolylineLoop(M.apply(self.V), curve, params, validate=False, label=self.label)

    def describe(self):
        return {"kind": self.label, "n": 2, "segments": len(self.V), "curved": self.curve is not None}


class TriangleMesh(Boundary):
    """Watertight, outward-oriented triangle mesh, optionally projected onto a star surface."""

    kind = "mesh"
    analytic = False
    n = 3

    def __init__(self, vertices, faces, projector=None, validate=True, label="mesh"):
        V = np.asarray(vertices, dtype=float)
        F = np.asarray(faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3:
            raise InvalidShape("mesh vertices must be (N, 3)")
        if validate:
            vol = discrete.validate_mesh(V, F)
            if vol < 0:
                F = F[:, ::-1].copy()
            elif vol == 0:
                raise InvalidShape("mesh encloses zero volume")
        self.V, self.F = V, F
        self.projector = projector
        self.label = label

    @property
    def count(self):
        return len(self.F)

    @property
    def size(self):
        return float(np.max(np.linalg.norm(self.V - self.V.mean(axis=0), axis=1)))

    @property
    def reference_point(self):
        return self.V.mean(axis=0)

    def triangles(self):
        return self.V[self.F]

    def tri_points(self, T, bary):
        """Points, area factor (reference area 1) and normals at barycentric nodes.

        ``T`` is (K, 3, 3) corner coordinates; returns arrays shaped (K, q, ...).
        """
        K, q = len(T), len(bary)
        Y = np.einsum("qa,kai->kqi", bary, T)
        E1 = T[:, 1] - T[:, 0]
        E2 = T[:, 2] - T[:, 0]
        if self.projector is None:
            cr = np.cross(E1, E2)
            area = 0.5 * np.linalg.norm(cr, axis=1)
            N = cr / (2 * area[:, None])
            return Y, np.repeat(area[:, None], q, axis=1), np.repeat(N[:, None], q, axis=1)
        Yf = Y.reshape(-1, 3)
        E1f = np.repeat(E1, q, axis=0)
        E2f = np.repeat(E2, q, axis=0)
        X = self.projector.project(Yf)
        cr = np.cross(self.projector.project_jvp(Yf, E1f), self.projector.project_jvp(Yf, E2f))
        nn = np.linalg.norm(cr, axis=1)
        N = cr / nn[:, None]
        return X.reshape(K, q, 3), (0.5 * nn).reshape(K, q), N.reshape(K, q, 3)

    def element_sizes(self):
        T = self.triangles()
        return np.max(np.linalg.norm(T - np.roll(T, -1, axis=1), axis=2), axis=1)

    @cached_property
    def measure_result(self):
        if self.projector is None:
            T = self.triangles()
            a = 0.5 * np.linalg.norm(np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0]), axis=1)
            return float(np.sum(a)), 1e-15 * float(np.sum(a))
        return Boundary.measure_result.func(self)

    @cached_property
    def volume_result(self):
        if self.projector is None:
            T = self.triangles() - self.reference_point
            v = np.sum(np.einsum("ij,ij->i", T[:, 0], np.cross(T[:, 1], T[:, 2]))) / 6.0
            return float(v), 1e-15 * abs(v)
        return Boundary.volume_result.func(self)

    def classify(self, p, tol=1e-9):
        p = np.asarray(p, dtype=float)
        if self.projector is not None:
            return self.projector.classify(p, tol)
        if self.closest_point(p)[1] <= tol:
            return ON_BOUNDARY
        return INSIDE if discrete.ray_parity_inside(self.V, self.F, p) else OUTSIDE

    def closest_point(self, p):
        p = np.asarray(p, dtype=float)
        if self.projector is not None:
            return self.projector.closest_point(p)
        T = self.triangles()
        C = discrete.closest_on_triangles(T[:, 0], T[:, 1], T[:, 2], p)
        d = np.linalg.norm(C - p, axis=1)
        i = int(np.argmin(d))
        return C[i], float(d[i]), i

    def touching_candidates(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if self.projector is not None:
            return self.projector.touching_candidates(x0)
        T = self.triangles()
        C = discrete.closest_on_triangles(T[:, 0], T[:, 1], T[:, 2], x0)
        d = np.linalg.norm(C - x0, axis=1)
        return C[d <= d.min() * (1 + 1e-5)]

    def transformed(self, M: RigidMotion):
        proj = None if self.projector is None else self.projector.transformed(M)
        return TriangleMesh(M.apply(self.V), self.F, proj, validate=False, label=self.label)

    def describe(self):
        return {"kind": self.label, "n": 3, "triangles": len(self.F), "projected": self.projector is not None}
