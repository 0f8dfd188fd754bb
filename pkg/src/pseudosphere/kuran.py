"""Kuran functions and the Kuran gap.

k_alpha(x) = 1 + |alpha|^(n-2) (|x|^2 - |alpha|^2) / |x - alpha|^n is harmonic off
alpha and vanishes at the origin.  The gap of a boundary about x0 is the
supremum over exterior alpha of |mean of k_{alpha-x0}(x - x0) over the boundary|.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import QuadConfig, SearchConfig
from .errors import AlphaNotExterior, CenterNotInterior, InvalidShape, SingularPoint
from .geometry.frames import complement_basis, unit
from .geometry.ops import classify_point, outward_normal, touching_set
from .geometry.shapes import INSIDE, OUTSIDE, Ball, GraphPatch, StarBoundary
from .quadrature.core import QuadratureResult, boundary_grid, integrate_grid
from .quadrature.extrapolate import extrapolate_limit

_TINY = 1e-14


def kuran_h(alpha, x, n=None):
    """h_alpha(x); ``x`` may be a single point or an (N, n) array."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(alpha) if n is None else int(n)
    a2 = alpha @ alpha
    if a2 == 0:
        raise SingularPoint("alpha must be nonzero")
    D = x - alpha
    d2 = np.einsum("...i,...i->...", D, D)
    # |x| <= |alpha| + |x - alpha| bounds the relative coincidence test
    scale = np.sqrt(a2) + np.sqrt(np.max(d2))
    if np.min(d2) <= (_TINY * scale) ** 2:
        raise SingularPoint("x coincides with alpha")
    # |x|^2 - |alpha|^2 = (x - alpha).(x + alpha), which avoids cancellation near alpha
    num = np.einsum("...i,...i->...", D, x + alpha)
    return a2 ** ((n - 2) / 2) * num / d2 ** (n / 2)


def kuran_k(alpha, x, n=None):
    return 1.0 + kuran_h(alpha, x, n)


@dataclass(frozen=True)
class KuranEval:
    alpha: np.ndarray
    at: np.ndarray
    h: float
    k: float


def evaluate(alpha, at):
    h = float(kuran_h(alpha, at))
    return KuranEval(np.asarray(alpha, dtype=float), np.asarray(at, dtype=float), h, 1.0 + h)


def _mean_of_k(b, x0, alpha, grid, measure, measure_err):
    a = alpha - x0
    res = integrate_grid(grid, lambda X: kuran_k(a, X - x0))
    mean = res.value / measure
    err = res.error_estimate / measure + abs(mean) * measure_err / measure
    return QuadratureResult(mean, err, res.evaluations)


def boundary_mean_kuran(b, x0, alpha, cfg=None, check=True):
    """Mean of k_{alpha - x0}(x - x0) over the boundary, with its error estimate."""
    x0 = np.asarray(x0, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if isinstance(b, GraphPatch):
        raise InvalidShape("boundary means need a closed boundary")
    if check and classify_point(b, alpha, 1e-12 * b.size) != OUTSIDE:
        raise AlphaNotExterior(f"alpha = {alpha.tolist()} is not exterior")
    measure, merr = b.measure_result
    d = b.distance(alpha)
    grid = boundary_grid(b, cfg, near=alpha, h_min=d / 8, toward=(x0,))
    return _mean_of_k(b, x0, alpha, grid, measure, merr)


@dataclass
class GapEstimate:
    value: float
    argmax_alpha: np.ndarray
    search_trace: list
    boundary_offset: float
    error_estimate: float = 0.0
    quadrature_error: float = 0.0
    delta_levels: list = field(default_factory=list)
    level_max: list = field(default_factory=list)
    delta_limit: float = float("nan")
    evaluations: int = 0
    flags: list = field(default_factory=list)


class _Objective:
    """|mean k| at exterior points, memoized, recording the trace."""

    def __init__(self, b, x0, qcfg):
        self.b, self.x0, self.qcfg = b, x0, qcfg
        self.measure, self.merr = b.measure_result
        self.trace = []
        self.errors = []
        self.evaluations = 0

    def __call__(self, alpha, dist, pole=None):
        grid = boundary_grid(self.b, self.qcfg, near=alpha, h_min=dist / 8, toward=(self.x0,), pole=pole)
        res = _mean_of_k(self.b, self.x0, alpha, grid, self.measure, self.merr)
        self.evaluations += res.evaluations
        val = abs(res.value)
        self.trace.append((alpha.copy(), val))
        self.errors.append(res.error_estimate)
        return val


class _StarSpace:
    """Exterior points alpha = X(u) + tau nu(u), tau = delta * exp(lam), lam >= 0."""

    def __init__(self, b):
        self.b = b
        self.n = b.n
        P = b.points(b.sample_dirs(8192 if b.n == 2 else 40000))
        self._cloud = P
        from scipy.spatial import cKDTree

        self._tree = cKDTree(P)
        self._spacing = float(np.max(self._tree.query(P, k=2)[0][:, 1]))
        self._dirs = b.direction_of(P)

    def seeds(self, count):
        return [(u, np.zeros(self.n - 1)) for u in self.b.sample_dirs(count)]

    def alpha(self, u0, a, tau):
        """Exterior point and its foot on the boundary."""
        E = complement_basis(u0 @ self.b.Q) @ self.b.Q.T
        u = unit(u0 + a @ E)
        X, _, N = self.b.surface(u[None])
        return X[0] + tau * N[0], X[0]

    def clearance(self, alpha, delta):
        """Distance to the boundary if alpha is exterior, else -1."""
        b = self.b
        if b.classify(alpha, 0.0) != OUTSIDE:
            return -1.0
        ds, i = self._tree.query(alpha)
        if ds - self._spacing >= delta:
            return max(ds - self._spacing, delta)
        if isinstance(b, Ball):
            return b.distance(alpha)
        return b.closest_point(alpha, hint=self._dirs[i])[1]


def _pattern_search(fun, x0, steps, lower, iters, tol):
    """Compass search maximizing ``fun``; coordinates with a lower bound are clipped."""
    x = np.array(x0, dtype=float)
    fx = fun(x)
    steps = np.array(steps, dtype=float)
    for _ in range(iters):
        improved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * steps[i]
                if lower[i] is not None and y[i] < lower[i]:
                    y[i] = lower[i]
                    if y[i] == x[i]:
                        continue
                fy = fun(y)
                if fy > fx:
                    x, fx, improved = y, fy, True
                    break
            if improved:
                break
        if not improved:
            steps /= 2
            if np.all(steps < tol):
                break
    return x, fx


def kuran_gap(b, x0, search=None, quad=None, r=None):
    """Lower estimate of the Kuran gap by multi-start constrained pattern search."""
    search = search or SearchConfig()
    quad = quad or QuadConfig(panels=16, azimuth=32)
    x0 = np.asarray(x0, dtype=float)
    if isinstance(b, GraphPatch):
        raise InvalidShape("the Kuran gap needs a closed boundary")
    if classify_point(b, x0, 0.0) != INSIDE:
        raise CenterNotInterior(f"x0 = {x0.tolist()} is not inside the domain")
    if r is None:
        r = touching_set(b, x0).radius
    obj = _Objective(b, x0, quad)
    delta0 = search.delta_rel * r
    levels = [delta0 * 2.0**j for j in range(search.delta_halvings, -1, -1)]
    if isinstance(b, StarBoundary):
        best_per_level = _gap_star(b, obj, r, levels, search)
    else:
        best_per_level = _gap_cartesian(b, obj, r, levels, search)
    if search.grid_oracle and b.n == 2:
        grid_oracle_scan(b, x0, obj, delta0, search.grid_size)

    vals = np.array([v for _, v in obj.trace])
    i = int(np.argmax(vals))
    value = float(vals[i])
    qerr = float(obj.errors[i])
    flags = []
    limit = float("nan")
    extra = 0.0
    try:
        est = extrapolate_limit(list(zip(levels, best_per_level)), noise=qerr)
        limit = est.value
        extra = max(0.0, est.value - value) + est.residual
        flags += est.flags
    except Exception:  # pragma: no cover - levels always has >= 4 entries by default
        pass
    return GapEstimate(
        value, obj.trace[i][0], obj.trace, delta0, qerr + extra, qerr, levels,
        list(best_per_level), limit, obj.evaluations, flags,
    )


def _gap_star(b, obj, r, levels, search):
    space = _StarSpace(b)
    dim = b.n - 1
    seeds_u = b.sample_dirs(search.seeds_per_shell)
    # stage 1 offsets: shell multiples of the finest clearance, plus one at the touching radius
    taus = sorted({m * levels[-1] for m in search.shells} | {r})
    pool = []  # (value, u0, a, tau)

    def evaluate_at(u0, a, tau, delta):
        alpha, foot = space.alpha(u0, a, tau)
        c = space.clearance(alpha, delta)
        if c < delta * (1 - 1e-9):
            return -np.inf, alpha
        return obj(alpha, c, pole=foot), alpha

    best_per_level = []
    for delta in levels:
        start_len = len(obj.trace)
        for tau in [t for t in taus if t >= delta] + [delta]:
            for u in seeds_u:
                val, _ = evaluate_at(u, np.zeros(dim), tau, delta)
                if np.isfinite(val):
                    pool.append((val, u, np.zeros(dim), tau))
        pool.sort(key=lambda e: -e[0])
        starts, seen = [], []
        for e in pool:
            if len(starts) >= search.starts:
                break
            if any(np.linalg.norm(e[1] - s[1]) < 1e-9 and abs(np.log(e[3] / s[3])) < 1e-9 for s in seen):
                continue
            seen.append(e)
            starts.append(e)
        step_a = 2 * np.pi / max(search.seeds_per_shell, 4) / 2 if dim == 1 else 0.5 / np.sqrt(search.seeds_per_shell)
        for val, u0, a0, tau0 in starts:
            lam0 = max(np.log(tau0 / delta), 0.0)

            def f(x, u0=u0, delta=delta):
                v, _ = evaluate_at(u0, x[:dim], delta * np.exp(x[dim]), delta)
                return v

            x, fx = _pattern_search(
                f, np.concatenate([a0, [lam0]]), [step_a] * dim + [0.5],
                [None] * dim + [0.0], search.pattern_iters, search.step_tol,
            )
            if np.isfinite(fx):
                pool.append((fx, unit(u0 + x[:dim] @ (complement_basis(u0 @ b.Q) @ b.Q.T)),
                             np.zeros(dim), delta * np.exp(x[dim])))
        new = [v for _, v in obj.trace[start_len:]]
        prev = best_per_level[-1] if best_per_level else 0.0
        best_per_level.append(max([prev] + new))
    return best_per_level


def _gap_cartesian(b, obj, r, levels, search):
    """Exterior search in Cartesian coordinates (discrete boundaries)."""
    n = b.n
    if hasattr(b, "V"):
        V = b.V
    else:  # pragma: no cover
        raise InvalidShape("unsupported boundary for the Cartesian gap search")
    k = min(search.seeds_per_shell, len(V))
    pick = np.linspace(0, len(V) - 1, k).astype(int)
    base = V[pick]
    normals = np.array([outward_normal(b, p) for p in base])
    taus = sorted({m * levels[-1] for m in search.shells} | {r})

    def feasible(alpha, delta):
        if b.classify(alpha, 0.0) != OUTSIDE:
            return -1.0
        return b.distance(alpha)

    pool = []
    best_per_level = []
    for delta in levels:
        start_len = len(obj.trace)
        for tau in [t for t in taus if t >= delta] + [delta]:
            for p, nu in zip(base, normals):
                alpha = p + tau * nu
                c = feasible(alpha, delta)
                if c >= delta * (1 - 1e-9):
                    pool.append((obj(alpha, c), alpha))
        pool.sort(key=lambda e: -e[0])

        for _, a0 in pool[: search.starts]:
            def f(x, delta=delta):
                c = feasible(x, delta)
                if c < delta * (1 - 1e-9):
                    return -np.inf
                return obj(x, c)

            x, fx = _pattern_search(f, a0, [0.05 * r] * n, [None] * n, search.pattern_iters,
                                    search.step_tol * r)
            if np.isfinite(fx):
                pool.append((fx, x))
        new = [v for _, v in obj.trace[start_len:]]
        prev = best_per_level[-1] if best_per_level else 0.0
        best_per_level.append(max([prev] + new))
    return best_per_level


def grid_oracle_scan(b, x0, obj=None, delta=None, size=200, extent=3.0, quad=None):
    """Max of |mean k| over a size x size grid of exterior points (planar boundaries)."""
    if b.n != 2:
        raise InvalidShape("the grid oracle scans planar boundaries only")
    x0 = np.asarray(x0, dtype=float)
    if obj is None:
        obj = _Objective(b, x0, quad or QuadConfig(panels=16))
    if delta is None:
        delta = 1e-3 * touching_set(b, x0).radius
    c = b.reference_point
    L = extent * b.size
    xs = np.linspace(c[0] - L, c[0] + L, size)
    ys = np.linspace(c[1] - L, c[1] + L, size)
    best, arg = 0.0, None
    for x in xs:
        for y in ys:
            p = np.array([x, y])
            if b.classify(p, 0.0) != OUTSIDE:
                continue
            d = b.distance(p)
            if d < delta:
                continue
            v = obj(p, d)
            if v > best:
                best, arg = v, p
    return best, arg
