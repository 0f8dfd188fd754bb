"""Spherical flatness index at touching points.

S_z = (2 / (n omega_n r)) liminf_{R -> 0} liminf_{alpha -> z} of the cap integral
of <alpha - x, alpha - x0> / |x - alpha|^n over the boundary inside B(z, R).
Both liminfs are replaced by extrapolated limits along dyadic ladders, and the
approach is sampled along a fan of directions around the outward normal.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import FlatnessConfig, QuadConfig
from .constants import omega
from .errors import NoTouchingPoint, SingularPoint
from .geometry.frames import complement_basis, unit
from .geometry.ops import outward_normal, touching_set
from .geometry.shapes import OUTSIDE, StarBoundary
from .quadrature.core import boundary_grid, integrate_boundary, integrate_grid
from .quadrature.extrapolate import extrapolate_limit


def flatness_integrand(alpha, x, x0, n=None):
    """<alpha - x, alpha - x0> / |x - alpha|^n for a point or an (N, n) array x."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n = len(alpha) if n is None else int(n)
    D = alpha - x
    d2 = np.einsum("...i,...i->...", D, D)
    # |x| <= |alpha| + |D|, so this scale bounds the relative test from above
    scale = np.sqrt(alpha @ alpha) + np.sqrt(np.max(d2))
    if np.min(d2) <= (1e-14 * scale) ** 2:
        raise SingularPoint("x coincides with alpha")
    return (D @ (alpha - x0)) / d2 ** (n / 2)


def index_prefactor(n, r):
    return 2.0 / (n * omega(n) * r)


def cap_integral(b, z, R, alpha, x0, cfg=None, h_min=None):
    """Integral of the flatness integrand over the boundary inside B(z, R)."""
    z = np.asarray(z, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if R <= 0:
        from .quadrature.core import QuadratureResult

        return QuadratureResult(0.0, 0.0, 0)
    t = np.linalg.norm(alpha - z)
    if h_min is None:
        h_min = max(t, 1e-12 * R) / 32
    return integrate_boundary(
        b, lambda X: flatness_integrand(alpha, X, x0), region=(z, R), cfg=cfg,
        near=alpha, h_min=h_min, inner=t, toward=(x0, alpha),
    )


@dataclass
class IndexEstimate:
    value: float
    z: np.ndarray
    r: float
    table: np.ndarray  # (R_j, direction, t_k), prefactor applied; nan where skipped
    errors: np.ndarray
    R_values: list
    t_values: list
    directions: np.ndarray
    inner_limits: list  # [j][d] LimitEstimate or None
    outer_limits: list  # [d] LimitEstimate or None
    error_estimate: float = 0.0
    flags: list = field(default_factory=list)
    direction_index: int = 0

    @property
    def converged(self):
        return "NonConvergent" not in self.flags


def approach_directions(b, z, nu, x0, cfg):
    """Outward normal plus cone rings around it."""
    n = len(z)
    dirs = [nu]
    if n == 2:
        T = np.array([[-nu[1], nu[0]]])
        for a in np.radians(cfg.cone_angles_deg):
            dirs += [np.cos(a) * nu + np.sin(a) * T[0], np.cos(a) * nu - np.sin(a) * T[0]]
        return np.array(dirs)
    if isinstance(b, StarBoundary):
        T = complement_basis(nu @ b.Q) @ b.Q.T
    else:
        T = complement_basis(nu)
    if n >= 4:
        # one direction per ring, inside the plane spanned by nu and x0 (zonal quadrature)
        w = (x0 - z) - ((x0 - z) @ nu) * nu
        w = unit(w) if np.linalg.norm(w) > 1e-9 * np.linalg.norm(x0 - z) else T[0]
        for a in np.radians(cfg.cone_angles_deg):
            dirs.append(np.cos(a) * nu + np.sin(a) * w)
        return np.array(dirs)
    m = cfg.dirs_per_ring
    for a in np.radians(cfg.cone_angles_deg):
        for k in range(m):
            ph = 2 * np.pi * k / m
            dirs.append(np.cos(a) * nu + np.sin(a) * (np.cos(ph) * T[0] + np.sin(ph) * T[1]))
    return np.array(dirs)


def spherical_flatness_index(b, x0, z, cfg=None, r=None):
    """Extrapolated index S_z with its (R, direction, t) table and error budget."""
    cfg = cfg or FlatnessConfig()
    q = cfg.quad
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    n = len(z)
    if r is None:
        r = float(np.linalg.norm(z - x0))
    if r <= 0:
        raise NoTouchingPoint("z coincides with x0")
    if b.distance(z) > 1e-6 * r:
        raise NoTouchingPoint(f"z = {z.tolist()} is not on the boundary")
    nu = outward_normal(b, z)
    dirs = approach_directions(b, z, nu, x0, cfg)
    t_vals = q.ladder.t_values(r)
    R_vals = q.ladder.R_values(r)
    pref = index_prefactor(n, r)
    t_min = t_vals[-1]
    J, D, K = len(R_vals), len(dirs), len(t_vals)
    table = np.full((J, D, K), np.nan)
    errs = np.zeros((J, D, K))
    flags = []
    exterior = np.ones((D, K), dtype=bool)
    for d in range(D):
        for k in range(K):
            if b.classify(z + t_vals[k] * dirs[d], 0.0) != OUTSIDE:
                exterior[d, k] = False
    if not np.all(exterior):
        flags.append("skipped_interior_alpha")
    for j, R in enumerate(R_vals):
        grid = boundary_grid(b, q, region=(z, R), h_min=t_min / q.min_per_t, inner=t_min,
                             toward=(x0, z + dirs[-1]), pole=z)
        for d in range(D):
            for k in range(K):
                if not exterior[d, k]:
                    continue
                alpha = z + t_vals[k] * dirs[d]
                res = integrate_grid(grid, lambda X: flatness_integrand(alpha, X, x0))
                table[j, d, k] = pref * res.value
                errs[j, d, k] = pref * res.error_estimate

    inner = [[None] * D for _ in range(J)]
    outer = [None] * D
    limits = np.full(D, np.inf)
    budgets = np.zeros(D)
    for d in range(D):
        if not np.any(exterior[d]):
            continue
        ks = np.nonzero(exterior[d])[0]
        vals = []
        inner_err = 0.0
        for j in range(J):
            samples = [(t_vals[k], table[j, d, k]) for k in ks]
            noise = float(np.max(errs[j, d, ks]))
            try:
                est = extrapolate_limit(samples, tail=cfg.tail, noise=noise)
            except Exception:
                est = None
            inner[j][d] = est
            if est is None:
                vals = None
                break
            vals.append(est.value)
            inner_err = max(inner_err, est.residual + noise)
        if vals is None:
            continue
        try:
            out = extrapolate_limit(list(zip(R_vals, vals)), tail=cfg.tail, noise=inner_err)
        except Exception:
            continue
        outer[d] = out
        limits[d] = out.value
        budgets[d] = inner_err + out.residual
    if not np.any(np.isfinite(limits)):
        raise NoTouchingPoint("no exterior approach direction at z")
    best = int(np.argmin(limits))
    chain = [outer[best]] + [inner[j][best] for j in range(J)]
    for est in chain:
        for f in est.flags:
            if f not in flags:
                flags.append(f)
    if any("no_convergence" in est.flags for est in chain):
        flags.append("NonConvergent")
    return IndexEstimate(
        float(limits[best]), z, r, table, errs, R_vals, t_vals, dirs, inner, outer,
        float(budgets[best]), flags, best,
    )


def touching_indices(b, x0, cfg=None, tol=None, workers=1):
    """Index at up to ``cfg.max_points`` representatives of the touching set."""
    cfg = cfg or FlatnessConfig()
    ts = touching_set(b, x0, tol)
    reps = ts.representatives(cfg.max_points)

    def one(z):
        return spherical_flatness_index(b, x0, z, cfg, r=ts.radius)

    if workers > 1 and len(reps) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return ts, list(pool.map(one, reps))
    return ts, [one(z) for z in reps]
