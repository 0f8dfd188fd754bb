"""Acceptance criteria; each test records one PASS/FAIL line shown in the terminal summary."""

import math
import time

import numpy as np
import pytest

from pseudosphere.config import FlatnessConfig
from pseudosphere.flatness import spherical_flatness_index, touching_indices
from pseudosphere.geometry import RigidMotion, make_shape
from pseudosphere.geometry.ops import touching_set
from pseudosphere.kuran import kuran_gap, kuran_h
from pseudosphere.quadrature import poisson_normalization, reference_appendix_integral
from pseudosphere.stability import HOLDS, VIOLATED, check_theorem, isoperimetric_chain

from conftest import SEARCH_3D, pipeline

RESULTS = {}
INDEX_TOL = 1e-2
FLAT_3D = FlatnessConfig(dirs_per_ring=4)


def record(num, title, ok, detail):
    RESULTS[num] = f"[{num:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(RESULTS[num])
    assert ok, RESULTS[num]


def test_01_appendix_oracle():
    t = time.perf_counter()
    c2 = reference_appendix_integral(2, 10_000, "discrete")
    dt2 = time.perf_counter() - t
    t = time.perf_counter()
    c3 = reference_appendix_integral(3, 100_000, "discrete")
    dt3 = time.perf_counter() - t
    err2 = abs(c2.value + math.pi)
    rel3 = abs(c3.value + 2 * math.pi) / (2 * math.pi)
    ok = err2 <= 1e-4 and dt2 < 1 and rel3 <= 1e-3 and dt3 < 30 and c3.elements >= 100_000
    record(1, "appendix oracle", ok,
           f"n=2 err {err2:.2e} in {dt2:.2f}s; n=3 rel err {rel3:.2e} ({c3.elements} triangles) in {dt3:.2f}s")


def test_02_halfspace_index():
    worst, slowest = 0.0, 0.0
    for n in (2, 3):
        cap = make_shape({"kind": "halfspace_cap", "n": n})
        for r in (0.5, 1.0, 2.0):
            x0 = np.zeros(n)
            x0[-1] = -r
            t = time.perf_counter()
            est = spherical_flatness_index(cap, x0, np.zeros(n), FLAT_3D if n == 3 else None)
            slowest = max(slowest, time.perf_counter() - t)
            worst = max(worst, abs(est.value - 1))
    record(2, "halfspace index", worst <= INDEX_TOL and slowest < 60,
           f"max |S-1| {worst:.2e} over n=2,3 and r in {{0.5,1,2}}; slowest case {slowest:.2f}s")


def test_03_centered_ball_index():
    worst, count = 0.0, {}
    for n in (2, 3):
        cfg = FlatnessConfig(max_points=8) if n == 2 else FlatnessConfig(dirs_per_ring=4, max_points=8)
        _, est = touching_indices(make_shape({"kind": "ball", "n": n}), np.zeros(n), cfg)
        count[n] = len(est)
        worst = max(worst, max(abs(e.value - 1) for e in est))
    ok = worst <= INDEX_TOL and count == {2: 8, 3: 8}
    record(3, "centered ball index", ok, f"max |S-1| {worst:.2e} at {count[2]} + {count[3]} touching points")


def test_04_off_center_ball_index():
    worst, seen = 0.0, 0
    for n in (2, 3):
        for off in (0.2, 0.5, 0.8):
            R = 1.3
            b = make_shape({"kind": "ball", "n": n, "radius": R, "center": [0.1] * n})
            x1 = np.full(n, 0.1)
            x1[0] += off * R
            _, est = touching_indices(b, x1, FLAT_3D if n == 3 else None)
            seen += len(est)
            worst = max(worst, max(abs(e.value - 1) for e in est))
    record(4, "off-center ball index", worst <= INDEX_TOL,
           f"max |S-1| {worst:.2e} over {seen} touching points, offsets {{0.2,0.5,0.8}}, n=2,3")


def test_05_smooth_bumps():
    profiles = {
        "paraboloid": {"type": "paraboloid", "curvature": 0.5},
        "gaussian": {"type": "gaussian", "amplitude": 0.4, "width": 0.6},
        "anisotropic quadratic": {"type": "quadratic", "hessian": [[0.8, 0.1], [0.1, 0.3]]},
    }
    values = {}
    for name, prof in profiles.items():
        patch = make_shape({"kind": "graph_patch", "n": 3, "profile": prof})
        values[name] = spherical_flatness_index(patch, [0, 0, -1.0], [0, 0, 0], FLAT_3D).value
    ok = all(v <= 1 + INDEX_TOL for v in values.values())
    record(5, "smooth bump bound", ok, ", ".join(f"{k} S={v:.6f}" for k, v in values.items()))


def test_06_sphere_gap():
    rng = np.random.default_rng(6)
    ratios, eps = [], []
    for i in range(5):
        n = 2 if i < 3 else 3
        x0, r = rng.uniform(-2, 2, n), rng.uniform(0.3, 3.0)
        b = make_shape({"kind": "ball", "n": n, "radius": r, "center": x0.tolist()})
        g = kuran_gap(b, x0, None if n == 2 else SEARCH_3D)
        eps.append(g.error_estimate)
        ratios.append(g.value / max(g.error_estimate, np.finfo(float).tiny))
    ok = max(ratios) <= 3 and max(eps) <= 1e-3
    record(6, "sphere gap", ok, f"max gap/eps {max(ratios):.3g} over 5 spheres; largest eps {max(eps):.2e}")


def test_07_invariance():
    rng = np.random.default_rng(7)
    b = make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]})
    x0 = np.array([0.2, -0.1])
    z = touching_set(b, x0).points[0]
    g0 = kuran_gap(b, x0).value
    s0 = spherical_flatness_index(b, x0, z).value
    dg = ds = 0.0
    for _ in range(10):
        M = RigidMotion.random(2, rng)
        bm = b.transformed(M)
        dg = max(dg, abs(kuran_gap(bm, M.apply(x0)).value - g0))
        ds = max(ds, abs(spherical_flatness_index(bm, M.apply(x0), M.apply(z)).value - s0))
    record(7, "similarity invariance", dg <= 1e-6 and ds <= 2e-3,
           f"max gap change {dg:.2e}, max index change {ds:.2e} over 10 similarities")


SUITE = [
    ("disc", {"kind": "ball", "n": 2, "radius": 1.0}, [0.0, 0.0]),
    ("ball", {"kind": "ball", "n": 3, "radius": 1.0, "center": [0.2, 0.0, -0.3]}, [0.2, 0.0, -0.3]),
    ("ellipse 1.5x1", {"kind": "ellipse", "semi_axes": [1.5, 1.0]}, [0.0, 0.0]),
    ("ellipse 2x1 off-center", {"kind": "ellipse", "semi_axes": [2.0, 1.0]}, [0.4, 0.1]),
    ("prolate spheroid", {"kind": "ellipsoid", "n": 3, "semi_axes": [1.0, 1.0, 1.5]}, [0.0, 0.0, 0.0]),
    ("perturbed circle", {"kind": "perturbed_circle", "amplitude": 0.15, "mode": 4}, [0.0, 0.0]),
    ("perturbed sphere", {"kind": "perturbed_sphere", "n": 3, "amplitude": 0.1, "mode": 3}, [0.0, 0.0, 0.0]),
    ("off-center disc", {"kind": "ball", "n": 2, "radius": 1.0}, [0.3, 0.0]),
    ("off-center ball", {"kind": "ball", "n": 3, "radius": 1.0}, [0.0, 0.0, 0.4]),
]
_reports = {}


def suite_reports():
    if not _reports:
        for name, spec, x0 in SUITE:
            b = make_shape(spec)
            _reports[name] = (b, x0, check_theorem(b, x0, pipeline(b.n, max_points=8 if b.n == 2 else 4)))
    return _reports


def test_08_theorem_regression():
    lines, ok, points = [], True, 0
    for name, (b, x0, rep) in suite_reports().items():
        for rhs, eps, v in zip(rep.rhs_theorem, rep.budgets, rep.theorem):
            points += 1
            if rep.gap.value + eps < rhs or v.status == VIOLATED:
                ok = False
                lines.append(f"{name}: gap {rep.gap.value:.4g} + {eps:.2g} < rhs {rhs:.4g}")
        if rep.violated:
            ok = False
            lines.append(f"{name}: Violated verdict")
    record(8, "stability inequality", ok,
           f"{len(SUITE)} shapes, {points} touching points, no violations" if ok else "; ".join(lines))


def test_09_isoperimetric_chain():
    bad, ball_err = [], 0.0
    for name, (b, x0, rep) in suite_reports().items():
        if rep.chain.status != HOLDS:
            bad.append(f"{name}: {rep.chain.status} margin {rep.chain.margin:.3g}")
        if b.kind == "ball" and np.allclose(x0, b.center):
            lhs, rhs = isoperimetric_chain(b, x0)
            ball_err = max(ball_err, abs(lhs), abs(rhs))
    ok = not bad and ball_err <= 1e-12
    record(9, "isoperimetric chain", ok,
           f"lhs >= rhs within budget on {len(SUITE)} shapes; centered balls give |lhs|,|rhs| <= {ball_err:.1e}"
           if ok else "; ".join(bad) or f"ball residual {ball_err:.2e}")


def fd_laplacian(alpha, x, h):
    n = len(x)
    f = lambda y: float(kuran_h(alpha, y))
    out = -2 * n * f(x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out += f(x + e) + f(x - e)
    return out / h**2


def test_10_harmonicity():
    rng = np.random.default_rng(10)
    orders = []
    for _ in range(50):
        n = int(rng.integers(2, 6))
        alpha = rng.normal(size=n)
        u = rng.normal(size=n)
        x = alpha + u / np.linalg.norm(u) * rng.uniform(0.5, 2.0)
        L = [abs(fd_laplacian(alpha, x, h)) for h in (0.02, 0.01)]
        orders.append(math.log2(L[0] / L[1]))
    lo, hi = min(orders), max(orders)
    record(10, "harmonicity of h", abs(lo - 2) <= 0.3 and abs(hi - 2) <= 0.3,
           f"observed order in [{lo:.3f}, {hi:.3f}] at 50 points, n=2..5")


def test_11_poisson_normalization():
    errs = {n: abs(poisson_normalization(n)[0] - 1) for n in range(2, 7)}
    worst = max(errs.values())
    record(11, "Poisson normalization", worst <= 1e-8, f"max |value-1| {worst:.1e} for n=2..6")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
