import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudosphere.config import QuadConfig, SearchConfig
from pseudosphere.errors import AlphaNotExterior, CenterNotInterior, InvalidShape, SingularPoint
from pseudosphere.geometry import RigidMotion, make_shape
from pseudosphere.kuran import (boundary_mean_kuran, evaluate, grid_oracle_scan, kuran_gap, kuran_h,
                                kuran_k)

from conftest import SEARCH_3D


def fd_laplacian(f, x, h):
    n = len(x)
    out = -2 * n * f(x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out += f(x + e) + f(x - e)
    return out / h**2


def ball_mean_oracle(alpha, x0):
    """Mean of k_{alpha - x0}(x - x0) over the unit sphere: the value at the center."""
    alpha, x0 = np.asarray(alpha, float), np.asarray(x0, float)
    return float(kuran_k(alpha - x0, -x0))


def off_center_gap_oracle(x0, n=2, samples=400_000, seed=0):
    """Dense scan of |k_{alpha - x0}(-x0)| over |alpha| in [1, 40]."""
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((samples, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    rad = np.exp(rng.uniform(0, np.log(40), samples))
    A = np.vstack([U * rad[:, None], U])  # include the sphere itself (the sup is approached there)
    x0 = np.asarray(x0, float)
    a = A - x0
    k = 1 + np.linalg.norm(a, axis=1) ** (n - 2) * (x0 @ x0 - np.sum(a * a, axis=1)) / np.linalg.norm(A, axis=1) ** n
    return float(np.max(np.abs(k)))


# the kernel itself

@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_k_vanishes_at_origin(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        alpha = rng.normal(size=n)
        assert kuran_k(alpha, np.zeros(n)) == pytest.approx(0.0, abs=1e-14)


def test_closed_form_values():
    # n = 2: h = (|x|^2 - |alpha|^2) / |x - alpha|^2
    assert kuran_h([2.0, 0.0], [1.0, 0.0]) == pytest.approx((1 - 4) / 1)
    # n = 3: h = |alpha| (|x|^2 - |alpha|^2) / |x - alpha|^3
    assert kuran_h([0, 0, 2.0], [0, 1.0, 0]) == pytest.approx(2 * (1 - 4) / 5**1.5)
    ev = evaluate([2.0, 0.0], [1.0, 0.0])
    assert ev.k == pytest.approx(1 + ev.h)


def test_k_decays_as_alpha_recedes():
    x = np.array([0.3, -0.2, 0.5])
    d = np.array([1.0, 2.0, -0.5]) / np.linalg.norm([1.0, 2.0, -0.5])
    vals = [abs(kuran_k(s * d, x)) for s in (10, 100, 1000, 10000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_singular_inputs():
    with pytest.raises(SingularPoint):
        kuran_h([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(SingularPoint):
        kuran_h([1.0, 0.0], [1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_h_is_harmonic_away_from_alpha(n, seed):
    rng = np.random.default_rng(seed)
    alpha = rng.normal(size=n)
    x = alpha + rng.normal(size=n)
    x = alpha + (x - alpha) / np.linalg.norm(x - alpha) * rng.uniform(0.5, 2.0)
    f = lambda y: float(kuran_h(alpha, y))
    # the pure second differences are large; their sum cancels to the O(h^2) stencil error
    h = 1e-3
    d2 = [(f(x + h * e) - 2 * f(x) + f(x - h * e)) / h**2 for e in np.eye(n)]
    assert abs(fd_laplacian(f, x, h)) <= 2e-3 * sum(abs(v) for v in d2)


# boundary means

@pytest.mark.parametrize("n", [2, 3, 4])
def test_mean_over_centered_sphere_is_zero(n):
    b = make_shape({"kind": "ball", "n": n, "radius": 1.0})
    for s in (1.01, 1.5, 4.0):
        alpha = np.full(n, s / np.sqrt(n))
        res = boundary_mean_kuran(b, np.zeros(n), alpha)
        assert abs(res.value) <= max(1e-9, 3 * res.error_estimate)


@pytest.mark.parametrize("alpha", [[1.02, 0.1], [-1.5, 0.7], [0.0, -3.0]])
def test_mean_over_off_center_sphere_matches_value_at_center(alpha):
    b = make_shape({"kind": "ball", "n": 2})
    x0 = [0.3, -0.1]
    res = boundary_mean_kuran(b, x0, alpha)
    assert res.value == pytest.approx(ball_mean_oracle(alpha, x0), abs=1e-9)


def test_off_center_mean_against_brute_force():
    b = make_shape({"kind": "ball", "n": 2})
    x0, alpha = np.array([0.3, 0.0]), np.array([2.0, 0.0])
    th = (np.arange(1_000_000) + 0.5) * 2 * np.pi / 1_000_000
    X = np.column_stack([np.cos(th), np.sin(th)])
    brute = float(np.mean(kuran_k(alpha - x0, X - x0)))
    assert brute != pytest.approx(0.0, abs=1e-3)
    assert boundary_mean_kuran(b, x0, alpha).value == pytest.approx(brute, abs=1e-10)


def test_mean_fades_as_the_pole_recedes():
    b = make_shape({"kind": "ball", "n": 2})
    x0 = [0.3, 0.0]
    vals = [abs(boundary_mean_kuran(b, x0, [R, 0.0]).value) for R in (10.0, 100.0, 1000.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == pytest.approx(abs(ball_mean_oracle([1000.0, 0.0], x0)), abs=1e-12)
    assert vals[2] < 1e-3


def test_mean_off_center_3d():
    b = make_shape({"kind": "ball", "n": 3})
    x0, alpha = [0.2, 0.1, -0.3], [0.5, 0.9, 0.2]
    res = boundary_mean_kuran(b, x0, alpha)
    assert res.value == pytest.approx(ball_mean_oracle(alpha, x0), abs=1e-8)


def test_mean_requires_exterior_alpha():
    b = make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]})
    with pytest.raises(AlphaNotExterior):
        boundary_mean_kuran(b, [0, 0], [0.5, 0.5])
    with pytest.raises(InvalidShape):
        boundary_mean_kuran(make_shape({"kind": "halfspace_cap", "n": 2}), [0, -1.0], [0, 1.0])


# the gap

def test_centered_disc_has_zero_gap():
    g = kuran_gap(make_shape({"kind": "ball", "n": 2, "radius": 2.0}), [0, 0])
    assert g.value <= 3 * g.error_estimate
    assert g.error_estimate < 1e-10


def test_centered_ball_has_zero_gap_3d():
    g = kuran_gap(make_shape({"kind": "ball", "n": 3}), [0, 0, 0], SEARCH_3D)
    assert g.value <= 3 * g.error_estimate < 1e-10


def test_off_center_disc_gap_matches_closed_form():
    x0 = [0.3, 0.0]
    g = kuran_gap(make_shape({"kind": "ball", "n": 2}), x0)
    target = off_center_gap_oracle(x0)
    assert target == pytest.approx(0.6, abs=1e-6)
    # a lower estimate whose budget reaches the sup
    assert g.value <= target + 1e-9
    assert target - g.value <= g.error_estimate
    assert g.error_estimate < 5e-3
    assert g.delta_limit == pytest.approx(target, abs=2e-3)
    # the maximizer sits just outside the boundary point opposite to x0
    assert g.argmax_alpha == pytest.approx([-1.0, 0.0], abs=0.02)


def test_off_center_ball_gap_3d():
    x0 = [0.0, 0.0, 0.4]
    g = kuran_gap(make_shape({"kind": "ball", "n": 3}), x0, SEARCH_3D)
    target = off_center_gap_oracle(x0, n=3)
    assert g.value <= target + 1e-9
    assert target - g.value <= g.error_estimate


def test_gap_is_invariant_under_similarities(rng):
    b = make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]})
    x0 = np.array([0.2, -0.1])
    base = kuran_gap(b, x0)
    for _ in range(2):
        M = RigidMotion.random(2, rng)
        g = kuran_gap(b.transformed(M), M.apply(x0))
        assert g.value == pytest.approx(base.value, rel=1e-6)


def test_gap_on_discrete_boundary_is_close_to_analytic():
    spec = {"kind": "ball", "n": 2, "representation": "discrete", "elements": 512, "curved": True}
    g = kuran_gap(make_shape(spec), [0.3, 0.0], SearchConfig(seeds_per_shell=16, starts=2))
    assert g.value == pytest.approx(0.6, abs=5e-3)


def test_grid_scan_does_not_beat_the_search_by_more_than_budget():
    b = make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]})
    g = kuran_gap(b, [0, 0])
    best, arg = grid_oracle_scan(b, [0, 0], size=16, quad=QuadConfig(panels=16, azimuth=32))
    assert arg is not None
    assert best <= g.value + g.error_estimate


def test_gap_requires_interior_center():
    b = make_shape({"kind": "ball", "n": 2})
    with pytest.raises(CenterNotInterior):
        kuran_gap(b, [2.0, 0.0])
