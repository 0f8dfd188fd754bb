import math

import numpy as np
import pytest

from pseudosphere.config import FlatnessConfig
from pseudosphere.constants import omega
from pseudosphere.errors import NoTouchingPoint
from pseudosphere.flatness import (approach_directions, cap_integral, flatness_integrand, index_prefactor,
                                   spherical_flatness_index, touching_indices)
from pseudosphere.geometry import RigidMotion, make_shape, outward_normal

FAST_3D = FlatnessConfig(dirs_per_ring=4)


def flat_cap_2d(t, r, R):
    return 2 * (t + r) * math.atan(R / t)


def flat_cap_3d(t, r, R):
    return 2 * math.pi * (t + r) * (1 - t / math.hypot(R, t))


def test_prefactor():
    assert index_prefactor(2, 1.0) == pytest.approx(1 / math.pi)
    assert index_prefactor(3, 2.0) == pytest.approx(2 / (3 * omega(3) * 2))


def test_integrand_pointwise():
    val = flatness_integrand([0, 1.0], np.array([[1.0, 0.0]]), [0, -2.0])
    # <(-1, 1), (0, 3)> / 2
    assert val[0] == pytest.approx(1.5)


@pytest.mark.parametrize("t, R", [(1e-2, 0.5), (1e-3, 0.1), (0.2, 0.05)])
def test_cap_integral_on_flat_line(t, R):
    cap = make_shape({"kind": "halfspace_cap", "n": 2})
    res = cap_integral(cap, [0, 0], R, [0, t], [0, -1.0])
    assert res.value == pytest.approx(flat_cap_2d(t, 1.0, R), rel=1e-10)


@pytest.mark.parametrize("t, R", [(1e-2, 0.5), (1e-3, 0.1)])
def test_cap_integral_on_flat_plane(t, R):
    cap = make_shape({"kind": "halfspace_cap", "n": 3})
    res = cap_integral(cap, [0, 0, 0], R, [0, 0, t], [0, 0, -0.5])
    assert res.value == pytest.approx(flat_cap_3d(t, 0.5, R), rel=1e-9)


def test_inner_limit_of_flat_cap_is_the_poisson_mass():
    # t -> 0 gives pi (t + r) -> pi r, i.e. the normalized index 1
    r = 1.0
    pref = index_prefactor(2, r)
    assert pref * flat_cap_2d(1e-9, r, 0.3) == pytest.approx(1.0, abs=1e-8)


def test_approach_directions_point_outward():
    b = make_shape({"kind": "ellipsoid", "n": 3, "semi_axes": [1.0, 1.0, 1.5]})
    z = np.array([1.0, 0, 0])
    nu = outward_normal(b, z)
    D = approach_directions(b, z, nu, np.zeros(3), FlatnessConfig())
    assert len(D) == 1 + 2 * 8
    assert np.linalg.norm(D, axis=1) == pytest.approx(np.ones(len(D)))
    cosines = np.sort(np.unique(np.round(D @ nu, 12)))
    assert cosines == pytest.approx(np.cos(np.radians([30, 15, 0])))
    D2 = approach_directions(make_shape({"kind": "ball", "n": 2}), np.array([1.0, 0]), np.array([1.0, 0]),
                             np.zeros(2), FlatnessConfig())
    assert len(D2) == 5


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_flat_index_2d(r):
    cap = make_shape({"kind": "halfspace_cap", "n": 2})
    est = spherical_flatness_index(cap, [0, -r], [0, 0])
    assert est.value == pytest.approx(1.0, abs=1e-3)
    assert est.converged
    assert est.table.shape == (len(est.R_values), 5, len(est.t_values))


def test_centered_disc_index():
    est = spherical_flatness_index(make_shape({"kind": "ball", "n": 2}), [0, 0], [0, 1.0])
    assert est.value == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("offset", [0.2, 0.8])
def test_off_center_disc_index(offset):
    b = make_shape({"kind": "ball", "n": 2, "radius": 1.3})
    x0 = np.array([offset * 1.3, 0.0])
    ts, (est,) = touching_indices(b, x0)
    assert ts.points[0] == pytest.approx([1.3, 0.0])
    assert est.value == pytest.approx(1.0, abs=1e-3)


def test_centered_ball_index_3d():
    est = spherical_flatness_index(make_shape({"kind": "ball", "n": 3}), [0, 0, 0], [0, 0.6, 0.8], FAST_3D)
    assert est.value == pytest.approx(1.0, abs=1e-3)


def test_ball_index_4d():
    b = make_shape({"kind": "ball", "n": 4, "radius": 1.0})
    est = spherical_flatness_index(b, [0.3, 0, 0, 0], [1.0, 0, 0, 0])
    assert est.value == pytest.approx(1.0, abs=1e-2)


def test_ellipse_touching_indices():
    ts, est = touching_indices(make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]}), [0, 0])
    assert len(est) == 2
    for e in est:
        assert e.value == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("profile", [
    {"type": "paraboloid", "curvature": 0.8},
    {"type": "gaussian", "amplitude": 0.3, "width": 0.5},
])
def test_smooth_bump_index_is_one(profile):
    patch = make_shape({"kind": "graph_patch", "n": 2, "profile": profile})
    est = spherical_flatness_index(patch, [0, -1.0], [0, 0])
    assert est.value == pytest.approx(1.0, abs=1e-3)


def test_rough_bump_is_flagged_and_stays_below_one():
    # psi = |y|^1.5 leaves S(R) = 1 - O(sqrt(R)); the ladder cannot resolve the limit
    patch = make_shape({"kind": "graph_patch", "n": 2, "profile": {"type": "power", "exponent": 1.5}})
    est = spherical_flatness_index(patch, [0, -1.0], [0, 0])
    assert est.value <= 1.0
    assert not est.converged
    assert "NonConvergent" in est.flags


def test_index_is_invariant_under_similarities(rng):
    b = make_shape({"kind": "ellipse", "semi_axes": [1.5, 1.0]})
    x0, z = np.array([0.0, 0.0]), np.array([0.0, 1.0])
    base = spherical_flatness_index(b, x0, z).value
    for _ in range(3):
        M = RigidMotion.random(2, rng)
        v = spherical_flatness_index(b.transformed(M), M.apply(x0), M.apply(z)).value
        assert v == pytest.approx(base, abs=1e-6)


def test_index_needs_a_boundary_point():
    b = make_shape({"kind": "ball", "n": 2})
    with pytest.raises(NoTouchingPoint):
        spherical_flatness_index(b, [0, 0], [0.5, 0])
    with pytest.raises(NoTouchingPoint):
        spherical_flatness_index(b, [1.0, 0], [1.0, 0])
