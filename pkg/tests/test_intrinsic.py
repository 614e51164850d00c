import math

import numpy as np
import pytest

from curvlab.chart import builtin_surface
from curvlab.geometry import ScalarField
from curvlab.intrinsic import (IntrinsicError, boundary_circle, boundary_gauss_bonnet, chord_bound_check,
                               gauss_bonnet_deficit, geodesic_residuals, inj_radius_lower_bound, intrinsic_ball,
                               intrinsic_integral, length_identity, polar_grid, shoot_geodesic)
from curvlab.resolution import DEFAULT

EQ = (math.pi / 2, 0.0)   # equator point of the standard sphere chart
CAP = 2 * math.pi * (1 - math.cos(1.0))


def test_plane_geodesic(plane):
    path = shoot_geodesic(plane, (0.0, 0.0), [1.0, 0.0], 2.0)
    x = path.positions(plane)
    assert np.linalg.norm(x[-1] - x[0]) == pytest.approx(2.0, abs=1e-12)
    assert not path.truncated


def test_sphere_geodesic_antipodal(sphere):
    path = shoot_geodesic(sphere, EQ, [0.0, 1.0], math.pi)
    x = path.positions(sphere)
    assert np.linalg.norm(x[-1] - x[0]) == pytest.approx(2.0, abs=1e-6)
    speed_err, acc = geodesic_residuals(sphere, path)
    assert speed_err < 1e-6 and acc < 1e-6


def test_oblique_sphere_geodesic(sphere):
    d = np.array([1.0, 1.0]) / math.sqrt(2)
    path = shoot_geodesic(sphere, EQ, d, 2.0)
    x = path.positions(sphere)
    assert np.linalg.norm(x[-1] - x[0]) == pytest.approx(2 * math.sin(1.0), abs=1e-7)
    assert max(geodesic_residuals(sphere, path)) < 1e-6


def test_cylinder_ruling(cylinder1):
    path = shoot_geodesic(cylinder1, (0.0, 0.0), [0.0, 1.0], 3.0)
    x = path.positions(cylinder1)
    assert np.linalg.norm(x[-1] - x[0]) == pytest.approx(3.0, abs=1e-9)


def test_geodesic_truncated_at_boundary(cx2):
    path = shoot_geodesic(cx2, (0.0, 0.0), [1.0, 0.0], 2.0)
    assert path.truncated and path.total_length < 0.6


def test_direction_must_be_unit(sphere):
    with pytest.raises(ValueError):
        shoot_geodesic(sphere, EQ, [0.0, 2.0], 1.0)


@pytest.mark.parametrize("name, params, base, J", [
    ("plane", {}, (0.0, 0.0), lambda r: r),
    ("sphere", {"R": 1}, EQ, np.sin),
    ("cylinder", {"R": 1}, (0.0, 0.0), lambda r: r),
])
def test_polar_grid_J(name, params, base, J):
    ch = builtin_surface(name, params)
    grid = polar_grid(ch, base, 2.0 if name != "sphere" else 1.5, 32, 32)
    r = grid.r
    np.testing.assert_allclose(grid.J, J(r)[:, None] * np.ones(32), atol=1e-6)
    _, _, J0, dJ0 = grid.sample([0.0])
    assert np.all(J0 == 0) and np.allclose(dJ0, 1, atol=1e-4)
    assert grid.jacobi_residual() <= 1e-4 * grid.r_max


def test_conjugate_point_refused(sphere):
    with pytest.raises(IntrinsicError):
        polar_grid(sphere, EQ, 3.5, 16, 16)
    polar_grid(sphere, EQ, 3.5, 16, 16, override=True)


def test_intrinsic_integrals(plane, sphere):
    assert intrinsic_ball(plane, (0, 0), 1.0).area == pytest.approx(math.pi, abs=1e-6)
    ball = intrinsic_ball(sphere, EQ, 1.0)
    assert ball.area == pytest.approx(CAP, abs=1e-6)
    assert intrinsic_integral(ball, ScalarField.curvature("A2")) == pytest.approx(2 * CAP, abs=2e-6)


def test_quadrature_convergence(sphere):
    """Doubling the polar resolution cuts the error at least threefold."""
    exact = math.pi * math.sin(1.0) ** 2     # integral of x over the cap around (1, 0, 0)
    x = ScalarField.ambient_coordinate(0)
    errs = [abs(intrinsic_integral(intrinsic_ball(sphere, EQ, 1.0, DEFAULT.scaled(k)), x) - exact)
            for k in (0.125, 0.25)]
    assert errs[1] * 3 <= errs[0]


def test_boundary_circle(plane, sphere, cylinder1):
    for ch, base, L, kg in [(plane, (0, 0), 2 * math.pi, 1.0),
                            (sphere, EQ, 2 * math.pi * math.sin(1.0), math.cos(1.0) / math.sin(1.0)),
                            (cylinder1, (0, 0), 2 * math.pi, 1.0)]:
        length, k = boundary_circle(intrinsic_ball(ch, base, 1.0))
        assert length == pytest.approx(L, abs=1e-6)
        np.testing.assert_allclose(k, kg, atol=1e-6)


def test_gauss_bonnet(plane, sphere, cylinder1):
    rec = gauss_bonnet_deficit(intrinsic_ball(sphere, EQ, 1.0))
    assert rec.passed
    assert rec.lhs == pytest.approx(CAP - math.pi, abs=1e-6)
    assert rec.rhs == pytest.approx(-2 * math.pi * (0.5 - (1 - math.cos(1.0))), abs=1e-6)
    for ch, s in [(plane, 1.0), (cylinder1, 0.5)]:
        rec = gauss_bonnet_deficit(intrinsic_ball(ch, (0, 0), s))
        assert abs(rec.lhs) < 1e-6 and abs(rec.rhs) < 1e-6 and rec.passed


@pytest.mark.parametrize("name, params, base, s", [
    ("sphere", {"R": 1}, EQ, 1.0), ("catenoid", {}, (0.0, 0.0), 0.8),
    ("counterexample", {"alpha": 0.3, "eps": 0.01}, (0.0, 0.0), 0.3), ("cylinder", {"R": 2}, (0, 0), 2.0)])
def test_boundary_gauss_bonnet_and_length(name, params, base, s):
    ball = intrinsic_ball(builtin_surface(name, params), base, s)
    assert boundary_gauss_bonnet(ball).passed
    assert length_identity(ball).passed


def test_injectivity_bounds(plane, sphere, cylinder1):
    assert inj_radius_lower_bound(plane, (0, 0), 10.0) == pytest.approx(10.0)
    assert inj_radius_lower_bound(sphere, EQ, 4.0) == pytest.approx(math.pi, abs=1e-2)
    assert inj_radius_lower_bound(cylinder1, (0, 0), 4.0) == pytest.approx(math.pi, abs=1e-1)


def test_chord_bound(plane, sphere):
    path = shoot_geodesic(plane, (0, 0), [0.6, 0.8], 1.7)
    rec = chord_bound_check(path, plane)
    assert rec.passed and rec.lhs == pytest.approx(1.7) and rec.rhs == pytest.approx(1.7)
    rec = chord_bound_check(shoot_geodesic(sphere, EQ, [0, 1], 0.5), sphere)
    assert rec.passed
    assert rec.lhs == pytest.approx(2 * math.sin(0.25), abs=1e-8)
    assert rec.rhs == pytest.approx(0.5 * (1 - math.sqrt(2) * 0.5), abs=1e-8)
    rec = chord_bound_check(shoot_geodesic(sphere, EQ, [0, 1], math.pi / 2), sphere)
    assert rec.verdict == "vacuous"
