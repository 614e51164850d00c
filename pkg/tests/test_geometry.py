import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from conftest import random_points
from curvlab.chart import (ChartError, ambient_isometry, builtin_surface, scale_chart, swap_orientation)
from curvlab.geometry import (DegenerateMetricError, ScalarField, codazzi_residual, fundamental_forms,
                              gauss_residual, laplace_beltrami, simons_defect)

BUILTINS = [("plane", {}), ("sphere", {"R": 1}), ("sphere", {"R": 3, "center": [1, 2, 3]}),
            ("cylinder", {"R": 1}), ("cylinder", {"R": 2}), ("catenoid", {}), ("shifted_catenoid", {}),
            ("graph", {"expr": "0.3*u^2 - 0.2*u*v + sin(v)"}),
            ("counterexample", {"alpha": 0.3, "eps": 0.01})]


def test_sphere_closed_form(sphere):
    fd = fundamental_forms(sphere, random_points(sphere, 50))
    np.testing.assert_allclose(fd.A_norm2, 2, rtol=1e-12)
    np.testing.assert_allclose(np.abs(fd.H_scalar), 2, rtol=1e-12)
    np.testing.assert_allclose(fd.K, 1, rtol=1e-12)
    # outward normal, H_vec = Laplacian of position points inward
    np.testing.assert_allclose(fd.H_vec, -2 * fd.x, atol=1e-12)


def test_cylinder_closed_form(cylinder2):
    fd = fundamental_forms(cylinder2, random_points(cylinder2, 50))
    np.testing.assert_allclose(fd.A_norm2, 0.25, rtol=1e-12)
    np.testing.assert_allclose(np.abs(fd.H_scalar), 0.5, rtol=1e-12)
    np.testing.assert_allclose(fd.K, 0, atol=1e-14)


def test_catenoid_closed_form(catenoid):
    fd = fundamental_forms(catenoid, (0.0, 1.0))
    assert abs(float(fd.H_scalar)) < 1e-14
    assert float(fd.A_norm2) == pytest.approx(2 / math.cosh(1) ** 4, rel=1e-12)


def test_plane_zero(plane):
    fd = fundamental_forms(plane, random_points(plane, 10))
    assert np.all(fd.h == 0) and np.all(fd.K == 0) and np.all(fd.lap_A2 == 0)


@pytest.mark.parametrize("name, params", BUILTINS)
def test_gauss_codazzi_cauchy_schwarz(name, params):
    ch = builtin_surface(name, params)
    fd = fundamental_forms(ch, random_points(ch, 100, seed=3), derivatives=1)
    assert np.all(np.abs(gauss_residual(fd)) <= 1e-9 * (1 + np.abs(fd.K)))
    sym, div = codazzi_residual(fd)
    scale = 1 + fd.A_norm2 ** 1.5
    assert np.all(sym <= 1e-8 * scale) and np.all(div <= 1e-8 * scale)
    assert np.all(fd.A_norm2 >= fd.H_scalar ** 2 / 2 - 1e-12 * (1 + fd.A_norm2))
    np.testing.assert_allclose(fd.h, np.swapaxes(fd.h, -1, -2))


def test_laplace_beltrami_examples(plane, sphere):
    p = random_points(plane, 5)
    np.testing.assert_allclose(laplace_beltrami(plane, ScalarField.parametric("u^2+v^2"), p), 4, rtol=1e-13)
    u, v = random_points(sphere, 20)
    z = ScalarField.ambient_coordinate(2)
    np.testing.assert_allclose(laplace_beltrami(sphere, z, (u, v)), -2 * np.cos(u), atol=1e-12)
    np.testing.assert_allclose(laplace_beltrami(sphere, ScalarField.constant(3.0), (u, v)), 0, atol=1e-13)


def test_laplacian_of_position_is_mean_curvature(catenoid):
    """Delta x_k equals the k-th component of H_vec."""
    u, v = random_points(catenoid, 20)
    fd = fundamental_forms(catenoid, (u, v))
    for k in range(3):
        lap = laplace_beltrami(catenoid, ScalarField.ambient_coordinate(k), (u, v))
        np.testing.assert_allclose(lap, fd.H_vec[:, k], atol=1e-11)


def test_simons_examples(plane, sphere, catenoid):
    assert np.all(simons_defect(plane, random_points(plane, 5), c=7) == 0)
    np.testing.assert_allclose(simons_defect(sphere, random_points(sphere, 10)), 8, rtol=1e-10)
    assert float(simons_defect(catenoid, (0.0, 0.0))) >= -1e-8


def test_simons_identity_on_general_graph():
    """Delta|A|^2 = 2|nabla A|^2 + 2 h.hess H + 2 H trA^3 - 2|A|^4 for any surface."""
    ch = builtin_surface("graph", {"expr": "0.3*u^2 - 0.2*u*v + sin(v) + 0.1*u^3"})
    fd = fundamental_forms(ch, random_points(ch, 30))
    from curvlab.geometry import _contract_raised, nabla_A_norm2
    S = np.einsum("...ij,...jk->...ik", fd.g_inv, fd.h)
    trA3 = np.einsum("...ij,...jk,...ki->...", S, S, S)
    rhs = 2 * nabla_A_norm2(fd) + 2 * _contract_raised(fd.g_inv, fd.h, fd.hess_H) + 2 * fd.H_scalar * trA3 \
        - 2 * fd.A_norm2 ** 2
    np.testing.assert_allclose(fd.lap_A2, rhs, rtol=1e-9, atol=1e-10)


def test_degenerate_metric(sphere):
    with pytest.raises(DegenerateMetricError):
        fundamental_forms(sphere, (0.0, 0.3))       # the pole of the chart


# -- invariance properties -----------------------------------------------------------

QUANTITIES = ("A_norm2", "K", "grad_H_norm", "hess_H_norm")


def _quantities(fd):
    return {"H2": fd.H_scalar ** 2, **{q: getattr(fd, q) for q in QUANTITIES}}


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([0, 2, 5, 7]))
def test_rigid_motion_invariance(seed, which):
    name, params = BUILTINS[which]
    ch = builtin_surface(name, params)
    R = Rotation.random(random_state=seed).as_matrix()
    t = np.random.default_rng(seed).normal(size=3)
    moved = ambient_isometry(ch, R, t)
    p = random_points(ch, 10, seed=seed)
    a, b = _quantities(fundamental_forms(ch, p)), _quantities(fundamental_forms(moved, p))
    for k in a:
        np.testing.assert_allclose(b[k], a[k], rtol=1e-9, atol=1e-10 * (1 + np.max(np.abs(a[k]))))


def test_non_orthogonal_rejected(sphere):
    with pytest.raises(ChartError):
        ambient_isometry(sphere, np.diag([1, 1, 2]))


def test_rotated_plane_horizontal():
    ch = builtin_surface("graph", {"expr": "0.5*u"})
    n = fundamental_forms(ch, (0.0, 0.0)).n
    axis = np.cross(n, [0, 0, 1])
    R = Rotation.from_rotvec(axis / np.linalg.norm(axis) * math.acos(n[2])).as_matrix()
    fd = fundamental_forms(ambient_isometry(ch, R), random_points(ch, 10))
    np.testing.assert_allclose(np.abs(fd.n[:, 2]), 1, atol=1e-13)


@pytest.mark.parametrize("lam", [0.5, 3.0])
@pytest.mark.parametrize("which", [2, 5, 7, 8])
def test_scaling_covariance(lam, which):
    name, params = BUILTINS[which]
    ch = builtin_surface(name, params)
    p = random_points(ch, 10, seed=1)
    a, b = fundamental_forms(ch, p), fundamental_forms(scale_chart(ch, lam), p)
    for attr, power in [("A_norm2", -2), ("K", -2)]:
        np.testing.assert_allclose(getattr(b, attr), lam ** power * getattr(a, attr), rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(b.H_scalar ** 2, lam ** -2 * a.H_scalar ** 2, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(b.grad_H_norm ** 2, lam ** -4 * a.grad_H_norm ** 2, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(b.hess_H_norm ** 2, lam ** -6 * a.hess_H_norm ** 2, rtol=1e-9, atol=1e-14)


def test_normal_flip(catenoid):
    ch = builtin_surface("graph", {"expr": "0.3*u^2 + 0.1*v^3"})
    u, v = random_points(ch, 10)
    a = fundamental_forms(ch, (u, v))
    b = fundamental_forms(swap_orientation(ch), (v, u))
    np.testing.assert_allclose(b.H_scalar, -a.H_scalar, atol=1e-13)
    np.testing.assert_allclose(b.H_vec, a.H_vec, atol=1e-13)
    np.testing.assert_allclose(b.A_norm2, a.A_norm2, rtol=1e-12)
    np.testing.assert_allclose(b.K, a.K, rtol=1e-12, atol=1e-14)
