import math

import numpy as np
import pytest

from conftest import SPHERE_BASE
from curvlab.chart import builtin_surface, scale_chart
from curvlab.geometry import ScalarField
from curvlab.integrals import (ExtrinsicRegion, QuadratureError, density_ratio, extrinsic_integral,
                               norm_integrands, norm_report, ratio_bound_check)
from curvlab.intrinsic import intrinsic_ball
from curvlab.resolution import DEFAULT, Resolution

ONE = ScalarField.constant(1.0)


def test_plane_disk(plane):
    assert extrinsic_integral(ExtrinsicRegion(plane, 1.0), ONE) == pytest.approx(math.pi, abs=1e-10)


@pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
def test_sphere_cap(sphere_o, r):
    val, err = extrinsic_integral(ExtrinsicRegion(sphere_o, r), ONE, with_error=True)
    assert val == pytest.approx(math.pi * r * r, abs=1e-8)
    assert err < 1e-6


def test_annulus(sphere_o):
    val = extrinsic_integral(ExtrinsicRegion(sphere_o, 0.9, inner_radius=0.3), ONE)
    assert val == pytest.approx(math.pi * (0.81 - 0.09), abs=1e-8)


def test_thin_annulus(sphere_o):
    val = extrinsic_integral(ExtrinsicRegion(sphere_o, 0.505, inner_radius=0.495), ONE)
    assert val == pytest.approx(math.pi * (0.505 ** 2 - 0.495 ** 2), rel=1e-8)


def test_off_center_ball(plane):
    reg = ExtrinsicRegion(plane, 0.5, center=(1.0, 2.0, 0.0))
    assert extrinsic_integral(reg, ScalarField.parametric("u")) == pytest.approx(math.pi / 4, abs=1e-10)


def test_whole_chart(cx2):
    assert extrinsic_integral(ExtrinsicRegion(builtin_surface("graph", {"expr": "0"}), None), ONE) \
        == pytest.approx(16.0, abs=1e-12)
    area = extrinsic_integral(ExtrinsicRegion(cx2), ONE)
    assert math.pi * 0.25 < area < math.pi * 0.25 * 1.1


def test_density(plane, sphere_o, shifted_catenoid):
    assert density_ratio(plane, ONE, 0.7) == pytest.approx(math.pi, abs=1e-10)
    for r in (0.5, 1.0, 1.5):
        assert density_ratio(sphere_o, ONE, r) == pytest.approx(math.pi, abs=1e-6)
    d = [density_ratio(shifted_catenoid, ONE, r) for r in np.linspace(0.1, 1.0, 10)]
    assert np.all(np.diff(d) >= -1e-4)
    assert d[0] >= math.pi - 1e-4


def test_density_requires_center(catenoid):
    with pytest.raises((ValueError, TypeError)):
        density_ratio(catenoid, ONE, 0.5)


def test_nesting_monotone(cx2):
    f = ScalarField.curvature("A2")
    vals = [extrinsic_integral(ExtrinsicRegion(cx2, r), f) for r in (0.1, 0.2, 0.3, 0.4)]
    assert np.all(np.diff(vals) >= -1e-9)


def test_boundary_layer_convergence(sphere_o):
    """Halving the cut resolution moves the result by at most twice the error estimate."""
    f = ScalarField.ambient_coordinate(2)
    a, ea = extrinsic_integral(ExtrinsicRegion(sphere_o, 1.2), f, with_error=True)
    fine = Resolution(cut_resolution=DEFAULT.cut_resolution / 2)
    b, eb = extrinsic_integral(ExtrinsicRegion(sphere_o, 1.2, resolution=fine), f, with_error=True)
    assert abs(a - b) <= 2 * max(ea, eb)
    # z = |x|^2 / 2 on this sphere: int_{B_r} z = pi r^4 / 4
    assert a == pytest.approx(math.pi * 1.2 ** 4 / 4, abs=1e-8)


def test_budget_error(plane):
    with pytest.raises(QuadratureError):
        ExtrinsicRegion(plane, 1.0, resolution=Resolution(max_cells=50)).build_cells()


def test_cylinder_norms(cylinder2):
    nr = norm_report(cylinder2, intrinsic_ball(cylinder2, (0, 0), 1.0), 3.0, 1.0)
    assert nr.starred_W1p == pytest.approx(math.pi / 8, abs=1e-6)
    assert nr.total_curvature == pytest.approx(math.pi / 4, abs=1e-6)


def test_sphere_norms(sphere):
    nr = norm_report(sphere, intrinsic_ball(sphere, (math.pi / 2, 0.0), 1.0), 2.0, 1.0)
    cap = 2 * math.pi * (1 - math.cos(1.0))
    assert nr.starred_W22 == pytest.approx(4 * cap, abs=1e-5)
    assert nr.L2_gradH < 1e-20 and nr.L2_hessH < 1e-20


def test_plane_norms(plane):
    for region in (ExtrinsicRegion(plane, 1.0), intrinsic_ball(plane, (0, 0), 1.0)):
        nr = norm_report(plane, region, 3.0, 1.0)
        assert nr.Lp_H == nr.L2_H == nr.starred_W1p == nr.starred_W22 == 0


def test_starred_combinations(cx2):
    nr = norm_report(cx2, ExtrinsicRegion(cx2, 0.3), 3.0, 0.4)
    assert nr.starred_W1p == pytest.approx(0.4 * nr.Lp_H + 0.4 ** 4 * nr.Lp_gradH, rel=1e-15)
    assert nr.starred_W22 == pytest.approx(nr.L2_H + 0.16 * nr.L2_gradH + 0.4 ** 4 * nr.L2_hessH, rel=1e-15)
    assert min(nr.Lp_H, nr.L2_H, nr.L2_gradH, nr.L2_hessH, nr.total_curvature, nr.area) >= 0
    # Hoelder: int H^2 <= (int |H|^p)^{2/p} area^{1-2/p}
    assert nr.L2_H <= nr.Lp_H ** (2 / 3) * nr.area ** (1 / 3) * (1 + 1e-9)


def test_norm_report_guards(plane):
    with pytest.raises(ValueError):
        norm_report(plane, ExtrinsicRegion(plane, 1.0), 1.5, 1.0)
    with pytest.raises(ValueError):
        norm_report(plane, ExtrinsicRegion(plane, 1.0), 2.0, 0.0)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_starred_scale_invariance(cx2, lam):
    base = norm_report(cx2, ExtrinsicRegion(cx2, 0.3), 3.0, 0.3)
    ch = scale_chart(cx2, lam)
    scaled = norm_report(ch, ExtrinsicRegion(ch, 0.3 * lam), 3.0, 0.3 * lam)
    for attr in ("starred_W1p", "starred_W22", "total_curvature"):
        assert getattr(scaled, attr) == pytest.approx(getattr(base, attr), rel=1e-6)


def test_ratio_bound(plane, sphere_o):
    rec = ratio_bound_check(plane, ONE, 0.5)
    assert rec.passed and rec.lhs == pytest.approx(math.pi / 2) and rec.rhs == pytest.approx(math.pi)
    rec = ratio_bound_check(sphere_o, ONE, 0.5)
    assert rec.passed and rec.rhs == pytest.approx(2 * math.pi, abs=1e-6)
    rec = ratio_bound_check(sphere_o, ScalarField.curvature("A2"), 0.25)
    assert rec.passed and rec.lhs == pytest.approx(2 * math.pi * 0.25, abs=1e-6)


def test_ratio_bound_vacuous_with_boundary(cx2):
    assert ratio_bound_check(cx2, ONE, 0.5).verdict == "vacuous"
