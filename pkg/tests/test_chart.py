import math

import numpy as np
import pytest

from curvlab.chart import (ChartError, Domain2D, SurfaceChart, builtin_surface, chart_from_spec,
                           evaluate_jet, locate_point, scale_chart)
from curvlab.expr import ExpressionDomainError


def test_plane_jets():
    F = evaluate_jet(builtin_surface("plane", {}), (0.3, -0.2), 4)
    assert [c.partial(1, 0) for c in F] == [1, 0, 0]
    assert [c.partial(0, 1) for c in F] == [0, 1, 0]
    for a, b in [(2, 0), (1, 1), (0, 2), (3, 1), (0, 4)]:
        assert all(c.partial(a, b) == 0 for c in F)


def test_sphere_jets_at_equator():
    F = evaluate_jet(builtin_surface("sphere", {"R": 1}), (math.pi / 2, 0.0), 2)
    np.testing.assert_allclose([c.value for c in F], [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose([c.partial(1, 0) for c in F], [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose([c.partial(0, 1) for c in F], [0, 1, 0], atol=1e-15)


def test_counterexample_jets_at_origin():
    F = evaluate_jet(builtin_surface("counterexample", {"alpha": 0.3, "eps": 1e-4}), (0.0, 0.0), 2)
    w = F[2]
    assert w.partial(1, 0) == 0 and w.partial(0, 1) == 0
    assert w.partial(1, 1) == pytest.approx(1.0, abs=1e-15)
    assert w.partial(2, 0) == pytest.approx(0.0, abs=1e-15)
    assert w.partial(0, 2) == pytest.approx(0.0, abs=1e-15)


def test_sphere_through_origin():
    ch = builtin_surface("sphere", {"R": 1, "center": [0, 0, 1]})
    p = locate_point(ch)
    assert p is not None
    assert np.linalg.norm(ch.position(*p)) < 1e-12
    for axis in ("x", "y"):
        ch = builtin_surface("sphere", {"R": 1, "center": [0, 0, 1], "axis": axis})
        assert np.linalg.norm(ch.position(*ch.origin_param)) < 1e-12


def test_counterexample_domain():
    ch = builtin_surface("counterexample", {"alpha": 0.3, "eps": 0.01})
    assert ch.graph and ch.domain.kind == "disk" and ch.domain.radius == 0.5


@pytest.mark.parametrize("params", [{"alpha": 0.5, "eps": 0.1}, {"alpha": 0.0, "eps": 0.1},
                                    {"alpha": 0.3, "eps": 0.6}, {"alpha": 0.3, "eps": 0.0}])
def test_counterexample_parameter_ranges(params):
    with pytest.raises(ChartError):
        builtin_surface("counterexample", params)


def test_invalid_radius_and_name():
    with pytest.raises(ChartError):
        builtin_surface("sphere", {"R": -1})
    with pytest.raises(ChartError):
        builtin_surface("torus", {})


def test_immersion_check():
    with pytest.raises(ChartError):
        SurfaceChart(("u", "u", "0"), Domain2D.rectangle(-1, 1, -1, 1))


def test_domain_errors_reported():
    with pytest.raises(ExpressionDomainError):
        SurfaceChart(("u", "v", "log(u)"), Domain2D.rectangle(-1, 1, -1, 1))


def test_empty_domains():
    with pytest.raises(ChartError):
        Domain2D.rectangle(1, 0, 0, 1)
    with pytest.raises(ChartError):
        Domain2D.disk((0, 0), 0)


def test_periodic_wrap_and_boundary():
    cyl = builtin_surface("cylinder", {"R": 1})
    assert cyl.domain.contains(4.0, 0.0)        # wraps around the angle
    edges = cyl.domain.boundary_samples(10)
    assert all(np.allclose(np.abs(v), 10.0) for _, v in edges)


def test_chart_from_spec_forms():
    a = chart_from_spec({"builtin": "sphere", "params": {"R": 2}})
    b = chart_from_spec({"graph": "u^2-v^2", "label": "saddle"})
    c = chart_from_spec({"parametric": ["u", "v", "u*v"], "domain": {"kind": "disk", "radius": 0.5}})
    assert a.params["R"] == 2 and b.label == "saddle" and c.domain.kind == "disk"
    with pytest.raises(ChartError):
        chart_from_spec({"mesh": "x.obj"})


def test_scale_chart_keeps_origin():
    ch = scale_chart(builtin_surface("shifted_catenoid", {}), 3.0)
    assert np.linalg.norm(ch.position(*ch.origin_param)) < 1e-12


def test_domain_round_trip():
    for d in (Domain2D.rectangle(0, 1, -2, 2, periodic=(1.0, None)), Domain2D.disk((0.1, 0.2), 0.3)):
        assert Domain2D.from_dict(d.to_dict()) == d
