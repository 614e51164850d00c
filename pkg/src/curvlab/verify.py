"""Executable checks of the mean value identities, the curvature inequalities and the probes.

Every check returns :class:`VerificationRecord` values (probes return
:class:`ProbeRecord`).  Inequality records carry the slack as residual;
checks whose hypotheses fail on the given input return ``vacuous``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .chart import ChartError, SurfaceChart, builtin_surface, locate_point
from .geometry import ScalarField, fundamental_forms, nabla_A_norm2, simons_terms
from .integrals import (ExtrinsicRegion, Points, as_integrand, boundary_inside_ball, norm_integrands,
                        norm_report)
from .intrinsic import (IntrinsicBall, IntrinsicError, gauss_bonnet_deficit, inj_radius_lower_bound,
                        intrinsic_ball)
from .records import ProbeRecord, VerificationRecord
from .resolution import DEFAULT, Resolution

IDENTITY_TOL = 1e-3
INEQUALITY_TOL = 1e-3
ORIGIN = (0.0, 0.0, 0.0)


def origin_param(chart: SurfaceChart):
    """Parameter point of the ambient origin; raises if the surface misses it."""
    p = locate_point(chart, ORIGIN)
    if p is None or np.linalg.norm(chart.position(*p)) > 1e-9:
        raise ChartError(f"surface {chart.label!r} does not pass through the origin")
    return p


def _scale(*xs):
    return max(max(abs(float(x)) for x in xs), 1e-300)


# ---------------------------------------------------------------------------
# integrand builders


def _field_jets1(field: ScalarField, pts: Points):
    """Values and ambient tangential gradients of ``field`` at ``pts``."""
    f = field.jets(pts.chart, pts.u, pts.v, 1)
    fd = pts.fd(0)
    d = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
    raised = np.einsum("...ij,...j->...i", fd.g_inv, d)
    grad = raised[..., :1] * fd.Fu + raised[..., 1:] * fd.Fv
    return f.value, grad


def _normal_weight(pts: Points):
    """``|x^N|^2 / |x|^4``."""
    fd = pts.fd(0)
    x = fd.x
    xn = np.sum(x * fd.n, -1)
    return xn ** 2 / np.sum(x * x, -1) ** 2


def _mvp_integrands(field: ScalarField, which: int):
    """Component ``which`` of ``(f, f |x^N|^2/|x|^4, x.(grad f + f H_vec))``."""
    def fn(pts):
        if which == 0:
            return as_integrand(field)(pts)
        if which == 1:
            return field.values(pts.chart, pts.u, pts.v) * _normal_weight(pts)
        f, grad = _field_jets1(field, pts)
        fd = pts.fd(0)
        return np.sum(fd.x * (grad + f[..., None] * fd.H_vec), -1)
    return fn


def _noise_floor(f_integral, r):
    """Absolute refinement floor for derived integrands that may vanish up to roundoff."""
    return 1e-10 * max(abs(float(f_integral)), 1e-300) * max(1.0, r)


def _region(chart, r, inner=None, res=DEFAULT):
    return ExtrinsicRegion(chart, r, ORIGIN, inner, res)


# ---------------------------------------------------------------------------
# mean value property


def check_mvp_derivative(chart, field: ScalarField, r: float, dr: Optional[float] = None,
                         resolution: Resolution = DEFAULT, tolerance: float = IDENTITY_TOL):
    """Centered-difference form of the monotonicity identity at radius ``r``.

    ``d/dr (r^-2 int_{B_r} f) = d/dr int_{B_r} f |x^N|^2/|x|^4 + r^-3 int_{B_r} x.(grad f + f H)``.
    The weighted term is differenced over the thin annulus ``B_{r+dr} \\ B_{r-dr}``
    (default ``dr = r/100``); the tolerance carries an ``O(dr^2)`` truncation term.
    """
    dr = 0.01 * r if dr is None else float(dr)
    if not 0 < dr < r:
        raise ValueError("need 0 < dr < r")
    origin_param(chart)
    f_only = _mvp_integrands(field, 0)
    Ip, ep = _region(chart, r + dr, res=resolution).integrate(f_only)
    Im, em = _region(chart, r - dr, res=resolution).integrate(f_only)
    lhs = ((Ip[0] / (r + dr) ** 2) - (Im[0] / (r - dr) ** 2)) / (2 * dr)
    atol = _noise_floor(Ip[0], r)
    Ia, ea = _region(chart, r + dr, inner=r - dr, res=resolution).integrate(_mvp_integrands(field, 1), atol=atol)
    Ib, eb = _region(chart, r, res=resolution).integrate(_mvp_integrands(field, 2), atol=atol)
    weighted = Ia[0] / (2 * dr)
    flux = Ib[0] / r ** 3
    rhs = weighted + flux
    quad = (ep[0] + em[0]) / (2 * dr * (r - dr) ** 2) + ea[0] / (2 * dr) + eb[0] / r ** 3
    tol = (tolerance + (dr / r) ** 2) * _scale(lhs, weighted, flux, Ip[0] / (r + dr) ** 2 / r) + quad
    return VerificationRecord.identity("mvp_derivative", lhs, rhs, tol, r=r, dr=dr, weighted_term=weighted,
                                       flux_term=flux, quadrature_error=quad)


def check_mvp_integral(chart, field: ScalarField, s: float, t: float, resolution: Resolution = DEFAULT,
                       tolerance: float = IDENTITY_TOL):
    """Integrated identity between radii ``s < t``.

    ``t^-2 int_{B_t} f - s^-2 int_{B_s} f = int_{B_t \\ B_s} f |x^N|^2/|x|^4 + int_s^t r^-3 V(r) dr``
    with ``V(r) = int_{B_r} x.(grad f + f H)``; the outer ``dr`` integral is composite Simpson
    over ``resolution.r_panels`` panels, each node an independent 2-D integral.
    """
    if not 0 < s < t:
        raise ValueError("need 0 < s < t")
    origin_param(chart)
    It, et = _region(chart, t, res=resolution).integrate(field)
    Is, es = _region(chart, s, res=resolution).integrate(field)
    lhs = It[0] / t ** 2 - Is[0] / s ** 2
    atol = _noise_floor(It[0], t)
    Ia, ea = _region(chart, t, inner=s, res=resolution).integrate(_mvp_integrands(field, 1), atol=atol)
    flux = _mvp_integrands(field, 2)
    radii = np.linspace(s, t, resolution.r_panels + 1)
    V, eV = [], []
    for r in radii:
        val, err = _region(chart, r, res=resolution).integrate(flux, atol=atol)
        V.append(val[0])
        eV.append(err[0])
    V = np.array(V)
    radial = float(simpson(V / radii ** 3, x=radii))
    rhs = Ia[0] + radial
    quad = et[0] / t ** 2 + es[0] / s ** 2 + ea[0] + (t - s) * max(eV) / s ** 3
    tol = tolerance * _scale(It[0] / t ** 2, Is[0] / s ** 2, Ia[0], radial) + quad
    return VerificationRecord.identity("mvp_integral", lhs, rhs, tol, s=s, t=t, weighted_term=float(Ia[0]),
                                       radial_term=radial, r_panels=resolution.r_panels, quadrature_error=quad)


def check_gmean_inequalities(chart, field: ScalarField, r: float, s: float, t: float, dr: Optional[float] = None,
                             resolution: Resolution = DEFAULT, tolerance: float = INEQUALITY_TOL):
    """The two mean value inequalities, as a pair of records.

    First: ``d/dr(r^-2 int_{B_r} f) >= r^-3 int f x.H + 1/2 r^-3 int (r^2 - |x|^2) Lap f`` at ``r``.
    Second: ``t^-2 int_{B_t} f - s^-2 int_{B_s} f >= 1/2 int_{B_t} (f x.H + x.grad f)(r_s^-2 - t^-2)``
    with ``r_s = max(|x|, s)``; the region is split at ``|x| = s`` where the weight has a kink.
    """
    dr = 0.01 * r if dr is None else float(dr)
    origin_param(chart)

    def lap_terms(rr):
        def fn(pts):
            f = field.jets(pts.chart, pts.u, pts.v, 2)
            fd = pts.fd(0)
            d1 = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
            d2 = np.stack([np.stack([f.partial(2, 0), f.partial(1, 1)], -1),
                           np.stack([f.partial(1, 1), f.partial(0, 2)], -1)], -2)
            hess = d2 - np.einsum("...kij,...k->...ij", fd.christoffels, d1)
            lap = np.einsum("...ij,...ij->...", fd.g_inv, hess)
            x = fd.x
            xH = np.sum(x * fd.H_vec, -1)
            return np.stack([f.value * xH, (rr ** 2 - np.sum(x * x, -1)) * lap])
        return fn

    f_only = as_integrand(field)
    Ip, ep = _region(chart, r + dr, res=resolution).integrate(f_only)
    Im, em = _region(chart, r - dr, res=resolution).integrate(f_only)
    lhs1 = ((Ip[0] / (r + dr) ** 2) - (Im[0] / (r - dr) ** 2)) / (2 * dr)
    I1, e1 = _region(chart, r, res=resolution).integrate(lap_terms(r), atol=_noise_floor(Ip[0], r))
    rhs1 = (I1[0] + 0.5 * I1[1]) / r ** 3
    quad1 = (ep[0] + em[0]) / (2 * dr * (r - dr) ** 2) + (e1[0] + e1[1]) / r ** 3
    rec1 = VerificationRecord.inequality("gmean_derivative", lhs1, rhs1, ">=",
                                         (tolerance + (dr / r) ** 2)
                                         * _scale(lhs1, rhs1, I1[0] / r ** 3, I1[1] / r ** 3, Ip[0] / (r + dr) ** 2 / r) + quad1,
                                         r=r, dr=dr)

    g = _mvp_integrands(field, 2)

    It, et = _region(chart, t, res=resolution).integrate(f_only)
    Is, es = _region(chart, s, res=resolution).integrate(f_only)
    lhs2 = It[0] / t ** 2 - Is[0] / s ** 2
    atol = _noise_floor(It[0], t)
    Iin, ein = _region(chart, s, res=resolution).integrate(g, atol=atol)
    Iout, eout = _region(chart, t, inner=s, res=resolution).integrate(
        lambda pts: g(pts) * (1.0 / np.sum(pts.x ** 2, -1) - 1.0 / t ** 2), atol=atol / t ** 2)
    rhs2 = 0.5 * (Iin[0] * (1.0 / s ** 2 - 1.0 / t ** 2) + Iout[0])
    quad2 = et[0] / t ** 2 + es[0] / s ** 2 + ein[0] / s ** 2 + eout[0]
    rec2 = VerificationRecord.inequality("gmean_integral", lhs2, rhs2, ">=",
                                         tolerance * _scale(lhs2, rhs2, It[0] / t ** 2, Is[0] / s ** 2) + quad2,
                                         s=s, t=t)
    return rec1, rec2


# ---------------------------------------------------------------------------
# mean value inequality


def _samples_in_ball(chart, r=1.0, n=60):
    u0, u1, v0, v1 = chart.domain.bbox
    t = (np.arange(n) + 0.5) / n
    U, V = np.meshgrid(u0 + (u1 - u0) * t, v0 + (v1 - v0) * t, indexing="ij")
    U, V = U.ravel(), V.ravel()
    keep = chart.domain.contains(U, V) & (np.linalg.norm(chart.position(U, V), axis=-1) < r)
    return U[keep], V[keep]


def check_mvi(chart, field: ScalarField, lambda1: float = 0.0, h_field: Optional[ScalarField] = None,
              c2: float = 0.0, c3: float = 0.0, alpha: float = 0.0, resolution: Resolution = DEFAULT,
              tolerance: float = INEQUALITY_TOL, n_radii: int = 10):
    """Mean value inequality at the origin.

    ``f(0) <= pi^-1 e^{c1} int_{B_1} f + pi^-1 (c2/(1-alpha) + c3) e^{c1}`` with
    ``c1 = sup_{B_1} |H| + lambda1/2``.  The hypotheses ``Lap f >= -lambda1 f - h`` and
    ``1/2 r^-2 int_{B_r} (r^2 - |x|^2) h <= c2 r^-alpha + c3`` are checked by sampling;
    a failed hypothesis makes the record vacuous.
    """
    rid = "mvi"
    h_field = h_field if h_field is not None else ScalarField.constant(0.0)
    p0 = origin_param(chart)
    if boundary_inside_ball(chart, 1.0):
        return VerificationRecord.vacuous(rid, "surface boundary meets B_1")
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    u, v = _samples_in_ball(chart)
    fd = fundamental_forms(chart, (u, v), derivatives=0, strict=False)
    f = field.jets(chart, u, v, 2)
    d1 = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
    d2 = np.stack([np.stack([f.partial(2, 0), f.partial(1, 1)], -1),
                   np.stack([f.partial(1, 1), f.partial(0, 2)], -1)], -2)
    lap = np.einsum("...ij,...ij->...", fd.g_inv, d2 - np.einsum("...kij,...k->...ij", fd.christoffels, d1))
    hv = h_field.values(chart, u, v)
    gap = lap + lambda1 * f.value + hv
    scale_pt = 1.0 + np.abs(lap) + np.abs(lambda1 * f.value) + np.abs(hv)
    if np.any(gap < -1e-8 * scale_pt):
        k = int(np.argmin(gap / scale_pt))
        return VerificationRecord.vacuous(rid, "Laplacian hypothesis fails", worst_u=float(u[k]),
                                          worst_v=float(v[k]), worst_gap=float(gap[k]))
    h_int = as_integrand(h_field)
    worst_h = -math.inf
    for r in np.linspace(1.0 / n_radii, 1.0, n_radii):
        val, _ = _region(chart, r, res=resolution).integrate(
            lambda pts: (r ** 2 - np.sum(pts.x ** 2, -1)) * h_int(pts), atol=1e-12 * r ** 4)
        lhs_h = 0.5 * val[0] / r ** 2
        bound_h = c2 * r ** (-alpha) + c3
        worst_h = max(worst_h, lhs_h - bound_h)
        if lhs_h > bound_h + 1e-9 * max(1.0, abs(bound_h)):
            return VerificationRecord.vacuous(rid, "weighted h bound fails", radius=float(r),
                                              weighted_h=float(lhs_h), bound=float(bound_h))
    supH = float(np.max(np.abs(fd.H_scalar))) if len(u) else 0.0
    c1 = supH + lambda1 / 2.0
    I1, e1 = _region(chart, 1.0, res=resolution).integrate(field)
    f0 = float(field.values(chart, np.array([p0[0]]), np.array([p0[1]]))[0])
    bound = math.exp(c1) / math.pi * (I1[0] + c2 / (1.0 - alpha) + c3)
    return VerificationRecord.inequality(rid, f0, bound, "<=", tolerance * _scale(f0, bound),
                                         c1=c1, sup_H=supH, lambda1=lambda1, c2=c2, c3=c3, alpha=alpha,
                                         integral_B1=float(I1[0]), quadrature_error=float(e1[0]),
                                         worst_h_margin=float(worst_h), n_samples=int(len(u)))


# ---------------------------------------------------------------------------
# Simons-type inequality


def check_simons(chart, samples=None, c_grid: Sequence[float] = (0.0, 0.5, 1, 2, 4, 8, 16, 32, 64),
                 tolerance: float = 1e-8, n: int = 15):
    """Smallest ``c`` in ``c_grid`` making the Simons defect nonnegative on the samples.

    ``samples`` is a ``(u, v)`` pair of arrays (default an ``n x n`` interior grid).
    Points with a degenerate metric are skipped and counted.
    """
    if samples is None:
        samples = chart.domain.interior_samples(n)
    u, v = (np.asarray(a, float).ravel() for a in samples)
    fd0 = fundamental_forms(chart, (u, v), derivatives=0, strict=False)
    ev = np.linalg.eigvalsh(fd0.g)
    good = (ev[:, 0] > 0) & (ev[:, 1] < 1e12 * ev[:, 0])
    fd = fundamental_forms(chart, (u[good], v[good]), derivatives=2, strict=False)
    base = simons_terms(fd, 0.0)
    g2 = fd.grad_H_norm ** 2
    scale = np.maximum(1.0, np.maximum(np.abs(fd.lap_A2), 2 * fd.A_norm2 ** 2))
    grid = sorted(float(c) for c in c_grid)
    c_min = None
    for c in grid:
        if np.all(base + c * g2 >= -tolerance * scale):
            c_min = c
            break
    worst_cmax = float(np.min((base + grid[-1] * g2) / scale))
    worst = float(np.min((base + (c_min if c_min is not None else grid[-1]) * g2) / scale))
    meta = dict(c_min=c_min, worst_defect_at_cmax=worst_cmax, n_samples=int(good.sum()),
                n_skipped=int((~good).sum()), max_nabla_A2=float(np.max(nabla_A_norm2(fd))) if good.any() else 0.0)
    rec = VerificationRecord.inequality("simons", worst, 0.0, ">=", tolerance, **meta)
    return rec


# ---------------------------------------------------------------------------
# total curvature and area


def _ball_integrals(ball: IntrinsicBall, p: float):
    fn = norm_integrands(p)
    out = {}
    for key, rad in (("s", ball.s), ("half", ball.s / 2)):
        r, u, v, J = ball.nodes(rad)
        vals = np.empty((7,) + J.shape)
        vals[:, 1:] = fn(Points(ball.chart, u[1:], v[1:]))
        vals[:, :1] = fn(Points(ball.chart, u[:1], v[:1]))
        out[key] = [ball.integrate_values(q, J=J, r=r) for q in vals]
    return out


def check_area_identities(chart, base, s: float, p: float = 3.0, resolution: Resolution = DEFAULT,
                          tolerance: float = IDENTITY_TOL, ball: Optional[IntrinsicBall] = None):
    """The area identity of geodesic balls and the six inequalities derived from it."""
    if not p > 2:
        raise ValueError("the Lp inequalities need p > 2")
    if ball is None:
        inj = inj_radius_lower_bound(chart, base, 1.5 * s, resolution.n_theta,
                                     resolution.ode_rtol, resolution.ode_atol)
        if inj < s:
            raise IntrinsicError(f"s={s} exceeds the injectivity lower bound {inj:.6g}")
        ball = intrinsic_ball(chart, base, s, resolution)
    recs = [gauss_bonnet_deficit(ball, tolerance)]
    I = _ball_integrals(ball, p)
    LpH, _, H2, _, _, A2, area = I["s"]
    A2_half = I["half"][5]
    q = 1.0 / (1.0 - 2.0 / p)
    eps = (s ** (p - 2) * LpH) ** (1.0 / p)
    meta = dict(s=s, p=p, eps=eps, area=area, int_A2=A2, int_H2=H2)
    tol = lambda *xs: INEQUALITY_TOL * _scale(*xs) + 1e-12 * s * s

    rhs = math.pi * s * s + 0.5 * s * s * A2 + 0.5 * s * s * H2
    recs.append(VerificationRecord.inequality("area_upper", area, rhs, "<=", tol(area, rhs), **meta))
    lhs = s * s / 16.0 * A2_half
    rhs = area - math.pi * s * s + 0.5 * s * s * H2
    recs.append(VerificationRecord.inequality("AaH", lhs, rhs, "<=", tol(lhs, area, H2 * s * s), **meta))
    rhs = eps ** 2 * (area / s ** 2) ** (1.0 / q)
    recs.append(VerificationRecord.inequality("area2", H2, rhs, "<=", tol(H2, rhs), **meta))
    rhs = 2 ** (p / 2) * (eps ** 2 + eps ** p) * (math.pi + 0.5 * A2) ** (1.0 / q)
    recs.append(VerificationRecord.inequality("fp", H2, rhs, "<=", tol(H2, rhs), **meta))
    rhs = (1 + eps ** 2 * 2 ** (p / 2 - 1)) * (math.pi * s * s + 0.5 * s * s * A2)
    recs.append(VerificationRecord.inequality("area3", area, rhs, "<=", tol(area, rhs), **meta))
    rhs = area - math.pi * s * s + 0.5 * eps ** 2 * s ** (4.0 / p) * area ** (1.0 / q)
    recs.append(VerificationRecord.inequality("forcor", lhs, rhs, "<=", tol(lhs, area, rhs), **meta))
    return recs


# ---------------------------------------------------------------------------
# curve on a vertical cylinder


def check_cylinder_curve(chart, s: float, tolerance: float = INEQUALITY_TOL, n: int = 2048):
    """Length of ``Sigma cap {x1^2 + x2^2 = s^2}`` against ``2 pi s (1 + 2 eps)``.

    ``eps = max(s sup|A|, sup|grad x3|)`` along the curve.  Also reports the
    empirical constant ``c`` in ``|k_g| <= s^-1 (1 + c eps)``.
    """
    if not chart.graph:
        raise ChartError("the cylinder-curve check needs a graph chart")
    theta = np.arange(n) * (2 * np.pi / n)
    u, v = s * np.cos(theta), s * np.sin(theta)
    if not np.all(chart.domain.contains(u, v)):
        raise ChartError("the circle of radius s leaves the graph domain")
    w = chart.jets(u, v, 2)[2]
    wx, wy = w.partial(1, 0), w.partial(0, 1)
    wxx, wxy, wyy = w.partial(2, 0), w.partial(1, 1), w.partial(0, 2)
    # r(t) = (s cos(t/s), s sin(t/s), w); derivatives in t
    c, sn = np.cos(theta), np.sin(theta)
    r1 = np.stack([-sn, c, -sn * wx + c * wy], -1)
    r2 = np.stack([-c / s, -sn / s, (-c * wx - sn * wy) / s + sn * sn * wxx - 2 * sn * c * wxy + c * c * wyy], -1)
    speed = np.linalg.norm(r1, axis=-1)
    length = float(np.mean(speed) * 2 * np.pi * s)
    fd = fundamental_forms(chart, (u, v), derivatives=0, strict=False)
    T = r1 / speed[:, None]
    kappa = (r2 - np.sum(r2 * T, -1, keepdims=True) * T) / speed[:, None] ** 2
    kg = np.linalg.norm(kappa - np.sum(kappa * fd.n, -1, keepdims=True) * fd.n, axis=-1)
    supA = float(np.sqrt(np.max(fd.A_norm2)))
    grad_x3 = float(np.sqrt(np.max(np.maximum(1.0 - fd.n[:, 2] ** 2, 0.0))))
    eps = max(s * supA, grad_x3)
    bound = 2 * np.pi * s * (1 + 2 * eps)
    c_emp = float(max(0.0, (s * np.max(kg) - 1.0) / eps)) if eps > 0 else None
    return VerificationRecord.inequality("cylinder_curve_length", length, bound, "<=", tolerance * bound,
                                         s=s, eps=eps, sup_A=supA, sup_grad_x3=grad_x3,
                                         max_kg=float(np.max(kg)), min_kg=float(np.min(kg)), kg_constant=c_emp)


# ---------------------------------------------------------------------------
# counterexample sweep


@dataclass
class SweepResult:
    alpha: float
    rows: list            # dicts with eps, L2_A2, W12_H, A_at_origin
    records: list         # VerificationRecords for the qualitative claims

    CSV_COLUMNS = ("eps", "L2_A2", "W12_H", "A_at_origin")


def counterexample_row(alpha: float, eps: float, resolution: Resolution = DEFAULT):
    chart = builtin_surface("counterexample", {"alpha": alpha, "eps": eps})
    nr = norm_report(chart, ExtrinsicRegion(chart, resolution=resolution), 2.0, 1.0)
    fd = fundamental_forms(chart, (0.0, 0.0), derivatives=0)
    return {"eps": float(eps), "L2_A2": nr.total_curvature, "W12_H": nr.W12,
            "A_at_origin": float(np.sqrt(fd.A_norm2)), "area": nr.area}


def counterexample_sweep(alpha: float, eps_list: Sequence[float], resolution: Resolution = DEFAULT) -> SweepResult:
    """Norms of the counterexample family over the whole disk, for decreasing ``eps``."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    eps_list = [float(e) for e in eps_list]
    if any(not 0 < e <= 0.5 for e in eps_list):
        raise ValueError("eps values must lie in (0, 1/2]")
    eps_list = sorted(eps_list, reverse=True)
    rows = [counterexample_row(alpha, e, resolution) for e in eps_list]
    A2 = np.array([r["L2_A2"] for r in rows])
    W = np.array([r["W12_H"] for r in rows])
    A0 = np.array([r["A_at_origin"] for r in rows])
    dec_A = bool(np.all(np.diff(A2) < 0))
    dec_W = bool(np.all(np.diff(W) < 0))
    recs = [
        VerificationRecord("counterexample_norms_decreasing", float(A2[-1]), float(A2[0]),
                           float(min(np.min(-np.diff(A2)), np.min(-np.diff(W)))) if len(rows) > 1 else 0.0, 0.0,
                           "pass" if dec_A and dec_W else "fail", "<=",
                           {"alpha": alpha, "A2_ratio": float(A2[-1] / A2[0]), "W12_ratio": float(W[-1] / W[0]),
                            "A2_decreasing": dec_A, "W12_decreasing": dec_W}),
        VerificationRecord.inequality("counterexample_A_origin", float(np.min(A0)), 1.0, ">=", 1e-12,
                                      alpha=alpha, A_exact=math.sqrt(2.0),
                                      max_dev_from_sqrt2=float(np.max(np.abs(A0 - math.sqrt(2))))),
    ]
    return SweepResult(alpha, rows, recs)


# ---------------------------------------------------------------------------
# probes


def theorem_probe(chart, base, s: float, p: float = 3.0, resolution: Resolution = DEFAULT,
                  r_probe: Optional[float] = None) -> ProbeRecord:
    """Hypothesis and conclusion quantities of the curvature estimate on ``B_s(base)``."""
    r_probe = r_probe if r_probe is not None else 1.5 * s
    inj, info = inj_radius_lower_bound(chart, base, r_probe, resolution.n_theta,
                                       resolution.ode_rtol, resolution.ode_atol, details=True)
    if inj < s * (1 - 1e-9):
        raise IntrinsicError(f"s={s} exceeds the injectivity lower bound {inj:.6g} at {tuple(base)}")
    ball = intrinsic_ball(chart, base, s, resolution)
    nr = norm_report(chart, ball, p, s)
    r, u, v, J = ball.nodes()
    A2 = np.empty_like(J)
    A2[1:] = fundamental_forms(chart, (u[1:], v[1:]), derivatives=0, strict=False).A_norm2
    A2_base = float(fundamental_forms(chart, tuple(base), derivatives=0).A_norm2)
    A2[0] = A2_base
    scan = float(np.max((s - r)[:, None] ** 2 * A2))
    flags = {"inj_ok": True, "conjugate": _finite(info["conjugate"]), "collision": _finite(info["collision"]),
             "domain_exit": _finite(info["domain_exit"])}
    return ProbeRecord(chart.label, float(s), float(p), float(inj), nr.total_curvature, nr.starred_W1p,
                       nr.starred_W22, s * s * A2_base, scan, nr.area / s ** 2, None, flags,
                       {"area": nr.area, "int_H2": nr.L2_H, "int_Hp": nr.Lp_H,
                        "eps_p": (s ** (p - 2) * nr.Lp_H) ** (1 / p)})


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def corollary_probe(chart, base, s: float, p: float = 3.0, resolution: Resolution = DEFAULT) -> ProbeRecord:
    """Theorem probe plus ``min(s^-2 area(B_s), int_{B_s} |A|^2)``."""
    rec = theorem_probe(chart, base, s, p, resolution)
    from dataclasses import replace
    return replace(rec, corollary_min=min(rec.area_ratio, rec.total_curv))
