"""Geodesics, geodesic polar coordinates and intrinsic balls.

All rays from a base point are integrated together as one ODE system in
the normalized time ``tau = r / r_max``.  The state per ray is
``(u, v, u', v', J, J')`` where primes are derivatives in arclength ``r``,
``u'' = -Gamma(u', u')`` is the geodesic equation and ``J'' = -K J`` the
Jacobi equation for the radial metric coefficient (``ds^2 = dr^2 + J^2 dtheta^2``).
Rays leaving the parameter domain are frozen and flagged as truncated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson, solve_ivp

from .chart import ChartError, SurfaceChart
from .geometry import ScalarField, fundamental_forms
from .records import VerificationRecord
from .resolution import DEFAULT, Resolution


class IntrinsicError(ValueError):
    """Conjugate point, domain exit or injectivity violation inside a requested radius."""


# ---------------------------------------------------------------------------
# ray integration


class _RayBundle:
    """Dense solution of the geodesic + Jacobi system for a fan of rays."""

    def __init__(self, chart, base, directions, r_max, rtol, atol):
        self.chart = chart
        self.base = (float(base[0]), float(base[1]))
        self.directions = np.asarray(directions, float)  # (m, 2) parameter velocities
        self.r_max = float(r_max)
        m = len(self.directions)
        y0 = np.zeros((6, m))
        y0[0], y0[1] = self.base
        y0[2], y0[3] = self.directions[:, 0], self.directions[:, 1]
        y0[5] = 1.0
        dom = chart.domain
        rm = self.r_max

        def rhs(tau, y):
            y = y.reshape(6, m)
            dy = np.zeros_like(y)
            inside = dom.contains(y[0], y[1])
            if np.any(inside):
                u, v = y[0, inside], y[1, inside]
                fd = fundamental_forms(chart, (u, v), derivatives=0, strict=False)
                du, dv = y[2, inside], y[3, inside]
                G = fd.christoffels
                dy[0, inside] = du
                dy[1, inside] = dv
                dy[2, inside] = -(G[:, 0, 0, 0] * du * du + 2 * G[:, 0, 0, 1] * du * dv + G[:, 0, 1, 1] * dv * dv)
                dy[3, inside] = -(G[:, 1, 0, 0] * du * du + 2 * G[:, 1, 0, 1] * du * dv + G[:, 1, 1, 1] * dv * dv)
                dy[4, inside] = y[5, inside]
                dy[5, inside] = -fd.K * y[4, inside]
            return (rm * dy).ravel()

        self.sol = solve_ivp(rhs, (0.0, 1.0), y0.ravel(), method="RK45", rtol=rtol, atol=atol, dense_output=True)
        if not self.sol.success:
            raise IntrinsicError(f"geodesic integration failed: {self.sol.message}")
        self.m = m

    def state(self, r):
        """State at radii ``r`` (1-D array): shape ``(6, len(r), m)``."""
        r = np.atleast_1d(np.asarray(r, float))
        y = self.sol.sol(np.clip(r / self.r_max, 0.0, 1.0))
        return y.reshape(6, self.m, len(r)).transpose(0, 2, 1)

    def exit_radius(self, n_samples: int = 4001):
        """Per-ray radius at which the ray left the domain (``inf`` if it never did)."""
        r = np.linspace(0.0, self.r_max, n_samples)
        y = self.state(r)
        inside = self.chart.domain.contains(y[0], y[1])
        out = np.full(self.m, np.inf)
        left = ~inside.all(axis=0)
        first = np.argmax(~inside, axis=0)
        out[left] = r[np.maximum(first[left] - 1, 0)]
        return out


def _orthonormal_frame(chart, p):
    fd = fundamental_forms(chart, (p[0], p[1]), derivatives=0)
    g = fd.g
    g11, g12, g22 = g[0, 0], g[0, 1], g[1, 1]
    det = g11 * g22 - g12 * g12
    e1 = np.array([1.0 / math.sqrt(g11), 0.0])
    e2 = np.array([-g12, g11]) / math.sqrt(g11 * det)
    return e1, e2


def ray_directions(chart, p, n_theta: int):
    """Angles (offset by half a step) and unit parameter velocities of ``n_theta`` rays."""
    e1, e2 = _orthonormal_frame(chart, p)
    theta = (np.arange(n_theta) + 0.5) * (2 * np.pi / n_theta)
    dirs = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    return theta, dirs


def _ambient_velocity(chart, u, v, du, dv):
    fd = fundamental_forms(chart, (u, v), derivatives=0, strict=False)
    return fd.Fu * du[..., None] + fd.Fv * dv[..., None], fd


# ---------------------------------------------------------------------------
# single geodesics


@dataclass(frozen=True)
class GeodesicPath:
    t: np.ndarray          # arclength samples
    points: np.ndarray     # (n, 2) parameter points
    tangents: np.ndarray   # (n, 3) ambient unit tangents
    total_length: float
    truncated: bool = False
    speed: Optional[np.ndarray] = None  # |dF/dt| from the integrated velocity

    @property
    def samples(self):
        return list(zip(self.t, map(tuple, self.points), map(tuple, self.tangents)))

    def positions(self, chart):
        return chart.position(self.points[:, 0], self.points[:, 1])


def shoot_geodesic(chart: SurfaceChart, p, direction, length: float, step: Optional[float] = None,
                   rtol: float = 1e-9, atol: float = 1e-9) -> GeodesicPath:
    """Geodesic from ``p`` with initial parameter velocity ``direction`` (unit in ``g``).

    ``step`` sets the sample spacing of the returned path (default ``length/200``).
    If the path leaves the domain it is cut at the exit and flagged truncated.
    """
    direction = np.asarray(direction, float)
    fd = fundamental_forms(chart, (p[0], p[1]), derivatives=0)
    speed = math.sqrt(direction @ fd.g @ direction)
    if abs(speed - 1.0) > 1e-6:
        raise ValueError(f"direction has speed {speed:.8g} in the metric, expected 1")
    bundle = _RayBundle(chart, p, direction[None, :], length, rtol, atol)
    n = max(2, int(math.ceil(length / (step or length / 200)))) + 1
    t = np.linspace(0.0, length, n)
    exit_r = bundle.exit_radius()[0]
    truncated = bool(np.isfinite(exit_r))
    if truncated:
        t = t[t <= exit_r]
    y = bundle.state(t)[:, :, 0]
    vel, _ = _ambient_velocity(chart, y[0], y[1], y[2], y[3])
    speed = np.linalg.norm(vel, axis=-1)
    return GeodesicPath(t, np.stack([y[0], y[1]], -1), vel / speed[:, None], float(t[-1]), truncated, speed)


def geodesic_residuals(chart, path: GeodesicPath):
    """Max deviation from unit speed and max tangential acceleration.

    The acceleration is the finite difference of the integrated unit tangent.
    """
    t = path.t
    acc = np.gradient(path.tangents, t, axis=0, edge_order=2)
    fd = fundamental_forms(chart, (path.points[:, 0], path.points[:, 1]), derivatives=0, strict=False)
    tang = acc - np.sum(acc * fd.n, -1, keepdims=True) * fd.n
    return float(np.max(np.abs(path.speed - 1))), float(np.max(np.linalg.norm(tang[2:-2], axis=-1)))


# ---------------------------------------------------------------------------
# polar grids and intrinsic balls


@dataclass
class PolarGrid:
    """Geodesic polar coordinates around ``base`` up to radius ``r_max``."""

    chart: SurfaceChart
    base: tuple
    n_theta: int
    n_r: int
    r_max: float
    theta: np.ndarray
    bundle: _RayBundle = field(repr=False)
    truncated: np.ndarray = field(repr=False)

    def sample(self, r):
        """Return ``(u, v, J, J')`` at radii ``r``; arrays of shape ``(len(r), n_theta)``."""
        y = self.bundle.state(r)
        return y[0], y[1], y[4], y[5]

    @property
    def r(self):
        return np.linspace(0.0, self.r_max, self.n_r + 1)

    @property
    def J(self):
        return self.sample(self.r)[2]

    def jacobi_residual(self, n: int = 801):
        """``max |J'' + K J|`` along the rays, ``J''`` by differencing the dense ``J'``."""
        r = np.linspace(0.0, self.r_max, n)
        u, v, J, dJ = self.sample(r)
        d2J = np.gradient(dJ, r, axis=0, edge_order=2)
        K = fundamental_forms(self.chart, (u, v), derivatives=0, strict=False).K
        return float(np.max(np.abs(d2J + K * J)[2:-2]))

    def ambient_positions(self, r):
        u, v, _, _ = self.sample(r)
        return self.chart.position(u, v)


def polar_grid(chart: SurfaceChart, p, r_max: float, n_theta: int = DEFAULT.n_theta, n_r: int = DEFAULT.n_r,
               override: bool = False, rtol: float = DEFAULT.ode_rtol, atol: float = DEFAULT.ode_atol) -> PolarGrid:
    """Shoot ``n_theta`` rays from ``p`` and integrate the Jacobi coefficient to ``r_max``.

    Raises :class:`IntrinsicError` if a ray leaves the domain or reaches a
    conjugate point (``J <= 0``) inside ``r_max`` unless ``override`` is set.
    """
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    if n_r % 2:
        n_r += 1
    p = (float(p[0]), float(p[1]))
    if not chart.domain.contains(*p):
        raise ChartError(f"base point {p} is not interior to the chart domain")
    theta, dirs = ray_directions(chart, p, n_theta)
    bundle = _RayBundle(chart, p, dirs, r_max, rtol, atol)
    exit_r = bundle.exit_radius()
    grid = PolarGrid(chart, p, n_theta, n_r, float(r_max), theta, bundle, np.isfinite(exit_r))
    if not override:
        if grid.truncated.any():
            k = int(np.argmin(exit_r))
            raise IntrinsicError(f"ray {k} (theta={theta[k]:.4f}) leaves the domain at r={exit_r[k]:.6g} < {r_max:g}")
        r = np.linspace(0.0, r_max, 4 * n_r + 1)[1:]
        J = grid.sample(r)[2]
        bad = np.argwhere(J <= 0)
        if len(bad):
            i, k = bad[0]
            raise IntrinsicError(f"conjugate point on ray {k} (theta={theta[k]:.4f}) at r={r[i]:.6g}")
    return grid


@dataclass
class IntrinsicBall:
    """The geodesic ball of radius ``s`` realized on a polar grid."""

    grid: PolarGrid
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("ball radius must be positive")
        if self.s > self.grid.r_max * (1 + 1e-12):
            raise ValueError(f"radius {self.s} exceeds grid r_max {self.grid.r_max}")

    @property
    def chart(self):
        return self.grid.chart

    @property
    def base(self):
        return self.grid.base

    def nodes(self, s: Optional[float] = None, n_r: Optional[int] = None):
        """Quadrature nodes ``(r, u, v, J)``: ``r`` of shape ``(n_r+1,)``, the rest ``(n_r+1, n_theta)``."""
        s = self.s if s is None else s
        r = np.linspace(0.0, s, (n_r or self.grid.n_r) + 1)
        u, v, J, _ = self.grid.sample(r)
        return r, u, v, J

    def integrate_values(self, values, s: Optional[float] = None, J=None, r=None):
        """``int_0^s int f J dtheta dr`` for node values (trapezoid in theta, Simpson in r)."""
        if J is None or r is None:
            r, _, _, J = self.nodes(s)
        ring = np.mean(np.asarray(values) * J, axis=-1) * (2 * np.pi)
        return float(simpson(ring, x=r))

    @property
    def area(self):
        return intrinsic_integral(self, ScalarField.constant(1.0))


def intrinsic_ball(chart, p, s, resolution: Resolution = DEFAULT, override: bool = False) -> IntrinsicBall:
    grid = polar_grid(chart, p, s, resolution.n_theta, resolution.n_r, override=override,
                      rtol=resolution.ode_rtol, atol=resolution.ode_atol)
    return IntrinsicBall(grid, float(s))


def intrinsic_integral(ball: IntrinsicBall, field: ScalarField) -> float:
    r, u, v, J = ball.nodes()
    vals = np.empty_like(J)
    vals[1:] = field.values(ball.chart, u[1:], v[1:])
    vals[0] = field.values(ball.chart, u[:1, :1], v[:1, :1]).ravel()[0]  # base point, zero weight
    return ball.integrate_values(vals, J=J, r=r)


def boundary_circle(ball: IntrinsicBall):
    """Length of the geodesic circle of radius ``s`` and its geodesic curvature ``J'/J`` per ray."""
    _, _, J, dJ = ball.grid.sample([ball.s])
    J, dJ = J[0], dJ[0]
    if np.any(J <= 0):
        raise IntrinsicError("J vanishes on the boundary circle")
    return float(np.mean(J) * 2 * np.pi), dJ / J


def _ring_integrals(ball, fd_field="K"):
    r, u, v, J = ball.nodes()
    K = np.zeros_like(J)
    K[1:] = fundamental_forms(ball.chart, (u[1:], v[1:]), derivatives=0, strict=False).K
    return r, J, np.mean(K * J, axis=-1) * 2 * np.pi, np.mean(J, axis=-1) * 2 * np.pi


def gauss_bonnet_deficit(ball: IntrinsicBall, tolerance: float = 1e-3):
    """``area(B_s) - pi s^2 = -int_0^s int_0^t int_{B_rho} K``.

    Returns the record for that identity; its metadata also carries the
    first-derivative form ``length(dB_s) - 2 pi s = -int_0^s int_{B_rho} K``
    and the boundary Gauss-Bonnet sum ``int k_g + int K`` (should be ``2 pi``).
    """
    s = ball.s
    r, J, ringK, ringL = _ring_integrals(ball)
    M = cumulative_simpson(ringK, x=r, initial=0.0)      # int_{B_rho} K
    N = cumulative_simpson(M, x=r, initial=0.0)          # int_0^t int_{B_rho} K
    area = float(simpson(ringL, x=r))
    lhs = area - math.pi * s * s
    rhs = -float(simpson(N, x=r))
    coarea = -float(simpson(ringK * (s - r) ** 2 / 2.0, x=r))
    length, kg = boundary_circle(ball)
    _, _, Jb, dJb = ball.grid.sample([s])
    kg_total = float(np.mean(dJb[0]) * 2 * np.pi)
    scale = max(abs(area), math.pi * s * s)
    rec = VerificationRecord.identity(
        "gauss_bonnet_area", lhs, rhs, tolerance * scale,
        area=area, s=s, rhs_coarea=coarea,
        length=length, length_deficit=length - 2 * math.pi * s, length_rhs=-float(N[-1]),
        total_K=float(M[-1]), boundary_gb=kg_total + float(M[-1]),
        n_theta=ball.grid.n_theta, n_r=ball.grid.n_r,
    )
    return rec


def length_identity(ball: IntrinsicBall, tolerance: float = 1e-3):
    """``length(dB_s) - 2 pi s = -int_0^s int_{B_rho} K``."""
    r, J, ringK, _ = _ring_integrals(ball)
    M = cumulative_simpson(ringK, x=r, initial=0.0)
    length, _ = boundary_circle(ball)
    return VerificationRecord.identity("gauss_bonnet_length", length - 2 * math.pi * ball.s,
                                       -float(simpson(M, x=r)), tolerance * 2 * math.pi * ball.s,
                                       s=ball.s, length=length)


def boundary_gauss_bonnet(ball: IntrinsicBall, tolerance: float = 1e-3):
    """``int_{dB_s} k_g + int_{B_s} K = 2 pi``."""
    r, J, ringK, _ = _ring_integrals(ball)
    _, _, _, dJ = ball.grid.sample([ball.s])
    lhs = float(np.mean(dJ[0]) * 2 * np.pi) + float(simpson(ringK, x=r))
    return VerificationRecord.identity("gauss_bonnet_boundary", lhs, 2 * math.pi, tolerance * 2 * math.pi, s=ball.s)


# ---------------------------------------------------------------------------
# injectivity radius


def inj_radius_lower_bound(chart: SurfaceChart, p, r_probe: float, n_theta: int = DEFAULT.n_theta,
                           rtol: float = DEFAULT.ode_rtol, atol: float = DEFAULT.ode_atol,
                           details: bool = False):
    """Heuristic lower bound for the injectivity radius at ``p``.

    The minimum of ``r_probe``, the first zero of ``J`` over all rays, the
    radius at which two rays meet head-on (ambient distance below
    ``1e-3 r`` with tangents more than 150 degrees apart; the geodesic loop
    then has length ``2 r`` and half of it is ``r``) and the radius at which
    a ray leaves the chart domain.
    """
    try:
        theta, dirs = ray_directions(chart, p, n_theta)
        bundle = _RayBundle(chart, p, dirs, r_probe, rtol, atol)
    except (ValueError, ArithmeticError):
        return (0.0, {"degenerate": True}) if details else 0.0
    n = max(2001, int(math.ceil(r_probe / 1e-3)) + 1)
    r = np.linspace(0.0, r_probe, n)
    y = bundle.state(r)
    exit_r = bundle.exit_radius(n)
    inside = chart.domain.contains(y[0], y[1])

    conj = math.inf
    J = y[4]
    for k in range(bundle.m):
        idx = np.flatnonzero((J[1:, k] <= 0) & inside[1:, k])
        if len(idx):
            i = idx[0] + 1
            # linear interpolation of the sign change
            conj = min(conj, r[i - 1] + (r[i] - r[i - 1]) * J[i - 1, k] / (J[i - 1, k] - J[i, k]))

    coll = math.inf
    X = chart.position(np.where(inside, y[0], p[0]), np.where(inside, y[1], p[1]))  # (n, m, 3)
    vel, _ = _ambient_velocity(chart, np.where(inside, y[0], p[0]), np.where(inside, y[1], p[1]),
                               np.where(inside, y[2], dirs[None, :, 0]), np.where(inside, y[3], dirs[None, :, 1]))
    T = vel / np.linalg.norm(vel, axis=-1, keepdims=True)
    iu, ju = np.triu_indices(bundle.m, 1)
    cos150 = math.cos(math.radians(150.0))
    for start in range(1, n, 256):
        sl = slice(start, min(start + 256, n))
        ok = inside[sl][:, iu] & inside[sl][:, ju]
        d = np.linalg.norm(X[sl][:, iu] - X[sl][:, ju], axis=-1)
        c = np.einsum("...k,...k->...", T[sl][:, iu], T[sl][:, ju])
        hit = (ok & (d < 1e-3 * r[sl, None]) & (c < cos150)).any(axis=1)
        if hit.any():
            coll = float(r[sl][np.argmax(hit)])
            break
    bound = min(r_probe, conj, coll, float(np.min(exit_r)))
    info = {"conjugate": conj, "collision": coll, "domain_exit": float(np.min(exit_r)), "r_probe": r_probe}
    return (bound, info) if details else bound


# ---------------------------------------------------------------------------
# chord bound along a geodesic


def chord_bound_check(path: GeodesicPath, chart: SurfaceChart, tolerance: float = 1e-9) -> VerificationRecord:
    """``|q - p| >= lambda (1 - alpha)`` with ``alpha = lambda sup_path |A|``; vacuous if ``alpha >= 1``."""
    lam = path.total_length
    fd = fundamental_forms(chart, (path.points[:, 0], path.points[:, 1]), derivatives=0, strict=False)
    supA = float(np.sqrt(np.max(fd.A_norm2)))
    alpha = lam * supA
    X = path.positions(chart)
    chord = float(np.linalg.norm(X[-1] - X[0]))
    bound = lam * (1.0 - alpha)
    rec = VerificationRecord.inequality("chord_bound", chord, bound, ">=", tolerance * max(lam, 1.0),
                                        length=lam, alpha=alpha, sup_A=supA)
    if alpha >= 1.0:
        return rec.as_vacuous("alpha >= 1")
    return rec
