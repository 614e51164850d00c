"""Integration over extrinsic balls, annuli and whole charts; Sobolev norms of H.

An :class:`ExtrinsicRegion` is the set of parameter points satisfying a
list of constraints ``phi_k(u, v) <= 0`` (ball, inner sphere of an
annulus, disk-shaped parameter domain).  The parameter bounding box is
covered by quadtree cells, each classified as inside, outside or cut.
Cut cells are refined to a target ambient size and then integrated by
exact clipping: Gauss nodes across the cell, and along each node line the
crossings of the constraint are located by bisection, so every inside
piece gets its own Gauss rule.  All non-empty cells are then refined
adaptively until a parent cell and its four children agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .chart import SurfaceChart, locate_point
from .geometry import FundamentalData, ScalarField, fundamental_forms
from .records import VerificationRecord
from .resolution import DEFAULT, Resolution

MAX_DEPTH = 10
CELL_CHUNK = 4096


class QuadratureError(RuntimeError):
    def __init__(self, message, cells=None):
        super().__init__(message)
        self.cells = cells if cells is not None else []


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0  # on [0, 1]


class Points:
    """Quadrature points with lazily computed (and cached) geometry."""

    def __init__(self, chart: SurfaceChart, u, v):
        self.chart = chart
        self.u = np.asarray(u, float)
        self.v = np.asarray(v, float)
        self._fd: Optional[FundamentalData] = None
        self._level = -1
        self._x = None

    def fd(self, derivatives: int = 0) -> FundamentalData:
        if self._level < derivatives:
            self._fd = fundamental_forms(self.chart, (self.u, self.v), derivatives=derivatives, strict=False)
            self._level = derivatives
        return self._fd

    @property
    def x(self):
        if self._fd is not None:
            return self._fd.x
        if self._x is None:
            self._x = self.chart.position(self.u, self.v)
        return self._x

    @property
    def area_element(self):
        return self.fd(0).area_element


def as_integrand(field) -> Callable:
    """Coerce a :class:`ScalarField` or a ``Points -> values`` callable."""
    if isinstance(field, ScalarField):
        return lambda pts: field.values(pts.chart, pts.u, pts.v)
    return field


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Constraint:
    """``phi <= 0`` on the region.  ``kind`` is ``ball``, ``outside`` or ``disk``."""

    kind: str
    center: tuple
    radius: float

    def phi(self, u, v, x):
        if self.kind == "disk":
            return (u - self.center[0]) ** 2 + (v - self.center[1]) ** 2 - self.radius ** 2
        d2 = np.sum((x - np.asarray(self.center)) ** 2, axis=-1)
        return d2 - self.radius ** 2 if self.kind == "ball" else self.radius ** 2 - d2


@dataclass
class ExtrinsicRegion:
    """``{p in domain : r_inner < |F(p) - center| < radius}``; ``radius=None`` means the whole chart."""

    chart: SurfaceChart
    radius: Optional[float] = None
    center: tuple = (0.0, 0.0, 0.0)
    inner_radius: Optional[float] = None
    resolution: Resolution = DEFAULT
    constraints: list = field(init=False)
    length_scale: float = field(init=False)
    width: float = field(init=False)

    def __post_init__(self):
        self.center = tuple(float(c) for c in self.center)
        cons = []
        if self.radius is not None:
            if not self.radius > 0:
                raise ValueError("radius must be positive")
            cons.append(Constraint("ball", self.center, float(self.radius)))
        if self.inner_radius is not None and self.inner_radius > 0:
            cons.append(Constraint("outside", self.center, float(self.inner_radius)))
        dom = self.chart.domain
        if dom.kind == "disk":
            cons.append(Constraint("disk", dom.center, dom.radius))
        self.constraints = cons
        self.width = math.inf
        if self.radius is not None:
            self.length_scale = float(self.radius)
            if self.inner_radius:
                self.width = float(self.radius - self.inner_radius)
        else:
            u, v = dom.interior_samples(12)
            X = self.chart.position(u, v)
            self.length_scale = float(np.linalg.norm(X.max(0) - X.min(0)))
        self._cells = None

    @property
    def whole(self):
        return self.radius is None

    def describe(self):
        if self.whole:
            return {"kind": "chart", "label": self.chart.label}
        d = {"kind": "extrinsic_ball", "center": list(self.center), "radius": self.radius}
        if self.inner_radius:
            d["inner_radius"] = self.inner_radius
        return d

    # -- cell construction ------------------------------------------------------
    def _samples(self, cells):
        """3x3 samples per cell: ``(u, v, x)`` with shapes ``(C, 9)`` and ``(C, 9, 3)``."""
        t = np.array([0.0, 0.5, 1.0])
        a, b = np.meshgrid(t, t, indexing="ij")
        u = cells[:, 0:1] + (cells[:, 1:2] - cells[:, 0:1]) * a.ravel()
        v = cells[:, 2:3] + (cells[:, 3:4] - cells[:, 2:3]) * b.ravel()
        return u, v, self.chart.position(u, v)

    def classify(self, cells):
        """Return ``(status, cut_mask, diameter)``: status 1 inside, 0 outside, -1 cut."""
        u, v, X = self._samples(cells)
        diam = 2.0 * np.max(np.linalg.norm(X - X[:, 4:5], axis=-1), axis=1)
        status = np.ones(len(cells), int)
        cut = np.zeros((len(cells), len(self.constraints)), bool)
        for k, con in enumerate(self.constraints):
            phi = con.phi(u, v, X)
            lo, hi = phi.min(1), phi.max(1)
            if con.kind == "disk":
                margin = 0.25 * (hi - lo)
            else:
                # |phi| changes by at most ~2 (|x-c| + diam) diam across the cell
                dist = np.sqrt(np.maximum(np.sum((X[:, 4] - np.asarray(con.center)) ** 2, -1), 0.0))
                margin = np.maximum(0.25 * (hi - lo), 0.5 * (dist + diam) * diam * 0.25)
            out = lo > margin
            ins = hi < -margin
            status[out] = 0
            cut[:, k] = ~out & ~ins
        cut &= (status == 1)[:, None]
        status[(status == 1) & cut.any(1)] = -1
        return status, cut, diam

    @staticmethod
    def _split(cells):
        um = (cells[:, 0] + cells[:, 1]) / 2
        vm = (cells[:, 2] + cells[:, 3]) / 2
        kids = [
            np.stack([cells[:, 0], um, cells[:, 2], vm], 1),
            np.stack([um, cells[:, 1], cells[:, 2], vm], 1),
            np.stack([cells[:, 0], um, vm, cells[:, 3]], 1),
            np.stack([um, cells[:, 1], vm, cells[:, 3]], 1),
        ]
        return np.stack(kids, 1).reshape(-1, 4)

    def build_cells(self):
        """Initial cells: every cut cell has ambient size ``<= cut_resolution * length_scale``."""
        if self._cells is not None:
            return self._cells
        res = self.resolution
        u0, u1, v0, v1 = self.chart.domain.bbox
        n = res.base_cells
        eu, ev = np.linspace(u0, u1, n + 1), np.linspace(v0, v1, n + 1)
        U0, V0 = np.meshgrid(eu[:-1], ev[:-1], indexing="ij")
        U1, V1 = np.meshgrid(eu[1:], ev[1:], indexing="ij")
        cells = np.stack([U0.ravel(), U1.ravel(), V0.ravel(), V1.ravel()], 1)
        # a thin annulus needs cut cells no wider than the annulus itself
        h_cut = min(res.cut_resolution * self.length_scale, self.width)
        h_coarse = 0.5 * self.length_scale
        done_c, done_s = [], []
        for _ in range(40):
            if not len(cells):
                break
            status, cut, diam = self.classify(cells)
            refine = ((status == -1) & (diam > h_cut)) | ((status != 0) & (diam > h_coarse) & (not self.whole))
            keep = (status != 0) & ~refine
            done_c.append(cells[keep])
            done_s.append(status[keep])
            cells = self._split(cells[refine])
            if sum(len(c) for c in done_c) + len(cells) > res.max_cells:
                raise QuadratureError("subdivision budget exceeded while resolving the region boundary",
                                      cells[:20].tolist())
        else:
            raise QuadratureError("boundary cells could not be resolved", cells[:20].tolist())
        self._cells = (np.concatenate(done_c) if done_c else np.zeros((0, 4)),
                       np.concatenate(done_s) if done_s else np.zeros(0, int))
        return self._cells

    # -- quadrature rules -------------------------------------------------------
    def _psi(self, u, v):
        x = self.chart.position(u, v)
        return np.max(np.stack([c.phi(u, v, x) for c in self.constraints]), axis=0)

    def _interior_nodes(self, cells):
        x, w = _gauss(self.resolution.gauss_order)
        a, b = np.meshgrid(x, x, indexing="ij")
        wa = np.outer(w, w).ravel()
        du = cells[:, 1] - cells[:, 0]
        dv = cells[:, 3] - cells[:, 2]
        u = cells[:, 0:1] + du[:, None] * a.ravel()
        v = cells[:, 2:3] + dv[:, None] * b.ravel()
        return u, v, (du * dv)[:, None] * wa

    def _bisect_roots(self, to_uv, t, fixed, iters: int = 12):
        """Sign changes of ``psi`` between consecutive samples ``t[..., i]`` on lines ``fixed``.

        Bracketed Illinois iteration (regula falsi, halving the weight of an
        end kept twice in a row).  Returns the roots (``nan`` where no sign
        change) and ``psi <= 0`` at the samples.
        """
        fx = np.broadcast_to(fixed, t.shape)
        psi = self._psi(*to_uv(t, fx))
        inside = psi <= 0
        lo, hi = t[..., :-1].copy(), t[..., 1:].copy()
        flo, fhi = psi[..., :-1].copy(), psi[..., 1:].copy()
        alo, ahi = np.abs(flo), np.abs(fhi)           # true |psi| at the ends
        change = inside[..., :-1] != inside[..., 1:]
        fs = fx[..., :-1]
        side = np.zeros(lo.shape, np.int8)
        for _ in range(iters):
            den = fhi - flo
            ok = den != 0
            mid = np.where(ok, lo - flo * (hi - lo) / np.where(ok, den, 1.0), (lo + hi) / 2)
            mid = np.clip(mid, np.minimum(lo, hi), np.maximum(lo, hi))
            fm = self._psi(*to_uv(mid, fs))
            same = (fm <= 0) == (flo <= 0)
            lo, flo, alo = np.where(same, mid, lo), np.where(same, fm, flo), np.where(same, np.abs(fm), alo)
            hi, fhi, ahi = np.where(same, hi, mid), np.where(same, fhi, fm), np.where(same, ahi, np.abs(fm))
            fhi = np.where(same & (side == 1), fhi / 2, fhi)
            flo = np.where(~same & (side == -1), flo / 2, flo)
            side = np.where(same, 1, -1).astype(np.int8)
        root = np.where(alo <= ahi, lo, hi)
        return np.where(change, root, np.nan), inside

    def _cut_nodes(self, cells, m: int = 3):
        """Nodes and weights clipping each cut cell to ``psi <= 0``.

        Lines run along the parameter direction in which ``psi`` varies
        most, so they cross the boundary transversally.  The outer interval
        is split where the boundary leaves through the two line-end edges,
        keeping the outer integrand smooth on every piece.
        """
        q = self.resolution.cut_order
        gx, gw = _gauss(q)
        C = len(cells)
        uc = (cells[:, 0] + cells[:, 1]) / 2
        vc = (cells[:, 2] + cells[:, 3]) / 2
        pu = self._psi(np.stack([cells[:, 0], cells[:, 1]], 1), np.stack([vc, vc], 1))
        pv = self._psi(np.stack([uc, uc], 1), np.stack([cells[:, 2], cells[:, 3]], 1))
        along_u = np.abs(pu[:, 1] - pu[:, 0]) >= np.abs(pv[:, 1] - pv[:, 0])
        t0 = np.where(along_u, cells[:, 0], cells[:, 2])
        t1 = np.where(along_u, cells[:, 1], cells[:, 3])
        s0 = np.where(along_u, cells[:, 2], cells[:, 0])
        s1 = np.where(along_u, cells[:, 3], cells[:, 1])

        def to_uv(tt, ss):
            au = along_u.reshape((C,) + (1,) * (tt.ndim - 1))
            return np.where(au, tt, ss), np.where(au, ss, tt)

        def swap(ss, tt):  # lines of constant t, parametrized by s
            return to_uv(tt, ss)

        lin = np.linspace(0.0, 1.0, m + 1)
        # outer breakpoints: crossings on the edges t = t0 and t = t1
        sg = s0[:, None, None] + (s1 - s0)[:, None, None] * lin           # (C, 1, m+1)
        sg = np.broadcast_to(sg, (C, 2, m + 1))
        edges = np.stack([t0, t1], 1)[:, :, None]                           # (C, 2, 1)
        sroots, _ = self._bisect_roots(swap, sg, edges)
        br = np.concatenate([s0[:, None], sroots.reshape(C, -1), s1[:, None]], 1)
        br = np.sort(np.where(np.isnan(br), s1[:, None], br), axis=1)     # (C, nb)
        a_s, b_s = br[:, :-1], br[:, 1:]
        s = a_s[..., None] + (b_s - a_s)[..., None] * gx                   # (C, nb-1, q)
        ws = (b_s - a_s)[..., None] * gw
        s, ws = s.reshape(C, -1), ws.reshape(C, -1)
        # inner pieces along each line
        L = s.shape[1]
        tg = np.broadcast_to((t0[:, None, None] + (t1 - t0)[:, None, None] * lin), (C, L, m + 1))
        roots, inside = self._bisect_roots(to_uv, tg, s[:, :, None])
        root = np.where(np.isnan(roots), tg[..., 1:], roots)
        a = np.concatenate([tg[..., :-1], root], -1)
        b = np.concatenate([root, tg[..., 1:]], -1)
        ins = np.concatenate([inside[..., :-1], inside[..., 1:]], -1)
        length = np.where(ins, b - a, 0.0)                                 # (C, L, 2m)
        tt = a[..., None] + (b - a)[..., None] * gx
        wt = length[..., None] * gw
        ss = np.broadcast_to(s[:, :, None, None], tt.shape)
        u, v = to_uv(tt, ss)
        w = wt * ws[:, :, None, None]
        return u.reshape(C, -1), v.reshape(C, -1), w.reshape(C, -1)

    def _cell_integrals(self, cells, status, integrand, with_abs: bool = False):
        """Per-cell integrals, shape ``(C, k)`` (outside cells give 0).

        With ``with_abs`` also the integrals of the absolute values.
        """
        parts = []
        for sel, rule in ((status == 1, self._interior_nodes), (status == -1, self._cut_nodes)):
            for idx in np.array_split(np.flatnonzero(sel), max(1, -(-np.count_nonzero(sel) // CELL_CHUNK))):
                if not len(idx):
                    continue
                parts.append(self._chunk_integrals(cells, idx, rule, integrand, with_abs))
        k = parts[0][1].shape[1] if parts else 1
        res = np.zeros((len(cells), k))
        res_abs = np.zeros((len(cells), k))
        for idx, val, val_abs in parts:
            res[idx] = val
            if with_abs:
                res_abs[idx] = val_abs
        return (res, res_abs) if with_abs else res

    def _chunk_integrals(self, cells, idx, rule, integrand, with_abs):
        u, v, w = rule(cells[idx])
        nz = w != 0
        pts = Points(self.chart, u[nz], v[nz])
        vals = np.atleast_2d(np.asarray(integrand(pts), float)) * pts.area_element
        full = np.zeros((vals.shape[0],) + u.shape)
        full[:, nz] = vals
        return (idx, np.einsum("kcn,cn->ck", full, w),
                np.einsum("kcn,cn->ck", np.abs(full), w) if with_abs else None)

    def integrate(self, field, tol: Optional[float] = None, atol: float = 0.0):
        """Integrate one or several fields; returns ``(values, error_estimates)`` arrays.

        ``field`` is a :class:`ScalarField` or a callable on :class:`Points`
        returning ``(N,)`` or ``(k, N)`` values.  Refinement stops once the
        estimated error is below ``tol * int|f| + atol`` per component.
        """
        integrand = as_integrand(field)
        tol = self.resolution.interior_tol if tol is None else tol
        cells, status = self.build_cells()
        if not len(cells):
            z = np.zeros(1)
            return z, z
        I, Iabs = self._cell_integrals(cells, status, integrand, with_abs=True)
        scale = Iabs.sum(0)
        total_area = np.sum((cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2]))
        floor = 1e-14 * np.max(scale) + 1e-300
        thr_density = (tol * scale + atol + floor) / total_area
        total = np.zeros_like(scale)
        err = np.zeros_like(scale)
        depth = 0
        n_cells = len(cells)
        while len(cells):
            kids = self._split(cells)
            kstat, _, _ = self.classify(kids)
            Ik = self._cell_integrals(kids, kstat, integrand)
            Ik_sum = Ik.reshape(len(cells), 4, -1).sum(1)
            diff = np.abs(Ik_sum - I)
            area = (cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2])
            ok = np.all(diff <= thr_density * area[:, None], axis=1) | (depth >= MAX_DEPTH)
            total += Ik_sum[ok].sum(0)
            err += diff[ok].sum(0)
            keep = np.repeat(~ok, 4) & (kstat != 0)
            cells, status, I = kids[keep], kstat[keep], Ik[keep]
            n_cells += len(cells)
            depth += 1
            if n_cells > self.resolution.max_cells * 4:
                raise QuadratureError("adaptive refinement budget exceeded", cells[:20].tolist())
        return total, err + floor


def extrinsic_region(chart, r, center=(0.0, 0.0, 0.0), inner=None, resolution: Resolution = DEFAULT):
    return ExtrinsicRegion(chart, r, center, inner, resolution)


def extrinsic_integral(region: ExtrinsicRegion, field, with_error: bool = False):
    """``int_{region} f dA``; with ``with_error`` also the error estimate."""
    val, err = region.integrate(field)
    if with_error:
        return float(val[0]), float(err[0])
    return float(val[0])


def density_ratio(chart: SurfaceChart, field, r: float, center=(0.0, 0.0, 0.0),
                  resolution: Resolution = DEFAULT) -> float:
    """``r^-2 int_{B_r(center)} f``; the surface must pass through ``center``."""
    p0 = locate_point(chart, center)
    if np.linalg.norm(chart.position(*p0) - np.asarray(center)) > 1e-9:
        raise ValueError("the surface does not pass through the ball center")
    return extrinsic_integral(ExtrinsicRegion(chart, r, center, resolution=resolution), field) / r ** 2


def boundary_inside_ball(chart: SurfaceChart, r: float = 1.0, center=(0.0, 0.0, 0.0), n: int = 400) -> bool:
    """Does the image of the (non-periodic, non-degenerate) domain boundary meet ``B_r``?"""
    for u, v in chart.domain.boundary_samples(n):
        X = chart.position(u, v)
        if np.sum(np.linalg.norm(np.diff(X, axis=0), axis=-1)) < 1e-9:
            continue  # edge collapsed to a point (pole of a spherical chart)
        if np.any(np.linalg.norm(X - np.asarray(center), axis=-1) < r):
            return True
    return False


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormReport:
    region: dict
    p: float
    s: float
    Lp_H: float
    Lp_gradH: float
    L2_H: float
    L2_gradH: float
    L2_hessH: float
    total_curvature: float
    area: float
    starred_W1p: float
    starred_W22: float

    @property
    def W12(self):
        """Unscaled ``int |H|^2 + int |grad H|^2``."""
        return self.L2_H + self.L2_gradH

    @property
    def W22(self):
        return self.L2_H + self.L2_gradH + self.L2_hessH

    @classmethod
    def from_integrals(cls, region, p, s, Lp_H, Lp_gradH, L2_H, L2_gradH, L2_hessH, total_curvature, area):
        vals = dict(Lp_H=Lp_H, Lp_gradH=Lp_gradH, L2_H=L2_H, L2_gradH=L2_gradH, L2_hessH=L2_hessH,
                    total_curvature=total_curvature, area=area)
        # roundoff can leave tiny negatives in nonnegative integrals
        vals = {k: max(float(v), 0.0) for k, v in vals.items()}
        w1p = s ** (p - 2) * vals["Lp_H"] + s ** (2 * p - 2) * vals["Lp_gradH"]
        w22 = vals["L2_H"] + s ** 2 * vals["L2_gradH"] + s ** 4 * vals["L2_hessH"]
        return cls(region, float(p), float(s), starred_W1p=w1p, starred_W22=w22, **vals)

    def to_dict(self):
        d = dict(self.__dict__)
        d["W12"], d["W22"] = self.W12, self.W22
        return d


def norm_integrands(p: float):
    """Integrand for ``(|H|^p, |grad H|^p, |H|^2, |grad H|^2, |hess H|^2, |A|^2, 1)``."""
    def fn(pts: Points):
        fd = pts.fd(2)
        aH = np.abs(fd.H_scalar)
        gH = fd.grad_H_norm
        return np.stack([aH ** p, gH ** p, aH ** 2, gH ** 2, fd.hess_H_norm ** 2, fd.A_norm2, np.ones_like(aH)])
    return fn


def norm_report(chart: SurfaceChart, region, p: float, s: float) -> NormReport:
    """Norms of ``H`` over an intrinsic ball, extrinsic region, or the whole chart (``region=None``)."""
    from .intrinsic import IntrinsicBall  # local import avoids a cycle at module load

    if p < 2:
        raise ValueError("exponent p must be at least 2")
    if not s > 0:
        raise ValueError("scale s must be positive")
    fn = norm_integrands(p)
    if isinstance(region, IntrinsicBall):
        r, u, v, J = region.nodes()
        pts = Points(chart, u[1:], v[1:])
        vals = fn(pts)
        base = fn(Points(chart, u[:1, :1], v[:1, :1]))[:, 0, 0]
        full = np.concatenate([np.broadcast_to(base[:, None, None], (len(vals), 1, u.shape[1])), vals], axis=1)
        ints = [region.integrate_values(f, J=J, r=r) for f in full]
        desc = {"kind": "intrinsic_ball", "base": list(region.base), "s": region.s}
    else:
        if region is None:
            region = ExtrinsicRegion(chart)
        ints, _ = region.integrate(fn)
        desc = region.describe()
    return NormReport.from_integrals(desc, p, s, *ints)


def tangential_gradient_norm(field: ScalarField):
    """Integrand ``|grad f|`` for a :class:`ScalarField`."""
    def fn(pts: Points):
        fd = pts.fd(0)
        f = field.jets(pts.chart, pts.u, pts.v, 1)
        d = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
        return np.sqrt(np.maximum(np.einsum("...ij,...i,...j->...", fd.g_inv, d, d), 0.0))
    return fn


def ratio_bound_check(chart: SurfaceChart, field: ScalarField, s: float, resolution: Resolution = DEFAULT,
                      tolerance: float = 1e-3) -> VerificationRecord:
    """``s^-1 int_{B_s} f <= int_{B_1} f + 1/2 int_{B_1} f |H| + 1/2 int_{B_1} |grad f|``."""
    rid = "ratio_bound"
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if boundary_inside_ball(chart, 1.0):
        return VerificationRecord.vacuous(rid, "surface boundary meets B_1", s=s)
    integrand = as_integrand(field)
    lhs = extrinsic_integral(ExtrinsicRegion(chart, s, resolution=resolution), field) / s
    gradf = tangential_gradient_norm(field)

    def rhs_terms(pts):
        f = integrand(pts)
        return np.stack([f, f * np.abs(pts.fd(0).H_scalar), gradf(pts)])

    I, _ = ExtrinsicRegion(chart, 1.0, resolution=resolution).integrate(rhs_terms)
    rhs = I[0] + 0.5 * I[1] + 0.5 * I[2]
    return VerificationRecord.inequality(rid, lhs, rhs, "<=", tolerance * max(abs(lhs), abs(rhs), 1e-300), s=s)
