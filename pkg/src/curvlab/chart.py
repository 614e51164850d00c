"""Parametric charts of surfaces in R^3 with exact derivative jets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .expr import BinOp, Call, Neg, Num, Var, as_node, parse_expression, pretty
from .jets import Jet, eval_jet, eval_values


class ChartError(ValueError):
    """Invalid chart construction or parameters."""


@dataclass(frozen=True)
class Domain2D:
    """Parameter domain: a rectangle or a disk.

    ``periodic`` optionally gives a period per parameter axis; a periodic
    axis identifies opposite rectangle edges (e.g. the angle of a cylinder),
    so geodesics may wrap across it and the edge is not surface boundary.
    """

    kind: str
    bounds: tuple = ()
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    periodic: tuple = (None, None)

    def __post_init__(self):
        if self.kind == "rectangle":
            u0, u1, v0, v1 = self.bounds
            if not (u0 < u1 and v0 < v1):
                raise ChartError(f"empty rectangle {self.bounds}")
        elif self.kind == "disk":
            if not self.radius > 0:
                raise ChartError("disk radius must be positive")
            if any(p is not None for p in self.periodic):
                raise ChartError("disk domains cannot be periodic")
        else:
            raise ChartError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def rectangle(cls, u0, u1, v0, v1, periodic=(None, None)):
        return cls("rectangle", bounds=(float(u0), float(u1), float(v0), float(v1)), periodic=tuple(periodic))

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", center=(float(center[0]), float(center[1])), radius=float(radius))

    @property
    def bbox(self):
        if self.kind == "rectangle":
            return self.bounds
        (cu, cv), r = self.center, self.radius
        return (cu - r, cu + r, cv - r, cv + r)

    def wrap(self, u, v):
        """Reduce periodic coordinates into the rectangle."""
        u, v = np.asarray(u, float), np.asarray(v, float)
        if self.kind != "rectangle":
            return u, v
        u0, u1, v0, v1 = self.bounds
        pu, pv = self.periodic
        if pu:
            u = u0 + np.mod(u - u0, pu)
        if pv:
            v = v0 + np.mod(v - v0, pv)
        return u, v

    def contains(self, u, v, margin: float = 0.0):
        """Interior test (after periodic wrapping); ``margin`` shrinks the domain."""
        u, v = self.wrap(u, v)
        if self.kind == "disk":
            return np.hypot(u - self.center[0], v - self.center[1]) < self.radius - margin
        u0, u1, v0, v1 = self.bounds
        pu, pv = self.periodic
        ok_u = np.ones(np.shape(u), bool) if pu else (u > u0 + margin) & (u < u1 - margin)
        ok_v = np.ones(np.shape(v), bool) if pv else (v > v0 + margin) & (v < v1 - margin)
        return ok_u & ok_v

    def interior_samples(self, n: int = 10):
        """An ``n x n`` grid of interior points (disk: polar grid)."""
        t = (np.arange(n) + 0.5) / n
        if self.kind == "rectangle":
            u0, u1, v0, v1 = self.bounds
            U, V = np.meshgrid(u0 + (u1 - u0) * t, v0 + (v1 - v0) * t, indexing="ij")
            return U.ravel(), V.ravel()
        rr, th = np.meshgrid(self.radius * t, 2 * np.pi * t, indexing="ij")
        return self.center[0] + (rr * np.cos(th)).ravel(), self.center[1] + (rr * np.sin(th)).ravel()

    def boundary_samples(self, n: int = 200):
        """Points on each boundary edge, as a list of ``(u, v)`` arrays.

        Periodic edges are omitted since they are not boundary of the surface.
        """
        t = np.linspace(0.0, 1.0, n)
        if self.kind == "disk":
            th = 2 * np.pi * t
            return [(self.center[0] + self.radius * np.cos(th), self.center[1] + self.radius * np.sin(th))]
        u0, u1, v0, v1 = self.bounds
        pu, pv = self.periodic
        edges = []
        if not pu:
            edges += [(np.full(n, u0), v0 + (v1 - v0) * t), (np.full(n, u1), v0 + (v1 - v0) * t)]
        if not pv:
            edges += [(u0 + (u1 - u0) * t, np.full(n, v0)), (u0 + (u1 - u0) * t, np.full(n, v1))]
        return edges

    def to_dict(self):
        if self.kind == "disk":
            return {"kind": "disk", "center": list(self.center), "radius": self.radius}
        return {"kind": "rectangle", "bounds": list(self.bounds), "periodic": list(self.periodic)}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind", "rectangle")
        if kind == "disk":
            return cls.disk(d.get("center", (0.0, 0.0)), d["radius"])
        return cls.rectangle(*d["bounds"], periodic=tuple(d.get("periodic", (None, None))))


@dataclass(frozen=True)
class SurfaceChart:
    """An immersion ``F = (F1, F2, F3)`` of a parameter domain into R^3.

    ``graph`` marks charts of the form ``(u, v, w(u, v))``; ``origin_param``
    is a parameter point known to map to the ambient origin (or ``None``).
    """

    components: tuple
    domain: Domain2D
    label: str = "surface"
    graph: bool = False
    origin_param: Optional[tuple] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        comps = tuple(as_node(c) for c in self.components)
        if len(comps) != 3:
            raise ChartError("a chart needs exactly three components")
        object.__setattr__(self, "components", comps)
        self._check_immersion()

    def _check_immersion(self, n: int = 10):
        u, v = self.domain.interior_samples(n)
        F = self.jets(u, v, 1)
        Fu = np.stack([c.partial(1, 0) for c in F], -1)
        Fv = np.stack([c.partial(0, 1) for c in F], -1)
        area = np.linalg.norm(np.cross(Fu, Fv), axis=-1)
        if not np.all(np.isfinite(area)) or np.any(area <= 1e-12):
            bad = np.flatnonzero(~(area > 1e-12))[0]
            raise ChartError(
                f"chart {self.label!r} is not immersed near (u, v) = ({u[bad]:.6g}, {v[bad]:.6g})"
            )

    def jets(self, u, v, order: int):
        """Jets of the three components at parameter points ``(u, v)``."""
        return [eval_jet(c, u, v, order) for c in self.components]

    def position(self, u, v) -> np.ndarray:
        """Ambient position, shape ``(..., 3)``."""
        return np.stack([eval_values(c, u, v) for c in self.components], -1)

    def sources(self):
        return [pretty(c) for c in self.components]

    def to_spec(self) -> dict:
        return {"parametric": self.sources(), "domain": self.domain.to_dict(), "label": self.label}


def evaluate_jet(chart: SurfaceChart, p, order: int = 4):
    """Jets of the immersion at a single interior parameter point ``p``."""
    if not 1 <= order <= 4:
        raise ValueError("order must be between 1 and 4")
    u, v = float(p[0]), float(p[1])
    if not chart.domain.contains(u, v):
        raise ChartError(f"point {p} is not in the interior of the chart domain")
    return tuple(chart.jets(u, v, order))


# ---------------------------------------------------------------------------
# chart transformations


def _lin(coeffs, nodes, const):
    out = None
    for a, node in zip(coeffs, nodes):
        if a == 0:
            continue
        term = node if a == 1 else ex.mul(a, node)
        out = term if out is None else ex.add(out, term)
    if const:
        out = as_node(const) if out is None else ex.add(out, const)
    return out if out is not None else Num(0.0)


def ambient_isometry(chart: SurfaceChart, rotation, translation=(0.0, 0.0, 0.0)) -> SurfaceChart:
    """Compose ``chart`` with the rigid motion ``x -> R x + t``."""
    R = np.asarray(rotation, dtype=float)
    t = np.asarray(translation, dtype=float)
    if R.shape != (3, 3) or np.max(np.abs(R @ R.T - np.eye(3))) > 1e-12:
        raise ChartError("rotation must be an orthogonal 3x3 matrix")
    comps = tuple(_lin(R[i], chart.components, t[i]) for i in range(3))
    origin = None
    if chart.origin_param is not None and np.allclose(t, 0):
        origin = chart.origin_param
    return replace(chart, components=comps, graph=False, origin_param=origin,
                   label=f"{chart.label}/isometry")


def scale_chart(chart: SurfaceChart, lam: float) -> SurfaceChart:
    """The homothetic image ``lam * F`` (same parameter domain)."""
    if not lam > 0:
        raise ChartError("scale factor must be positive")
    comps = tuple(ex.mul(lam, c) for c in chart.components)
    return replace(chart, components=comps, graph=False, label=f"{chart.label}*{lam:g}")


def swap_orientation(chart: SurfaceChart) -> SurfaceChart:
    """Reparametrize by ``(u, v) -> (v, u)``, reversing the normal."""
    m = {"u": Var("v"), "v": Var("u")}
    comps = tuple(ex.substitute(c, m) for c in chart.components)
    d = chart.domain
    if d.kind == "rectangle":
        u0, u1, v0, v1 = d.bounds
        dom = Domain2D.rectangle(v0, v1, u0, u1, periodic=d.periodic[::-1])
    else:
        dom = Domain2D.disk(d.center[::-1], d.radius)
    origin = None if chart.origin_param is None else tuple(chart.origin_param[::-1])
    return replace(chart, components=comps, domain=dom, graph=False, origin_param=origin,
                   label=f"{chart.label}/swapped")


# ---------------------------------------------------------------------------
# builtin families

BUILTINS = ("plane", "sphere", "cylinder", "catenoid", "shifted_catenoid", "graph", "counterexample")


def _cosh(node):
    return BinOp("/", BinOp("+", Call("exp", node), Call("exp", Neg(node))), Num(2.0))


def counterexample_expression(alpha: float, eps: float):
    """``x y (log(x^2 + y^2 + eps) / log eps)^alpha``.

    On the disk of radius 1/2 with ``eps <= 1/2`` both logarithms are
    negative, so the base of the power is a positive ratio.
    """
    return parse_expression(f"x*y*(log(x^2+y^2+{eps!r})/log({eps!r}))^{alpha!r}")


def _get(params, key, default=None, pos=None):
    if isinstance(params, dict):
        return params.get(key, default)
    if pos is not None and pos < len(params):
        return params[pos]
    return default


def builtin_surface(name: str, params=None) -> SurfaceChart:
    """Construct one of the builtin chart families.

    ``params`` is a mapping (or a positional list in the documented order):

    * ``plane``: ``half_width`` (12)
    * ``sphere``: ``R`` (1), ``center`` ((0,0,0)), ``axis`` ('z')
    * ``cylinder``: ``R`` (1), ``half_length`` (10)
    * ``catenoid`` / ``shifted_catenoid``: ``half_height`` (2); the shifted
      one has its neck point ``(1, 0, 0)`` moved to the origin
    * ``graph``: ``expr``, ``domain`` (dict, default square of half width 1)
    * ``counterexample``: ``alpha`` (0.3), ``eps`` (0.01)
    """
    params = {} if params is None else params
    if name == "plane":
        L = float(_get(params, "half_width", 12.0, 0))
        return SurfaceChart(("u", "v", "0"), Domain2D.rectangle(-L, L, -L, L), label="plane",
                            graph=True, origin_param=(0.0, 0.0), params={"half_width": L})
    if name == "sphere":
        R = float(_get(params, "R", 1.0, 0))
        c = tuple(float(x) for x in _get(params, "center", (0.0, 0.0, 0.0), 1))
        axis = _get(params, "axis", "z", 2)
        if not R > 0:
            raise ChartError("sphere radius must be positive")
        if axis not in ("x", "y", "z"):
            raise ChartError("sphere axis must be x, y or z")
        a = [f"{R!r}*sin(u)*cos(v)", f"{R!r}*sin(u)*sin(v)", f"{R!r}*cos(u)"]
        # rotate the polar axis onto the requested ambient axis
        perm = {"z": (0, 1, 2), "x": (2, 0, 1), "y": (1, 2, 0)}[axis]
        comps = [f"{c[i]!r} + {a[perm[i]]}" for i in range(3)]
        chart = SurfaceChart(tuple(comps), Domain2D.rectangle(0.0, math.pi, -math.pi, math.pi, periodic=(None, 2 * math.pi)),
                             label=f"sphere(R={R:g})", params={"R": R, "center": c, "axis": axis})
        origin = _locate_origin_on_sphere(R, c, axis)
        return replace(chart, origin_param=origin) if origin is not None else chart
    if name == "cylinder":
        R = float(_get(params, "R", 1.0, 0))
        L = float(_get(params, "half_length", 10.0, 1))
        if not R > 0:
            raise ChartError("cylinder radius must be positive")
        comps = (f"{R!r}*cos(u/{R!r})", f"{R!r}*sin(u/{R!r})", "v")
        dom = Domain2D.rectangle(-math.pi * R, math.pi * R, -L, L, periodic=(2 * math.pi * R, None))
        return SurfaceChart(comps, dom, label=f"cylinder(R={R:g})", params={"R": R, "half_length": L})
    if name in ("catenoid", "shifted_catenoid"):
        V = float(_get(params, "half_height", 2.0, 0))
        shift = 1.0 if name == "shifted_catenoid" else 0.0
        ch = _cosh(Var("v"))
        comps = (BinOp("-", BinOp("*", ch, Call("cos", Var("u"))), Num(shift)),
                 BinOp("*", ch, Call("sin", Var("u"))), Var("v"))
        dom = Domain2D.rectangle(-math.pi, math.pi, -V, V, periodic=(2 * math.pi, None))
        return SurfaceChart(comps, dom, label=name, origin_param=(0.0, 0.0) if shift else None,
                            params={"half_height": V})
    if name == "graph":
        src = _get(params, "expr", None, 0)
        if src is None:
            raise ChartError("graph needs an 'expr'")
        dom = _get(params, "domain", None, 1)
        dom = Domain2D.from_dict(dom) if isinstance(dom, dict) else (dom or Domain2D.rectangle(-2, 2, -2, 2))
        w = as_node(src)
        origin = (0.0, 0.0) if dom.contains(0.0, 0.0) and abs(float(eval_values(w, 0.0, 0.0))) < 1e-12 else None
        return SurfaceChart(("u", "v", w), dom, label=f"graph({pretty(w)})", graph=True,
                            origin_param=origin, params={"expr": pretty(w)})
    if name == "counterexample":
        alpha = float(_get(params, "alpha", 0.3, 0))
        eps = float(_get(params, "eps", 0.01, 1))
        if not 0 < alpha < 0.5:
            raise ChartError("counterexample needs alpha in (0, 1/2)")
        if not 0 < eps <= 0.5:
            raise ChartError("counterexample needs eps in (0, 1/2]")
        w = counterexample_expression(alpha, eps)
        return SurfaceChart(("u", "v", w), Domain2D.disk((0.0, 0.0), 0.5),
                            label=f"counterexample(alpha={alpha:g},eps={eps:g})", graph=True,
                            origin_param=(0.0, 0.0), params={"alpha": alpha, "eps": eps})
    raise ChartError(f"unknown builtin surface {name!r}; expected one of {BUILTINS}")


def _locate_origin_on_sphere(R, c, axis):
    c = np.asarray(c, float)
    if abs(np.linalg.norm(c) - R) > 1e-12 * max(1.0, R):
        return None
    # unit direction d with c + R d = 0, expressed in the chart's polar frame
    d = -c / R
    perm = {"z": (0, 1, 2), "x": (2, 0, 1), "y": (1, 2, 0)}[axis]
    local = np.empty(3)
    for i in range(3):
        local[perm[i]] = d[i]
    u = math.acos(max(-1.0, min(1.0, local[2])))
    v = math.atan2(local[1], local[0])
    return (u, v)


def chart_from_spec(spec: dict) -> SurfaceChart:
    """Build a chart from a config entry.

    Accepted forms: ``{"builtin": name, "params": {...}}``,
    ``{"graph": "<expr>", "domain": {...}}`` and
    ``{"parametric": ["<expr>", "<expr>", "<expr>"], "domain": {...}}``.
    An optional ``"label"`` overrides the default label.
    """
    if "builtin" in spec:
        chart = builtin_surface(spec["builtin"], spec.get("params", {}))
    elif "graph" in spec:
        chart = builtin_surface("graph", {"expr": spec["graph"], "domain": spec.get("domain")})
    elif "parametric" in spec:
        comps = spec["parametric"]
        if len(comps) != 3:
            raise ChartError("'parametric' needs three expressions")
        dom = Domain2D.from_dict(spec.get("domain", {"kind": "rectangle", "bounds": [-1, 1, -1, 1]}))
        origin = spec.get("origin_param")
        chart = SurfaceChart(tuple(parse_expression(c) for c in comps), dom,
                             origin_param=tuple(origin) if origin else None)
    else:
        raise ChartError("chart spec needs one of 'builtin', 'graph' or 'parametric'")
    if "label" in spec:
        chart = replace(chart, label=str(spec["label"]))
    return chart


def locate_point(chart: SurfaceChart, target=(0.0, 0.0, 0.0), tol: float = 1e-9):
    """A parameter point mapping to ``target``, or ``None``.

    Uses ``chart.origin_param`` when the target is the origin, otherwise a
    least-squares search from a grid of starting points.
    """
    from scipy.optimize import least_squares

    target = np.asarray(target, float)
    if chart.origin_param is not None and np.allclose(target, 0):
        return tuple(chart.origin_param)
    u, v = chart.domain.interior_samples(12)
    d = np.linalg.norm(chart.position(u, v) - target, axis=-1)
    best = None
    for k in np.argsort(d)[:4]:
        sol = least_squares(lambda p: chart.position(p[0], p[1]) - target, [u[k], v[k]],
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.norm(sol.fun) < tol and chart.domain.contains(*sol.x):
            best = (float(sol.x[0]), float(sol.x[1]))
            break
    return best
