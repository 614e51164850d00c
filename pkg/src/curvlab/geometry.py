"""Pointwise differential geometry of a chart.

Conventions:

* ``n = F_u x F_v / |F_u x F_v|`` and ``h_ij = <F_ij, n>``;
* ``H`` is the trace ``g^ij h_ij`` (sum of principal curvatures, not the
  average) and the mean curvature vector ``H n`` equals ``Laplace(F)``;
* ``|A|^2 = g^ik g^jl h_ij h_kl`` (sum of squared principal curvatures);
* ``nabla^2 H`` is the covariant Hessian and ``|nabla^2 H|^2`` contracts
  both index pairs with the inverse metric.

All functions accept scalar or array parameter coordinates and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import SimpleNamespace
from typing import Callable, Optional

import numpy as np

from .chart import SurfaceChart, ambient_isometry  # noqa: F401  (re-exported)
from .expr import as_node
from .jets import Jet, eval_jet, sqrt as jsqrt

COND_LIMIT = 1e12
CHUNK = 8192


class DegenerateMetricError(ValueError):
    pass


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def geometry_jets(chart: SurfaceChart, u, v, order: int = 0):
    """Jets of the fundamental-form quantities, accurate to ``order``.

    Needs chart jets of order ``order + 2``.  Returns a namespace with
    ``F, Fu, Fv, Fuu, Fuv, Fvv`` (lists of three jets), ``g11, g12, g22``,
    ``gi11, gi12, gi22``, ``n``, ``h11, h12, h22``, ``S`` (shape operator
    ``g^-1 h`` as a nested list), ``H, A2, K`` and ``detg``.
    """
    F = chart.jets(u, v, order + 2)
    Fu = [c.deriv(0) for c in F]
    Fv = [c.deriv(1) for c in F]
    Fuu = [c.deriv(0) for c in Fu]
    Fuv = [c.deriv(1) for c in Fu]
    Fvv = [c.deriv(1) for c in Fv]
    g11, g12, g22 = _dot(Fu, Fu), _dot(Fu, Fv), _dot(Fv, Fv)
    N = _cross(Fu, Fv)
    inv_len = 1.0 / jsqrt(_dot(N, N))
    n = [c * inv_len for c in N]
    h11, h12, h22 = _dot(Fuu, n), _dot(Fuv, n), _dot(Fvv, n)
    detg = g11 * g22 - g12 * g12
    inv_det = 1.0 / detg
    gi11, gi12, gi22 = g22 * inv_det, -g12 * inv_det, g11 * inv_det
    S11 = gi11 * h11 + gi12 * h12
    S12 = gi11 * h12 + gi12 * h22
    S21 = gi12 * h11 + gi22 * h12
    S22 = gi12 * h12 + gi22 * h22
    H = S11 + S22
    A2 = S11 * S11 + S22 * S22 + 2.0 * (S12 * S21)
    K = (h11 * h22 - h12 * h12) * inv_det
    return SimpleNamespace(F=F, Fu=Fu, Fv=Fv, Fuu=Fuu, Fuv=Fuv, Fvv=Fvv, g11=g11, g12=g12, g22=g22,
                           gi11=gi11, gi12=gi12, gi22=gi22, n=n, h11=h11, h12=h12, h22=h22,
                           S=[[S11, S12], [S21, S22]], H=H, A2=A2, K=K, detg=detg)


def _mat(a11, a12, a21, a22):
    return np.stack([np.stack([a11, a12], -1), np.stack([a21, a22], -1)], -2)


def _vec3(jets):
    return np.stack([j.value for j in jets], -1)


@dataclass(frozen=True)
class FundamentalData:
    """Pointwise geometric state; arrays carry the batch shape as leading axes.

    Index conventions: ``christoffels[..., k, i, j] = Gamma^k_ij``,
    ``nabla_A[..., i, j, k] = nabla_i h_jk``.  Fields that need more
    derivatives than were requested are ``None``.
    """

    x: np.ndarray
    Fu: np.ndarray
    Fv: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    n: np.ndarray
    h: np.ndarray
    H_scalar: np.ndarray
    H_vec: np.ndarray
    A_norm2: np.ndarray
    K: np.ndarray
    christoffels: np.ndarray
    area_element: np.ndarray
    grad_H: Optional[np.ndarray] = None
    grad_H_norm: Optional[np.ndarray] = None
    grad_H_vec: Optional[np.ndarray] = None
    nabla_A: Optional[np.ndarray] = None
    grad_A2: Optional[np.ndarray] = None
    hess_H: Optional[np.ndarray] = None
    hess_H_norm: Optional[np.ndarray] = None
    lap_A2: Optional[np.ndarray] = None

    def raise_both(self, T):
        """``g^ik g^jl T_kl``-contraction helper: returns ``g^ik g^jl T_ij T_kl``."""
        gi = self.g_inv
        return np.einsum("...ik,...jl,...ij,...kl->...", gi, gi, T, T)

    @property
    def principal_curvatures(self):
        disc = np.sqrt(np.maximum(2.0 * self.A_norm2 - self.H_scalar ** 2, 0.0))
        return (self.H_scalar + disc) / 2.0, (self.H_scalar - disc) / 2.0


def _covariant_hessian(d1, d2, gamma):
    """``(nabla^2 f)_ij = d_i d_j f - Gamma^k_ij d_k f``."""
    return d2 - np.einsum("...kij,...k->...ij", gamma, d1)


def fundamental_forms(chart: SurfaceChart, p, derivatives: int = 2, strict: bool = True) -> FundamentalData:
    """Fundamental forms and curvature data at parameter point(s) ``p = (u, v)``.

    ``derivatives`` selects how many derivatives of the curvature are
    computed: 0 gives forms and curvatures only (chart jets of order 2),
    1 adds ``grad_H`` and ``nabla_A`` (order 3), 2 adds ``hess_H`` and
    ``lap_A2`` (order 4).  With ``strict`` a metric with condition number
    above 1e12 raises :class:`DegenerateMetricError`.
    """
    u, v = np.broadcast_arrays(np.asarray(p[0], float), np.asarray(p[1], float))
    if u.size > CHUNK:
        # bounded batches keep the jet temporaries cache-resident
        parts = [fundamental_forms(chart, (uc, vc), derivatives, strict)
                 for uc, vc in zip(np.array_split(u.ravel(), -(-u.size // CHUNK)),
                                   np.array_split(v.ravel(), -(-u.size // CHUNK)))]
        merged = {}
        for name in FundamentalData.__dataclass_fields__:
            vals = [getattr(q, name) for q in parts]
            merged[name] = None if vals[0] is None else np.concatenate(vals).reshape(u.shape + vals[0].shape[1:])
        return FundamentalData(**merged)
    with np.errstate(divide="ignore", invalid="ignore"):  # degenerate points are caught below
        G = geometry_jets(chart, u, v, derivatives)
    g = _mat(G.g11.value, G.g12.value, G.g12.value, G.g22.value)
    if strict:
        ev = np.linalg.eigvalsh(g)
        bad = ~(ev[..., 0] > 0) | (ev[..., 1] > COND_LIMIT * ev[..., 0])
        if np.any(bad):
            raise DegenerateMetricError(f"degenerate metric on chart {chart.label!r}")
    gi = _mat(G.gi11.value, G.gi12.value, G.gi12.value, G.gi22.value)
    h = _mat(G.h11.value, G.h12.value, G.h12.value, G.h22.value)
    Fu, Fv = _vec3(G.Fu), _vec3(G.Fv)
    n = _vec3(G.n)
    H = G.H.value
    # Gamma^k_ij = g^kl <F_ij, F_l>
    Fij = [[G.Fuu, G.Fuv], [G.Fuv, G.Fvv]]
    Fl = [G.Fu, G.Fv]
    low = np.stack([np.stack([np.stack([_dot(Fij[i][j], Fl[l]).value for l in range(2)], -1)
                              for j in range(2)], -2) for i in range(2)], -3)  # [..., i, j, l]
    gamma = np.einsum("...kl,...ijl->...kij", gi, low)
    out = dict(x=_vec3(G.F), Fu=Fu, Fv=Fv, g=g, g_inv=gi, n=n, h=h, H_scalar=H,
               H_vec=H[..., None] * n, A_norm2=G.A2.value, K=G.K.value, christoffels=gamma,
               area_element=np.sqrt(G.detg.value))
    if derivatives >= 1:
        dH = np.stack([G.H.deriv(0).value, G.H.deriv(1).value], -1)
        raised = np.einsum("...ij,...j->...i", gi, dH)
        out["grad_H"] = dH
        out["grad_H_norm"] = np.sqrt(np.maximum(np.einsum("...i,...i->...", raised, dH), 0.0))
        out["grad_H_vec"] = raised[..., :1] * Fu + raised[..., 1:] * Fv
        hj = [[G.h11, G.h12], [G.h12, G.h22]]
        dh = np.stack([_mat(*(hj[a][b].deriv(i).value for a in range(2) for b in range(2)))
                       for i in range(2)], -3)  # [..., i, j, k] = d_i h_jk
        nab = (dh - np.einsum("...mij,...mk->...ijk", gamma, h)
               - np.einsum("...mik,...jm->...ijk", gamma, h))
        out["nabla_A"] = nab
        out["grad_A2"] = np.stack([G.A2.deriv(0).value, G.A2.deriv(1).value], -1)
    if derivatives >= 2:
        H_u, H_v = G.H.deriv(0), G.H.deriv(1)
        d2H = _mat(H_u.deriv(0).value, H_u.deriv(1).value, H_v.deriv(0).value, H_v.deriv(1).value)
        hess = _covariant_hessian(out["grad_H"], d2H, gamma)
        out["hess_H"] = hess
        out["hess_H_norm"] = np.sqrt(np.maximum(np.einsum("...ik,...jl,...ij,...kl->...", gi, gi, hess, hess), 0.0))
        A_u, A_v = G.A2.deriv(0), G.A2.deriv(1)
        d2A = _mat(A_u.deriv(0).value, A_u.deriv(1).value, A_v.deriv(0).value, A_v.deriv(1).value)
        out["lap_A2"] = np.einsum("...ij,...ij->...", gi, _covariant_hessian(out["grad_A2"], d2A, gamma))
    return FundamentalData(**out)


# ---------------------------------------------------------------------------
# scalar fields


class ScalarField:
    """A scalar function on the surface with access to parameter derivatives.

    ``fn(chart, u, v, order)`` must return a :class:`Jet` of the requested
    order (0, 1 or 2); ``max_order`` is the highest order it supports.
    """

    def __init__(self, fn: Callable, label: str = "f", max_order: int = 2):
        self._fn = fn
        self.label = label
        self.max_order = max_order

    def __repr__(self):
        return f"ScalarField({self.label})"

    def jets(self, chart, u, v, order: int = 0) -> Jet:
        if order > self.max_order:
            raise ValueError(f"field {self.label!r} supports derivatives up to order {self.max_order}")
        return self._fn(chart, np.asarray(u, float), np.asarray(v, float), order)

    def values(self, chart, u, v) -> np.ndarray:
        return self.jets(chart, u, v, 0).value

    # -- constructors -----------------------------------------------------------
    @classmethod
    def constant(cls, c: float):
        def fn(chart, u, v, order):
            return Jet.constant(float(c), order, np.broadcast_shapes(u.shape, v.shape))
        return cls(fn, f"{c:g}", max_order=4)

    @classmethod
    def parametric(cls, expression):
        """A field given by an expression in the parameters ``u, v``."""
        node = as_node(expression)
        return cls(lambda chart, u, v, order: eval_jet(node, u, v, order), f"param[{expression}]", 4)

    @classmethod
    def ambient_coordinate(cls, k: int):
        """The restriction of the ambient coordinate ``x_k`` (0-based)."""
        return cls(lambda chart, u, v, order: eval_jet(chart.components[k], u, v, order), f"x{k + 1}", 4)

    @classmethod
    def curvature(cls, name: str):
        """Curvature quantity: ``'A2'`` (|A|^2), ``'H'``, ``'H2'`` or ``'K'``."""
        if name not in ("A2", "H", "H2", "K"):
            raise ValueError(f"unknown curvature field {name!r}")

        def fn(chart, u, v, order):
            G = geometry_jets(chart, u, v, order)
            if name == "H2":
                return G.H * G.H
            return getattr(G, name)
        return cls(fn, name, max_order=2)

    @classmethod
    def grad_H2(cls):
        """``|nabla H|^2``."""
        def fn(chart, u, v, order):
            G = geometry_jets(chart, u, v, order + 1)
            hu, hv = G.H.deriv(0), G.H.deriv(1)
            return G.gi11.truncate(order) * hu * hu + 2.0 * (G.gi12 * hu * hv) + G.gi22 * hv * hv
        return cls(fn, "|grad H|^2", max_order=1)

    @classmethod
    def simons_remainder(cls, c: float):
        """``c |nabla H|^2 - 2 h^ij (nabla^2 H)_ij`` (values only)."""
        def fn(chart, u, v, order):
            fd = fundamental_forms(chart, (u, v), derivatives=2, strict=False)
            val = c * fd.grad_H_norm ** 2 - 2.0 * _contract_raised(fd.g_inv, fd.h, fd.hess_H)
            return Jet(val[None], 0)
        return cls(fn, f"{c:g}|grad H|^2 - 2 h.hess H", max_order=0)


def _contract_raised(gi, a, b):
    """``g^ik g^jl a_ij b_kl``."""
    return np.einsum("...ik,...jl,...ij,...kl->...", gi, gi, a, b)


def laplace_beltrami(chart: SurfaceChart, field: ScalarField, p) -> np.ndarray:
    """``g^ij (d_i d_j f - Gamma^k_ij d_k f)`` at parameter point(s) ``p``."""
    u, v = np.asarray(p[0], float), np.asarray(p[1], float)
    fd = fundamental_forms(chart, (u, v), derivatives=0)
    f = field.jets(chart, u, v, 2)
    d1 = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
    d2 = _mat(f.partial(2, 0), f.partial(1, 1), f.partial(1, 1), f.partial(0, 2))
    return np.einsum("...ij,...ij->...", fd.g_inv, _covariant_hessian(d1, d2, fd.christoffels))


def tangential_gradient(chart: SurfaceChart, field: ScalarField, p, fd: FundamentalData = None):
    """Ambient vector ``nabla f = g^ij d_j f F_i`` at ``p``."""
    u, v = np.asarray(p[0], float), np.asarray(p[1], float)
    fd = fd if fd is not None else fundamental_forms(chart, (u, v), derivatives=0, strict=False)
    f = field.jets(chart, u, v, 1)
    d1 = np.stack([f.partial(1, 0), f.partial(0, 1)], -1)
    raised = np.einsum("...ij,...j->...i", fd.g_inv, d1)
    return raised[..., :1] * fd.Fu + raised[..., 1:] * fd.Fv


def simons_defect(chart: SurfaceChart, p, c: float = 0.0) -> np.ndarray:
    """``Lap|A|^2 - 2 h^ij (nabla^2 H)_ij + 2 |A|^4 + c |nabla H|^2``.

    Nonnegative exactly where the Simons-type inequality holds with constant ``c``.
    """
    fd = fundamental_forms(chart, p, derivatives=2)
    return simons_terms(fd, c)


def simons_terms(fd: FundamentalData, c: float = 0.0):
    return (fd.lap_A2 - 2.0 * _contract_raised(fd.g_inv, fd.h, fd.hess_H)
            + 2.0 * fd.A_norm2 ** 2 + c * fd.grad_H_norm ** 2)


def nabla_A_norm2(fd: FundamentalData) -> np.ndarray:
    """``|nabla A|^2 = g^ia g^jb g^kc nabla_i h_jk nabla_a h_bc``."""
    gi = fd.g_inv
    return np.einsum("...ia,...jb,...kc,...ijk,...abc->...", gi, gi, gi, fd.nabla_A, fd.nabla_A)


def codazzi_residual(fd: FundamentalData):
    """``max |nabla_1 h_2k - nabla_2 h_1k|`` and the ``div A - dH`` residual."""
    nab = fd.nabla_A
    sym = np.max(np.abs(nab[..., 0, 1, :] - nab[..., 1, 0, :]), axis=-1)
    div = np.einsum("...ij,...ijk->...k", fd.g_inv, nab) - fd.grad_H
    return sym, np.max(np.abs(div), axis=-1)


def gauss_residual(fd: FundamentalData):
    """``K - (H^2 - |A|^2) / 2``."""
    return fd.K - (fd.H_scalar ** 2 - fd.A_norm2) / 2.0
