"""Run configurations: field and base-point specs, the check registry and the report."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable, Optional

import jsonschema
import numpy as np

from . import verify as V
from .chart import ChartError, SurfaceChart, chart_from_spec
from .expr import ExpressionError
from .geometry import ScalarField, codazzi_residual, fundamental_forms, gauss_residual
from .integrals import QuadratureError, density_ratio, ratio_bound_check
from .intrinsic import IntrinsicError, chord_bound_check, shoot_geodesic
from .records import ProbeRecord, VerificationRecord
from .resolution import DEFAULT, Resolution


class ConfigError(ValueError):
    """A run configuration that does not validate."""


def load_schema() -> dict:
    return json.loads(resources.files("curvlab").joinpath("data/config.schema.json").read_text())


def default_config() -> dict:
    return json.loads(resources.files("curvlab").joinpath("data/default_config.json").read_text())


# ---------------------------------------------------------------------------
# spec helpers


def field_from_spec(spec) -> ScalarField:
    """``1.5`` / ``{"constant": c}``, ``"A2" | "H" | "H2" | "K"``, ``{"curvature": name}``,
    ``{"coordinate": k}`` (1-based), ``{"expr": "<expr in u, v>"}``, ``{"simons_remainder": c}``
    or ``"grad_H2"``.  Any other string is parsed as an expression."""
    if isinstance(spec, (int, float)):
        return ScalarField.constant(float(spec))
    if isinstance(spec, str):
        if spec in ("A2", "H", "H2", "K"):
            return ScalarField.curvature(spec)
        if spec == "grad_H2":
            return ScalarField.grad_H2()
        return ScalarField.parametric(spec)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"bad field spec {spec!r}")
    (kind, arg), = spec.items()
    if kind == "constant":
        return ScalarField.constant(float(arg))
    if kind == "curvature":
        return ScalarField.curvature(arg)
    if kind == "coordinate":
        if int(arg) not in (1, 2, 3):
            raise ConfigError("coordinate index must be 1, 2 or 3")
        return ScalarField.ambient_coordinate(int(arg) - 1)
    if kind == "expr":
        return ScalarField.parametric(arg)
    if kind == "simons_remainder":
        return ScalarField.simons_remainder(float(arg))
    raise ConfigError(f"unknown field kind {kind!r}")


def base_from_spec(chart: SurfaceChart, spec):
    if spec in (None, "origin"):
        return V.origin_param(chart)
    if isinstance(spec, (list, tuple)) and len(spec) == 2:
        return (float(spec[0]), float(spec[1]))
    raise ConfigError(f"bad base point {spec!r}")


# ---------------------------------------------------------------------------
# checks: each takes (chart, params, resolution, tolerances) and returns records


def _tol(tolerances, kind):
    return float(tolerances.get(kind, V.IDENTITY_TOL if kind == "identity" else V.INEQUALITY_TOL))


def _c_mvp_derivative(chart, prm, res, tols):
    return [V.check_mvp_derivative(chart, field_from_spec(prm.get("field", 1.0)), prm["r"], prm.get("dr"),
                                   res, _tol(tols, "identity"))]


def _c_mvp_integral(chart, prm, res, tols):
    return [V.check_mvp_integral(chart, field_from_spec(prm.get("field", 1.0)), prm["s"], prm["t"],
                                 res, _tol(tols, "identity"))]


def _c_gmean(chart, prm, res, tols):
    return list(V.check_gmean_inequalities(chart, field_from_spec(prm.get("field", 1.0)), prm["r"], prm["s"],
                                           prm["t"], prm.get("dr"), res, _tol(tols, "inequality")))


def _c_mvi(chart, prm, res, tols):
    h = prm.get("h_field")
    return [V.check_mvi(chart, field_from_spec(prm.get("field", 1.0)), prm.get("lambda1", 0.0),
                        field_from_spec(h) if h is not None else None, prm.get("c2", 0.0), prm.get("c3", 0.0),
                        prm.get("alpha", 0.0), res, _tol(tols, "inequality"))]


def _c_simons(chart, prm, res, tols):
    n = int(prm.get("n", 15))
    samples = None
    if "n_random" in prm:
        rng = np.random.default_rng(prm.get("seed", 0))
        u0, u1, v0, v1 = chart.domain.bbox
        pts = []
        while sum(len(p[0]) for p in pts) < prm["n_random"]:
            u, v = rng.uniform(u0, u1, 4 * prm["n_random"]), rng.uniform(v0, v1, 4 * prm["n_random"])
            keep = chart.domain.contains(u, v, 1e-6 * max(u1 - u0, v1 - v0))
            pts.append((u[keep], v[keep]))
        samples = (np.concatenate([p[0] for p in pts])[:prm["n_random"]],
                   np.concatenate([p[1] for p in pts])[:prm["n_random"]])
    grid = prm.get("c_grid", (0.0, 0.5, 1, 2, 4, 8, 16, 32, 64))
    return [V.check_simons(chart, samples, grid, float(tols.get("simons", 1e-8)), n)]


def _c_area_identities(chart, prm, res, tols):
    return V.check_area_identities(chart, base_from_spec(chart, prm.get("base")), prm["s"], prm.get("p", 3.0),
                                   res, _tol(tols, "identity"))


def _c_cylinder_curve(chart, prm, res, tols):
    return [V.check_cylinder_curve(chart, prm["s"], _tol(tols, "inequality"))]


def _c_chord_bound(chart, prm, res, tols):
    base = base_from_spec(chart, prm.get("base"))
    d = np.asarray(prm.get("direction", [1.0, 0.0]), float)
    g = fundamental_forms(chart, base, derivatives=0).g
    d = d / math.sqrt(d @ g @ d)
    path = shoot_geodesic(chart, base, d, prm["length"], rtol=res.ode_rtol, atol=res.ode_atol)
    return [chord_bound_check(path, chart, float(tols.get("chord", 1e-9)))]


def _c_density(chart, prm, res, tols):
    """Density ratios on a radius grid: equality with ``expected`` or monotone growth."""
    radii = [float(r) for r in prm["radii"]]
    f = field_from_spec(prm.get("field", 1.0))
    vals = [density_ratio(chart, f, r, resolution=res) for r in radii]
    out = []
    if "expected" in prm:
        for r, d in zip(radii, vals):
            out.append(VerificationRecord.identity("density_ratio", d, prm["expected"],
                                                   _tol(tols, "identity"), r=r))
    if prm.get("monotone", False):
        slack_tol = float(tols.get("monotone", 1e-4))
        for (r0, d0), (r1, d1) in zip(zip(radii, vals), zip(radii[1:], vals[1:])):
            out.append(VerificationRecord.inequality("density_monotone", d1, d0, ">=", slack_tol, r0=r0, r1=r1))
    return out


def _c_ratio_bound(chart, prm, res, tols):
    return [ratio_bound_check(chart, field_from_spec(prm.get("field", 1.0)), prm["s"], res,
                              _tol(tols, "inequality"))]


def _c_curvature_invariants(chart, prm, res, tols):
    rng = np.random.default_rng(prm.get("seed", 0))
    u, v = chart.domain.interior_samples(int(math.ceil(math.sqrt(prm.get("n", 100)))))
    jitter = rng.uniform(-0.25, 0.25, (2, len(u))) / math.sqrt(len(u))
    u0, u1, v0, v1 = chart.domain.bbox
    u, v = u + jitter[0] * (u1 - u0), v + jitter[1] * (v1 - v0)
    keep = chart.domain.contains(u, v)
    fd = fundamental_forms(chart, (u[keep], v[keep]), derivatives=1, strict=False)
    scale_g = 1.0 + fd.A_norm2
    g_res = float(np.max(np.abs(gauss_residual(fd)) / scale_g))
    sym, div = codazzi_residual(fd)
    c_res = float(np.max(np.maximum(sym, div) / (1.0 + np.sqrt(fd.A_norm2) ** 3)))
    n = int(keep.sum())
    return [VerificationRecord.identity("gauss_equation", g_res, 0.0, float(tols.get("gauss", 1e-9)), n_points=n),
            VerificationRecord.identity("codazzi", c_res, 0.0, float(tols.get("codazzi", 1e-8)), n_points=n)]


def _p_theorem(chart, prm, res, tols):
    base = base_from_spec(chart, prm.get("base"))
    return [V.theorem_probe(chart, base, s, prm.get("p", 3.0), res) for s in _s_list(prm)]


def _p_corollary(chart, prm, res, tols):
    base = base_from_spec(chart, prm.get("base"))
    return [V.corollary_probe(chart, base, s, prm.get("p", 3.0), res) for s in _s_list(prm)]


def _s_list(prm):
    s = prm["s"]
    return [float(x) for x in (s if isinstance(s, list) else [s])]


def _c_sweep(chart, prm, res, tols):
    sweep = V.counterexample_sweep(prm["alpha"], prm["eps"], res)
    return sweep.records


CHECKS: dict[str, Callable] = {
    "mvp_derivative": _c_mvp_derivative,
    "mvp_integral": _c_mvp_integral,
    "gmean": _c_gmean,
    "mvi": _c_mvi,
    "simons": _c_simons,
    "area_identities": _c_area_identities,
    "cylinder_curve": _c_cylinder_curve,
    "chord_bound": _c_chord_bound,
    "density": _c_density,
    "ratio_bound": _c_ratio_bound,
    "curvature_invariants": _c_curvature_invariants,
    "theorem_probe": _p_theorem,
    "corollary_probe": _p_corollary,
    "counterexample_sweep": _c_sweep,
}
NO_SURFACE = {"counterexample_sweep"}


# ---------------------------------------------------------------------------
# configuration and report


@dataclass
class RunConfig:
    surfaces: dict
    checks: list
    resolution: Resolution = DEFAULT
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: dict, resolution_scale: float = 1.0) -> "RunConfig":
        try:
            jsonschema.validate(cfg, load_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        try:
            surfaces = {name: chart_from_spec(spec) for name, spec in cfg.get("surfaces", {}).items()}
        except (ChartError, ExpressionError) as exc:
            raise ConfigError(f"surface spec: {exc}") from None
        for i, chk in enumerate(cfg["checks"]):
            if chk["check"] not in NO_SURFACE and chk.get("surface") not in surfaces:
                raise ConfigError(f"checks/{i}: unknown surface {chk.get('surface')!r}")
            for key in ("field", "h_field"):
                if key in chk.get("params", {}):
                    try:
                        field_from_spec(chk["params"][key])
                    except (ExpressionError, ValueError) as exc:
                        raise ConfigError(f"checks/{i}/params/{key}: {exc}") from None
        try:
            res = Resolution(**cfg.get("resolution", {})).scaled(resolution_scale)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"resolution: {exc}") from None
        return cls(surfaces, cfg["checks"], res, cfg.get("tolerances", {}), cfg.get("output", {}))

    @classmethod
    def load(cls, path, resolution_scale: float = 1.0) -> "RunConfig":
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(cfg, resolution_scale)


@dataclass
class RunReport:
    records: list
    environment: dict

    @property
    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "vacuous": 0, "probe": 0}
        for _, rec in self.records:
            out["probe" if isinstance(rec, ProbeRecord) else rec.verdict] += 1
        return out

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0

    def to_dict(self) -> dict:
        return {"records": [dict(rec.to_dict(), check=name, kind="probe" if isinstance(rec, ProbeRecord)
                                 else "verification") for name, rec in self.records],
                "environment": self.environment, "summary": self.summary}


def run_check(chk: dict, surfaces: dict, res: Resolution, tolerances: dict) -> list:
    """Run one configured check; runtime errors become failing records."""
    name = chk["check"]
    chart = surfaces.get(chk.get("surface"))
    try:
        return CHECKS[name](chart, chk.get("params", {}), res, tolerances)
    except (ChartError, IntrinsicError, QuadratureError, ExpressionError, ValueError, ArithmeticError) as exc:
        nan = float("nan")
        return [VerificationRecord(name, nan, nan, nan, 0.0, "fail", "==",
                                   {"error": f"{type(exc).__name__}: {exc}", "surface": chk.get("surface")})]


def run_suite(config: RunConfig, progress: Optional[Callable] = None) -> RunReport:
    records = []
    for chk in config.checks:
        label = f"{chk['check']}[{chk.get('surface', '')}]"
        recs = run_check(chk, config.surfaces, config.resolution, config.tolerances)
        records.extend((label, r) for r in recs)
        if progress:
            progress(label, recs)
    env = {"resolution": config.resolution.to_dict(), "tolerances": dict(config.tolerances),
           "surfaces": {k: c.label for k, c in config.surfaces.items()}}
    return RunReport(records, env)
