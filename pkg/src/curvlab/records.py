"""Result records shared by the verification layer and the CLI."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

RELATIONS = ("==", "<=", ">=")


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class VerificationRecord:
    """One identity or inequality check.

    ``relation`` reads ``lhs <relation> rhs``.  For identities ``residual``
    is ``lhs - rhs``; for inequalities it is the slack (``rhs - lhs`` for
    ``<=``, ``lhs - rhs`` for ``>=``) so that negative means violated.
    """

    id: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    verdict: str
    relation: str = "=="
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @classmethod
    def identity(cls, id, lhs, rhs, tolerance, **metadata):
        residual = float(lhs) - float(rhs)
        ok = abs(residual) <= tolerance
        return cls(id, float(lhs), float(rhs), residual, float(tolerance), "pass" if ok else "fail", "==", metadata)

    @classmethod
    def inequality(cls, id, lhs, rhs, relation, tolerance, **metadata):
        if relation not in ("<=", ">="):
            raise ValueError(f"bad relation {relation!r}")
        slack = float(rhs) - float(lhs) if relation == "<=" else float(lhs) - float(rhs)
        ok = slack >= -tolerance
        return cls(id, float(lhs), float(rhs), slack, float(tolerance), "pass" if ok else "fail", relation, metadata)

    def as_vacuous(self, reason: str):
        meta = dict(self.metadata, vacuous_reason=reason)
        return replace(self, verdict="vacuous", metadata=meta)

    @classmethod
    def vacuous(cls, id, reason, relation="<=", **metadata):
        nan = float("nan")
        return cls(id, nan, nan, nan, 0.0, "vacuous", relation, dict(metadata, vacuous_reason=reason))

    def to_dict(self):
        d = asdict(self)
        for k in ("lhs", "rhs", "residual", "tolerance"):
            d[k] = _finite_or_none(d[k])
        d["metadata"] = {k: (_finite_or_none(v) if isinstance(v, float) else v) for k, v in self.metadata.items()}
        return d


@dataclass(frozen=True)
class ProbeRecord:
    """Measured hypothesis and conclusion quantities of a curvature-estimate probe."""

    label: str
    s: float
    p: float
    inj_lb: float
    total_curv: float
    starred_W1p: float
    starred_W22: float
    s2A0: float
    thm21_scan_max: float
    area_ratio: float
    corollary_min: Optional[float] = None
    flags: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    CSV_COLUMNS = ("label", "s", "p", "inj_lb", "total_curv", "starred_W1p", "starred_W22",
                   "s2A0", "thm21_scan_max", "area_ratio")

    def to_dict(self):
        return asdict(self)
