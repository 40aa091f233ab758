"""Verification reports: tolerance profiles, row/summary structure, JSON/CSV.

The JSON schema is versioned as ``bach3-report/1``: a provenance block
(engine version, differentiation config, grid, tolerance), the solution
parameters, one row per grid point in grid order, the columnwise summary,
and the verdict.  CSV output is the plain row table (header first, one line
per grid point) with full-precision shortest round-trip numbers, ready for
external plotting.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

SCHEMA = "bach3-report/1"

#: fixed CSV column order
COLUMNS = ("x1", "x2", "x3",
           "hessian_res", "laplace_res", "div_e_res", "curl_res", "trace_res",
           "cotton_norm", "bach_norm", "divb_norm", "div2b",
           "fcv_defect", "q_value")

#: summary key per checked column and the tolerance bound that gates it
CHECKS = {
    "hessian": "hessian_res",
    "laplace": "laplace_res",
    "div_e": "div_e_res",
    "curl": "curl_res",
    "trace": "trace_res",
    "cotton": "cotton_norm",
    "bach": "bach_norm",
    "divb": "divb_norm",
    "div2b": "div2b",
    "fcv": "fcv_defect",
}

_STRICT = {
    "hessian": 1e-7,
    "laplace": 1e-7,
    "div_e": 1e-7,
    "curl": 1e-7,
    "trace": 1e-8,
    "cotton": 1e-6,
    "bach": 1e-6,
    "divb": 1e-5,
    "div2b": 1e-4,
    "fcv": 1e-6,
}


@dataclass(frozen=True)
class ToleranceProfile:
    """Named per-check bounds; every bound is strictly positive."""

    name: str
    bounds: dict

    def __post_init__(self):
        unknown = set(self.bounds) - set(_STRICT)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        if any(not b > 0 for b in self.bounds.values()):
            raise ValueError("all tolerance bounds must be > 0")

    @classmethod
    def strict_ad(cls) -> "ToleranceProfile":
        return cls("strict-ad", dict(_STRICT))

    @classmethod
    def loose_fd(cls) -> "ToleranceProfile":
        return cls("loose-fd", {k: 100.0 * v for k, v in _STRICT.items()})

    @classmethod
    def from_name(cls, name: str) -> "ToleranceProfile":
        if name == "strict-ad":
            return cls.strict_ad()
        if name == "loose-fd":
            return cls.loose_fd()
        raise ValueError(f"unknown tolerance profile {name!r} (strict-ad | loose-fd)")

    def with_overrides(self, **bounds) -> "ToleranceProfile":
        merged = dict(self.bounds)
        merged.update(bounds)
        return ToleranceProfile(self.name + "+custom", merged)


@dataclass
class ReportRow:
    point: tuple
    hessian_res: float
    laplace_res: float
    div_e_res: float
    curl_res: float
    trace_res: float
    cotton_norm: float
    bach_norm: float | None = None
    divb_norm: float | None = None
    div2b: float | None = None
    fcv_defect: float | None = None
    q_value: float | None = None

    def as_record(self) -> dict:
        rec = {"x1": self.point[0], "x2": self.point[1], "x3": self.point[2]}
        for key in COLUMNS[3:]:
            rec[key] = getattr(self, key)
        return rec


@dataclass
class ResidualReport:
    solution: dict
    provenance: dict
    rows: list
    tolerance: ToleranceProfile
    summary: dict = field(default_factory=dict)
    q_sign: dict = field(default_factory=dict)
    verdict: bool = False
    failed_checks: list = field(default_factory=list)

    def finalize(self) -> "ResidualReport":
        """Columnwise maxima, Q-sign uniformity, and the pass/fail verdict."""
        summary = {}
        for col in COLUMNS[3:]:
            vals = [abs(getattr(r, col)) for r in self.rows if getattr(r, col) is not None]
            summary[col + "_max"] = max(vals) if vals else None
        qs = [r.q_value for r in self.rows if r.q_value is not None]
        if qs:
            pos, neg = sum(q > 0 for q in qs), sum(q < 0 for q in qs)
            uniform = (pos == len(qs)) or (neg == len(qs))
            sign = 1 if pos == len(qs) else (-1 if neg == len(qs) else 0)
        else:
            uniform, sign = None, None
        self.q_sign = {"uniform": uniform, "sign": sign, "defined_points": len(qs)}
        failed = []
        for check, col in CHECKS.items():
            bound = self.tolerance.bounds.get(check)
            value = summary.get(col + "_max")
            if bound is not None and value is not None and value > bound:
                failed.append(f"{check}: {value:.3e} > {bound:.1e}")
        self.summary = summary
        self.failed_checks = failed
        self.verdict = not failed
        return self

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "solution": self.solution,
            "provenance": self.provenance,
            "tolerance": {"name": self.tolerance.name, "bounds": dict(self.tolerance.bounds)},
            "rows": [r.as_record() for r in self.rows],
            "summary": self.summary,
            "q_sign": self.q_sign,
            "verdict": "pass" if self.verdict else "fail",
            "failed_checks": list(self.failed_checks),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    def to_csv(self) -> str:
        lines = [",".join(COLUMNS)]
        for row in self.rows:
            rec = row.as_record()
            lines.append(",".join("" if rec[c] is None else repr(float(rec[c]))
                                  for c in COLUMNS))
        return "\n".join(lines) + "\n"
