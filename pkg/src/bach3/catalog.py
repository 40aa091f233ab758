"""Exact-solution catalog: builders, the horizon root-finder, verification.

Four families, all with E proportional to ∂_r and a radial lapse:

* charged Nariai:  g = dr² + φ² g_{S²}, f = sin(αr), E = (q/φ²)∂_r,
  α = √(Λ − q²/φ⁴), valid for 1/(2Λ) < φ² < 1/Λ and 0 < |q| ≤ φ²√Λ;
* cold black hole: same metric, f = sinh(βr), β = √(q²/φ⁴ − Λ),
  valid for 0 < φ² < 1/(2Λ) and |q| ≥ φ²√Λ;
* ultracold black hole: φ² = 1/(4Λ) = q², f = r, E = √Λ ∂_r — built
  exactly as printed; its angular Hessian and trace residuals do not vanish
  and the report carries them verbatim;
* RNdS: g = f⁻²dr² + r² g_{S²} with f² = 1 − 2m/r + q²/r² − Λr²/3 between
  the horizon radii r₊ < r_c (the last two positive roots of the lapse
  polynomial), E = (q/r²) f ∂_r.

When q is omitted for Nariai/cold it is derived from the angular balance
q² = φ²(1 − Λφ²) that the field equations force, then cross-checked against
the catalog inequalities.  The mass m never enters the 3-metric for the
product families and is kept as metadata.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .diff import AD, DiffConfig
from .electro import (ElectroFrame, ElectrostaticSystem, cotton_form_defect,
                      ld_profile, residual_suite)
from .errors import (EmptyGrid, GradientVanishes, NegativeDiscriminant,
                     NoPositiveRoots, ParameterOutOfRange)
from .fields import Chart, MetricField, ScalarField, VectorField
from .jets import sin, sinh, sqrt
from .report import ReportRow, ResidualReport, ToleranceProfile
from .curvature import jet_values

KINDS = ("nariai", "cold", "ultracold", "rnds")

#: spherical fiber pole margin (the metric degenerates at sin θ = 0)
THETA_MIN = 0.3

#: RNdS radial inset, as a fraction of r_c − r₊
RNDS_HORIZON_MARGIN = 1e-2


@dataclass(frozen=True)
class SolutionSpec:
    """Parameters of one catalog solution; ``derived`` is filled on validation."""

    kind: str
    lam: float
    phi2: float | None = None
    q: float | None = None
    m: float | None = None
    derived: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterOutOfRange(f"unknown solution kind {self.kind!r}; one of {KINDS}")

    def to_keyvalues(self) -> str:
        pairs = [("kind", self.kind), ("lambda", self.lam), ("phi2", self.phi2),
                 ("q", self.q), ("m", self.m)]
        return "\n".join(f"{k}={v}" for k, v in pairs if v is not None) + "\n"

    @classmethod
    def from_keyvalues(cls, text: str) -> "SolutionSpec":
        data = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
        if "kind" not in data or "lambda" not in data:
            raise ParameterOutOfRange("key=value spec needs at least kind= and lambda=")
        num = {k: float(data[k]) for k in ("lambda", "phi2", "q", "m") if k in data}
        return cls(kind=data["kind"], lam=num["lambda"], phi2=num.get("phi2"),
                   q=num.get("q"), m=num.get("m"))


def _nariai_mass_sq(q: float, lam: float) -> float | None:
    disc = 1.0 - 4.0 * q * q * lam
    if disc < 0.0:
        return None
    return (1.0 + 12.0 * q * q * lam + math.sqrt(disc ** 3)) / (18.0 * lam)


def normalize_spec(spec: SolutionSpec) -> SolutionSpec:
    """Validate parameter ranges and fill derived quantities.

    Raises ParameterOutOfRange naming the violated inequality, or
    NegativeDiscriminant when α² or β² comes out negative.
    """
    if not spec.lam > 0.0:
        raise ParameterOutOfRange(f"Λ = {spec.lam:g} violates Λ > 0")
    lam = spec.lam
    derived: dict = {}

    if spec.kind in ("nariai", "cold"):
        if spec.phi2 is None:
            raise ParameterOutOfRange(f"{spec.kind} needs phi2 (fiber radius²)")
        phi2 = spec.phi2
        if spec.kind == "nariai":
            if not 1.0 / (2.0 * lam) < phi2:
                raise ParameterOutOfRange(
                    f"φ² = {phi2:g} violates 1/(2Λ) < φ² (1/(2Λ) = {1/(2*lam):g})")
            if not phi2 < 1.0 / lam:
                raise ParameterOutOfRange(
                    f"φ² = {phi2:g} violates φ² < 1/Λ (1/Λ = {1/lam:g})")
        else:
            if not 0.0 < phi2 < 1.0 / (2.0 * lam):
                raise ParameterOutOfRange(
                    f"φ² = {phi2:g} violates 0 < φ² < 1/(2Λ) (1/(2Λ) = {1/(2*lam):g})")
        q = spec.q
        if q is None:
            q2 = phi2 * (1.0 - lam * phi2)
            if q2 <= 0.0:
                raise ParameterOutOfRange(f"derived q² = {q2:g} not positive")
            q = math.sqrt(q2)
            derived["q_derived"] = True
        if spec.kind == "nariai" and not abs(q) <= phi2 * math.sqrt(lam) * (1.0 + 1e-12):
            raise ParameterOutOfRange(
                f"|q| = {abs(q):g} violates |q| ≤ φ²√Λ ({phi2*math.sqrt(lam):g})")
        if spec.kind == "cold" and not abs(q) >= phi2 * math.sqrt(lam) * (1.0 - 1e-12):
            raise ParameterOutOfRange(
                f"|q| = {abs(q):g} violates φ²√Λ ≤ |q| ({phi2*math.sqrt(lam):g})")
        if spec.kind == "nariai":
            alpha2 = lam - q * q / phi2 ** 2
            if alpha2 <= 0.0:
                raise NegativeDiscriminant(f"α² = Λ − q²/φ⁴ = {alpha2:g} ≤ 0")
            derived["alpha"] = math.sqrt(alpha2)
        else:
            beta2 = q * q / phi2 ** 2 - lam
            if beta2 <= 0.0:
                raise NegativeDiscriminant(f"β² = q²/φ⁴ − Λ = {beta2:g} ≤ 0")
            derived["beta"] = math.sqrt(beta2)
        m2 = _nariai_mass_sq(q, lam)
        if m2 is not None:
            derived["mass_sq"] = m2
        return replace(spec, q=q, derived=derived)

    if spec.kind == "ultracold":
        phi2 = spec.phi2 if spec.phi2 is not None else 1.0 / (4.0 * lam)
        if abs(phi2 - 1.0 / (4.0 * lam)) > 1e-12 * (1.0 + phi2):
            raise ParameterOutOfRange(
                f"ultracold requires φ² = 1/(4Λ) = {1/(4*lam):g}, got {phi2:g}")
        q = spec.q if spec.q is not None else math.sqrt(phi2)
        if abs(q * q - phi2) > 1e-12 * (1.0 + phi2):
            raise ParameterOutOfRange(f"ultracold requires q² = φ², got q² = {q*q:g}")
        derived["mass"] = math.sqrt(2.0 / lam) / 3.0
        return replace(spec, phi2=phi2, q=q, derived=derived)

    # RNdS
    if spec.m is None or not spec.m > 0.0:
        raise ParameterOutOfRange("RNdS needs mass m > 0")
    q = spec.q if spec.q is not None else 0.0
    roots = horizon_roots(spec.m, q, lam)
    radii = [r for r, _ in roots]
    if len(radii) < 2:
        raise ParameterOutOfRange(
            f"lapse polynomial has {len(radii)} positive root(s); no static region (r₊, r_c)")
    r_plus, r_c = radii[-2], radii[-1]
    mid = 0.5 * (r_plus + r_c)
    if _rnds_lapse_sq(mid, spec.m, q, lam) <= 0.0:
        raise ParameterOutOfRange("f² not positive between the last two roots; "
                                  "parameters give no static region")
    derived.update(r_plus=r_plus, r_c=r_c, roots=radii,
                   multiplicities=[mult for _, mult in roots])
    return replace(spec, q=q, derived=derived)


def _rnds_lapse_sq(r: float, m: float, q: float, lam: float) -> float:
    return 1.0 - 2.0 * m / r + q * q / (r * r) - lam * r * r / 3.0


def lapse_polynomial(r, m: float, q: float, lam: float):
    """P(r) = q² − 2mr + r² − Λr⁴/3 = r²·f(r)²; jets welcome."""
    return q * q - 2.0 * m * r + r * r - lam * r ** 4 / 3.0


def horizon_roots(m: float, q: float, lam: float,
                  cells: int = 10_000) -> list[tuple[float, int]]:
    """Positive roots of the lapse polynomial, sorted, with multiplicities.

    Sign-change bracketing on a uniform mesh over (0, 2√(3/Λ)] (or (0, 10m]
    when Λ = 0), bisection to 1e−13 relative, one Newton polish.  Tangential
    (even-multiplicity) roots are caught by running the same sweep on P'.
    Λ = 0 is accepted as a degenerate cross-check.
    """
    if not math.isfinite(m) or not math.isfinite(q) or not math.isfinite(lam):
        raise ParameterOutOfRange("parameters must be finite")
    if lam < 0.0:
        raise ParameterOutOfRange("Λ ≥ 0 required for the root sweep")
    upper = 2.0 * math.sqrt(3.0 / lam) if lam > 0.0 else 10.0 * m
    if not upper > 0.0:
        raise ParameterOutOfRange("empty bracketing interval")

    def p(r):
        return lapse_polynomial(r, m, q, lam)

    def dp(r):
        return -2.0 * m + 2.0 * r - 4.0 * lam * r ** 3 / 3.0

    def scale(r):
        return max(1.0, q * q, 2.0 * m * abs(r), r * r, lam * r ** 4 / 3.0)

    def bisect(fn, lo, hi):
        flo = fn(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= 1e-13 * max(1.0, abs(mid)):
                return mid
            fmid = fn(mid)
            if fmid == 0.0:
                return mid
            if (flo < 0.0) != (fmid < 0.0):
                hi = mid
            else:
                lo, flo = mid, fmid
        return 0.5 * (lo + hi)

    def sweep(fn):
        xs = np.linspace(0.0, upper, cells + 1)[1:]
        vals = np.array([fn(x) for x in xs])
        found = []
        for i in range(len(xs) - 1):
            if vals[i] == 0.0:
                found.append(xs[i])
            elif (vals[i] < 0.0) != (vals[i + 1] < 0.0):
                found.append(bisect(fn, xs[i], xs[i + 1]))
        if vals[-1] == 0.0:
            found.append(xs[-1])
        return found

    roots = []
    for r in sweep(p):
        d = dp(r)
        if d != 0.0:
            r = r - p(r) / d  # Newton polish
        if r > 0.0 and abs(p(r)) <= 1e-12 * scale(r):
            roots.append(r)
    # tangential roots: critical points of P where P itself vanishes
    for r in sweep(dp):
        if r > 0.0 and abs(p(r)) <= 1e-12 * scale(r):
            roots.append(r)

    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not (merged and abs(r - merged[-1]) <= 1e-9 * max(1.0, abs(r))):
            merged.append(r)
    out = []
    for r in merged:
        mult = 2 if abs(dp(r)) <= 1e-6 * scale(r) else 1
        out.append((r, mult))
    if not out:
        raise NoPositiveRoots(
            f"no positive roots of the lapse polynomial on (0, {upper:g}]")
    return out


def build_solution(spec: SolutionSpec) -> ElectrostaticSystem:
    """Chart, metric, lapse and electric field for a validated spec."""
    spec = normalize_spec(spec)
    lam = spec.lam
    theta = (THETA_MIN, math.pi - THETA_MIN)
    phi_dom = (0.0, 2.0 * math.pi)

    if spec.kind in ("nariai", "cold", "ultracold"):
        phi2 = spec.phi2
        if spec.kind == "nariai":
            r_max = math.pi / spec.derived["alpha"]
            alpha = spec.derived["alpha"]
            lapse_fn = lambda r, t, p: sin(alpha * r)
            strength = spec.q / phi2
        elif spec.kind == "cold":
            beta = spec.derived["beta"]
            r_max = 2.0 / beta
            lapse_fn = lambda r, t, p: sinh(beta * r)
            strength = spec.q / phi2
        else:
            r_max = 2.5 / math.sqrt(lam)
            lapse_fn = lambda r, t, p: r
            strength = math.sqrt(lam)  # as printed; see the catalog notes
        chart = Chart(spec.kind, ((0.0, r_max), theta, phi_dom),
                      labels=("r", "theta", "phi"))
        metric = MetricField(
            lambda r, t, p: [[1.0, 0.0, 0.0], [0.0, phi2, 0.0],
                             [0.0, 0.0, phi2 * sin(t) ** 2]],
            chart=chart, name=f"{spec.kind}-metric")
        lapse = ScalarField(lapse_fn, chart=chart, name="lapse")
        efield = VectorField(lambda r, t, p: [strength, 0.0, 0.0],
                             chart=chart, name="E")
        return ElectrostaticSystem(chart, metric, lapse, efield, lam)

    # RNdS
    m, q = spec.m, spec.q
    r_plus, r_c = spec.derived["r_plus"], spec.derived["r_c"]
    eps = RNDS_HORIZON_MARGIN * (r_c - r_plus)
    chart = Chart("rnds", ((r_plus + eps, r_c - eps), theta, phi_dom),
                  labels=("r", "theta", "phi"))

    def u_of(r):
        return 1.0 - 2.0 * m / r + q * q / (r * r) - lam * r * r / 3.0

    metric = MetricField(
        lambda r, t, p: [[1.0 / u_of(r), 0.0, 0.0], [0.0, r * r, 0.0],
                         [0.0, 0.0, r * r * sin(t) ** 2]],
        chart=chart, name="rnds-metric")
    lapse = ScalarField(lambda r, t, p: sqrt(u_of(r)), chart=chart, name="lapse")
    efield = VectorField(lambda r, t, p: [q / (r * r) * sqrt(u_of(r)), 0.0, 0.0],
                         chart=chart, name="E")
    return ElectrostaticSystem(chart, metric, lapse, efield, lam)


DEFAULT_GRIDS = {
    "nariai": ((5, 3, 3), 0.08),
    "cold": ((5, 3, 3), 0.08),
    "ultracold": ((5, 3, 3), 0.08),
    "rnds": ((7, 1, 1), 0.01),
}


def _thread_count() -> int:
    raw = os.environ.get("BACH3_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _row_for_point(system: ElectrostaticSystem, lam: float, point, order: int,
                   depth: int, config: DiffConfig) -> ReportRow:
    frame = ElectroFrame(system, point, order, config)
    bundle = residual_suite(system, point, frame=frame)
    cotton_norm = frame.norm(jet_values(frame.cotton), "ddd")
    bach_norm = frame.norm(jet_values(frame.bach), "dd") if order >= 4 else None
    divb_norm = frame.norm(jet_values(frame.div_bach), "d") if depth >= 1 else None
    div2b = frame.div2_bach.value if depth >= 2 else None
    fcv = cotton_form_defect(system, point, frame=frame)
    try:
        q_value = ld_profile(system, point, frame=frame).q_value
    except GradientVanishes:
        q_value = None
    return ReportRow(
        point=tuple(float(x) for x in point),
        hessian_res=bundle.hessian_res,
        laplace_res=bundle.laplace_res,
        div_e_res=bundle.div_e_res,
        curl_res=bundle.curl_res,
        trace_res=bundle.trace_res,
        cotton_norm=cotton_norm,
        bach_norm=bach_norm,
        divb_norm=divb_norm,
        div2b=div2b,
        fcv_defect=fcv,
        q_value=q_value,
    )


def verify_solution(spec: SolutionSpec,
                    grid: tuple[int, int, int] | list | None = None,
                    tolerance: ToleranceProfile | None = None,
                    config: DiffConfig | None = None,
                    depth: int | None = None,
                    grid_margin: float | None = None) -> ResidualReport:
    """Residual report for a catalog solution over a sampling grid.

    ``grid`` is either a (n1, n2, n3) shape for a uniform interior grid or an
    explicit list of points.  ``depth`` controls the Bach-divergence column
    (0: stop at Bach, 1: div B, 2: adds div²B); the default is 1 under the
    automatic strategy and 0 under finite differences, whose order-5 noise
    sits at the loose tolerance.
    """
    cfg = config or AD
    spec = normalize_spec(spec)
    system = build_solution(spec)
    tol = tolerance or (ToleranceProfile.strict_ad() if cfg.strategy == "ad"
                        else ToleranceProfile.loose_fd())
    if depth is None:
        depth = 1 if cfg.strategy == "ad" else 0
    if depth not in (0, 1, 2):
        raise ValueError("depth must be 0, 1 or 2")

    shape, margin = DEFAULT_GRIDS[spec.kind]
    if grid is not None and not isinstance(grid, (tuple,)):
        points = [np.asarray(p, dtype=float) for p in grid]
    else:
        if isinstance(grid, tuple):
            shape = grid
        if grid_margin is not None:
            margin = grid_margin
        points = system.chart.uniform_grid(shape, margin)
    if not points:
        raise EmptyGrid("verification grid is empty")

    order = {0: 4, 1: 5, 2: 6}[depth]
    threads = _thread_count()

    def work(point):
        return _row_for_point(system, spec.lam, point, order, depth, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, points))
    else:
        rows = [work(p) for p in points]

    solution = {"kind": spec.kind, "lambda": spec.lam, "phi2": spec.phi2,
                "q": spec.q, "m": spec.m,
                "derived": {k: v for k, v in spec.derived.items()}}
    provenance = {
        "engine": f"bach3 {__version__}",
        "diff": {"strategy": cfg.strategy, "max_order": cfg.max_order,
                 "fd_step": cfg.fd_step, "richardson_levels": cfg.richardson_levels},
        "grid": {"points": len(points), "shape": list(shape) if grid is None or isinstance(grid, tuple) else None,
                 "margin": margin if grid is None or isinstance(grid, tuple) else None},
        "depth": depth,
    }
    report = ResidualReport(solution=solution, provenance=provenance,
                            rows=rows, tolerance=tol)
    return report.finalize()
