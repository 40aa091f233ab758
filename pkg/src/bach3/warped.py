"""Warped products over an interval: g = dr² + φ(r)² ḡ, level-set geometry.

``warp_build`` constructs the warping from a lapse profile through the
quadrature

    φ(r) = c₁ ∫ f(r)^(−1/2) dr + c₂,

so φ'(r) = c₁ f^(−1/2) holds by construction (verified on samples), with φ''
taken analytically as −(c₁/2) f^(−3/2) f' rather than by differentiating the
quadrature.  The fiber ḡ is a constant-curvature surface (unit sphere,
flat plane, hyperbolic plane, or any scalar curvature R̄₀).

Closed forms checked against the numerical curvature stack:

    R₁₁ = −2φ''/φ,   R₁ₐ = 0,   R_ab = [R̄₀/2 − (φ')² − φφ''] ḡ_ab,
    R̄  = φ²R + 2(φ')² + 4φφ''   (constant on fibers),

and the level sets r = const are umbilic, h_ab = (H/2)g_ab, with mean
curvature H the g-trace of h = ∇²f/|∇f|.  The electrostatic mean-curvature
expression 2(f/f')(φ''/φ) equals that trace only on warped metrics that also
satisfy the electrostatic Hessian equation (the catalog solutions); for
generic builds it is reported, not asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from .curvature import CurvatureFrame, jet_values
from .diff import AD, DiffConfig, field_jets
from .electro import EPS_GRAD
from .errors import (CriticalPoint, GradientVanishes, LapseVanishes,
                     WarpingNonPositive)
from .fields import Chart, MetricField, ScalarField, tensor_norm
from .jets import Jet, jet_space, sin, sinh

#: θ pole margin for spherical fibers
_THETA_MIN = 0.3

FIBER_CURVATURE = {"sphere": 2.0, "flat": 0.0, "hyperbolic": -2.0}


def _fiber_profile(r0bar: float):
    """s(θ) with ḡ = dθ² + s(θ)² dϕ² of constant scalar curvature R̄₀."""
    k = r0bar / 2.0  # Gauss curvature
    if k > 0.0:
        w = math.sqrt(k)
        return lambda t: sin(w * t) / w
    if k < 0.0:
        w = math.sqrt(-k)
        return lambda t: sinh(w * t) / w
    return lambda t: t


def _fiber_theta_domain(r0bar: float) -> tuple[float, float]:
    if r0bar > 0.0:
        return (_THETA_MIN, math.pi / math.sqrt(r0bar / 2.0) - _THETA_MIN)
    return (_THETA_MIN, 2.0)


class RadialQuadrature:
    """φ(r) = constant + scale·∫ integrand: quadrature values, analytic jets.

    The float path integrates adaptively (Gauss–Kronrod, abs tol 1e−13) from
    the base point and caches values; the jet path antidifferentiates the
    integrand's jet along the radial axis, so derivatives of φ never touch
    the quadrature error.
    """

    def __init__(self, integrand, base_r: float, constant: float, scale: float = 1.0):
        self.integrand = integrand
        self.base_r = base_r
        self.constant = constant
        self.scale = scale
        self._cache: dict[float, float] = {}

    def _value(self, r: float) -> float:
        if self.scale == 0.0:
            return self.constant
        hit = self._cache.get(r)
        if hit is None:
            val, _err = scipy.integrate.quad(self.integrand, self.base_r, r,
                                             epsabs=1e-13, epsrel=1e-13, limit=200)
            hit = self.constant + self.scale * val
            self._cache[r] = hit
        return hit

    def __call__(self, r):
        if isinstance(r, Jet):
            if self.scale == 0.0:
                return Jet.constant(r.space, self.constant)
            w = self.scale * self.integrand(r)
            if not isinstance(w, Jet):
                w = Jet.constant(r.space, w)
            coef = r.space.antiderivative(w.coef, 0, self._value(r.value))
            return Jet(r.space, coef)
        return self._value(float(r))


@dataclass(frozen=True)
class WarpedSpec:
    profile: object            # callable f(r), jet-capable
    c1: float
    c2: float
    interval: tuple[float, float]
    base_r: float
    fiber_curvature: float     # R̄₀ of the fiber model
    chart: Chart
    metric: MetricField
    warping: ScalarField       # φ as a field on the chart
    lapse_field: ScalarField   # f(r) as a field on the chart

    def phi_derivatives(self, r: float) -> tuple[float, float, float]:
        """(φ, φ', φ'') at r; φ' = c₁ f^(−1/2), φ'' = −(c₁/2) f^(−3/2) f'."""
        sp = jet_space(1)
        fj = self.profile(Jet.variable(sp, 0, r))
        if not isinstance(fj, Jet):
            fj = Jet.constant(sp, fj)
        f, fp = fj.value, fj.derivative((1, 0, 0))
        phi = self._phi_value(r)
        if self.c1 == 0.0:
            return phi, 0.0, 0.0
        if f <= 0.0:
            raise LapseVanishes(f"f({r:g}) = {f:g} <= 0")
        dphi = self.c1 / math.sqrt(f)
        ddphi = -0.5 * self.c1 * f ** (-1.5) * fp
        return phi, dphi, ddphi

    def _phi_value(self, r: float) -> float:
        return self.warping.fn(r, 0.0, 0.0)


@dataclass(frozen=True)
class LevelSetData:
    second_fundamental: np.ndarray   # 2×2 fiber block of h
    mean_curvature: float            # g-trace of h
    isotropy_defect: float           # ‖h − (H/2)·g_fiber‖


@dataclass(frozen=True)
class WarpedCheck:
    ricci_defect: float
    fiber_scalar: float
    mean_curvature: float
    isotropy_defect: float
    electro_mean_curvature: float | None
    warping_value: float


def warp_build(profile, c1: float, c2: float, interval: tuple[float, float],
               fiber: str | float = "sphere", base_r: float | None = None,
               name: str = "warped", samples: int = 200) -> WarpedSpec:
    """Warped-product chart and metric from a lapse profile.

    ``fiber`` is one of "sphere" / "flat" / "hyperbolic" or a numeric fiber
    scalar curvature R̄₀.  Raises LapseVanishes if f ≤ 0 inside the interval
    and WarpingNonPositive if φ ≤ 0 at an interior sample.
    """
    lo, hi = interval
    if not lo < hi:
        raise ValueError("empty warped interval")
    r0bar = FIBER_CURVATURE[fiber] if isinstance(fiber, str) else float(fiber)
    base = lo if base_r is None else base_r

    rs = np.linspace(lo, hi, samples)
    fvals = np.array([float(profile(r)) for r in rs])
    if fvals.min() <= 0.0:
        raise LapseVanishes(
            f"lapse profile reaches {fvals.min():g} <= 0 inside [{lo:g}, {hi:g}]")

    phi = RadialQuadrature(lambda r: profile(r) ** (-0.5), base, c2, c1)
    pad = 1e-3 * (hi - lo)
    interior = rs[(rs >= lo + pad) & (rs <= hi - pad)]
    phivals = np.array([phi(r) for r in interior])
    if phivals.min() <= 0.0:
        raise WarpingNonPositive(
            f"warping reaches {phivals.min():g} <= 0 inside [{lo:g}, {hi:g}]; adjust c2")

    sfib = _fiber_profile(r0bar)
    chart = Chart(name, ((lo, hi), _fiber_theta_domain(r0bar), (0.0, 2.0 * math.pi)),
                  labels=("r", "theta", "phi"))
    metric = MetricField(
        lambda r, t, p: [[1.0, 0.0, 0.0],
                         [0.0, phi(r) ** 2, 0.0],
                         [0.0, 0.0, phi(r) ** 2 * sfib(t) ** 2]],
        chart=chart, name=f"{name}-metric")
    warping = ScalarField(lambda r, t, p: phi(r), chart=chart, name="warping")
    lapse_field = ScalarField(lambda r, t, p: profile(r), chart=chart, name="lapse")

    spec = WarpedSpec(profile=profile, c1=c1, c2=c2, interval=(lo, hi), base_r=base,
                      fiber_curvature=r0bar, chart=chart, metric=metric,
                      warping=warping, lapse_field=lapse_field)

    # construction check: φ'·√f = c₁ on ten interior samples
    for r in np.linspace(lo + pad, hi - pad, 10):
        _, dphi, _ = spec.phi_derivatives(float(r))
        if abs(dphi * math.sqrt(float(profile(float(r)))) - c1) > 1e-8:
            raise WarpingNonPositive("warping quadrature failed its derivative check")
    return spec


def level_set_data(metric: MetricField, lapse_field: ScalarField, p,
                   config: DiffConfig | None = None,
                   frame: CurvatureFrame | None = None) -> LevelSetData:
    """Second fundamental form h = ∇²f/|∇f| of the level set through p.

    The chart must be radial: ∇f along axis 0, fibers spanned by axes 1, 2
    (all catalog and warped charts are).  Raises GradientVanishes at
    critical points of f.
    """
    fr = frame or CurvatureFrame(metric, p, 2, config)
    fj = field_jets(lapse_field, fr.point, fr.order, fr.config)
    grad = np.array([fj.diff(l) for l in range(3)], dtype=object)
    hess = jet_values(fr.nabla(grad, "d"))
    gvals, ginv = fr.g_val, fr.ginv_val
    gradv = jet_values(grad)
    grad_up = ginv @ gradv
    norm2 = float(gradv @ grad_up)
    if norm2 <= EPS_GRAD ** 2:
        raise GradientVanishes(f"|∇f| <= {EPS_GRAD:g} at {tuple(fr.point)}")
    norm = math.sqrt(norm2)
    tang = max(abs(gradv[1]), abs(gradv[2]))
    if tang > 1e-10 * (1.0 + norm):
        raise ValueError("level-set analysis expects a radial lapse (∇f along axis 0)")

    h = hess[1:, 1:] / norm
    g_fib = gvals[1:, 1:]
    gi_fib = np.linalg.inv(g_fib)
    mean = float(np.einsum("ab,ab->", gi_fib, h))
    defect = h - 0.5 * mean * g_fib
    iso = float(np.sqrt(abs(np.einsum("ac,bd,ab,cd->", gi_fib, gi_fib, defect, defect))))
    return LevelSetData(second_fundamental=h, mean_curvature=mean, isotropy_defect=iso)


def mean_curvature_formula(spec: WarpedSpec, r: float) -> float:
    """Electrostatic closed form 2(f/f')(φ''/φ); CriticalPoint when f' = 0."""
    sp = jet_space(1)
    fj = spec.profile(Jet.variable(sp, 0, r))
    if not isinstance(fj, Jet):
        fj = Jet.constant(sp, fj)
    f, fp = fj.value, fj.derivative((1, 0, 0))
    if abs(fp) <= EPS_GRAD:
        raise CriticalPoint(f"f'({r:g}) = {fp:g}; mean-curvature formula is singular")
    phi, _, ddphi = spec.phi_derivatives(r)
    return 2.0 * (f / fp) * (ddphi / phi)


def warped_curvature_check(spec: WarpedSpec, p,
                           config: DiffConfig | None = None) -> WarpedCheck:
    """Closed-form warped curvature against the numerical stack at one point."""
    cfg = config or AD
    fr = CurvatureFrame(spec.metric, p, 2, cfg)
    r, theta = float(fr.point[0]), float(fr.point[1])
    phi, dphi, ddphi = spec.phi_derivatives(r)

    sfib = _fiber_profile(spec.fiber_curvature)
    s = float(sfib(theta))
    gbar = np.diag([1.0, s * s])
    closed = np.zeros((3, 3))
    closed[0, 0] = -2.0 * ddphi / phi
    coeff = spec.fiber_curvature / 2.0 - dphi * dphi - phi * ddphi
    closed[1:, 1:] = coeff * gbar
    num = jet_values(fr.ricci)
    ricci_defect = float(np.max(np.abs(num - closed)))

    scal = fr.scalar.value
    fiber_scalar = phi * phi * scal + 2.0 * dphi * dphi + 4.0 * phi * ddphi

    lsd = level_set_data(spec.metric, spec.lapse_field, p, frame=fr)
    try:
        electro_h = mean_curvature_formula(spec, r)
    except CriticalPoint:
        electro_h = None

    return WarpedCheck(ricci_defect=ricci_defect, fiber_scalar=fiber_scalar,
                       mean_curvature=lsd.mean_curvature,
                       isotropy_defect=lsd.isotropy_defect,
                       electro_mean_curvature=electro_h,
                       warping_value=phi)


def rho_squared_reconstruct(spec: WarpedSpec, lam: float, r: float) -> float:
    """ρ² = (1/f'²)[f''/f + 2φ''/φ + Λ]; negative values are data, not errors."""
    sp = jet_space(2)
    fj = spec.profile(Jet.variable(sp, 0, r))
    if not isinstance(fj, Jet):
        fj = Jet.constant(sp, fj)
    f = fj.value
    fp = fj.derivative((1, 0, 0))
    fpp = fj.derivative((2, 0, 0))
    if abs(fp) <= EPS_GRAD:
        raise CriticalPoint(f"f'({r:g}) = {fp:g}; reconstruction is singular")
    if f <= 0.0:
        raise LapseVanishes(f"f({r:g}) = {f:g} <= 0")
    phi, _, ddphi = spec.phi_derivatives(r)
    return (fpp / f + 2.0 * ddphi / phi + lam) / (fp * fp)


@dataclass(frozen=True)
class EigenframeResult:
    eigenvalues: tuple
    pattern: tuple
    alignment_defect: float
    rayleigh: float


def ricci_eigenframe(metric: MetricField, lapse_field: ScalarField, p,
                     config: DiffConfig | None = None,
                     frame: CurvatureFrame | None = None) -> EigenframeResult:
    """Ricci eigenvalues, multiplicity pattern, and ∇f alignment defect.

    Eigenvalues come from the generalized symmetric problem Ric v = λ g v
    (equivalently eigenvalues of g⁻¹Ric); clustering tolerance for the
    multiplicity pattern is 1e−6·(1+|R|), ties reported as found.
    """
    fr = frame or CurvatureFrame(metric, p, 2, config)
    ric = jet_values(fr.ricci)
    ric = (ric + ric.T) / 2.0
    g = fr.g_val
    eigs = scipy.linalg.eigh(ric, g, eigvals_only=True)

    scal = fr.scalar.value
    tol = 1e-6 * (1.0 + abs(scal))
    pattern = []
    for ev in eigs:
        if pattern and abs(ev - pattern[-1][0]) <= tol:
            pattern[-1][1] += 1
            pattern[-1][0] = ev
        else:
            pattern.append([ev, 1])

    fj = field_jets(lapse_field, fr.point, fr.order, fr.config)
    gradv = np.array([fj.diff(l).value for l in range(3)])
    ginv = fr.ginv_val
    grad_up = ginv @ gradv
    norm2 = float(gradv @ grad_up)
    if norm2 <= EPS_GRAD ** 2:
        raise GradientVanishes(f"|∇f| <= {EPS_GRAD:g} at {tuple(fr.point)}")
    rayleigh = float(grad_up @ ric @ grad_up) / norm2
    resid = ginv @ (ric @ grad_up) - rayleigh * grad_up
    defect = tensor_norm(resid, "u", g, ginv) / math.sqrt(norm2)
    return EigenframeResult(
        eigenvalues=tuple(float(e) for e in eigs),
        pattern=tuple(n for _, n in pattern),
        alignment_defect=float(defect),
        rayleigh=rayleigh,
    )
