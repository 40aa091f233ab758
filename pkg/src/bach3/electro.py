"""Electrostatic-system residuals and the lapse-Cotton identity.

A system bundles a 3-metric g, a positive lapse f, a contravariant electric
field E and a cosmological constant Λ on one chart.  The field equations are

    ∇²f = f(Ric − Λ g + 2 E♭⊗E♭ − |E|² g)
    Δf  = (|E|² − Λ) f
    div E = 0
    df ∧ E♭ + f dE♭ = 0            (curl of fE vanishes)

with the trace relation R = 2(|E|² + Λ) as an algebraic consequence.  The
suite reports each left-minus-right residual; non-solutions are first-class
inputs and nothing is assumed zero.

``electro_cotton_form`` assembles the rank-3 tensor built from Ric, R, ∇R, f
and E that equals f·C on any solution of the system; ``cotton_form_defect``
measures that identity.  The linearly-dependent (LD) specialization writes
E = ρ∇f and carries the sign function Q = 2(1 − f²ρ²).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curvature import CurvatureFrame, _obj, jet_values
from .diff import AD, DiffConfig, field_jets
from .errors import GradientVanishes, LapseNonPositive, NotLinearlyDependent
from .fields import Chart, MetricField, ScalarField, TensorComponents, VectorField

#: |∇f| below this is treated as a critical point
EPS_GRAD = 1e-8

#: parallel defect above this fraction of |E| flags the point as non-LD
LD_FLAG_REL = 1e-6


@dataclass(frozen=True)
class ElectrostaticSystem:
    chart: Chart
    metric: MetricField
    lapse: ScalarField
    field: VectorField
    lam: float

    def __post_init__(self):
        if self.field.variance != "u":
            raise ValueError("electric field must be contravariant")


@dataclass(frozen=True)
class ResidualBundle:
    """Left-minus-right residuals of the five field equations at one point.

    Norms are metric-invariant; the raw residual tensors and the metric
    trace of the Hessian residual are kept for the trace-chain identity and
    for localizing which component of a non-solution breaks.
    """

    hessian_res: float
    laplace_res: float
    div_e_res: float
    curl_res: float
    trace_res: float
    hessian_trace: float
    lapse_value: float
    hessian_tensor: np.ndarray
    curl_tensor: np.ndarray

    def max_residual(self) -> float:
        return max(self.hessian_res, abs(self.laplace_res), abs(self.div_e_res),
                   self.curl_res, abs(self.trace_res))

    def trace_chain_defect(self) -> float:
        """g^ij(Hessian residual)_ij − (Laplace residual) + f·(trace residual)."""
        return self.hessian_trace - self.laplace_res + self.lapse_value * self.trace_res


@dataclass(frozen=True)
class LDProfile:
    rho: float
    q_value: float
    parallel_defect: float
    e_norm: float

    @property
    def non_ld(self) -> bool:
        return self.parallel_defect > LD_FLAG_REL * self.e_norm


@dataclass(frozen=True)
class LDFormCheck:
    form_defect: float
    grad_symmetry_defect: float
    form_scale: float


class ElectroFrame(CurvatureFrame):
    """Curvature frame plus lapse/field jets for one system at one point."""

    def __init__(self, system: ElectrostaticSystem, point, order: int,
                 config: DiffConfig | None = None):
        super().__init__(system.metric, point, order, config)
        self.system = system
        self.f = field_jets(system.lapse, self.point, order, self.config)
        if self.f.value <= 0.0:
            raise LapseNonPositive(f"lapse f = {self.f.value:g} <= 0 at {tuple(self.point)}")
        e = field_jets(system.field, self.point, order, self.config)
        self.E = np.array(e, dtype=object)

    @cached_property
    def grad_f(self):
        return np.array([self.f.diff(l) for l in range(3)], dtype=object)

    @cached_property
    def grad_f_up(self):
        out = _obj((3,))
        for i in range(3):
            s = 0.0
            for j in range(3):
                s = self.ginv[i, j] * self.grad_f[j] + s
            out[i] = s
        return out

    @cached_property
    def grad_f_norm2(self):
        s = 0.0
        for i in range(3):
            s = self.grad_f[i] * self.grad_f_up[i] + s
        return s

    @cached_property
    def hess_f(self):
        self.require(2)
        return self.nabla(self.grad_f, "d")

    @cached_property
    def lap_f(self):
        s = 0.0
        for i in range(3):
            for j in range(3):
                s = self.ginv[i, j] * self.hess_f[i, j] + s
        return s

    @cached_property
    def e_flat(self):
        out = _obj((3,))
        for i in range(3):
            s = 0.0
            for j in range(3):
                s = self.g[i, j] * self.E[j] + s
            out[i] = s
        return out

    @cached_property
    def e_norm2(self):
        s = 0.0
        for i in range(3):
            s = self.e_flat[i] * self.E[i] + s
        return s

    @cached_property
    def div_e(self):
        s = 0.0
        for i in range(3):
            s = self.E[i].diff(i) + s
            for m in range(3):
                s = self.gamma[i, i, m] * self.E[m] + s
        return s

    @cached_property
    def nabla_e_flat(self):
        return self.nabla(self.e_flat, "d")

    @cached_property
    def rho(self):
        """ρ = ⟨E, ∇f⟩ / |∇f|², as a jet (projection, not componentwise division)."""
        n2 = self.grad_f_norm2
        if n2.value <= EPS_GRAD ** 2:
            raise GradientVanishes(
                f"|∇f| = {np.sqrt(max(n2.value, 0.0)):.3g} <= {EPS_GRAD:g} at {tuple(self.point)}")
        s = 0.0
        for i in range(3):
            s = self.E[i] * self.grad_f[i] + s  # g(E, ∇f) = E^i ∂_i f
        return s / n2


def residual_suite(system: ElectrostaticSystem, p,
                   config: DiffConfig | None = None,
                   frame: ElectroFrame | None = None) -> ResidualBundle:
    """All five field-equation residuals at one point."""
    fr = frame or ElectroFrame(system, p, 3, config)
    fr.require(2)
    f = fr.f
    lam = system.lam
    g, ginv = fr.g, fr.ginv
    ric = fr.ricci
    e2 = fr.e_norm2

    hess_res = _obj((3, 3))
    for i in range(3):
        for j in range(3):
            rhs = f * (ric[i, j] - lam * g[i, j]
                       + 2.0 * fr.e_flat[i] * fr.e_flat[j] - e2 * g[i, j])
            hess_res[i, j] = fr.hess_f[i, j] - rhs
    hess_vals = jet_values(hess_res)
    hess_trace = float(np.einsum("ij,ij->", fr.ginv_val, hess_vals))

    lap_res = fr.lap_f - (e2 - lam) * f
    trace_res = fr.scalar - 2.0 * (e2 + lam)

    curl = _obj((3, 3))
    for i in range(3):
        for j in range(3):
            curl[i, j] = (fr.grad_f[i] * fr.e_flat[j] - fr.grad_f[j] * fr.e_flat[i]
                          + f * (fr.e_flat[j].diff(i) - fr.e_flat[i].diff(j)))
    curl_vals = jet_values(curl)

    return ResidualBundle(
        hessian_res=fr.norm(hess_vals, "dd"),
        laplace_res=lap_res.value,
        div_e_res=fr.div_e.value,
        curl_res=fr.norm(curl_vals, "dd"),
        trace_res=trace_res.value,
        hessian_trace=hess_trace,
        lapse_value=f.value,
        hessian_tensor=hess_vals,
        curl_tensor=curl_vals,
    )


def combined_hessian_residual(system: ElectrostaticSystem, p,
                              config: DiffConfig | None = None,
                              frame: ElectroFrame | None = None) -> np.ndarray:
    """Residual of the combined form ∇²f = f(Ric + 2E♭⊗E♭ − (R/2)g)."""
    fr = frame or ElectroFrame(system, p, 3, config)
    fr.require(2)
    out = _obj((3, 3))
    for i in range(3):
        for j in range(3):
            rhs = fr.f * (fr.ricci[i, j] + 2.0 * fr.e_flat[i] * fr.e_flat[j]
                          - 0.5 * fr.scalar * fr.g[i, j])
            out[i, j] = fr.hess_f[i, j] - rhs
    return jet_values(out)


def _cotton_form_jets(fr: ElectroFrame):
    """The rank-3 closed form equal to f·C on solutions (first-order field data)."""
    fr.require(3)
    f, g = fr.f, fr.g
    ric = fr.ricci
    grad_r = fr.grad_scalar
    df = fr.grad_f
    ef = fr.e_flat
    de = fr.nabla_e_flat
    ric_grad = _obj((3,))  # R_il ∇^l f
    for i in range(3):
        s = 0.0
        for l in range(3):
            s = ric[i, l] * fr.grad_f_up[l] + s
        ric_grad[i] = s
    out = _obj((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                t = 2.0 * f * (ef[i] * de[j, k] - ef[j] * de[i, k])
                t = t + 0.25 * f * (grad_r[i] * g[j, k] - grad_r[j] * g[i, k])
                t = t + fr.scalar * (df[i] * g[j, k] - df[j] * g[i, k])
                t = t - (ric_grad[i] * g[j, k] - ric_grad[j] * g[i, k])
                t = t - 2.0 * (df[i] * ric[j, k] - df[j] * ric[i, k])
                out[i, j, k] = t
    return out


def electro_cotton_form(system: ElectrostaticSystem, p,
                        config: DiffConfig | None = None,
                        frame: ElectroFrame | None = None) -> TensorComponents:
    fr = frame or ElectroFrame(system, p, 3, config)
    return TensorComponents(jet_values(_cotton_form_jets(fr)), "ddd")


def cotton_form_defect(system: ElectrostaticSystem, p,
                       config: DiffConfig | None = None,
                       frame: ElectroFrame | None = None) -> float:
    """max componentwise |f·C − (closed form)|; small on solutions."""
    fr = frame or ElectroFrame(system, p, 3, config)
    c = jet_values(fr.cotton)
    v = jet_values(_cotton_form_jets(fr))
    return float(np.max(np.abs(fr.f.value * c - v)))


def ld_profile(system: ElectrostaticSystem, p,
               config: DiffConfig | None = None,
               frame: ElectroFrame | None = None) -> LDProfile:
    """ρ, Q = 2(1−f²ρ²) and the defect of E − ρ∇f, all at one point."""
    fr = frame or ElectroFrame(system, p, 2, config)
    rho = fr.rho.value
    f = fr.f.value
    diff = _obj((3,))
    for i in range(3):
        diff[i] = fr.E[i] - rho * fr.grad_f_up[i]
    defect = fr.norm(jet_values(diff), "u")
    e_norm = float(np.sqrt(max(fr.e_norm2.value, 0.0)))
    return LDProfile(rho=rho, q_value=2.0 * (1.0 - f * f * rho * rho),
                     parallel_defect=defect, e_norm=e_norm)


def _ld_form_jets(fr: ElectroFrame):
    """LD closed form of the same tensor, using ρ and its gradient.

    Gradient-term coefficient carries 2f²ρ²Λ (re-derived; see the Laplacian
    of the trace relation), not the f²ρ²Λ sometimes quoted.
    """
    fr.require(3)
    rho = fr.rho
    u = fr.f * fr.f * rho * rho
    grad_rho = np.array([rho.diff(l) for l in range(3)], dtype=object)
    df, g, ric = fr.grad_f, fr.g, fr.ricci
    ric_grad = _obj((3,))
    for i in range(3):
        s = 0.0
        for l in range(3):
            s = ric[i, l] * fr.grad_f_up[l] + s
        ric_grad[i] = s
    coef_g = fr.scalar - 0.5 * fr.scalar * u - 2.0 * u * fr.system.lam
    pref = fr.f * rho * fr.grad_f_norm2
    out = _obj((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                t = pref * (grad_rho[i] * g[j, k] - grad_rho[j] * g[i, k])
                t = t + coef_g * (df[i] * g[j, k] - df[j] * g[i, k])
                t = t + 2.0 * (u - 1.0) * (df[i] * ric[j, k] - df[j] * ric[i, k])
                t = t + (u - 1.0) * (ric_grad[i] * g[j, k] - ric_grad[j] * g[i, k])
                out[i, j, k] = t
    return out, grad_rho


def ld_form_check(system: ElectrostaticSystem, p,
                  config: DiffConfig | None = None,
                  frame: ElectroFrame | None = None,
                  require_ld: bool = True) -> LDFormCheck:
    """Agreement of the LD closed form with the general one, plus ∇ρ∧∇f.

    Raises NotLinearlyDependent when E is visibly not parallel to ∇f (the LD
    form presumes E = ρ∇f) unless ``require_ld`` is disabled.
    """
    fr = frame or ElectroFrame(system, p, 3, config)
    prof = ld_profile(system, p, frame=fr)
    if require_ld and prof.non_ld:
        raise NotLinearlyDependent(
            f"parallel defect {prof.parallel_defect:g} exceeds {LD_FLAG_REL:g}·|E| "
            f"at {tuple(fr.point)}")
    ld_jets, grad_rho = _ld_form_jets(fr)
    general = jet_values(_cotton_form_jets(fr))
    special = jet_values(ld_jets)
    grho = jet_values(grad_rho)
    gf = jet_values(fr.grad_f)
    sym = np.abs(np.outer(grho, gf) - np.outer(gf, grho))
    return LDFormCheck(
        form_defect=float(np.max(np.abs(special - general))),
        grad_symmetry_defect=float(np.max(sym)),
        form_scale=float(np.max(np.abs(general))),
    )


def ld_wedge_defect(system: ElectrostaticSystem, p,
                    config: DiffConfig | None = None,
                    frame: ElectroFrame | None = None) -> float:
    """|E♭ ∧ dE♭| (the single independent component of the 3-form)."""
    fr = frame or ElectroFrame(system, p, 2, config)
    e = jet_values(fr.e_flat)
    d = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            d[i, j] = fr.e_flat[j].diff(i).value - fr.e_flat[i].diff(j).value
    return abs(e[0] * d[1, 2] - e[1] * d[0, 2] + e[2] * d[0, 1])
