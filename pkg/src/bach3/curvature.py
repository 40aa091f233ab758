"""Pointwise curvature stack for a 3-metric.

Everything is evaluated through jets at one point: metric component jets go
in, Christoffel / Riemann / Ricci / Cotton / Bach jets come out, and each
explicit partial derivative spends one degree of the jet order.  A
:class:`CurvatureFrame` caches the whole chain so one point evaluated at
order 5 serves the residual suite, the Cotton tensor and both Bach
divergence routes without recomputation.

Index conventions follow the 3-dimensional decomposition

    R_ijkl = R_ik g_jl − R_il g_jk + R_jl g_ik − R_jk g_il
             − (R/2)(g_ik g_jl − g_il g_jk),

i.e. Ric_ik = g^jl R_ijkl, and the Cotton tensor is

    C_ijk = ∇_i R_jk − ∇_j R_ik − ¼(∇_i R g_jk − ∇_j R g_ik),

with B_ij = ∇^k C_kij its divergence (the Bach tensor in three dimensions).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .diff import AD, DiffConfig, field_jets
from .errors import MetricNotPositiveDefinite, OrderExceeded
from .fields import MetricField, TensorComponents, TensorField, as_point, tensor_norm
from .jets import Jet, jet_space


def _obj(shape):
    return np.empty(shape, dtype=object)


def jet_values(t) -> np.ndarray:
    """Degree-0 coefficients of an object array of jets, as a float array."""
    if isinstance(t, Jet):
        return np.asarray(t.value)
    out = np.empty(t.shape)
    for idx in np.ndindex(*t.shape):
        out[idx] = t[idx].value
    return out


class CurvatureFrame:
    """Curvature data of one metric at one point, at a fixed jet order.

    The order must cover the deepest derivative chain requested from the
    frame: 1 for Christoffels, 2 for Ricci, 3 for Cotton, 4 for Bach,
    5 for div B, 6 for div² B.
    """

    def __init__(self, metric: MetricField, point, order: int,
                 config: DiffConfig | None = None):
        self.config = config or AD
        self.order = order
        self.point = as_point(point)
        self.space = jet_space(order)
        self.metric_field = metric
        raw = field_jets(metric, self.point, order, self.config)
        g = _obj((3, 3))
        for i in range(3):
            for j in range(3):
                g[i, j] = raw[i][j]
        self.g = g
        vals = jet_values(g)
        sym = float(np.max(np.abs(vals - vals.T)))
        if sym > 1e-12 * (1.0 + np.max(np.abs(vals))):
            raise ValueError(f"metric not symmetric at {tuple(self.point)}: defect {sym:g}")
        eig = np.linalg.eigvalsh((vals + vals.T) / 2.0)
        if eig.min() <= 0.0:
            raise MetricNotPositiveDefinite(
                f"metric eigenvalue {eig.min():g} <= 0 at {tuple(self.point)}")

    def require(self, depth: int):
        if depth > self.order:
            raise OrderExceeded(
                f"operation needs derivative depth {depth}, frame was built at order {self.order}")

    # -- metric algebra ------------------------------------------------------

    @cached_property
    def det(self) -> Jet:
        g = self.g
        return (g[0, 0] * (g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1])
                - g[0, 1] * (g[1, 0] * g[2, 2] - g[1, 2] * g[2, 0])
                + g[0, 2] * (g[1, 0] * g[2, 1] - g[1, 1] * g[2, 0]))

    @cached_property
    def ginv(self):
        g = self.g
        inv = _obj((3, 3))
        det = self.det
        for i in range(3):
            for j in range(3):
                i1, i2 = (i + 1) % 3, (i + 2) % 3
                j1, j2 = (j + 1) % 3, (j + 2) % 3
                # cofactor expansion; symmetric metric makes adj(g) symmetric
                inv[i, j] = (g[j1, i1] * g[j2, i2] - g[j1, i2] * g[j2, i1]) / det
        return inv

    # -- connection and curvature --------------------------------------------

    @cached_property
    def gamma(self):
        """Christoffel symbols Γ^k_ij, slot order [k][i][j]."""
        self.require(1)
        g, ginv = self.g, self.ginv
        dg = _obj((3, 3, 3))  # dg[l][i][j] = ∂_l g_ij
        for l in range(3):
            for i in range(3):
                for j in range(3):
                    dg[l, i, j] = g[i, j].diff(l)
        out = _obj((3, 3, 3))
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    s = 0.0
                    for l in range(3):
                        s = ginv[k, l] * (dg[i, l, j] + dg[j, l, i] - dg[l, i, j]) + s
                    out[k, i, j] = 0.5 * s
        return out

    @cached_property
    def ricci(self):
        self.require(2)
        gam = self.gamma
        out = _obj((3, 3))
        for j in range(3):
            for k in range(3):
                term = 0.0
                for i in range(3):
                    term = gam[i, j, k].diff(i) - gam[i, i, k].diff(j) + term
                    for p in range(3):
                        term = gam[i, i, p] * gam[p, j, k] - gam[i, j, p] * gam[p, i, k] + term
                out[j, k] = term
        return out

    @cached_property
    def scalar(self) -> Jet:
        ric, ginv = self.ricci, self.ginv
        s = 0.0
        for i in range(3):
            for j in range(3):
                s = ginv[i, j] * ric[i, j] + s
        return s

    @cached_property
    def riemann(self):
        """Fully covariant R_ijkl in the decomposition convention above."""
        self.require(2)
        gam, g = self.gamma, self.g
        a = _obj((3, 3, 3, 3))  # A^m_ijk = ∂_iΓ^m_jk − ∂_jΓ^m_ik + Γ^m_ip Γ^p_jk − Γ^m_jp Γ^p_ik
        for m in range(3):
            for i in range(3):
                for j in range(3):
                    for k in range(3):
                        term = gam[m, j, k].diff(i) - gam[m, i, k].diff(j)
                        for p in range(3):
                            term = gam[m, i, p] * gam[p, j, k] - gam[m, j, p] * gam[p, i, k] + term
                        a[m, i, j, k] = term
        out = _obj((3, 3, 3, 3))
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    for l in range(3):
                        term = 0.0
                        for m in range(3):
                            term = g[l, m] * a[m, j, i, k] + term
                        out[i, j, k, l] = term
        return out

    # -- covariant derivative -------------------------------------------------

    def nabla(self, t, variance: str):
        """∇T with the derivative slot prepended (covariant)."""
        self.require(1)
        gam = self.gamma
        rank = len(variance)
        out = _obj((3,) * (rank + 1))
        for l in range(3):
            for idx in np.ndindex(*(3,) * rank):
                term = (t[idx] if rank else t).diff(l)
                for s, flag in enumerate(variance):
                    a = idx[s]
                    for m in range(3):
                        jdx = idx[:s] + (m,) + idx[s + 1:]
                        if flag == "d":
                            term = term - gam[m, l, a] * t[jdx]
                        else:
                            term = term + gam[a, l, m] * t[jdx]
                out[(l,) + idx] = term
        return out

    def raise_first(self, t, rank: int):
        """Contract g^(new, old) with the first slot."""
        ginv = self.ginv
        out = _obj((3,) * rank)
        for idx in np.ndindex(*(3,) * rank):
            term = 0.0
            for m in range(3):
                term = ginv[idx[0], m] * t[(m,) + idx[1:]] + term
            out[idx] = term
        return out

    # -- Cotton / Bach stack ----------------------------------------------------

    @cached_property
    def nabla_ricci(self):
        self.require(3)
        return self.nabla(self.ricci, "dd")

    @cached_property
    def grad_scalar(self):
        self.require(3)
        return np.array([self.scalar.diff(l) for l in range(3)], dtype=object)

    @cached_property
    def cotton(self):
        """C_ijk, antisymmetrized in (i, j) after assembly (a mathematical no-op)."""
        self.require(3)
        dric, dr, g = self.nabla_ricci, self.grad_scalar, self.g
        raw = _obj((3, 3, 3))
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    raw[i, j, k] = (dric[i, j, k] - dric[j, i, k]
                                    - 0.25 * (dr[i] * g[j, k] - dr[j] * g[i, k]))
        out = _obj((3, 3, 3))
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    out[i, j, k] = 0.5 * (raw[i, j, k] - raw[j, i, k])
        return out

    @cached_property
    def bach(self):
        """B_ij = ∇^k C_kij (not symmetrized; symmetry is a checked property)."""
        self.require(4)
        dc = self.nabla(self.cotton, "ddd")
        ginv = self.ginv
        out = _obj((3, 3))
        for i in range(3):
            for j in range(3):
                term = 0.0
                for l in range(3):
                    for k in range(3):
                        term = ginv[l, k] * dc[l, k, i, j] + term
                out[i, j] = term
        return out

    @cached_property
    def div_bach(self):
        """(div B)_i = ∇^j B_ij."""
        self.require(5)
        db = self.nabla(self.bach, "dd")
        ginv = self.ginv
        out = _obj((3,))
        for i in range(3):
            term = 0.0
            for l in range(3):
                for j in range(3):
                    term = ginv[l, j] * db[l, i, j] + term
            out[i] = term
        return out

    @cached_property
    def div_bach_crosscheck(self):
        """Independent route: −C_ijk R^jk (no fifth-order derivatives)."""
        self.require(3)
        cot, ric, ginv = self.cotton, self.ricci, self.ginv
        ric_up = _obj((3, 3))
        for a in range(3):
            for b in range(3):
                term = 0.0
                for i in range(3):
                    for j in range(3):
                        term = ginv[a, i] * ginv[b, j] * ric[i, j] + term
                ric_up[a, b] = term
        out = _obj((3,))
        for i in range(3):
            term = 0.0
            for j in range(3):
                for k in range(3):
                    term = cot[i, j, k] * ric_up[j, k] + term
            out[i] = -term
        return out

    @cached_property
    def div2_bach(self) -> Jet:
        """div²B = ∇^i ∇^j B_ij (order-6 derivative chain)."""
        self.require(6)
        ddb = self.nabla(self.div_bach, "d")
        ginv = self.ginv
        term = 0.0
        for l in range(3):
            for i in range(3):
                term = ginv[l, i] * ddb[l, i] + term
        return term

    # -- value-level conveniences ----------------------------------------------

    @cached_property
    def g_val(self) -> np.ndarray:
        return jet_values(self.g)

    @cached_property
    def ginv_val(self) -> np.ndarray:
        return jet_values(self.ginv)

    def norm(self, values: np.ndarray, variance: str) -> float:
        return tensor_norm(values, variance, self.g_val, self.ginv_val)


@dataclass(frozen=True)
class CurvaturePack:
    christoffel: TensorComponents
    riemann: TensorComponents
    ricci: TensorComponents
    scalar: float


@dataclass(frozen=True)
class CottonPack:
    cotton: TensorComponents
    bach: TensorComponents


@dataclass(frozen=True)
class BachDivergences:
    div_b: TensorComponents
    div2_b: float | None
    crosscheck: TensorComponents


def christoffel(metric: MetricField, p, config: DiffConfig | None = None) -> TensorComponents:
    frame = CurvatureFrame(metric, p, 1, config)
    return TensorComponents(jet_values(frame.gamma), "udd")


def curvature_stack(metric: MetricField, p, config: DiffConfig | None = None) -> CurvaturePack:
    frame = CurvatureFrame(metric, p, 2, config)
    return CurvaturePack(
        christoffel=TensorComponents(jet_values(frame.gamma), "udd"),
        riemann=TensorComponents(jet_values(frame.riemann), "dddd"),
        ricci=TensorComponents(jet_values(frame.ricci), "dd"),
        scalar=frame.scalar.value,
    )


def covariant_derivative(field: TensorField, metric: MetricField, p,
                         config: DiffConfig | None = None) -> TensorComponents:
    """∇(field) at p; the new covariant slot is prepended."""
    frame = CurvatureFrame(metric, p, 2, config)
    jets = field_jets(field, frame.point, 2, frame.config)
    if field.rank:
        t = _obj((3,) * field.rank)
        for idx in np.ndindex(*(3,) * field.rank):
            entry = jets
            for k in idx:
                entry = entry[k]
            t[idx] = entry
    else:
        t = jets
    return TensorComponents(jet_values(frame.nabla(t, field.variance)), "d" + field.variance)


def cotton(metric: MetricField, p, config: DiffConfig | None = None) -> TensorComponents:
    frame = CurvatureFrame(metric, p, 3, config)
    return TensorComponents(jet_values(frame.cotton), "ddd")


def bach(metric: MetricField, p, config: DiffConfig | None = None) -> TensorComponents:
    frame = CurvatureFrame(metric, p, 4, config)
    return TensorComponents(jet_values(frame.bach), "dd")


def bach_divergences(metric: MetricField, p, depth: int = 1,
                     config: DiffConfig | None = None,
                     allow_high_order_fd: bool = False) -> BachDivergences:
    """div B plus the −C_ijk R^jk crosscheck; depth 2 adds div²B.

    Depth 2 costs order-6 derivatives; with the finite-difference strategy it
    is rejected unless ``allow_high_order_fd`` is set.
    """
    if depth not in (1, 2):
        raise ValueError("depth must be 1 or 2")
    cfg = config or AD
    if depth == 2 and cfg.strategy == "fd" and not allow_high_order_fd:
        raise OrderExceeded("div²B under finite differences is rejected by default "
                            "(order-6 stencils; pass allow_high_order_fd=True to override)")
    frame = CurvatureFrame(metric, p, 5 if depth == 1 else 6, cfg)
    return BachDivergences(
        div_b=TensorComponents(jet_values(frame.div_bach), "d"),
        div2_b=frame.div2_bach.value if depth == 2 else None,
        crosscheck=TensorComponents(jet_values(frame.div_bach_crosscheck), "d"),
    )


def riemann_decomposition_defect(frame_or_pack, g: np.ndarray | None = None,
                                 ginv: np.ndarray | None = None) -> float:
    """Relative residual of the 3D Riemann decomposition."""
    if isinstance(frame_or_pack, CurvatureFrame):
        riem = jet_values(frame_or_pack.riemann)
        ric = jet_values(frame_or_pack.ricci)
        scal = frame_or_pack.scalar.value
        g = frame_or_pack.g_val
        ginv = frame_or_pack.ginv_val
    else:
        pack = frame_or_pack
        riem, ric, scal = pack.riemann.entries, pack.ricci.entries, pack.scalar
        if g is None or ginv is None:
            raise ValueError("pass g and ginv along with a CurvaturePack")
    expected = (np.einsum("ik,jl->ijkl", ric, g) - np.einsum("il,jk->ijkl", ric, g)
                + np.einsum("jl,ik->ijkl", ric, g) - np.einsum("jk,il->ijkl", ric, g)
                - 0.5 * scal * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)))
    num = tensor_norm(riem - expected, "dddd", g, ginv)
    den = tensor_norm(riem, "dddd", g, ginv)
    return num / (den + 1e-300) if den > 0 else num


def cotton_invariant_defects(frame: CurvatureFrame) -> dict:
    """Skew, trace and cyclic defects of the Cotton jets (absolute and relative)."""
    c = jet_values(frame.cotton)
    g, ginv = frame.g_val, frame.ginv_val
    cnorm = tensor_norm(c, "ddd", g, ginv)
    skew = float(np.max(np.abs(c + np.swapaxes(c, 0, 1))))
    cyclic = np.abs(c + np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0)))
    trace_jk = np.einsum("jk,ijk->i", ginv, c)
    trace_ij = np.einsum("ij,ijk->k", ginv, c)
    return {
        "norm": cnorm,
        "skew": skew,
        "cyclic_rel": float(np.max(cyclic)) / (cnorm + 1e-300),
        "trace_rel": float(max(np.max(np.abs(trace_jk)), np.max(np.abs(trace_ij)))) / (cnorm + 1e-300),
    }
