"""Differentiation engine: jet providers and single mixed partials.

Two strategies supply the Taylor coefficients of a field at a point:

* ``"ad"`` (default) evaluates the field's closed form on coordinate jets —
  exact to machine precision at any order up to the configured budget.
* ``"fd"`` samples the field on a tensor-product grid and contracts
  order-8-accurate central stencils (Fornberg weights), optionally with
  Richardson extrapolation.  Error budget per derivative order 1..6:
  roughly 1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2 (roundoff-dominated at the
  default step; order >= 5 is strongly discouraged).

The FD step is ``fd_step`` times the chart axis width; the stencil checks its
own reach against the true chart box and raises PointOutsideDomain when it
would sample beyond it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import OrderExceeded, PointOutsideDomain
from .fields import TensorField, as_point
from .jets import Jet, jet_space

#: documented FD error budget per derivative order (absolute, default step)
FD_ERROR_BUDGET = {1: 1e-10, 2: 1e-8, 3: 1e-6, 4: 1e-4, 5: 1e-3, 6: 1e-2}


@dataclass(frozen=True)
class DiffConfig:
    strategy: str = "ad"
    max_order: int = 6
    fd_step: float = 1e-3
    richardson_levels: int = 0

    def __post_init__(self):
        if self.strategy not in ("ad", "fd"):
            raise ValueError(f"unknown differentiation strategy {self.strategy!r}")
        if not 0 <= self.max_order <= 6:
            raise ValueError("max_order must lie in 0..6")
        if self.strategy == "fd" and not self.fd_step > 0:
            raise ValueError("finite differences need fd_step > 0")
        if self.richardson_levels < 0:
            raise ValueError("richardson_levels must be >= 0")


AD = DiffConfig()
FD = DiffConfig(strategy="fd")


def fd_weights(nodes: np.ndarray, max_order: int, x0: float = 0.0) -> np.ndarray:
    """Fornberg weights: W[k, j] is the weight of f(nodes[j]) in d^k f(x0)."""
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    if max_order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, max_order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, max_order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c.T.copy()


def _odd_at_least(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def _fd_steps(field: TensorField, cfg: DiffConfig) -> np.ndarray:
    if field.chart is not None:
        return cfg.fd_step * field.chart.widths()
    return np.full(3, cfg.fd_step)


def _check_reach(field: TensorField, p: np.ndarray, reach: np.ndarray):
    if field.chart is None:
        return
    for v, (lo, hi) in enumerate(field.chart.domain):
        if p[v] - reach[v] < lo or p[v] + reach[v] > hi:
            raise PointOutsideDomain(
                f"FD stencil around {tuple(p)} (reach {reach[v]:g} on axis {v}) "
                f"leaves chart {field.chart.name!r}")


def _richardson(sampler, h: np.ndarray, levels: int):
    """Neville table assuming even error powers starting at h^8.

    Steps are doubled (not halved) from the base step so the roundoff floor
    of the finest sample is not amplified; coarser samples only serve to
    cancel truncation terms.
    """
    rows = [sampler(h * 2.0 ** l) for l in range(levels + 1)]
    for j in range(1, levels + 1):
        f = 2.0 ** (8 + 2 * (j - 1))
        rows = [(f * rows[i] - rows[i + 1]) / (f - 1.0) for i in range(len(rows) - 1)]
    return rows[0]


def _fd_jet_coefs(field: TensorField, p: np.ndarray, order: int, cfg: DiffConfig) -> np.ndarray:
    """All Taylor coefficients to total degree ``order``; shape (ncoef,) + (3,)*rank."""
    space = jet_space(order)
    npts = _odd_at_least(order + 8)
    m = npts // 2
    offsets = np.arange(-m, m + 1, dtype=float)
    h0 = _fd_steps(field, cfg)
    _check_reach(field, p, m * h0 * 2.0 ** cfg.richardson_levels)

    shape = (3,) * field.rank

    def sample(h):
        grid = np.empty((npts, npts, npts) + shape)
        xs = [p[v] + offsets * h[v] for v in range(3)]
        for a, b, c in itertools.product(range(npts), repeat=3):
            grid[a, b, c] = np.asarray(field.fn(xs[0][a], xs[1][b], xs[2][c]), dtype=float)
        w = [fd_weights(offsets * h[v], order) for v in range(3)]
        t = np.einsum("ai,bj,ck,ijk...->abc...", w[0], w[1], w[2], grid)
        coefs = np.empty((space.ncoef,) + shape)
        for n, (i, j, k) in enumerate(space.powers):
            coefs[n] = t[i, j, k] / space.factorials[n]
        return coefs

    return _richardson(sample, h0, cfg.richardson_levels)


def field_jets(field: TensorField, p, order: int, config: DiffConfig | None = None):
    """Jets of all field components at ``p`` (nested lists, rank deep).

    Raises OrderExceeded when ``order`` exceeds the configured budget and
    PointOutsideDomain when the point (or an FD stencil) leaves the chart.
    """
    cfg = config or AD
    if order > cfg.max_order:
        raise OrderExceeded(f"order {order} exceeds configured max_order {cfg.max_order}")
    q = field._check(p)
    space = jet_space(order)
    if cfg.strategy == "ad":
        return field.jets(q, space)
    coefs = _fd_jet_coefs(field, q, order, cfg)

    def wrap(idx):
        if len(idx) == field.rank:
            sel = (slice(None),) + idx
            return Jet(space, np.ascontiguousarray(coefs[sel]))
        return [wrap(idx + (i,)) for i in range(3)]

    return wrap(())


def derive_scalar(field: TensorField, p, multi_index, config: DiffConfig | None = None) -> float:
    """One mixed partial ∂^m(field) at ``p`` for a scalar field."""
    cfg = config or AD
    if field.rank != 0:
        raise ValueError("derive_scalar needs a scalar field")
    multi = tuple(int(k) for k in multi_index)
    if len(multi) != 3 or any(k < 0 for k in multi):
        raise ValueError("multi_index must be three non-negative integers")
    total = sum(multi)
    if total > cfg.max_order:
        raise OrderExceeded(f"derivative order {total} exceeds max_order {cfg.max_order}")
    q = field._check(p)
    if cfg.strategy == "ad":
        return field.jets(q, jet_space(total)).derivative(multi)

    h0 = _fd_steps(field, cfg)
    axes = [v for v in range(3) if multi[v] > 0]
    if not axes:
        return float(field.fn(q[0], q[1], q[2]))
    npts = {v: _odd_at_least(multi[v] + 8) for v in axes}
    reach = np.zeros(3)
    for v in axes:
        reach[v] = (npts[v] // 2) * h0[v] * 2.0 ** cfg.richardson_levels
    _check_reach(field, q, reach)

    def sample(h):
        offs = {v: (np.arange(npts[v]) - npts[v] // 2) * h[v] for v in axes}
        grids = [offs[v] + q[v] if v in axes else np.array([q[v]]) for v in range(3)]
        vals = np.empty([len(g) for g in grids])
        for idx in itertools.product(*(range(len(g)) for g in grids)):
            vals[idx] = field.fn(grids[0][idx[0]], grids[1][idx[1]], grids[2][idx[2]])
        out = vals
        for v in range(3):
            w = fd_weights(offs[v], multi[v])[multi[v]] if v in axes else np.array([1.0])
            out = np.tensordot(w, out, axes=([0], [0]))
        return np.asarray(out)

    return float(_richardson(sample, h0, cfg.richardson_levels))
