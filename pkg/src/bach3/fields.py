"""Coordinate charts, tensor components, and field handles.

Fields wrap plain Python callables of the three coordinates.  The same
callable is evaluated on floats (fast value path) or on coordinate jets
(automatic differentiation), so closed-form definitions written with the
math functions from :mod:`bach3.jets` need no second implementation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import MetricNotPositiveDefinite, PointOutsideDomain, SlotOutOfRange, WrongVariance
from .jets import Jet, JetSpace, as_jet

#: default evaluation margin, as a fraction of each axis width
DEFAULT_DOMAIN_MARGIN = 1e-3


def as_point(p) -> np.ndarray:
    q = np.asarray(p, dtype=float)
    if q.shape != (3,):
        raise ValueError(f"a point needs exactly 3 coordinates, got shape {q.shape}")
    return q


@dataclass(frozen=True)
class Chart:
    """An axis-aligned coordinate box with labelled axes.

    ``margin`` is the evaluation margin (fraction of each axis width): points
    closer than that to the boundary are rejected, which keeps closed-form
    singularities (poles, horizons) at arm's length.  Finite-difference
    stencils additionally check their own reach against the true box.
    """

    name: str
    domain: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    labels: tuple[str, str, str] = ("x1", "x2", "x3")
    margin: float = DEFAULT_DOMAIN_MARGIN

    def __post_init__(self):
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"chart {self.name!r}: degenerate interval [{lo}, {hi}]")

    def widths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.domain])

    def contains(self, p, margin: float | None = None) -> bool:
        q = as_point(p)
        m = self.margin if margin is None else margin
        for v, (lo, hi) in enumerate(self.domain):
            pad = m * (hi - lo)
            if not (lo + pad <= q[v] <= hi - pad):
                return False
        return True

    def require_interior(self, p, margin: float | None = None) -> np.ndarray:
        q = as_point(p)
        if not self.contains(q, margin):
            raise PointOutsideDomain(
                f"point {tuple(q)} outside chart {self.name!r} domain {self.domain}")
        return q

    def uniform_grid(self, shape: tuple[int, int, int], margin: float = 0.08) -> list[np.ndarray]:
        """Interior grid: per axis, n evenly spaced samples inset by ``margin``·width.

        A single sample sits at the axis midpoint.  Row order is
        lexicographic in the axis indices and therefore deterministic.
        """
        axes = []
        for v, n in enumerate(shape):
            lo, hi = self.domain[v]
            pad = margin * (hi - lo)
            if n < 1:
                raise ValueError("grid shape entries must be >= 1")
            if n == 1:
                axes.append(np.array([(lo + hi) / 2.0]))
            else:
                axes.append(np.linspace(lo + pad, hi - pad, n))
        return [np.array(p) for p in itertools.product(*axes)]


def euclidean_chart(half_width: float = 1.0, name: str = "euclidean") -> Chart:
    b = (-half_width, half_width)
    return Chart(name, (b, b, b))


@dataclass(frozen=True)
class TensorComponents:
    """Dense rank-k component array with per-index variance flags.

    ``variance`` holds one character per slot, 'd' (covariant, lower) or
    'u' (contravariant, upper).  Entries are a (3,)*rank float array.
    """

    entries: np.ndarray
    variance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float))
        if self.entries.shape != (3,) * self.rank:
            raise ValueError(f"rank-{self.rank} tensor needs shape {(3,)*self.rank}, "
                             f"got {self.entries.shape}")
        if self.rank > 4:
            raise ValueError("rank above 4 not supported")
        if any(c not in "ud" for c in self.variance):
            raise ValueError("variance flags must be 'u' or 'd'")

    @property
    def rank(self) -> int:
        return len(self.variance)

    def symmetry_defect(self, slots: tuple[int, int] = (0, 1)) -> float:
        a, b = slots
        return float(np.max(np.abs(self.entries - np.swapaxes(self.entries, a, b))))


def scalar_components(x: float) -> TensorComponents:
    return TensorComponents(np.asarray(float(x)), "")


def tensor_norm(t: np.ndarray, variance: str, g: np.ndarray, ginv: np.ndarray) -> float:
    """Metric-invariant Frobenius norm: contract each slot pair with g or g⁻¹."""
    t = np.asarray(t, dtype=float)
    rank = len(variance)
    if rank == 0:
        return abs(float(t))
    acc = t.copy()
    # pair t with itself slot by slot: raise/lower one copy fully, then contract
    other = t.copy()
    for s, flag in enumerate(variance):
        m = ginv if flag == "d" else g
        other = np.tensordot(other, m, axes=([s], [0]))
        # tensordot moves the contracted slot to the end; rotate it back
        other = np.moveaxis(other, -1, s)
    return float(np.sqrt(abs(np.tensordot(acc, other, axes=rank))))


def index_adjust(t: TensorComponents, slot: int, g: np.ndarray, ginv: np.ndarray) -> TensorComponents:
    """Flip one slot's variance by contracting with the metric or its inverse."""
    if not 0 <= slot < t.rank:
        raise SlotOutOfRange(f"slot {slot} outside rank-{t.rank} tensor")
    m = g if t.variance[slot] == "u" else ginv
    new = np.tensordot(t.entries, m, axes=([slot], [0]))
    new = np.moveaxis(new, -1, slot)
    flipped = "d" if t.variance[slot] == "u" else "u"
    variance = t.variance[:slot] + flipped + t.variance[slot + 1:]
    return TensorComponents(new, variance)


class TensorField:
    """A tensor-valued field on a chart, given by one closed-form callable.

    The callable receives the three coordinates (floats or jets) and returns
    a nested list / array of scalar-likes with shape (3,)*rank.  Rank 0
    returns a bare scalar-like.
    """

    def __init__(self, fn, variance: str, chart: Chart | None = None, name: str = ""):
        self.fn = fn
        self.variance = variance
        self.chart = chart
        self.name = name

    @property
    def rank(self) -> int:
        return len(self.variance)

    def _check(self, p) -> np.ndarray:
        q = as_point(p)
        if self.chart is not None:
            self.chart.require_interior(q)
        return q

    def values(self, p) -> np.ndarray:
        q = self._check(p)
        out = self.fn(q[0], q[1], q[2])
        arr = np.asarray(out, dtype=float)
        if arr.shape != (3,) * self.rank:
            raise ValueError(f"field {self.name!r} returned shape {arr.shape}, "
                             f"expected {(3,)*self.rank}")
        return arr

    def __call__(self, p):
        v = self.values(p)
        return float(v) if self.rank == 0 else v

    def jets(self, p, space: JetSpace, seeds: tuple[Jet, Jet, Jet] | None = None):
        """Evaluate on coordinate jets; plain-number outputs become constant jets."""
        q = self._check(p)
        if seeds is None:
            seeds = tuple(Jet.variable(space, v, q[v]) for v in range(3))
        out = self.fn(*seeds)
        return _coerce_jets(out, space, self.rank)


def _coerce_jets(out, space: JetSpace, rank: int):
    if rank == 0:
        return as_jet(out, space)
    return [_coerce_jets(entry, space, rank - 1) for entry in out]


class ScalarField(TensorField):
    def __init__(self, fn, chart: Chart | None = None, name: str = ""):
        super().__init__(fn, "", chart, name)


class VectorField(TensorField):
    """Rank-1 field; contravariant ('u') by default, 'd' makes it a one-form."""

    def __init__(self, fn, chart: Chart | None = None, variance: str = "u", name: str = ""):
        if variance not in ("u", "d"):
            raise ValueError("vector field variance must be 'u' or 'd'")
        super().__init__(fn, variance, chart, name)


class MetricField(TensorField):
    def __init__(self, fn, chart: Chart | None = None, name: str = "g"):
        super().__init__(fn, "dd", chart, name)


def eval_metric(metric: MetricField, p, symmetry_tol: float = 1e-12):
    """Metric, inverse, determinant at a point, with SPD and symmetry checks.

    Returns ``(g, g_inv, det)`` with the first two as TensorComponents.
    Raises :class:`MetricNotPositiveDefinite` when an eigenvalue is <= 0 and
    :class:`PointOutsideDomain` when the point leaves the chart box.
    """
    g = metric.values(p)
    defect = float(np.max(np.abs(g - g.T)))
    if defect > symmetry_tol:
        raise ValueError(f"metric not symmetric at {tuple(as_point(p))}: defect {defect:g}")
    eigvals = np.linalg.eigvalsh(g)
    if eigvals.min() <= 0.0:
        raise MetricNotPositiveDefinite(
            f"metric eigenvalue {eigvals.min():g} <= 0 at {tuple(as_point(p))}")
    ginv = np.linalg.inv(g)
    det = float(np.linalg.det(g))
    return (TensorComponents(g, "dd"), TensorComponents(ginv, "uu"), det)


def exterior_derivative_oneform(omega: VectorField, p, config=None) -> TensorComponents:
    """dω for a one-form: (dω)_ij = ∂_i ω_j − ∂_j ω_i (connection terms cancel)."""
    from .diff import field_jets  # local import to avoid a cycle

    if omega.variance != "d":
        raise WrongVariance("exterior derivative needs a covariant (one-form) field")
    jets = field_jets(omega, p, order=1, config=config)
    d = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            d[i, j] = jets[j].diff(i).value - jets[i].diff(j).value
    return TensorComponents(d, "dd")
