"""Truncated multivariate Taylor arithmetic (jets) in three variables.

A jet stores the Taylor coefficients of a smooth function of (x1, x2, x3)
around a point, up to a fixed total degree.  Arithmetic on jets is ordinary
power-series arithmetic truncated at that degree, so propagating the three
coordinate seeds through a closed-form expression yields every mixed partial
derivative up to the working order, exact to machine precision.  This is the
"automatic" differentiation strategy; nothing here samples the function.

Degree bookkeeping: if all inputs are exact to total degree N, a product or
analytic composition stays exact to degree N, while extracting a partial
derivative costs one degree.  Callers therefore pick the working order equal
to the total number of derivative applications on the deepest path (e.g. 3
for the Cotton tensor, 5 for the divergence of the Bach tensor) and read
values off degree-0 coefficients at the end.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


class JetSpace:
    """Monomial tables for jets of one total degree.

    Instances are cached per order; all jets of the same order share one
    space.  The multiplication table is a flat (ia, ib, ic) index triple list
    covering every monomial pair whose product still fits the truncation.
    """

    def __init__(self, order: int):
        if order < 0:
            raise ValueError("jet order must be >= 0")
        self.order = order
        powers = []
        for d in range(order + 1):
            for i in range(d, -1, -1):
                for j in range(d - i, -1, -1):
                    powers.append((i, j, d - i - j))
        self.powers = np.array(powers, dtype=np.int64)
        self.ncoef = len(powers)
        self.index = {tuple(p): n for n, p in enumerate(powers)}
        self.degree = self.powers.sum(axis=1)

        ia, ib, ic = [], [], []
        for a, pa in enumerate(powers):
            da = sum(pa)
            for b, pb in enumerate(powers):
                if da + sum(pb) > order:
                    continue
                ia.append(a)
                ib.append(b)
                ic.append(self.index[(pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2])])
        self._mul_ia = np.array(ia, dtype=np.intp)
        self._mul_ib = np.array(ib, dtype=np.intp)
        self._mul_ic = np.array(ic, dtype=np.intp)

        # d/dx_v as a coefficient map: coef[dst] = fac * coef[src].
        self._diff = []
        for v in range(3):
            src, dst, fac = [], [], []
            for n, p in enumerate(powers):
                if p[v] >= 1:
                    q = list(p)
                    q[v] -= 1
                    src.append(n)
                    dst.append(self.index[tuple(q)])
                    fac.append(float(p[v]))
            self._diff.append((np.array(src, dtype=np.intp),
                               np.array(dst, dtype=np.intp),
                               np.array(fac)))

        # Antiderivative along x_v (degree-raising; top-degree sources drop out).
        self._int = []
        for v in range(3):
            src, dst, fac = [], [], []
            for n, p in enumerate(powers):
                if sum(p) < order:
                    q = list(p)
                    q[v] += 1
                    src.append(n)
                    dst.append(self.index[tuple(q)])
                    fac.append(1.0 / q[v])
            self._int.append((np.array(src, dtype=np.intp),
                              np.array(dst, dtype=np.intp),
                              np.array(fac)))

        self.factorials = np.array([math.factorial(i) * math.factorial(j) * math.factorial(k)
                                    for i, j, k in powers])

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(self._mul_ic, weights=a[self._mul_ia] * b[self._mul_ib],
                           minlength=self.ncoef)

    def diff(self, coef: np.ndarray, axis: int) -> np.ndarray:
        src, dst, fac = self._diff[axis]
        out = np.zeros(self.ncoef)
        out[dst] = fac * coef[src]
        return out

    def antiderivative(self, coef: np.ndarray, axis: int, constant: float) -> np.ndarray:
        src, dst, fac = self._int[axis]
        out = np.zeros(self.ncoef)
        out[dst] = fac * coef[src]
        out[0] = constant
        return out


@lru_cache(maxsize=None)
def jet_space(order: int) -> JetSpace:
    return JetSpace(order)


class Jet:
    """One truncated Taylor expansion; supports scalar-like arithmetic.

    Mixed arithmetic with plain numbers works, so closed-form field
    definitions written with the module-level math functions evaluate
    unchanged on floats or on jets.
    """

    __slots__ = ("space", "coef")

    def __init__(self, space: JetSpace, coef: np.ndarray):
        self.space = space
        self.coef = coef

    # -- construction -------------------------------------------------------

    @staticmethod
    def constant(space: JetSpace, value: float) -> "Jet":
        coef = np.zeros(space.ncoef)
        coef[0] = value
        return Jet(space, coef)

    @staticmethod
    def variable(space: JetSpace, axis: int, value: float) -> "Jet":
        coef = np.zeros(space.ncoef)
        coef[0] = value
        if space.order >= 1:
            coef[1 + axis] = 1.0
        return Jet(space, coef)

    # -- extraction ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coef[0])

    def derivative(self, multi: tuple[int, int, int]) -> float:
        """Mixed partial ∂^m f for a multi-index m with |m| <= order."""
        idx = self.space.index.get(tuple(multi))
        if idx is None:
            raise ValueError(f"multi-index {multi} exceeds jet order {self.space.order}")
        return float(self.coef[idx] * self.space.factorials[idx])

    def diff(self, axis: int) -> "Jet":
        return Jet(self.space, self.space.diff(self.coef, axis))

    # -- arithmetic ---------------------------------------------------------

    def _same_space(self, other: "Jet"):
        if self.space is not other.space:
            raise ValueError("jets from different spaces (orders) cannot be combined")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._same_space(other)
            return Jet(self.space, self.coef + other.coef)
        coef = self.coef.copy()
        coef[0] += other
        return Jet(self.space, coef)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._same_space(other)
            return Jet(self.space, self.coef - other.coef)
        coef = self.coef.copy()
        coef[0] -= other
        return Jet(self.space, coef)

    def __rsub__(self, other):
        coef = -self.coef
        coef[0] += other
        return Jet(self.space, coef)

    def __neg__(self):
        return Jet(self.space, -self.coef)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._same_space(other)
            return Jet(self.space, self.space.mul(self.coef, other.coef))
        return Jet(self.space, self.coef * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.space.mul(self.coef, other._reciprocal_coef()))
        return Jet(self.space, self.coef / other)

    def __rtruediv__(self, other):
        return Jet(self.space, self._reciprocal_coef() * other)

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer() and abs(p) <= 64):
            n = int(p)
            if n < 0:
                return (self.__rtruediv__(1.0)) ** (-n)
            out = Jet.constant(self.space, 1.0)
            base = self
            while n:
                if n & 1:
                    out = out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        v = self.value
        if v <= 0.0:
            raise ValueError("non-integer power of a jet needs a positive value part")
        return self._compose([_binom(p, k) * v ** (p - k)
                              for k in range(self.space.order + 1)])

    def __lt__(self, other):
        return self.value < (other.value if isinstance(other, Jet) else other)

    def __le__(self, other):
        return self.value <= (other.value if isinstance(other, Jet) else other)

    def __gt__(self, other):
        return self.value > (other.value if isinstance(other, Jet) else other)

    def __ge__(self, other):
        return self.value >= (other.value if isinstance(other, Jet) else other)

    def __repr__(self):
        return f"Jet(order={self.space.order}, value={self.value!r})"

    # -- analytic composition -----------------------------------------------

    def _compose(self, dcoefs) -> "Jet":
        """Sum dcoefs[k] * (self - value)^k via Horner; dcoefs[k] = φ⁽ᵏ⁾(value)/k!."""
        space = self.space
        u = self.coef.copy()
        u[0] = 0.0
        acc = np.zeros(space.ncoef)
        acc[0] = dcoefs[-1]
        for k in range(space.order - 1, -1, -1):
            acc = space.mul(acc, u)
            acc[0] += dcoefs[k]
        return Jet(space, acc)

    def _reciprocal_coef(self) -> np.ndarray:
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("division by a jet with zero value part")
        return self._compose([(-1.0) ** k / v ** (k + 1)
                              for k in range(self.space.order + 1)]).coef


def _binom(p: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= (p - i) / (i + 1)
    return out


# -- math functions dispatching on Jet vs plain number -----------------------

def _series(x, gen):
    if isinstance(x, Jet):
        return x._compose(gen(x.value, x.space.order))
    return gen(x, 0)[0]


def sin(x):
    def gen(v, n):
        s, c = math.sin(v), math.cos(v)
        cycle = (s, c, -s, -c)
        return [cycle[k % 4] / math.factorial(k) for k in range(n + 1)]
    return _series(x, gen)


def cos(x):
    def gen(v, n):
        s, c = math.sin(v), math.cos(v)
        cycle = (c, -s, -c, s)
        return [cycle[k % 4] / math.factorial(k) for k in range(n + 1)]
    return _series(x, gen)


def sinh(x):
    def gen(v, n):
        s, c = math.sinh(v), math.cosh(v)
        return [(s if k % 2 == 0 else c) / math.factorial(k) for k in range(n + 1)]
    return _series(x, gen)


def cosh(x):
    def gen(v, n):
        s, c = math.sinh(v), math.cosh(v)
        return [(c if k % 2 == 0 else s) / math.factorial(k) for k in range(n + 1)]
    return _series(x, gen)


def exp(x):
    def gen(v, n):
        e = math.exp(v)
        return [e / math.factorial(k) for k in range(n + 1)]
    return _series(x, gen)


def log(x):
    def gen(v, n):
        if v <= 0.0:
            raise ValueError("log of a non-positive value part")
        out = [math.log(v)]
        out.extend((-1.0) ** (k - 1) / (k * v ** k) for k in range(1, n + 1))
        return out
    return _series(x, gen)


def sqrt(x):
    def gen(v, n):
        if v <= 0.0:
            raise ValueError("sqrt of a non-positive value part")
        return [_binom(0.5, k) * v ** (0.5 - k) for k in range(n + 1)]
    return _series(x, gen)


def tan(x):
    if isinstance(x, Jet):
        return sin(x) / cos(x)
    return math.tan(x)


def tanh(x):
    if isinstance(x, Jet):
        return sinh(x) / cosh(x)
    return math.tanh(x)


def as_jet(x, space: JetSpace) -> Jet:
    """Coerce a plain number to a constant jet (no-op for jets)."""
    if isinstance(x, Jet):
        return x
    return Jet.constant(space, float(x))


def seed_jets(space: JetSpace, point) -> tuple[Jet, Jet, Jet]:
    """The three coordinate jets at a point, each seeded on its own axis."""
    return tuple(Jet.variable(space, v, float(point[v])) for v in range(3))
