"""Truncated bivariate Taylor arithmetic ("jets") over numpy batches.

A :class:`Jet` of order ``k`` stores the Taylor coefficients
``c[a, b] = (1 / a! b!) d^{a+b} f / du^a dv^b`` for ``a + b <= k`` in one
flat array of shape ``(m, *batch)`` with ``m = (k + 1)(k + 2) / 2``.
Coefficients are ordered by total degree, so truncating to a lower order
is a slice.  Mixed partials have a single slot, hence are symmetric by
construction.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .expr import ExpressionDomainError, evaluate, pretty

MAX_ORDER = 4


def ncoef(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def index(a: int, b: int) -> int:
    d = a + b
    return d * (d + 1) // 2 + b


@lru_cache(maxsize=None)
def monomials(order: int):
    return [(d - b, b) for d in range(order + 1) for b in range(d + 1)]


@lru_cache(maxsize=None)
def _product_table(order: int):
    mons = monomials(order)
    triples = []
    for i, (a1, b1) in enumerate(mons):
        for j, (a2, b2) in enumerate(mons):
            if a1 + b1 + a2 + b2 <= order:
                triples.append((index(a1 + a2, b1 + b2), i, j))
    triples.sort()
    out = np.array([t[0] for t in triples])
    left = np.array([t[1] for t in triples])
    right = np.array([t[2] for t in triples])
    starts = np.flatnonzero(np.r_[True, out[1:] != out[:-1]])
    return left, right, starts


@lru_cache(maxsize=None)
def _product_groups(order: int):
    """The product table grouped by output coefficient."""
    left, right, starts = _product_table(order)
    ends = list(starts[1:]) + [len(left)]
    return [tuple(zip(left[s:e].tolist(), right[s:e].tolist())) for s, e in zip(starts, ends)]


_LOOP_MIN_BATCH = 256  # above this a per-coefficient loop beats fancy indexing


@lru_cache(maxsize=None)
def _deriv_table(order: int, axis: int):
    src, fac = [], []
    for a, b in monomials(order - 1):
        if axis == 0:
            src.append(index(a + 1, b))
            fac.append(a + 1)
        else:
            src.append(index(a, b + 1))
            fac.append(b + 1)
    return np.array(src), np.array(fac, dtype=float)


class Jet:
    """Order-``k`` jet of a scalar function of ``(u, v)`` on a batch of points."""

    __slots__ = ("c", "order")
    __array_ufunc__ = None

    def __init__(self, c: np.ndarray, order: int):
        self.c = c
        self.order = order

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, shape=()):
        c = np.zeros((ncoef(order),) + tuple(shape))
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, values, axis: int, order: int):
        values = np.asarray(values, dtype=float)
        c = np.zeros((ncoef(order),) + values.shape)
        c[0] = values
        if order >= 1:
            c[1 + axis] = 1.0
        return cls(c, order)

    # -- access ---------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def shape(self):
        return self.c.shape[1:]

    def partial(self, a: int, b: int) -> np.ndarray:
        """The mixed partial derivative d^{a+b}/du^a dv^b."""
        if a + b > self.order:
            raise ValueError(f"partial ({a},{b}) exceeds jet order {self.order}")
        return self.c[index(a, b)] * (math.factorial(a) * math.factorial(b))

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.c[: ncoef(order)], order)

    def deriv(self, axis: int) -> "Jet":
        """Partial derivative along ``axis`` (0 = u, 1 = v); lowers the order by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _deriv_table(self.order, axis)
        fac = fac.reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[src] * fac, self.order - 1)

    def __getitem__(self, item):
        if not isinstance(item, tuple):
            item = (item,)
        return Jet(self.c[(slice(None),) + item], self.order)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            c = a.c.copy()
            c[0] = c[0] + other
            return Jet(c, a.order)
        return Jet(a.c + b.c, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a.c * np.asarray(other), a.order)
        if a.order == 0:
            return Jet(a.c * b.c, 0)
        if max(a.c[0].size, b.c[0].size) >= _LOOP_MIN_BATCH:
            ac, bc = a.c, b.c
            out = np.empty((len(ac),) + np.broadcast_shapes(ac.shape[1:], bc.shape[1:]))
            for o, pairs in enumerate(_product_groups(a.order)):
                i, j = pairs[0]
                acc = out[o]
                np.multiply(ac[i], bc[j], out=acc)
                for i, j in pairs[1:]:
                    acc += ac[i] * bc[j]
            return Jet(out, a.order)
        left, right, starts = _product_table(a.order)
        prod = a.c[left] * b.c[right]
        return Jet(np.add.reduceat(prod, starts, axis=0), a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / np.asarray(other), self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        return power(self, float(exponent))

    def reciprocal(self) -> "Jet":
        a0 = self.c[0]
        derivs = [1.0 / a0]
        for k in range(1, self.order + 1):
            derivs.append(-k * derivs[-1] / a0)
        return compose(self, derivs)

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"


def compose(a: Jet, derivs) -> Jet:
    """``f(a)`` given ``derivs[k] = f^{(k)}(a.value)`` for ``k <= a.order``."""
    k = a.order
    if k == 0:
        return Jet(np.asarray(derivs[0])[None] * np.ones_like(a.c), 0)
    delta = Jet(a.c.copy(), k)
    delta.c[0] = 0.0
    res = Jet.constant(0.0, k, a.shape)
    res.c[0] = derivs[k] / math.factorial(k)
    for j in range(k - 1, -1, -1):
        res = res * delta
        res.c[0] = res.c[0] + derivs[j] / math.factorial(j)
    return res


def sin(a: Jet) -> Jet:
    s, c = np.sin(a.c[0]), np.cos(a.c[0])
    return compose(a, [s, c, -s, -c, s][: a.order + 1])


def cos(a: Jet) -> Jet:
    s, c = np.sin(a.c[0]), np.cos(a.c[0])
    return compose(a, [c, -s, -c, s, c][: a.order + 1])


def exp(a: Jet) -> Jet:
    e = np.exp(a.c[0])
    return compose(a, [e] * (a.order + 1))


def log(a: Jet) -> Jet:
    a0 = a.c[0]
    derivs = [np.log(a0)]
    inv = 1.0 / a0
    term = inv
    for k in range(1, a.order + 1):
        derivs.append(term)
        term = -k * term * inv
    return compose(a, derivs)


def power(a: Jet, p: float) -> Jet:
    """``a ** p`` for a real constant exponent."""
    if p == int(p) and 0 <= p <= 8:
        n = int(p)
        res = Jet.constant(1.0, a.order, a.shape)
        base = a
        while n:
            if n & 1:
                res = res * base
            n >>= 1
            if n:
                base = base * base
        return res
    a0 = a.c[0]
    derivs = []
    coef = 1.0
    for k in range(a.order + 1):
        derivs.append(coef * a0 ** (p - k))
        coef *= p - k
    return compose(a, derivs)


def sqrt(a: Jet) -> Jet:
    return power(a, 0.5)


def hypot3(x: Jet, y: Jet, z: Jet) -> Jet:
    return sqrt(x * x + y * y + z * z)


# ---------------------------------------------------------------------------
# libraries for expression evaluation


class JetLib:
    """Arithmetic adapter evaluating expression trees on jets with domain checks."""

    def __init__(self, order: int, shape):
        self.order = order
        self.shape = shape

    def const(self, value):
        return float(value)

    def neg(self, a):
        return -a

    def add(self, a, b):
        return a + b if isinstance(a, Jet) or not isinstance(b, Jet) else b + a

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b if isinstance(a, Jet) or not isinstance(b, Jet) else b * a

    def div(self, a, b, node):
        b0 = b.c[0] if isinstance(b, Jet) else np.asarray(b)
        if np.any(b0 == 0):
            raise ExpressionDomainError("division by zero", pretty(node))
        return a / b

    def pow(self, a, b, node):
        if not isinstance(a, Jet) and not isinstance(b, Jet):
            if a < 0 and b != int(b):
                raise ExpressionDomainError("non-integer power of negative base", pretty(node))
            return float(a) ** float(b)
        if isinstance(b, Jet):
            a0 = a.c[0] if isinstance(a, Jet) else np.asarray(a)
            if np.any(a0 <= 0):
                raise ExpressionDomainError("variable exponent needs a positive base", pretty(node))
            la = log(a) if isinstance(a, Jet) else math.log(a)
            return exp(b * la)
        if b == int(b):
            if b < 0 and np.any(a.c[0] == 0):
                raise ExpressionDomainError("negative power of zero", pretty(node))
            if b < 0:
                return power(a.reciprocal(), -b)
            return power(a, b)
        bad = a.c[0] < 0 if a.order == 0 else a.c[0] <= 0
        if np.any(bad):
            raise ExpressionDomainError("non-integer power of nonpositive base", pretty(node))
        return power(a, b)

    def _lift(self, a):
        return a if isinstance(a, Jet) else Jet.constant(a, self.order, self.shape)

    def sin(self, a, node):
        return sin(self._lift(a))

    def cos(self, a, node):
        return cos(self._lift(a))

    def exp(self, a, node):
        return exp(self._lift(a))

    def log(self, a, node):
        a = self._lift(a)
        if np.any(a.c[0] <= 0):
            raise ExpressionDomainError("log of nonpositive argument", pretty(node))
        return log(a)

    def sqrt(self, a, node):
        a = self._lift(a)
        bad = a.c[0] < 0 if a.order == 0 else a.c[0] <= 0
        if np.any(bad):
            raise ExpressionDomainError("sqrt of negative argument", pretty(node))
        return sqrt(a)

    def abs(self, a, node):
        a = self._lift(a)
        if a.order > 0 and np.any(a.c[0] == 0):
            raise ExpressionDomainError("abs is not differentiable where its argument vanishes", pretty(node))
        return a * np.sign(a.c[0])


class ArrayLib:
    """Value-only evaluation on numpy arrays (fast path for root finding)."""

    def const(self, value):
        return float(value)

    def neg(self, a):
        return -a

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b, node):
        if np.any(np.asarray(b) == 0):
            raise ExpressionDomainError("division by zero", pretty(node))
        return a / b

    def pow(self, a, b, node):
        if np.ndim(b) == 0 and float(b) == int(b):
            return np.power(a, int(b)) if int(b) >= 0 else np.power(np.asarray(a, float), int(b))
        if np.any(np.asarray(a) < 0):
            raise ExpressionDomainError("non-integer power of negative base", pretty(node))
        return np.power(a, b)

    def sin(self, a, node):
        return np.sin(a)

    def cos(self, a, node):
        return np.cos(a)

    def exp(self, a, node):
        return np.exp(a)

    def log(self, a, node):
        if np.any(np.asarray(a) <= 0):
            raise ExpressionDomainError("log of nonpositive argument", pretty(node))
        return np.log(a)

    def sqrt(self, a, node):
        if np.any(np.asarray(a) < 0):
            raise ExpressionDomainError("sqrt of negative argument", pretty(node))
        return np.sqrt(a)

    def abs(self, a, node):
        return np.abs(a)


def eval_jet(node, u, v, order: int) -> Jet:
    """Evaluate an expression tree as an order-``order`` jet at points ``(u, v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    shape = np.broadcast_shapes(u.shape, v.shape)
    u, v = np.broadcast_to(u, shape), np.broadcast_to(v, shape)
    env = {"u": Jet.variable(u, 0, order), "v": Jet.variable(v, 1, order)}
    out = evaluate(node, env, JetLib(order, shape))
    if not isinstance(out, Jet):
        out = Jet.constant(out, order, shape)
    return out


def eval_values(node, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = evaluate(node, {"u": u, "v": v}, ArrayLib())
    return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(u.shape, v.shape))
