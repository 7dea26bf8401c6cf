"""Truncated bivariate Taylor arithmetic (pure-Python kernel).

Coefficients are normalized Taylor coefficients c[i, j] = d^(i+j) f / dx^i dy^j / (i! j!)
stored by total degree, so truncating to a lower order is a prefix slice.
Variable 0 is the exponent p, variable 1 the moduli coordinate.

Coefficients may be floats or ``Interval`` objects; with intervals every
coefficient of the result encloses the true coefficient at every point of the
base enclosure.  ``_ckernel.IJet`` mirrors this class operation for operation.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .errors import DomainError, SingularityError
from .interval import Interval, exp as iexp, ipow, log as ilog

MAX_ORDER = 6


def ncoef(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def index(i: int, j: int) -> int:
    d = i + j
    return d * (d + 1) // 2 + j


@lru_cache(maxsize=None)
def exponents(order: int) -> tuple[tuple[int, int], ...]:
    out = []
    for d in range(order + 1):
        for j in range(d + 1):
            out.append((d - j, j))
    return tuple(out)


@lru_cache(maxsize=None)
def product_table(order: int) -> tuple[tuple[int, tuple[tuple[int, int], ...]], ...]:
    """For each output slot, the (a_slot, b_slot) pairs summed in fixed order."""
    table = []
    for out, (i, j) in enumerate(exponents(order)):
        terms = []
        for k in range(i + 1):
            for l in range(j + 1):
                terms.append((index(k, l), index(i - k, j - l)))
        table.append((out, tuple(terms)))
    return tuple(table)


@lru_cache(maxsize=None)
def deriv_table(order: int, var: int) -> tuple[tuple[int, int, int], ...]:
    """(out_slot, src_slot, factor) for the derivative along ``var``."""
    rows = []
    for out, (i, j) in enumerate(exponents(order - 1)):
        if var == 0:
            rows.append((out, index(i + 1, j), i + 1))
        else:
            rows.append((out, index(i, j + 1), j + 1))
    return tuple(rows)


# --- scalar dispatch (float or Interval) ----------------------------------------


def _is_iv(x) -> bool:
    return isinstance(x, Interval)


def _is_zero(x) -> bool:
    if isinstance(x, Interval):
        return x.lo == 0.0 and x.hi == 0.0
    return x == 0.0


def _zero_like(x):
    return Interval(0.0) if isinstance(x, Interval) else 0.0


def _s_exp(x):
    return iexp(x) if _is_iv(x) else math.exp(x)


def _s_log(x):
    if _is_iv(x):
        if x.lo <= 0.0:
            raise SingularityError(f"log of interval reaching zero {x}")
        return ilog(x)
    if x <= 0.0:
        raise SingularityError(f"log of non-positive value {x!r}")
    return math.log(x)


def _s_pow(x, e):
    if _is_iv(x) or _is_iv(e):
        return ipow(x, e)
    if x < 0.0:
        raise DomainError(f"pow with negative base {x!r}")
    if x == 0.0:
        if e == 0.0:
            return 1.0
        if e < 0.0:
            raise SingularityError("pow: zero base with negative exponent")
        return 0.0
    return math.pow(x, e)


def _s_recip(x):
    if _is_iv(x):
        return 1.0 / x
    if x == 0.0:
        raise SingularityError("reciprocal of zero")
    return 1.0 / x


class Jet:
    """Bivariate Taylor polynomial truncated at total degree ``order``."""

    __slots__ = ("order", "c")

    def __init__(self, coeffs, order: int) -> None:
        self.order = order
        self.c = list(coeffs)

    # construction
    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        z = _zero_like(value)
        return cls([value] + [z] * (ncoef(order) - 1), order)

    @classmethod
    def variable(cls, value, var: int, order: int, seed: bool = True) -> "Jet":
        jet = cls.constant(value, order)
        if seed and order >= 1:
            jet.c[1 + var] = Interval(1.0) if _is_iv(value) else 1.0
        return jet

    # access
    @property
    def value(self):
        return self.c[0]

    def coef(self, i: int, j: int):
        return self.c[index(i, j)]

    def coeffs(self) -> list:
        return list(self.c)

    def get(self, k: int):
        return self.c[k]

    def set(self, k: int, value) -> None:
        self.c[k] = value

    def is_constant(self) -> bool:
        return all(_is_zero(x) for x in self.c[1:])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise DomainError("cannot raise the order of a jet")
        return Jet(self.c[: ncoef(order)], order)

    def with_value(self, value) -> "Jet":
        out = Jet(self.c, self.order)
        out.c[0] = value
        return out

    def d(self, var: int) -> "Jet":
        """Partial derivative along variable ``var`` (order drops by one)."""
        if self.order < 1:
            raise DomainError("derivative of an order-0 jet")
        c = self.c
        out = [None] * ncoef(self.order - 1)
        for o, src, k in deriv_table(self.order, var):
            out[o] = c[src] * k if k != 1 else c[src]
        return Jet(out, self.order - 1)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, c={self.c!r})"

    # arithmetic
    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __neg__(self) -> "Jet":
        return Jet([-x for x in self.c], self.order)

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            out = Jet(self.c, self.order)
            out.c[0] = self.c[0] + other
            return out
        n = min(self.order, other.order)
        return Jet([a + b for a, b in zip(self.c[: ncoef(n)], other.c)], n)

    def __radd__(self, other) -> "Jet":
        out = Jet(self.c, self.order)
        out.c[0] = other + self.c[0]
        return out

    def __sub__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            out = Jet(self.c, self.order)
            out.c[0] = self.c[0] - other
            return out
        n = min(self.order, other.order)
        return Jet([a - b for a, b in zip(self.c[: ncoef(n)], other.c)], n)

    def __rsub__(self, other) -> "Jet":
        out = -self
        out.c[0] = other - self.c[0]
        return out

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet([x * other for x in self.c], self.order)
        n = min(self.order, other.order)
        a, b = self.c, other.c
        out = []
        for _, terms in product_table(n):
            acc = None
            for ia, ib in terms:
                t = a[ia] * b[ib]
                acc = t if acc is None else acc + t
            out.append(acc)
        return Jet(out, n)

    def __rmul__(self, other) -> "Jet":
        return Jet([other * x for x in self.c], self.order)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet([x / other for x in self.c], self.order)
        q = self * other.recip()
        q.c[0] = self.c[0] / other.c[0]
        return q

    def __rtruediv__(self, other) -> "Jet":
        q = self.recip() * other
        q.c[0] = other / self.c[0]
        return q

    def __pow__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.powc(other)
        if other.is_constant():
            return self.powc(other.c[0])
        n = min(self.order, other.order)
        base = self.truncate(n)
        w = other.truncate(n) * base.log()
        return w._exp_from(_s_pow(base.c[0], other.c[0]))

    def __rpow__(self, other) -> "Jet":
        # other ** self with scalar base > 0
        if _is_iv(self.c[0]) and not _is_iv(other):
            other = Interval(other)
        w = self * _s_log(other)
        return w._exp_from(_s_pow(other, self.c[0]))

    # composition with scalar functions
    def compose(self, taylor) -> "Jet":
        """sum_k taylor[k] * (self - self.value)**k, by Horner's rule."""
        n = self.order
        delta = Jet(self.c, n)
        delta.c[0] = _zero_like(self.c[0])
        acc = Jet.constant(taylor[n], n)
        for k in range(n - 1, -1, -1):
            acc = acc * delta
            acc.c[0] = acc.c[0] + taylor[k]
        return acc

    def _exp_from(self, e0) -> "Jet":
        taylor = [e0]
        for k in range(1, self.order + 1):
            taylor.append(e0 / float(math.factorial(k)))
        return self.compose(taylor)

    def exp(self) -> "Jet":
        return self._exp_from(_s_exp(self.c[0]))

    def log(self) -> "Jet":
        u0 = self.c[0]
        taylor = [_s_log(u0)]
        if self.order >= 1:
            r = _s_recip(u0)
            rk = r
            for k in range(1, self.order + 1):
                term = rk / float(k)
                taylor.append(term if k % 2 == 1 else -term)
                rk = rk * r
        return self.compose(taylor)

    def recip(self) -> "Jet":
        u0 = self.c[0]
        r = _s_recip(u0)
        taylor = [r]
        rk = r
        for k in range(1, self.order + 1):
            rk = rk * r
            taylor.append(rk if k % 2 == 0 else -rk)
        return self.compose(taylor)

    def powc(self, e) -> "Jet":
        """self ** e for a scalar exponent e (float or Interval)."""
        u0 = self.c[0]
        if _is_iv(u0) and not _is_iv(e):
            e = Interval(e)
        taylor = [_s_pow(u0, e)]
        binom = None
        for k in range(1, self.order + 1):
            f = (e - float(k - 1)) / float(k)
            binom = f if binom is None else binom * f
            if _is_zero(binom):
                taylor.append(binom)
                continue
            taylor.append(binom * _s_pow(u0, e - float(k)))
        return self.compose(taylor)

    def sqrt(self) -> "Jet":
        return self.powc(0.5)
