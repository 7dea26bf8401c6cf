"""Outward-rounded interval arithmetic in binary64.

Every endpoint operation is computed in round-to-nearest and then moved one
ulp outward, except where an error-free transformation (TwoSum, Dekker's
product) proves the rounded result exact.  Transcendental functions rely on
the libm accuracy bound of strictly less than one ulp.

No global rounding-mode state is touched, so all functions are reentrant and
bit-reproducible.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DegenerateBox, DomainError, IntervalOverflow, SingularityError

__all__ = [
    "Interval",
    "EMPTY",
    "Box",
    "intersect",
    "hull",
    "exp",
    "log",
    "sqrt",
    "ipow",
    "imin",
    "imax",
    "bisect",
    "eval_monotone",
    "eval_rational",
    "Rational",
    "parse_rational",
]

_INF = math.inf
# Below this magnitude a product error term may be lost to underflow.
_TINY = 2.0 ** -969
# Veltkamp splitting overflows above this magnitude.
_BIG = 2.0 ** 995
_SPLIT = 134217729.0


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _two_prod_err(a: float, b: float, p: float) -> float:
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _prod_exact_unknown(a: float, b: float, p: float) -> bool:
    return (
        abs(p) < _TINY
        or abs(a) > _BIG
        or abs(b) > _BIG
    )


# --- directed scalar primitives ------------------------------------------------


def add_lo(a: float, b: float) -> float:
    s = a + b
    if s == _INF or s == -_INF:
        return s
    return s if _two_sum_err(a, b, s) >= 0.0 else _dn(s)


def add_hi(a: float, b: float) -> float:
    s = a + b
    if s == _INF or s == -_INF:
        return s
    return s if _two_sum_err(a, b, s) <= 0.0 else _up(s)


def mul_lo(a: float, b: float) -> float:
    p = a * b
    if a == 0.0 or b == 0.0:
        return p
    if _prod_exact_unknown(a, b, p):
        return _dn(p)
    return p if _two_prod_err(a, b, p) >= 0.0 else _dn(p)


def mul_hi(a: float, b: float) -> float:
    p = a * b
    if a == 0.0 or b == 0.0:
        return p
    if _prod_exact_unknown(a, b, p):
        return _up(p)
    return p if _two_prod_err(a, b, p) <= 0.0 else _up(p)


def _div_dir(a: float, b: float) -> tuple[float, int]:
    """Quotient and the sign of (a/b - q): -1, 0, +1, or 2 when unknown."""
    q = a / b
    if a == 0.0:
        return q, 0
    if abs(q) < _TINY or abs(a) < _TINY or _prod_exact_unknown(q, b, q * b) or abs(q) > _BIG:
        return q, 2
    p = q * b
    e = _two_prod_err(q, b, p)
    r = (a - p) - e
    if r == 0.0:
        return q, 0
    return q, (1 if (r > 0.0) == (b > 0.0) else -1)


def div_lo(a: float, b: float) -> float:
    q, d = _div_dir(a, b)
    return q if d == 0 or d == 1 else _dn(q)


def div_hi(a: float, b: float) -> float:
    q, d = _div_dir(a, b)
    return q if d == 0 or d == -1 else _up(q)


def _sqrt_dir(x: float) -> tuple[float, int]:
    s = math.sqrt(x)
    if x == 0.0:
        return s, 0
    if x < _TINY or x > _BIG:
        return s, 2
    p = s * s
    r = (x - p) - _two_prod_err(s, s, p)
    if r == 0.0:
        return s, 0
    return s, (1 if r > 0.0 else -1)


def sqrt_lo(x: float) -> float:
    s, d = _sqrt_dir(x)
    return s if d == 0 or d == 1 else _dn(s)


def sqrt_hi(x: float) -> float:
    s, d = _sqrt_dir(x)
    return s if d == 0 or d == -1 else _up(s)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise IntervalOverflow(f"exp({x!r}) overflows") from None


def exp_lo(x: float) -> float:
    if x == 0.0:
        return 1.0
    return max(_dn(_exp(x)), 0.0)


def exp_hi(x: float) -> float:
    if x == 0.0:
        return 1.0
    return _up(_exp(x))


def log_lo(x: float) -> float:
    if x == 1.0:
        return 0.0
    return _dn(math.log(x))


def log_hi(x: float) -> float:
    if x == 1.0:
        return 0.0
    return _up(math.log(x))


def _pow(x: float, y: float) -> float:
    try:
        return math.pow(x, y)
    except OverflowError:
        raise IntervalOverflow(f"pow({x!r}, {y!r}) overflows") from None


def pow_lo(x: float, y: float) -> float:
    """Lower bound of x**y for x >= 0 (x == 0 requires y > 0)."""
    if y == 1.0 or x == 1.0 or x == 0.0 or y == 0.0:
        return 1.0 if (x == 1.0 or y == 0.0) else x
    if y == 2.0:
        return mul_lo(x, x)
    if y == 0.5:
        return sqrt_lo(x)
    return max(_dn(_pow(x, y)), 0.0)


def pow_hi(x: float, y: float) -> float:
    if y == 1.0 or x == 1.0 or x == 0.0 or y == 0.0:
        return 1.0 if (x == 1.0 or y == 0.0) else x
    if y == 2.0:
        return mul_hi(x, x)
    if y == 0.5:
        return sqrt_hi(x)
    return _up(_pow(x, y))


# --- the interval type -----------------------------------------------------------


_REAL = (int, float)


def _mk(lo: float, hi: float) -> "Interval":
    if lo == -_INF or hi == _INF or lo == _INF or hi == -_INF:
        raise IntervalOverflow(f"interval endpoint overflow: [{lo!r}, {hi!r}]")
    iv = object.__new__(Interval)
    iv.lo = lo
    iv.hi = hi
    return iv


class Interval:
    """Closed interval [lo, hi] with finite binary64 endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None) -> None:
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("NaN interval endpoint")
        if lo > hi:
            raise DomainError(f"invalid interval: lo={lo!r} > hi={hi!r}")
        if math.isinf(lo) or math.isinf(hi):
            raise IntervalOverflow(f"interval endpoint overflow: [{lo!r}, {hi!r}]")
        self.lo = lo
        self.hi = hi

    # construction helpers
    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @staticmethod
    def coerce(x: "Interval | float") -> "Interval":
        if isinstance(x, Interval):
            return x
        return Interval(x, x)

    # queries
    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def is_thin(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: "Interval | float") -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __contains__(self, x: "Interval | float") -> bool:
        return self.contains(x)

    def straddles_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    def __iter__(self):
        yield self.lo
        yield self.hi

    # arithmetic
    def __neg__(self) -> "Interval":
        return _mk(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other: "Interval | float") -> "Interval":
        if not isinstance(other, Interval):
            if not isinstance(other, _REAL):
                return NotImplemented
            other = Interval(other)
        return _mk(add_lo(self.lo, other.lo), add_hi(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other: "Interval | float") -> "Interval":
        if not isinstance(other, Interval):
            if not isinstance(other, _REAL):
                return NotImplemented
            other = Interval(other)
        return _mk(add_lo(self.lo, -other.hi), add_hi(self.hi, -other.lo))

    def __rsub__(self, other: float) -> "Interval":
        if not isinstance(other, _REAL):
            return NotImplemented
        return Interval(other) - self

    def __mul__(self, other: "Interval | float") -> "Interval":
        if not isinstance(other, Interval):
            if not isinstance(other, _REAL):
                return NotImplemented
            other = Interval(other)
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval | float") -> "Interval":
        if not isinstance(other, Interval):
            if not isinstance(other, _REAL):
                return NotImplemented
            other = Interval(other)
        return _div(self, other)

    def __rtruediv__(self, other: float) -> "Interval":
        if not isinstance(other, _REAL):
            return NotImplemented
        return _div(Interval(other), self)

    def __pow__(self, other: "Interval | float") -> "Interval":
        if not isinstance(other, (Interval,) + _REAL):
            return NotImplemented
        return ipow(self, other)

    def square(self) -> "Interval":
        if self.lo >= 0.0:
            return _mk(mul_lo(self.lo, self.lo), mul_hi(self.hi, self.hi))
        if self.hi <= 0.0:
            return _mk(mul_lo(self.hi, self.hi), mul_hi(self.lo, self.lo))
        m = max(-self.lo, self.hi)
        return _mk(0.0, mul_hi(m, m))


def _mul(a: Interval, b: Interval) -> Interval:
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    if al >= 0.0:
        if bl >= 0.0:
            return _mk(mul_lo(al, bl), mul_hi(ah, bh))
        if bh <= 0.0:
            return _mk(mul_lo(ah, bl), mul_hi(al, bh))
        return _mk(mul_lo(ah, bl), mul_hi(ah, bh))
    if ah <= 0.0:
        if bl >= 0.0:
            return _mk(mul_lo(al, bh), mul_hi(ah, bl))
        if bh <= 0.0:
            return _mk(mul_lo(ah, bh), mul_hi(al, bl))
        return _mk(mul_lo(al, bh), mul_hi(al, bl))
    if bl >= 0.0:
        return _mk(mul_lo(al, bh), mul_hi(ah, bh))
    if bh <= 0.0:
        return _mk(mul_lo(ah, bl), mul_hi(al, bl))
    return _mk(
        min(mul_lo(al, bh), mul_lo(ah, bl)),
        max(mul_hi(al, bl), mul_hi(ah, bh)),
    )


def _div(a: Interval, b: Interval) -> Interval:
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    if bl > 0.0:
        if al >= 0.0:
            return _mk(div_lo(al, bh), div_hi(ah, bl))
        if ah <= 0.0:
            return _mk(div_lo(al, bl), div_hi(ah, bh))
        return _mk(div_lo(al, bl), div_hi(ah, bl))
    if bh < 0.0:
        if al >= 0.0:
            return _mk(div_lo(ah, bh), div_hi(al, bl))
        if ah <= 0.0:
            return _mk(div_lo(ah, bl), div_hi(al, bh))
        return _mk(div_lo(ah, bh), div_hi(al, bh))
    raise DomainError(f"division by an interval containing zero: {b}")


# --- elementary functions ----------------------------------------------------------


def exp(x: Interval) -> Interval:
    return _mk(exp_lo(x.lo), exp_hi(x.hi))


def log(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise DomainError(f"log of non-positive interval {x}")
    return _mk(log_lo(x.lo), log_hi(x.hi))


def sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise DomainError(f"sqrt of negative interval {x}")
    return _mk(sqrt_lo(x.lo), sqrt_hi(x.hi))


def ipow(base: "Interval | float", expo: "Interval | float") -> Interval:
    """Enclosure of {b**e : b in base, e in expo} for non-negative bases.

    e*log(b) is bilinear in (e, log b), so the extremes sit at the corners.
    """
    base = Interval.coerce(base)
    expo = Interval.coerce(expo)
    bl, bh, el, eh = base.lo, base.hi, expo.lo, expo.hi
    if bl < 0.0:
        raise DomainError(f"pow with negative base {base}")
    if bl == 0.0:
        if el == 0.0 and eh == 0.0:
            return _mk(1.0, 1.0)
        if el <= 0.0:
            raise SingularityError(f"pow: zero base with non-positive exponent {expo}")
        if bh == 0.0:
            return _mk(0.0, 0.0)
        return _mk(0.0, max(pow_hi(bh, el), pow_hi(bh, eh)))
    if bl == bh and el == eh:
        return _mk(pow_lo(bl, el), pow_hi(bl, el))
    lo = min(pow_lo(bl, el), pow_lo(bl, eh), pow_lo(bh, el), pow_lo(bh, eh))
    hi = max(pow_hi(bl, el), pow_hi(bl, eh), pow_hi(bh, el), pow_hi(bh, eh))
    return _mk(lo, hi)


def imin(a: Interval, b: Interval) -> Interval:
    """Exact interval minimum: encloses min(x, y) for x in a, y in b."""
    return _mk(min(a.lo, b.lo), min(a.hi, b.hi))


def imax(a: Interval, b: Interval) -> Interval:
    return _mk(max(a.lo, b.lo), max(a.hi, b.hi))


# --- set operations -------------------------------------------------------------


class _Empty:
    """The empty set; only ``intersect`` produces it."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Empty, ())


EMPTY = _Empty()


def intersect(a: Interval, b: Interval) -> "Interval | _Empty":
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        return EMPTY
    return _mk(lo, hi)


def hull(*xs: Interval) -> Interval:
    return _mk(min(x.lo for x in xs), max(x.hi for x in xs))


# --- boxes ------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Rectangle [p.lo, p.hi] x [sigma.lo, sigma.hi] of the (p, sigma) plane."""

    p: Interval
    sigma: Interval

    def __post_init__(self) -> None:
        if not self.p.lo > 1.0:
            raise DomainError(f"box requires p > 1, got {self.p}")
        if not self.sigma.lo >= 1.0:
            raise DomainError(f"box requires sigma >= 1, got {self.sigma}")

    @classmethod
    def from_bounds(cls, p_lo: float, p_hi: float, s_lo: float, s_hi: float) -> "Box":
        return cls(Interval(p_lo, p_hi), Interval(s_lo, s_hi))

    @classmethod
    def point(cls, p: float, sigma: float) -> "Box":
        return cls(Interval(p), Interval(sigma))

    @property
    def delta_p(self) -> float:
        return self.p.width

    @property
    def delta_sigma(self) -> float:
        return self.sigma.width

    def is_point(self) -> bool:
        return self.p.is_thin() and self.sigma.is_thin()

    def center(self) -> "Box":
        return Box.point(self.p.mid, self.sigma.mid)

    def contains(self, other: "Box") -> bool:
        return self.p.contains(other.p) and self.sigma.contains(other.sigma)


def bisect(box: Box) -> tuple[Box, Box]:
    """Split at the midpoint of the wider coordinate; ties go to p."""
    wp, ws = box.p.width, box.sigma.width
    if wp == 0.0 and ws == 0.0:
        raise DegenerateBox(f"cannot bisect point box {box}")
    if wp >= ws:
        m = box.p.mid
        return Box(Interval(box.p.lo, m), box.sigma), Box(Interval(m, box.p.hi), box.sigma)
    m = box.sigma.mid
    return Box(box.p, Interval(box.sigma.lo, m)), Box(box.p, Interval(m, box.sigma.hi))


def _coords(box: "Box | Sequence[Interval]") -> tuple[Interval, ...]:
    if isinstance(box, Box):
        return (box.p, box.sigma)
    return tuple(Interval.coerce(x) for x in box)


def eval_monotone(
    f: Callable[..., Interval],
    box: "Box | Sequence[Interval]",
    increasing: Sequence[bool] = (True, True),
) -> Interval:
    """Interval evaluation of a function monotone in each argument.

    ``f`` is called with thin intervals at the two extreme corners, so its own
    rounding is enclosed; ``increasing[k]`` gives the direction in argument k.
    """
    xs = _coords(box)
    if len(xs) != len(increasing):
        raise DomainError("one monotonicity direction per coordinate is required")
    lo_corner = [Interval(x.lo if up else x.hi) for x, up in zip(xs, increasing)]
    hi_corner = [Interval(x.hi if up else x.lo) for x, up in zip(xs, increasing)]
    lo = Interval.coerce(f(*lo_corner))
    hi = Interval.coerce(f(*hi_corner))
    return _mk(lo.lo, hi.hi)


# --- rational expressions ---------------------------------------------------------


class Rational:
    """Node of a rational expression tree over named variables."""

    __slots__ = ("op", "args")

    def __init__(self, op: str, *args) -> None:
        self.op = op
        self.args = args

    @staticmethod
    def var(name: str) -> "Rational":
        return Rational("var", name)

    @staticmethod
    def const(value: float) -> "Rational":
        return Rational("const", float(value))

    @staticmethod
    def _wrap(x: "Rational | float") -> "Rational":
        return x if isinstance(x, Rational) else Rational.const(x)

    def __add__(self, o):
        return Rational("+", self, Rational._wrap(o))

    def __radd__(self, o):
        return Rational("+", Rational._wrap(o), self)

    def __sub__(self, o):
        return Rational("-", self, Rational._wrap(o))

    def __rsub__(self, o):
        return Rational("-", Rational._wrap(o), self)

    def __mul__(self, o):
        return Rational("*", self, Rational._wrap(o))

    def __rmul__(self, o):
        return Rational("*", Rational._wrap(o), self)

    def __truediv__(self, o):
        return Rational("/", self, Rational._wrap(o))

    def __rtruediv__(self, o):
        return Rational("/", Rational._wrap(o), self)

    def __neg__(self):
        return Rational("neg", self)

    def variables(self) -> set[str]:
        if self.op == "var":
            return {self.args[0]}
        if self.op == "const":
            return set()
        out: set[str] = set()
        for a in self.args:
            out |= a.variables()
        return out

    def evaluate(self, env: dict[str, Interval]) -> Interval:
        op = self.op
        if op == "var":
            return env[self.args[0]]
        if op == "const":
            return Interval(self.args[0])
        if op == "neg":
            return -self.args[0].evaluate(env)
        a = self.args[0].evaluate(env)
        b = self.args[1].evaluate(env)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return a / b


_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/"}


def parse_rational(text: str) -> Rational:
    """Parse ``text`` (numbers, names, + - * / and parentheses) into a tree."""

    def conv(node: ast.AST) -> Rational:
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return Rational(_BINOPS[type(node.op)], conv(node.left), conv(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = conv(node.operand)
            return Rational("neg", inner) if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return Rational.const(node.value)
        if isinstance(node, ast.Name):
            return Rational.var(node.id)
        raise DomainError(f"not a rational expression: {ast.dump(node)}")

    return conv(ast.parse(text, mode="eval").body)


def eval_rational(
    expr: "Rational | str",
    box: "Box | Sequence[Interval]",
    names: Sequence[str] = ("x", "y"),
) -> Interval:
    """Naive interval extension of a rational expression on a box."""
    if isinstance(expr, str):
        expr = parse_rational(expr)
    xs = _coords(box)
    env = dict(zip(names, xs))
    missing = expr.variables() - env.keys()
    if missing:
        raise DomainError(f"unbound variables: {sorted(missing)}")
    return expr.evaluate(env)
