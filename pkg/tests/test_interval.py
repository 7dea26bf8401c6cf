import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import assume, given, strategies as st

from critdet import (EMPTY, Box, DegenerateBox, DomainError, Interval, IntervalOverflow,
                     SingularityError, bisect, eval_monotone, eval_rational, intersect)
from critdet.interval import exp, hull, imin, ipow, log, sqrt

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False)


@st.composite
def intervals(draw, elems=finite):
    a, b = draw(elems), draw(elems)
    return Interval(min(a, b), max(a, b))


def member(draw, x: Interval) -> float:
    t = draw(st.floats(min_value=0.0, max_value=1.0))
    v = x.lo + t * (x.hi - x.lo)
    return min(max(v, x.lo), x.hi)


def exact_in(q: Fraction, x: Interval) -> bool:
    return Fraction(x.lo) <= q <= Fraction(x.hi)


def test_construction_rejects_bad_endpoints():
    with pytest.raises(DomainError):
        Interval(2.0, 1.0)
    with pytest.raises(DomainError):
        Interval(math.nan)
    with pytest.raises(IntervalOverflow):
        Interval(0.0, math.inf)


def test_thin_and_coerce():
    x = Interval(1.5)
    assert x.is_thin() and x.width == 0.0
    assert Interval.coerce(2) == Interval(2.0, 2.0)
    assert Interval.coerce(x) is x


@given(st.data(), intervals(), intervals())
def test_add_sub_mul_contain_exact_results(data, x, y):
    a, b = member(data.draw, x), member(data.draw, y)
    fa, fb = Fraction(a), Fraction(b)
    assert exact_in(fa + fb, x + y)
    assert exact_in(fa - fb, x - y)
    assert exact_in(fa * fb, x * y)


@given(st.data(), intervals(), intervals(positive))
def test_div_contains_exact_quotient(data, x, y):
    a, b = member(data.draw, x), member(data.draw, y)
    assert exact_in(Fraction(a) / Fraction(b), x / y)


def test_division_by_interval_containing_zero():
    with pytest.raises(DomainError):
        Interval(1.0) / Interval(-1.0, 1.0)


def test_one_tenth_is_not_exact():
    # 1/10 is not a binary64 number, so a rigorous quotient cannot be thin
    q = Interval(1.0) / Interval(10.0)
    assert q.lo < q.hi
    assert exact_in(Fraction(1, 10), q)


@given(st.data(), intervals(positive), intervals(st.floats(min_value=-4.0, max_value=4.0)))
def test_pow_exp_log_sqrt_contain_high_precision_values(data, x, e):
    mp.mp.dps = 40
    a, k = member(data.draw, x), member(data.draw, e)
    assume(abs(k * math.log(a)) < 600)
    ref = mp.mpf(a) ** mp.mpf(k)
    r = ipow(x, e)
    assert mp.mpf(r.lo) <= ref <= mp.mpf(r.hi)
    assert mp.mpf(log(x).lo) <= mp.log(a) <= mp.mpf(log(x).hi)
    assert mp.mpf(sqrt(x).lo) <= mp.sqrt(a) <= mp.mpf(sqrt(x).hi)
    s = Interval(min(x.lo, 50.0), min(x.hi, 50.0))
    b = min(a, 50.0)
    assert mp.mpf(exp(s).lo) <= mp.exp(b) <= mp.mpf(exp(s).hi)


def test_pow_zero_base_rules():
    assert ipow(Interval(0.0), Interval(0.0)) == Interval(1.0)
    assert ipow(Interval(0.0, 1.0), Interval(2.0)).lo == 0.0
    with pytest.raises(SingularityError):
        ipow(Interval(0.0, 1.0), Interval(-0.5))
    with pytest.raises(DomainError):
        ipow(Interval(-1.0, 1.0), 2.0)


def test_log_and_sqrt_domains():
    with pytest.raises(DomainError):
        log(Interval(0.0, 1.0))
    with pytest.raises(DomainError):
        sqrt(Interval(-1.0, 1.0))


@given(intervals(), intervals())
def test_lattice_operations(x, y):
    h = hull(x, y)
    assert h.contains(x) and h.contains(y)
    c = intersect(x, y)
    if c is EMPTY:
        assert x.hi < y.lo or y.hi < x.lo
    else:
        assert x.contains(c) and y.contains(c)
    m = imin(x, y)
    assert m.lo == min(x.lo, y.lo) and m.hi == min(x.hi, y.hi)


def test_box_validation_and_bisect():
    with pytest.raises(DomainError):
        Box.from_bounds(1.0, 2.0, 1.0, 1.2)
    with pytest.raises(DomainError):
        Box.from_bounds(2.0, 3.0, 0.5, 1.2)
    b = Box.from_bounds(2.0, 2.5, 1.0, 1.5)
    left, right = bisect(b)
    # equal widths split p
    assert left.p == Interval(2.0, 2.25) and right.p == Interval(2.25, 2.5)
    assert left.sigma == b.sigma
    tall = Box.from_bounds(2.0, 2.1, 1.0, 1.5)
    lo, hi = bisect(tall)
    assert lo.sigma == Interval(1.0, 1.25) and hi.sigma == Interval(1.25, 1.5)
    with pytest.raises(DegenerateBox):
        bisect(Box.point(2.0, 1.2))


@given(st.data(), intervals(st.floats(min_value=1.01, max_value=10.0)),
       intervals(st.floats(min_value=1.0, max_value=2.0)))
def test_bisect_covers_parent(data, P, S):
    b = Box(P, S)
    assume(not b.is_point())
    left, right = bisect(b)
    assert b.contains(left) and b.contains(right)
    same_p = left.p == right.p
    if same_p:
        assert left.sigma.hi == right.sigma.lo
    else:
        assert left.p.hi == right.p.lo


def test_eval_monotone_uses_extreme_corners():
    f = lambda x, y: x - y  # noqa: E731
    r = eval_monotone(f, (Interval(1.0, 2.0), Interval(0.5, 1.0)), (True, False))
    assert r == Interval(0.0, 1.5)
    with pytest.raises(DomainError):
        eval_monotone(f, (Interval(1.0),), (True, True))


@given(st.data(), intervals(st.floats(min_value=-3.0, max_value=3.0)),
       intervals(st.floats(min_value=0.5, max_value=3.0)))
def test_eval_rational_contains_exact_value(data, x, y):
    a, b = member(data.draw, x), member(data.draw, y)
    fa, fb = Fraction(a), Fraction(b)
    ref = (fa * fa - 3 * fb) / (1 + fb) - fa / fb
    r = eval_rational("(x*x - 3*y)/(1 + y) - x/y", (x, y))
    assert exact_in(ref, r)


def test_eval_rational_rejects_unbound_and_nonrational():
    with pytest.raises(DomainError):
        eval_rational("x + z", (Interval(1.0), Interval(2.0)))
    with pytest.raises(DomainError):
        eval_rational("x ** 2", (Interval(1.0), Interval(2.0)))
