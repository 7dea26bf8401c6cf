"""Invariants checked over random inputs."""

import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from critdet import lattice as L
from critdet import moduli as M
from critdet import verifier as V
from critdet._pyjet import Jet as PyJet
from critdet.interval import Interval, exp, ipow, log, sqrt


class _FloatOps:
    exp = staticmethod(math.exp)
    log = staticmethod(math.log)
    sqrt = staticmethod(math.sqrt)
    pow = staticmethod(math.pow)


class _IntervalOps:
    exp = staticmethod(exp)
    log = staticmethod(log)
    sqrt = staticmethod(sqrt)
    pow = staticmethod(ipow)


class _JetOps:
    exp = staticmethod(lambda x: x.exp())
    log = staticmethod(lambda x: x.log())
    sqrt = staticmethod(lambda x: x.sqrt())
    pow = staticmethod(lambda x, y: x ** y)


# composites of every op, on x in [0.5, 4], y in [0.5, 4]
EXPRESSIONS = [
    lambda o, x, y: (x + y) * (x - y) / (1.0 + x * y),
    lambda o, x, y: o.exp(x / y) - o.log(x + y),
    lambda o, x, y: o.pow(x, y) + o.sqrt(x * y),
    lambda o, x, y: o.pow(1.0 + o.pow(x, y), -1.0 / y),
    lambda o, x, y: (y * o.pow(1.0 + o.pow(x, y), -1.0 / y) - 0.1) * o.log(x) / (4.0 + x - y),
    lambda o, x, y: o.sqrt(x) * o.exp(-y) + x / (y + 2.0),
]

coord = st.floats(0.5, 4.0)
width = st.floats(1e-9, 0.5)


def _box(c, w):
    return Interval(max(0.5, c - w), min(4.0, c + w))


@settings(max_examples=1000)
@given(st.sampled_from(range(len(EXPRESSIONS))), coord, coord, width, width)
def test_midpoint_value_lies_in_the_box_enclosure(k, x, y, wx, wy):
    f = EXPRESSIONS[k]
    X, Y = _box(x, wx), _box(y, wy)
    enc = f(_IntervalOps, X, Y)
    assert f(_FloatOps, X.mid, Y.mid) in enc


@given(st.sampled_from(range(len(EXPRESSIONS))), coord, coord, width, width,
       st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_inclusion_monotone(k, x, y, wx, wy, a, b, c, d):
    f = EXPRESSIONS[k]
    X, Y = _box(x, wx), _box(y, wy)
    lo_x, hi_x = sorted((X.lo + a * X.width, X.lo + b * X.width))
    lo_y, hi_y = sorted((Y.lo + c * Y.width, Y.lo + d * Y.width))
    inner = f(_IntervalOps, Interval(lo_x, hi_x), Interval(lo_y, hi_y))
    outer = f(_IntervalOps, X, Y)
    assert outer.lo <= inner.lo and inner.hi <= outer.hi


@given(st.sampled_from(range(len(EXPRESSIONS))), st.floats(0.8, 3.5), st.floats(0.8, 3.5),
       st.floats(1e-4, 1e-2))
def test_width_shrinks_with_the_box(k, x, y, w):
    f = EXPRESSIONS[k]
    big = f(_IntervalOps, Interval(x - w, x + w), Interval(y - w, y + w)).width
    small = f(_IntervalOps, Interval(x - w / 2, x + w / 2), Interval(y - w / 2, y + w / 2)).width
    # halving the box at least halves the width, up to a factor of 4
    assert small <= 4.0 * (big / 2.0)


@given(st.sampled_from(range(len(EXPRESSIONS))), st.floats(0.8, 3.5), st.floats(0.8, 3.5))
def test_jet_gradient_matches_central_differences(k, x, y):
    f = EXPRESSIONS[k]
    h = 1e-5
    jet = f(_JetOps, PyJet.variable(x, 0, 2), PyJet.variable(y, 1, 2))

    def val(a, b):
        return f(_FloatOps, a, b)

    fx = (val(x + h, y) - val(x - h, y)) / (2 * h)
    fy = (val(x, y + h) - val(x, y - h)) / (2 * h)
    tol = 10 * h * h + 1e-10
    assert abs(jet.coef(1, 0) - fx) <= tol * max(1.0, abs(fx))
    assert abs(jet.coef(0, 1) - fy) <= tol * max(1.0, abs(fy))


@given(st.sampled_from(range(len(EXPRESSIONS))), st.floats(0.8, 3.5), st.floats(0.8, 3.5))
def test_point_intervals_contain_float_results(k, x, y):
    f = EXPRESSIONS[k]
    assert f(_FloatOps, x, y) in f(_IntervalOps, Interval(x), Interval(y))


# --- moduli ----------------------------------------------------------------------------------------


ps = st.floats(1.1, 10.0)
us = st.floats(0.0, 1.0)


def _sigma(p, u):
    return 1.0 + u * (M.sigma_p(p) - 1.0)


@given(ps, us)
def test_constraint_residual(p, u):
    s = _sigma(p, u)
    t = M.tau_point(p, s)
    assert abs(M.constraint(p, s, t)) <= M.DEFAULT_CONFIG.e1
    T = M.tau_interval(Interval(p), Interval(s))
    assert 0.0 in M.constraint(Interval(p), Interval(s), T)


@pytest.mark.parametrize("p", [1.2, 2.0, 3.0, 6.0, 10.0])
def test_tau_strictly_decreasing_on_a_dense_grid(p):
    sp = M.sigma_p(p)
    ts = [M.tau_point(p, 1.0 + (sp - 1.0) * k / 400) for k in range(401)]
    assert all(a > b for a, b in zip(ts, ts[1:]))


@given(ps)
def test_delta_endpoint_identities(p):
    assert M.delta(p, 1.0) == pytest.approx(M.delta1(p), abs=1e-9)
    assert M.delta(p, M.sigma_p(p)) == pytest.approx(M.delta0(p), abs=1e-9)


@given(ps)
def test_d_sigma_vanishes_at_both_ends(p):
    for s in (1.0, M.sigma_p(p)):
        assert abs(M.evaluate(p, s).d_sigma) <= 1e-8


@given(ps, st.floats(0.01, 0.99))
def test_d_sigma_has_the_opposite_sign_of_g(p, u):
    ev = M.evaluate(p, _sigma(p, u))
    assume(abs(ev.g) > 1e-10)
    assert math.copysign(1.0, ev.d_sigma) == -math.copysign(1.0, ev.g)


@given(ps, us, st.sampled_from(("tau", "delta", "l", "l0", "l1", "g", "h")))
def test_point_boxes_contain_point_values(p, u, name):
    s = _sigma(p, u)
    try:
        enc = M.enclose(name, Interval(p), Interval(s))
    except M.SingularityError:
        # derivative jets need tau > 0 for p < 2
        assume(False)
    v = getattr(M, name)(p, s) if name != "tau" else M.tau_point(p, s)
    # the point solver stops at e1, the enclosure does not
    slack = 10 * M.DEFAULT_CONFIG.e1 * max(1.0, abs(v))
    assert enc.lo - slack <= v <= enc.hi + slack


@given(st.floats(1.0, math.sqrt(3.0)))
def test_delta_is_constant_at_p_2(s):
    enc = M.delta(Interval(2.0), Interval(s))
    assert math.sqrt(3.0) / 2.0 in enc and enc.width <= 1e-8


# --- verifier and oracle ---------------------------------------------------------------------------


def test_minimum_switches_branch_once_inside_p0():
    E = V.isolate_p0(1e-3).enclosure
    grid = [2.02 + k * 0.0025 for k in range(int((9.0 - 2.02) / 0.0025))]
    signs = [M.delta0(p) < M.delta1(p) for p in grid]
    flips = [(a, b) for a, b, sa, sb in zip(grid, grid[1:], signs, signs[1:]) if sa != sb]
    assert len(flips) == 1
    a, b = flips[0]
    assert E.lo - 0.0025 <= a and b <= E.hi + 0.0025


@given(st.floats(1.1, 10.0))
def test_kappa_dominates_the_gamma_bound(p):
    crit = min(M.delta0(p), M.delta1(p))
    assert L.kappa_p(p, crit) >= L.minkowski_gamma_bound(p) - 1e-9


@given(st.floats(1.1, 10.0), st.sampled_from([0.5, 2.0, 3.0]), st.sampled_from(["zero", "one"]))
def test_lattice_minimum_is_homogeneous(p, c, kind):
    b = L.construct_critical_lattice(p, kind)
    assert L.lattice_minimum(b.scaled(c), p) == pytest.approx(c * L.lattice_minimum(b, p),
                                                              rel=1e-12)
