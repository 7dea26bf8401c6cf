"""Functions on the moduli domain 1 <= sigma <= sigma_p, p > 1.

Everything here comes in two flavours: plain floats for point evaluation and
``Interval`` enclosures for verification.  Derivatives of Delta are taken with
truncated Taylor jets in the coordinates (p, u), where u parameterizes sigma
(or tau) through a ``Chart``; tau (or sigma) is then solved implicitly order by
order from F(p, sigma, tau) = A^p + B^p - 1 = 0.

Two monotonicity facts make the enclosures below rigorous:

* F is strictly increasing in tau and in sigma, because
  dF/dtau = p b1 (B^(p-1) - (tau A)^(p-1)) and B - tau A = (tau + sigma) a0 > 0,
  while dF/dsigma = p a1 (B^(p-1) + sigma^(p-1) A^(p-1)).
* The fixed-point map T(t) = ((1 - (b0(t) - a0)^p)^(1/p) - sigma a0) / b0(t)
  is nondecreasing wherever it is nonnegative, so its endpoint chains started
  below (above) the root stay below (above) it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Optional, Union

from ._pyjet import MAX_ORDER, exponents, ncoef
from .errors import ConvergenceError, DomainError, EnclosureError, IntervalOverflow, SingularityError
from .interval import EMPTY, Box, Interval, imin, intersect, ipow
from .interval import exp as iexp, log as ilog
from .kernel import FloatJet, IntervalJet

Real = Union[float, Interval]

TAU_MAX = 0.36
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ModuliConfig:
    """Accuracy target, iteration cap and initial tau enclosure."""

    e1: float = 1e-12
    max_iter: int = 200
    tau_init: Interval = field(default_factory=lambda: Interval(0.0, TAU_MAX))

    def __post_init__(self) -> None:
        if not (isinstance(self.e1, (int, float)) and math.isfinite(self.e1) and self.e1 > 0):
            raise DomainError(f"e1 must be a positive finite number, got {self.e1!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not isinstance(self.tau_init, Interval) or self.tau_init.lo < 0.0:
            raise DomainError(f"tau_init must be a non-negative interval, got {self.tau_init!r}")


DEFAULT_CONFIG = ModuliConfig()


def _is_iv(x) -> bool:
    return isinstance(x, Interval)


def _pw(x, e):
    if _is_iv(x) or _is_iv(e):
        return ipow(x, e)
    if x == 0.0:
        if e > 0.0:
            return 0.0
        if e == 0.0:
            return 1.0
        raise SingularityError("zero base with non-positive exponent")
    return math.pow(x, e)


def _check_p(p: Real) -> None:
    if _is_iv(p):
        if not p.lo > 1.0:
            raise DomainError(f"p must exceed 1, got {p}")
    elif not (isinstance(p, (int, float)) and math.isfinite(p) and p > 1.0):
        raise DomainError(f"p must exceed 1, got {p!r}")


# --- sigma_p and tau_p -------------------------------------------------------------


def _sigma_p_thin(p: float) -> Interval:
    x = Interval(p)
    return 2.0 * ipow(1.0 - ipow(2.0, -x), 1.0 / x)


def sigma_p(p: Real) -> Real:
    """(2^p - 1)^(1/p), the right end of the sigma range."""
    _check_p(p)
    if _is_iv(p):
        # sigma_p is increasing in p: log sigma_p = log 2 + log(1 - 2^-p)/p
        # has two positive terms in its derivative.
        return Interval(_sigma_p_thin(p.lo).lo, _sigma_p_thin(p.hi).hi)
    return 2.0 * math.pow(-math.expm1(-p * LN2), 1.0 / p)


def _tau_p_map(p: float, t: float) -> float:
    return 1.0 - math.pow(2.0, -1.0 / p) * math.pow(1.0 + _pw(t, p), 1.0 / p)


def _tau_p_residual(p: float, t: float) -> float:
    return 2.0 * math.pow(1.0 - t, p) - (1.0 + _pw(t, p))


def _polish(t: float, f, fprime, lo: float, hi: float, steps: int = 3) -> float:
    """A few Newton steps past the stopping rule, kept only while |f| shrinks."""
    r = abs(f(t))
    for _ in range(steps):
        d = fprime(t)
        if r == 0.0 or not d:
            break
        nxt = min(max(t - f(t) / d, lo), hi)
        rn = abs(f(nxt))
        if not rn < r:
            break
        t, r = nxt, rn
    return t


def _tau_p_slope(p: float, t: float) -> float:
    return -2.0 * p * math.pow(1.0 - t, p - 1.0) - p * _pw(t, p - 1.0)


def tau_p_point(p: float, cfg: ModuliConfig = DEFAULT_CONFIG) -> float:
    """Root of 2(1 - t)^p = 1 + t^p by the fixed-point iteration t <- T_p(t)."""
    _check_p(p)
    t = 0.0
    for _ in range(cfg.max_iter):
        nxt = _tau_p_map(p, t)
        step = abs(nxt - t)
        t = nxt
        if step <= cfg.e1 / 2 and abs(_tau_p_residual(p, t)) <= cfg.e1:
            t = _polish(t, lambda x: _tau_p_residual(p, x), lambda x: _tau_p_slope(p, x),
                        0.0, TAU_MAX)
            return min(max(t, 0.0), TAU_MAX)
    raise ConvergenceError(f"tau_p iteration did not converge for p={p!r}")


def _G_iv(P: Interval, T: Interval) -> Interval:
    return 2.0 * ipow(1.0 - T, P) - 1.0 - ipow(T, P)


def _T_p_iv(P: Interval, T: Interval) -> Interval:
    return 1.0 - ipow(2.0, -1.0 / P) * ipow(1.0 + ipow(T, P), 1.0 / P)


def _pads(spread: float) -> tuple[float, ...]:
    base = 1e-13 + 1e-3 * spread
    return (base, base * 64.0, base * 4096.0)


def _split(P: Interval, n: int) -> list[Interval]:
    if n == 1 or P.is_thin():
        return [P]
    cuts = [P.lo + (P.hi - P.lo) * k / n for k in range(1, n)]
    pts = [P.lo] + [min(max(c, P.lo), P.hi) for c in cuts] + [P.hi]
    return [Interval(a, b) for a, b in zip(pts, pts[1:]) if a <= b]


def _holds(pred, P: Interval) -> bool:
    """pred(piece) on P, retried on finer partitions of P."""
    for n in (1, 8, 64):
        if all(pred(piece) for piece in _split(P, n)):
            return True
    return False


def _stagnant(widths: list[float]) -> bool:
    return len(widths) > 10 and widths[-1] > 0.9 * widths[-11]


@lru_cache(maxsize=4096)
def _tau_p_interval_cached(P: Interval, cfg: ModuliConfig) -> Interval:
    init = cfg.tau_init
    lo, hi = init.lo, init.hi
    # seed from point solves, each side accepted only after a sign check of the
    # decreasing function G(t) = 2(1-t)^p - 1 - t^p
    try:
        pts = [tau_p_point(P.lo, cfg), tau_p_point(P.hi, cfg)]
    except ConvergenceError:
        pts = []
    if pts:
        tmin, tmax = min(pts), max(pts)
        for pad in _pads(tmax - tmin):
            c = tmin - pad
            if c > lo and _holds(lambda Q: _G_iv(Q, Interval(c)).lo > 0.0, P):
                lo = c
                break
        for pad in _pads(tmax - tmin):
            c = tmax + pad
            if c < hi and _holds(lambda Q: _G_iv(Q, Interval(c)).hi < 0.0, P):
                hi = c
                break
    X = Interval(lo, hi)
    widths = [X.width]
    for _ in range(cfg.max_iter):
        Y = intersect(_T_p_iv(P, X), X)
        if Y is EMPTY:
            raise EnclosureError(f"empty tau_p enclosure for p in {P}")
        if Y == X:
            break
        X = Y
        widths.append(X.width)
        if _stagnant(widths):
            break
    out = intersect(X, init)
    if out is EMPTY:
        raise EnclosureError(f"tau_p enclosure left the initial interval for p in {P}")
    if out == init and init.width > 0.0:
        raise ConvergenceError(f"tau_p enclosure did not contract for p in {P}")
    return out


def tau_p_interval(p: Real, cfg: ModuliConfig = DEFAULT_CONFIG) -> Interval:
    """Enclosure of tau_p' for every p' in ``p``."""
    P = Interval.coerce(p)
    _check_p(P)
    return _tau_p_interval_cached(P, cfg)


# --- the constraint and tau(p, sigma) ----------------------------------------------


def _F_point(p: float, s: float, t: float) -> float:
    a0 = math.pow(1.0 + math.pow(s, p), -1.0 / p)
    b0 = math.pow(1.0 + _pw(t, p), -1.0 / p)
    A = b0 - a0
    B = t * b0 + s * a0
    return math.pow(A, p) + math.pow(B, p) - 1.0


def _F_iv(P: Interval, S: Interval, T: Interval) -> Interval:
    ip = -1.0 / P
    a0 = ipow(1.0 + ipow(S, P), ip)
    b0 = ipow(1.0 + ipow(T, P), ip)
    A = b0 - a0
    B = T * b0 + S * a0
    return ipow(A, P) + ipow(B, P) - 1.0


def constraint(p: Real, sigma: Real, tau: Real) -> Real:
    """A^p + B^p - 1; zero exactly when tau = tau(p, sigma)."""
    if _is_iv(p) or _is_iv(sigma) or _is_iv(tau):
        return _F_iv(Interval.coerce(p), Interval.coerce(sigma), Interval.coerce(tau))
    return _F_point(p, sigma, tau)


def _F_tau(p, s, t):
    """dF/dtau = p b1 (beta1 - t1 alpha1), for floats or intervals."""
    a0 = _pw(1.0 + _pw(s, p), -1.0 / p)
    q = 1.0 + _pw(t, p)
    b0 = _pw(q, -1.0 / p)
    b1 = b0 / q
    A = b0 - a0
    B = t * b0 + s * a0
    return p * b1 * (_pw(B, p - 1.0) - _pw(t, p - 1.0) * _pw(A, p - 1.0))


def _F_sigma(p, s, t):
    """dF/dsigma = p a1 (beta1 + s1 alpha1)."""
    q = 1.0 + _pw(s, p)
    a0 = _pw(q, -1.0 / p)
    a1 = a0 / q
    b0 = _pw(1.0 + _pw(t, p), -1.0 / p)
    A = b0 - a0
    B = t * b0 + s * a0
    return p * a1 * (_pw(B, p - 1.0) + _pw(s, p - 1.0) * _pw(A, p - 1.0))


def _T_point(p: float, s: float, a0: float, t: float) -> float:
    b0 = math.pow(1.0 + _pw(t, p), -1.0 / p)
    inner = 1.0 - math.pow(b0 - a0, p)
    return (math.pow(inner, 1.0 / p) - s * a0) / b0


def _T_iv(P: Interval, S: Interval, a0: Interval, T: Interval) -> Interval:
    b0 = ipow(1.0 + ipow(T, P), -1.0 / P)
    inner = 1.0 - ipow(b0 - a0, P)
    return (ipow(inner, 1.0 / P) - S * a0) / b0


def clamp_sigma(p: float, sigma: float) -> float:
    """Validate 1 <= sigma <= sigma_p, pulling values within 2 ulp of sigma_p onto it."""
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma)):
        raise DomainError(f"sigma must be finite, got {sigma!r}")
    if sigma < 1.0:
        raise DomainError(f"sigma below 1: {sigma!r}")
    sp = sigma_p(p)
    if sigma > sp:
        if sigma <= math.nextafter(math.nextafter(sp, math.inf), math.inf):
            return sp
        raise DomainError(f"sigma exceeds sigma_p: {sigma!r} > {sp!r}")
    return float(sigma)


def tau_point(p: float, sigma: float, cfg: ModuliConfig = DEFAULT_CONFIG) -> float:
    """tau(p, sigma) by the fixed-point iteration, switching to safeguarded
    Newton steps on F once the iteration contracts slowly."""
    _check_p(p)
    s = clamp_sigma(p, sigma)
    if s == sigma_p(p):
        return 0.0
    tp = tau_p_point(p, cfg)
    a0 = math.pow(1.0 + math.pow(s, p), -1.0 / p)
    lo, hi = 0.0, min(TAU_MAX, tp + 1e-9)
    t = 0.0
    prev_step = None
    newton = False
    for _ in range(cfg.max_iter):
        if not newton:
            nxt = max(0.0, _T_point(p, s, a0, t))
            step = abs(nxt - t)
            if prev_step and step > 0.5 * prev_step:
                newton = True
            prev_step = step
            lo = max(lo, t) if nxt >= t else lo
        else:
            f = _F_point(p, s, t)
            if f < 0.0:
                lo = max(lo, t)
            else:
                hi = min(hi, t)
            ft = _F_tau(p, s, t)
            nxt = t - f / ft if ft > 0.0 else 0.5 * (lo + hi)
            if not lo <= nxt <= hi:
                nxt = 0.5 * (lo + hi)
            step = abs(nxt - t)
        t = nxt
        if step <= cfg.e1 / 2 and abs(_F_point(p, s, t)) <= cfg.e1:
            t = _polish(t, lambda x: _F_point(p, s, x), lambda x: _F_tau(p, s, x), 0.0, tp)
            return min(t, tp)
    raise ConvergenceError(f"tau iteration did not converge at p={p!r}, sigma={sigma!r}")


def _as_box(p, sigma) -> tuple[Interval, Interval]:
    if isinstance(p, Box):
        return p.p, p.sigma
    return Interval.coerce(p), Interval.coerce(sigma)


def _clamp_sigma_iv(P: Interval, S: Interval) -> tuple[Interval, Interval]:
    """Clip S to [1, sigma_p(P).hi]; returns (clipped S, sigma_p(P))."""
    sp = sigma_p(P)
    if S.lo < 1.0:
        raise DomainError(f"sigma below 1: {S}")
    if S.hi > sp.hi:
        top = math.nextafter(math.nextafter(sp.hi, math.inf), math.inf)
        if S.lo > top:
            raise DomainError(f"sigma exceeds sigma_p: {S} above {sp}")
        S = Interval(min(S.lo, sp.hi), sp.hi)
    return S, sp


def _corner_values(fn, P: Interval, X: Interval) -> list[float]:
    out = []
    for pc in {P.lo, P.hi}:
        for xc in {X.lo, X.hi}:
            try:
                out.append(fn(pc, xc))
            except (ConvergenceError, DomainError):
                pass
    return out


def tau_interval(box, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Interval:
    """Enclosure of tau(p, sigma) over a box.

    Accepts a ``Box`` or a (p, sigma) pair of intervals.  A sign-checked bracket
    around the corner values seeds the lower/upper endpoint iterations, and the
    result is intersected with ``cfg.tau_init``.
    """
    if isinstance(sigma, ModuliConfig):
        cfg, sigma = sigma, None
    P, S = _as_box(box, sigma)
    _check_p(P)
    S, _ = _clamp_sigma_iv(P, S)
    tp = tau_p_interval(P, cfg)
    init = cfg.tau_init
    lo, hi = init.lo, min(init.hi, tp.hi)

    def corner(pc, sc):
        return tau_point(pc, min(sc, sigma_p(pc)), cfg)

    pts = _corner_values(corner, P, S)
    S_lo, S_hi = Interval(S.lo), Interval(S.hi)
    if pts:
        tmin, tmax = min(pts), max(pts)
        # a strictly positive lower end keeps log(tau) finite for p-derivatives
        cands = [tmin - pad for pad in _pads(tmax - tmin)] + [0.5 * tmin, 0.125 * tmin]
        for c in cands:
            if c <= lo:
                continue
            # F increases in sigma, so the top edge of S is the binding one
            if _holds(lambda Q: _F_iv(Q, S_hi, Interval(c)).hi < 0.0, P):
                lo = c
                break
        for pad in _pads(tmax - tmin):
            c = tmax + pad
            if c >= hi:
                break
            if _holds(lambda Q: _F_iv(Q, S_lo, Interval(c)).lo > 0.0, P):
                hi = c
                break

    ip = -1.0 / P
    a0 = ipow(1.0 + ipow(S, P), ip)
    widths = [hi - lo]
    for _ in range(cfg.max_iter):
        try:
            nl = max(lo, _T_iv(P, S, a0, Interval(lo)).lo)
            nh = min(hi, _T_iv(P, S, a0, Interval(hi)).hi)
        except DomainError:
            break
        if nl > nh:
            raise EnclosureError(f"tau chains crossed on p={P}, sigma={S}")
        if nl == lo and nh == hi:
            break
        lo, hi = nl, nh
        widths.append(hi - lo)
        if _stagnant(widths):
            break
    out = intersect(Interval(lo, hi), init)
    if out is EMPTY:
        raise EnclosureError(f"empty tau enclosure on p={P}, sigma={S}")
    return out if out.lo >= 0.0 else Interval(0.0, out.hi)


# --- sigma(p, tau) -------------------------------------------------------------------


def sigma_of_tau(p: Real, tau: Real, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """Inverse of tau(p, .): the sigma in [1, sigma_p] with A^p + B^p = 1."""
    if _is_iv(p) or _is_iv(tau):
        return _sigma_of_tau_iv(Interval.coerce(p), Interval.coerce(tau), cfg)
    _check_p(p)
    tp = tau_p_point(p, cfg)
    if not (math.isfinite(tau) and 0.0 <= tau <= tp + cfg.e1):
        raise DomainError(f"tau outside [0, tau_p]: {tau!r}")
    sp = sigma_p(p)
    if tau == 0.0:
        return sp
    if _F_point(p, 1.0, tau) >= 0.0:
        return 1.0
    lo, hi = 1.0, sp
    s = 1.0 + (sp - 1.0) * (1.0 - tau / tp) if tp > 0 else sp
    for _ in range(cfg.max_iter):
        f = _F_point(p, s, tau)
        if f < 0.0:
            lo = s
        else:
            hi = s
        fs = _F_sigma(p, s, tau)
        nxt = s - f / fs
        if not lo <= nxt <= hi:
            nxt = 0.5 * (lo + hi)
        step = abs(nxt - s)
        s = nxt
        if step <= cfg.e1 / 2 and abs(_F_point(p, s, tau)) <= cfg.e1:
            return s
    raise ConvergenceError(f"sigma(p, tau) did not converge at p={p!r}, tau={tau!r}")


def _sigma_of_tau_iv(P: Interval, T: Interval, cfg: ModuliConfig) -> Interval:
    _check_p(P)
    tp = tau_p_interval(P, cfg)
    if T.lo < 0.0 or T.lo > tp.hi:
        raise DomainError(f"tau outside [0, tau_p]: {T}")
    sp = sigma_p(P)
    lo, hi = 1.0, sp.hi

    def corner(pc, tc):
        return sigma_of_tau(pc, min(tc, tau_p_point(pc, cfg)), cfg)

    pts = _corner_values(corner, P, T)
    if pts:
        smin, smax = min(pts), max(pts)
        for pad in _pads(smax - smin):
            c = smin - pad
            if c <= lo:
                break
            if _holds(lambda Q: _F_iv(Q, Interval(c), T).hi < 0.0, P):
                lo = c
                break
        for pad in _pads(smax - smin):
            c = smax + pad
            if c >= hi:
                break
            if _holds(lambda Q: _F_iv(Q, Interval(c), T).lo > 0.0, P):
                hi = c
                break
    return Interval(lo, hi)


# --- atoms -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Atoms:
    """s_i = sigma^(p-i), t_i = tau^(p-i), a_i = (1+sigma^p)^(-i-1/p),
    b_i = (1+tau^p)^(-i-1/p), alpha_i = A^(p-i), beta_i = B^(p-i).

    ``t[i]`` is None when tau may vanish and p - i <= 0.
    """

    s: tuple
    t: tuple
    a: tuple
    b: tuple
    A: Real
    B: Real
    alpha: tuple
    beta: tuple


def atoms(p: Real, sigma: Real, tau: Real, imax: int = 3) -> Atoms:
    qs = 1.0 + _pw(sigma, p)
    qt = 1.0 + _pw(tau, p)
    a = [_pw(qs, -(i + 1.0 / p)) for i in range(imax + 1)]
    b = [_pw(qt, -(i + 1.0 / p)) for i in range(imax + 1)]
    A = b[0] - a[0]
    B = tau * b[0] + sigma * a[0]
    s = tuple(_pw(sigma, p - i) for i in range(imax + 1))
    t = []
    for i in range(imax + 1):
        try:
            t.append(_pw(tau, p - i))
        except SingularityError:
            t.append(None)
    alpha = tuple(_pw(A, p - i) for i in range(imax + 1))
    beta = tuple(_pw(B, p - i) for i in range(imax + 1))
    return Atoms(s, tuple(t), tuple(a), tuple(b), A, B, alpha, beta)


# --- curves and charts ---------------------------------------------------------------


def _jet_class(x):
    return IntervalJet if _is_iv(x) else FloatJet


class Curve:
    """A function of p used as a strip boundary."""

    def point(self, p: float) -> float:
        raise NotImplementedError

    def interval(self, P: Interval) -> Interval:
        raise NotImplementedError

    def _jet(self, pj):
        raise NotImplementedError

    def value(self, p: Real) -> Real:
        return self.interval(p) if _is_iv(p) else self.point(p)

    def jet(self, pj):
        v = self.value(pj.value)
        if pj.is_constant():
            return type(pj).constant(v, pj.order)
        return self._jet(pj).with_value(v)

    def to_dict(self) -> dict:
        raise NotImplementedError


class Const(Curve):
    def __init__(self, c: float) -> None:
        self.c = float(c)

    def point(self, p):
        return self.c

    def interval(self, P):
        return Interval(self.c)

    def _jet(self, pj):
        return type(pj).constant(self.value(pj.value), pj.order)

    def to_dict(self):
        return {"kind": "const", "c": self.c}


class OnePlus(Curve):
    """1 + num / (den * p^power), with num/den held exactly."""

    def __init__(self, num: int, den: int, power: float) -> None:
        self.num, self.den, self.power = int(num), int(den), float(power)

    def point(self, p):
        return 1.0 + self.num / (self.den * math.pow(p, self.power))

    def interval(self, P):
        # decreasing in p for a positive numerator
        def f(x):
            X = Interval(x)
            return 1.0 + Interval(self.num) / (Interval(self.den) * ipow(X, self.power))

        return Interval(f(P.hi).lo, f(P.lo).hi)

    def _jet(self, pj):
        num = Interval(self.num) if _is_iv(pj.value) else float(self.num)
        return 1.0 + (pj.powc(self.power) * float(self.den)).recip() * num

    def to_dict(self):
        return {"kind": "one_plus", "num": self.num, "den": self.den, "power": self.power}


class SigmaP(Curve):
    def point(self, p):
        return sigma_p(p)

    def interval(self, P):
        return sigma_p(P)

    def _jet(self, pj):
        return 2.0 * (1.0 - 2.0 ** (-pj)) ** (1.0 / pj)

    def to_dict(self):
        return {"kind": "sigma_p"}


class TauP(Curve):
    def __init__(self, cfg: ModuliConfig = DEFAULT_CONFIG) -> None:
        self.cfg = cfg

    def point(self, p):
        return tau_p_point(p, self.cfg)

    def interval(self, P):
        return tau_p_interval(P, self.cfg)

    def jet(self, pj):
        return tau_p_jet(pj, self.cfg)

    def to_dict(self):
        return {"kind": "tau_p"}


class Offset(Curve):
    """curve(p) + delta."""

    def __init__(self, base: Curve, delta: float) -> None:
        self.base, self.delta = base, float(delta)

    def point(self, p):
        return self.base.point(p) + self.delta

    def interval(self, P):
        return self.base.interval(P) + self.delta

    def jet(self, pj):
        d = Interval(self.delta) if _is_iv(pj.value) else self.delta
        return self.base.jet(pj) + d

    def to_dict(self):
        return {"kind": "offset", "base": self.base.to_dict(), "delta": self.delta}


class Lerp(Curve):
    """(1 - w) * first(p) + w * second(p) for a fixed weight w."""

    def __init__(self, first: Curve, second: Curve, w: float) -> None:
        self.first, self.second, self.w = first, second, float(w)

    def point(self, p):
        return (1.0 - self.w) * self.first.point(p) + self.w * self.second.point(p)

    def interval(self, P):
        w = Interval(self.w)
        return (1.0 - w) * self.first.interval(P) + w * self.second.interval(P)

    def jet(self, pj):
        w = Interval(self.w) if _is_iv(pj.value) else self.w
        return self.first.jet(pj) * (1.0 - w) + self.second.jet(pj) * w

    def to_dict(self):
        return {"kind": "lerp", "first": self.first.to_dict(),
                "second": self.second.to_dict(), "w": self.w}


def curve_from_dict(d: dict) -> Curve:
    kind = d["kind"]
    if kind == "const":
        return Const(d["c"])
    if kind == "one_plus":
        return OnePlus(d["num"], d["den"], d["power"])
    if kind == "sigma_p":
        return SigmaP()
    if kind == "tau_p":
        return TauP()
    if kind == "offset":
        return Offset(curve_from_dict(d["base"]), d["delta"])
    if kind == "lerp":
        return Lerp(curve_from_dict(d["first"]), curve_from_dict(d["second"]), d["w"])
    raise DomainError(f"unknown curve kind {kind!r}")


class Chart:
    """Maps (p, u) to the explicit coordinate: sigma (kind "sigma") or tau (kind "tau").

    The identity chart uses u itself; a strip chart interpolates linearly
    between two curves, u in [0, 1].
    """

    def __init__(self, kind: str, lower: Optional[Curve] = None, upper: Optional[Curve] = None,
                 scale: str = "linear"):
        if kind not in ("sigma", "tau"):
            raise DomainError(f"unknown chart kind {kind!r}")
        if (lower is None) != (upper is None):
            raise DomainError("a strip chart needs both boundary curves")
        if scale not in ("linear", "log") or (scale == "log" and lower is None):
            raise DomainError(f"invalid chart scale {scale!r}")
        self.kind = kind
        self.lower, self.upper = lower, upper
        self.scale = scale

    @property
    def identity(self) -> bool:
        return self.lower is None

    def value(self, p: Real, u: Real) -> Real:
        if self.identity:
            return u
        lo, hi = self.lower.value(p), self.upper.value(p)
        if self.scale == "log":
            # lo^(1 - u) hi^u: geometric interpolation resolves x near a tiny lower curve
            if _is_iv(lo) or _is_iv(hi) or _is_iv(u):
                lo, hi = Interval.coerce(lo), Interval.coerce(hi)
                if lo.lo <= 0.0:
                    raise DomainError("log-scale chart needs a positive lower curve")
                a = ilog(lo)
                return iexp(a + u * (ilog(hi) - a))
            a = math.log(lo)
            return math.exp(a + u * (math.log(hi) - a))
        return (1.0 - u) * lo + u * hi

    def jet(self, pj, uj):
        if self.identity:
            return uj
        lo, hi = self.lower.jet(pj), self.upper.jet(pj)
        if self.scale == "log":
            a = lo.log()
            return (a + uj * (hi.log() - a)).exp()
        return lo + uj * (hi - lo)

    def to_dict(self) -> dict:
        if self.identity:
            return {"kind": self.kind}
        d = {"kind": self.kind, "lower": self.lower.to_dict(), "upper": self.upper.to_dict()}
        if self.scale != "linear":
            d["scale"] = self.scale
        return d


SIGMA_CHART = Chart("sigma")
TAU_CHART = Chart("tau")


# --- jets ------------------------------------------------------------------------------


def _abjets(pj, sj, tj):
    ip = -1.0 / pj
    a0 = (1.0 + sj ** pj) ** ip
    b0 = (1.0 + tj ** pj) ** ip
    return a0, b0


def _F_jet(pj, sj, tj):
    a0, b0 = _abjets(pj, sj, tj)
    A = b0 - a0
    B = tj * b0 + sj * a0
    return A ** pj + B ** pj - 1.0


def _solve_implicit(residual, base_jet, deriv):
    """Fill the coefficients of ``base_jet`` (degree >= 1 zero on entry) so that
    residual(jet) vanishes to the jet's order; ``deriv`` encloses the partial of
    the residual in the unknown over the base box."""
    order = base_jet.order
    x = base_jet
    for k in range(1, order + 1):
        R = residual(k, x.truncate(k))
        for slot in range(ncoef(k - 1), ncoef(k)):
            x.set(slot, -(R.get(slot) / deriv))
    return x


def _nonzero(d):
    if _is_iv(d):
        if d.lo <= 0.0 <= d.hi:
            raise SingularityError(f"implicit-function denominator encloses zero: {d}")
    elif d == 0.0:
        raise SingularityError("implicit-function denominator vanishes")
    return d


def tau_p_jet(pj, cfg: ModuliConfig = DEFAULT_CONFIG):
    """Jet of tau_p in p (constant when p is not seeded)."""
    J = type(pj)
    P = pj.value
    t0 = tau_p_interval(P, cfg) if _is_iv(P) else tau_p_point(P, cfg)
    if pj.is_constant():
        return J.constant(t0, pj.order)
    Gt = _nonzero(-2.0 * P * _pw(1.0 - t0, P - 1.0) - P * _pw(t0, P - 1.0))

    def res(k, x):
        pk = pj.truncate(k)
        return 2.0 * (1.0 - x) ** pk - 1.0 - x ** pk

    return _solve_implicit(res, J.constant(t0, pj.order), Gt)


def _tau_jet(pj, sj, t0):
    J = type(pj)
    Ft = _nonzero(_F_tau(pj.value, sj.value, t0))
    return _solve_implicit(
        lambda k, x: _F_jet(pj.truncate(k), sj.truncate(k), x), J.constant(t0, pj.order), Ft
    )


def _sigma_jet(pj, tj, s0):
    J = type(pj)
    Fs = _nonzero(_F_sigma(pj.value, s0, tj.value))
    return _solve_implicit(
        lambda k, x: _F_jet(pj.truncate(k), x, tj.truncate(k)), J.constant(s0, pj.order), Fs
    )


QUANTITIES = (
    "tau", "delta", "delta0", "delta1", "l", "l0", "l1", "g", "h", "dh",
    "d_sigma", "d_sigma2", "d_p", "d_sigma_p", "d_sigma2_p",
)

# derivative depth of each quantity and whether it needs the p direction
DEPTH = {
    "tau": 0, "sigma": 0, "delta": 0, "delta0": 0, "delta1": 0, "l": 0, "l0": 0, "l1": 0,
    "g": 1, "d_sigma": 1, "d_p": 1, "h": 2, "d_sigma2": 2, "d_sigma_p": 2,
    "dh": 3, "d_sigma2_p": 3,
}
NEEDS_P = frozenset({"d_p", "d_sigma_p", "d_sigma2_p", "dh"})


class Family:
    """Jets of Delta and its working functions over one base point or box."""

    def __init__(self, P, U, chart: Chart, order: int, seed_p: bool, cfg: ModuliConfig):
        J = _jet_class(P if _is_iv(P) else U)
        if _is_iv(P) or _is_iv(U):
            P, U = Interval.coerce(P), Interval.coerce(U)
        self.P, self.cfg, self.chart = P, cfg, chart
        pj = J.variable(P, 0, order, seed_p)
        uj = J.variable(U, 1, order)
        if chart.kind == "sigma":
            sj = chart.jet(pj, uj)
            if _is_iv(P):
                S, _ = _clamp_sigma_iv(P, sj.value)
                sj = sj.with_value(S)
                t0 = tau_interval(P, S, cfg)
            else:
                sj = sj.with_value(clamp_sigma(P, sj.value))
                t0 = tau_point(P, sj.value, cfg)
            tj = _tau_jet(pj, sj, t0)
        else:
            tj = chart.jet(pj, uj)
            if _is_iv(P):
                tp = tau_p_interval(P, cfg)
                T = tj.value
                if T.lo < 0.0 or T.lo > tp.hi:
                    raise DomainError(f"tau outside [0, tau_p]: {T}")
                tj = tj.with_value(Interval(T.lo, min(T.hi, tp.hi)))
            s0 = sigma_of_tau(P, tj.value, cfg)
            sj = _sigma_jet(pj, tj, s0)
        self.pj, self.sj, self.tj = pj, sj, tj
        self._cache: dict = {}

    # physical partial derivatives at fixed p / fixed sigma
    def ds(self, f):
        if self.chart.identity and self.chart.kind == "sigma":
            return f.d(1)
        su = self.sj.d(1)
        _nonzero(su.value)
        return f.d(1) / su

    def dp(self, f):
        if self.chart.identity and self.chart.kind == "sigma":
            return f.d(0)
        return f.d(0) - self.sj.d(0) * self.ds(f)

    def get(self, name: str):
        if name not in self._cache:
            self._cache[name] = getattr(self, "_q_" + name)()
        return self._cache[name]

    def _q_tau(self):
        return self.tj

    def _q_sigma(self):
        return self.sj

    def _q_delta(self):
        a0, b0 = _abjets(self.pj, self.sj, self.tj)
        return (self.tj + self.sj) * a0 * b0

    def _q_delta0(self):
        return SigmaP().jet(self.pj) * 0.5

    def _q_delta1(self):
        pj = self.pj
        tp = tau_p_jet(pj, self.cfg)
        four = Interval(4.0) if _is_iv(pj.value) else 4.0
        return (four ** (-1.0 / pj)) * (1.0 + tp) / (1.0 - tp)

    def _q_l0(self):
        return self.get("delta") - self.get("delta0")

    def _q_l1(self):
        return self.get("delta") - self.get("delta1")

    def _q_l(self):
        d0, d1 = self.get("delta0"), self.get("delta1")
        v0, v1 = d0.value, d1.value
        if _is_iv(v0):
            if v0.hi < v1.lo:
                return self.get("l0")
            if v1.hi < v0.lo:
                return self.get("l1")
            # branch undecided on this box: value only
            J = type(d0)
            return J.constant(self.get("delta").value - imin(v0, v1), 0)
        return self.get("l0") if v0 < v1 else self.get("l1")

    def _q_d_sigma(self):
        return self.ds(self.get("delta"))

    def _q_d_sigma2(self):
        return self.ds(self.get("d_sigma"))

    def _q_d_p(self):
        return self.dp(self.get("delta"))

    def _q_d_sigma_p(self):
        return self.dp(self.get("d_sigma"))

    def _q_d_sigma2_p(self):
        return self.dp(self.get("d_sigma2"))

    def _q_g(self):
        pj, sj, tj = self.pj, self.sj, self.tj
        a0, b0 = _abjets(pj, sj, tj)
        A = b0 - a0
        B = tj * b0 + sj * a0
        pm1 = pj - 1.0
        inv_a1 = (1.0 + sj ** pj) ** (1.0 + 1.0 / pj)
        bracket = B ** pm1 - (tj ** pm1) * (A ** pm1)
        return -(inv_a1 * bracket) * self.get("d_sigma")

    def _q_h(self):
        return self.ds(self.get("g"))

    def _q_dh(self):
        return self.dp(self.get("h"))


# --- public evaluation -------------------------------------------------------------------


def _point_value(name: str, p: float, u: float, chart: Chart, cfg: ModuliConfig) -> float:
    fam = Family(p, u, chart, DEPTH[name], name in NEEDS_P, cfg)
    return fam.get(name).value


def enclose(name: str, P, U, chart: Chart = SIGMA_CHART, cfg: ModuliConfig = DEFAULT_CONFIG,
            centered: bool = True, taylor: int = 3) -> Interval:
    """Rigorous enclosure of quantity ``name`` over the box P x U in chart coordinates.

    The naive jet enclosure is intersected with a Taylor form of order
    ``taylor`` around the box center.  Where p cannot be a jet variable
    (tau reaching 0) the Taylor form runs along u only.
    """
    if name not in DEPTH:
        raise DomainError(f"unknown quantity {name!r}")
    P, U = Interval.coerce(P), Interval.coerce(U)
    depth = DEPTH[name]
    need_p = name in NEEDS_P
    m = max(1, min(taylor, MAX_ORDER - depth))
    if not centered or (P.is_thin() and U.is_thin()):
        return Family(P, U, chart, depth, need_p, cfg).get(name).value
    pc, uc = Interval(P.mid), Interval(U.mid)
    du = U - uc.lo
    for seed in (True, False):
        if need_p and not seed:
            break
        try:
            box = Family(P, U, chart, depth + m, seed, cfg).get(name)
        except (SingularityError, IntervalOverflow):
            # high-order coefficients blow up near tau = 0
            continue
        val = box.value
        try:
            if seed:
                center = Family(pc, uc, chart, depth + m - 1, True, cfg).get(name)
                tf = taylor_form(center, box, (P - pc.lo, du))
            else:
                center = Family(P, uc, chart, depth + m - 1, False, cfg).get(name)
                tf = taylor_form(center, box, (None, du))
        except (SingularityError, IntervalOverflow, DomainError):
            return val
        cut = intersect(val, tf)
        if cut is EMPTY:
            raise EnclosureError(f"naive and centered enclosures of {name} are disjoint")
        return cut
    return Family(P, U, chart, depth, need_p, cfg).get(name).value


def _dispatch(name: str, p, sigma, cfg: ModuliConfig) -> Real:
    if isinstance(p, Box):
        return enclose(name, p.p, p.sigma, SIGMA_CHART, cfg)
    if _is_iv(p) or _is_iv(sigma):
        return enclose(name, p, sigma, SIGMA_CHART, cfg)
    _check_p(p)
    try:
        return _point_value(name, p, sigma, SIGMA_CHART, cfg)
    except SingularityError:
        # tau = 0 with p < 2: the lower-order ladder in evaluate still gives a value
        v = getattr(evaluate(p, sigma, cfg), name, None)
        if v is None:
            raise
        return v


def delta(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """Delta(p, sigma) = (tau + sigma) (1 + tau^p)^(-1/p) (1 + sigma^p)^(-1/p)."""
    return _dispatch("delta", p, sigma, cfg)


def delta0(p: Real) -> Real:
    """sigma_p / 2, the value of Delta at sigma = sigma_p."""
    sp = sigma_p(p)
    return sp * 0.5


def delta1(p: Real, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """4^(-1/p) (1 + tau_p) / (1 - tau_p), the value of Delta at sigma = 1."""
    _check_p(p)
    if _is_iv(p):
        tp = tau_p_interval(p, cfg)
        # (1 + t) / (1 - t) is increasing in t
        lo = ((1.0 + Interval(tp.lo)) / (1.0 - Interval(tp.lo))).lo
        hi = ((1.0 + Interval(tp.hi)) / (1.0 - Interval(tp.hi))).hi
        return ipow(4.0, -1.0 / p) * Interval(lo, hi)
    tp = tau_p_point(p, cfg)
    return math.pow(4.0, -1.0 / p) * (1.0 + tp) / (1.0 - tp)


def l(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:  # noqa: E743
    """Delta minus the smaller endpoint value."""
    return _dispatch("l", p, sigma, cfg)


def l0(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    return _dispatch("l0", p, sigma, cfg)


def l1(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    return _dispatch("l1", p, sigma, cfg)


def g(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """-(1 + sigma^p)^(1+1/p) (B^(p-1) - tau^(p-1) A^(p-1)) dDelta/dsigma."""
    return _dispatch("g", p, sigma, cfg)


def h(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """dg/dsigma."""
    return _dispatch("h", p, sigma, cfg)


def dh(p, sigma=None, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """dh/dp at fixed sigma."""
    return _dispatch("dh", p, sigma, cfg)


def delta_tilde(p: Real, tau: Real, cfg: ModuliConfig = DEFAULT_CONFIG) -> Real:
    """Delta expressed through tau: Delta(p, sigma(p, tau))."""
    if _is_iv(p) or _is_iv(tau):
        return enclose("delta", p, tau, TAU_CHART, cfg)
    return delta(p, sigma_of_tau(p, tau, cfg), cfg)


@dataclass(frozen=True)
class ModuliEval:
    """Delta and its working family at a point (floats) or over a box (intervals).

    Entries that cannot be formed at the given location (for instance p-derivatives
    where tau vanishes) are None.
    """

    p: Real
    sigma: Real
    tau: Real
    delta: Real
    delta0: Real
    delta1: Real
    l: Real
    l0: Real
    l1: Real
    g: Optional[Real] = None
    h: Optional[Real] = None
    dh: Optional[Real] = None
    d_sigma: Optional[Real] = None
    d_sigma2: Optional[Real] = None
    d_p: Optional[Real] = None
    d_sigma_p: Optional[Real] = None
    d_sigma2_p: Optional[Real] = None

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_EVAL_LADDER = ((3, True), (2, True), (1, True), (2, False), (1, False), (0, False))


def _g_from_values(p, s, t, d_sigma):
    a0 = _pw(1.0 + _pw(s, p), -1.0 / p)
    b0 = _pw(1.0 + _pw(t, p), -1.0 / p)
    A, B = b0 - a0, t * b0 + s * a0
    bracket = _pw(B, p - 1.0) - _pw(t, p - 1.0) * _pw(A, p - 1.0)
    return -(_pw(1.0 + _pw(s, p), 1.0 + 1.0 / p) * bracket) * d_sigma


def evaluate(p: Real, sigma: Real, cfg: ModuliConfig = DEFAULT_CONFIG) -> ModuliEval:
    """The whole family at once, degrading gracefully near tau = 0."""
    interval = _is_iv(p) or _is_iv(sigma)
    if interval:
        P, S = Interval.coerce(p), Interval.coerce(sigma)
        _check_p(P)
        S, _ = _clamp_sigma_iv(P, S)
    else:
        _check_p(p)
        P, S = p, clamp_sigma(p, sigma)
    fams: dict = {}

    def family(order: int, seed: bool):
        key = (order, seed)
        if key not in fams:
            try:
                fams[key] = Family(P, S, SIGMA_CHART, order, seed, cfg)
            except SingularityError:
                fams[key] = None
        return fams[key]

    out = {}
    for name in QUANTITIES:
        out[name] = None
        for order, seed in _EVAL_LADDER:
            if DEPTH[name] > order or (name in NEEDS_P and not seed):
                continue
            fam = family(order, seed)
            if fam is None:
                continue
            try:
                out[name] = fam.get(name).value
                break
            except SingularityError:
                continue
    if out["delta"] is None:
        raise SingularityError(f"cannot evaluate at p={p!r}, sigma={sigma!r}")
    if out["g"] is None and out["d_sigma"] is not None:
        # tau^(p-1) has no derivative at tau = 0 for p < 2, but g itself is finite there
        out["g"] = _g_from_values(P, S, out["tau"], out["d_sigma"])
    return ModuliEval(p=p, sigma=S, **out)


# --- expansion at the sigma_p edge ---------------------------------------------------
#
# Writing w = tau^p, Delta = Phi(p, tau, w) with Phi smooth near (tau, w) = (0, 0),
# although tau^p itself is only Hoelder near tau = 0.  The edge verifier works
# with jets of Phi in (tau, w) at fixed p.


def _F_tw_iv(P: Interval, S: Interval, T: Interval, W: Interval) -> Interval:
    ip = -1.0 / P
    a0 = ipow(1.0 + ipow(S, P), ip)
    b0 = ipow(1.0 + W, ip)
    return ipow(b0 - a0, P) + ipow(T * b0 + S * a0, P) - 1.0


def _F_tw_point(p: float, s: float, t: float, w: float) -> float:
    a0 = math.pow(1.0 + math.pow(s, p), -1.0 / p)
    b0 = math.pow(1.0 + w, -1.0 / p)
    return math.pow(b0 - a0, p) + math.pow(t * b0 + s * a0, p) - 1.0


def _sigma_tw_point(p: float, t: float, w: float) -> float:
    lo, hi = 1.0, 2.0
    if _F_tw_point(p, lo, t, w) >= 0.0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _F_tw_point(p, mid, t, w) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    return 0.5 * (lo + hi)


def sigma_tw_interval(P: Interval, T: Interval, W: Interval) -> Interval:
    """Enclosure of the root sigma of F(p, sigma, tau, w) = 0 over P x T x W.

    F increases in sigma and tau and decreases in w, so the root is smallest
    at (T.hi, W.lo) and largest at (T.lo, W.hi).
    """
    guesses = [_sigma_tw_point(P.lo, T.hi, W.lo), _sigma_tw_point(P.hi, T.hi, W.lo),
               _sigma_tw_point(P.lo, T.lo, W.hi), _sigma_tw_point(P.hi, T.lo, W.hi)]
    smin, smax = min(guesses), max(guesses)
    lo = hi = None
    for pad in _pads(smax - smin):
        c = smin - pad
        if c <= 1.0:
            lo = 1.0
            break
        if _holds(lambda Q: _F_tw_iv(Q, Interval(c), T, W).hi < 0.0, P):
            lo = c
            break
    for pad in _pads(smax - smin):
        c = smax + pad
        if _holds(lambda Q: _F_tw_iv(Q, Interval(c), T, W).lo > 0.0, P):
            hi = c
            break
    if lo is None or hi is None:
        raise EnclosureError(f"no sigma bracket over p={P}, tau={T}, w={W}")
    return Interval(lo, hi)


def edge_jet(P, T, order: int, kappa=None, W=None, seed_p: bool = False):
    """Jet of Phi(p, tau, w) around the sigma_p edge.

    With ``kappa`` the jet follows w = kappa tau^2 and is bivariate in (tau, p),
    p being seeded only on request; otherwise (tau, w) are independent
    variables over T x W at fixed p.  Floats give a plain point jet.  No power
    of tau is taken, so the jet stays regular at tau = 0.
    """
    point = not (_is_iv(P) or _is_iv(T))
    J = FloatJet if point else IntervalJet
    if not point:
        P, T = Interval.coerce(P), Interval.coerce(T)
    tj = J.variable(T, 0, order)
    if kappa is not None:
        wj = tj * tj * kappa
        W = wj.value
        pj = J.variable(P, 1, order, seed_p)
    else:
        if seed_p:
            raise DomainError("p can only be seeded along w = kappa tau^2")
        W = W if point else Interval.coerce(W)
        wj = J.variable(W, 1, order)
        pj = J.constant(P, order)
    S = _sigma_tw_point(P, T, W) if point else sigma_tw_interval(P, T, W)
    q = 1.0 + _pw(S, P)
    a0 = _pw(q, -1.0 / P)
    a1 = a0 / q
    b0 = _pw(1.0 + W, -1.0 / P)
    A = b0 - a0
    B = T * b0 + S * a0
    pm1 = P - 1.0
    Fs = _nonzero(P * a1 * (_pw(B, pm1) + _pw(S, pm1) * _pw(A, pm1)))

    def parts(k, x):
        pk = pj.truncate(k)
        ip = -1.0 / pk
        a = (1.0 + x ** pk) ** ip
        b = (1.0 + wj.truncate(k)) ** ip
        return pk, a, b

    def res(k, x):
        pk, a, b = parts(k, x)
        return (b - a) ** pk + (tj.truncate(k) * b + x * a) ** pk - 1.0

    sj = _solve_implicit(res, J.constant(S, order), Fs)
    _, a, b = parts(order, sj)
    return (tj + sj) * a * b


def taylor_form(center_jet, box_jet, offsets) -> Interval:
    """Enclosure of f over a box from jets of f at its center and over the box.

    Uses sum_{|a| < m} f_a(c) d^a + sum_{|a| = m} f_a(box) d^a, m the order
    of ``box_jet`` and d = (x - c) ranging over ``offsets``.  An offset of
    None drops that variable: the center jet must then already range over it.
    """
    m = box_jet.order
    if center_jet.order < m - 1:
        raise DomainError("center jet order too low for the Taylor form")
    dx, dy = offsets
    powers_x = [Interval(1.0)]
    powers_y = [Interval(1.0)]
    for _ in range(m):
        if dx is not None:
            powers_x.append(powers_x[-1] * dx)
        powers_y.append(powers_y[-1] * dy)
    total = Interval(0.0)
    for slot, (i, j) in enumerate(exponents(m)):
        if i >= len(powers_x):
            continue
        coef = box_jet.get(slot) if i + j == m else center_jet.get(slot)
        total = total + coef * (powers_x[i] * powers_y[j])
    return total
