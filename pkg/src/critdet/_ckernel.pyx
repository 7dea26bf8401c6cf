# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled interval Taylor jets.

``IJet`` is a drop-in replacement for ``_pyjet.Jet`` with ``Interval``
coefficients.  Every scalar step (outward rounding, branch order, libm calls)
replicates ``interval.py`` so both backends return bit-identical enclosures.
Must be compiled without floating-point contraction.
"""

from libc.math cimport nextafter, fabs, ldexp, isinf, INFINITY
from libc.math cimport exp as c_exp, log as c_log, pow as c_pow, sqrt as c_sqrt

from .errors import DomainError, IntervalOverflow, SingularityError
from .interval import Interval

cdef enum:
    MAXORD = 6
    NMAX = 28
    MAXTERMS = 210

cdef double TINY = ldexp(1.0, -969)
cdef double BIG = ldexp(1.0, 995)
cdef double SPLIT = 134217729.0

cdef object _Interval = Interval
cdef object _new = object.__new__

# product tables: for output slot o of order n, terms pt_a/pt_b[pt_off[n][o] : pt_off[n][o+1]]
cdef int pt_off[MAXORD + 1][NMAX + 1]
cdef int pt_a[MAXORD + 1][MAXTERMS]
cdef int pt_b[MAXORD + 1][MAXTERMS]
cdef double FACT[MAXORD + 1]


cdef inline int ncoef(int order) noexcept:
    return (order + 1) * (order + 2) // 2


cdef inline int cindex(int i, int j) noexcept:
    cdef int d = i + j
    return d * (d + 1) // 2 + j


cdef void _build_tables() noexcept:
    cdef int n, d, j, i, jj, k, l, o, t
    for n in range(MAXORD + 1):
        o = 0
        t = 0
        for d in range(n + 1):
            for jj in range(d + 1):
                j = jj
                i = d - jj
                pt_off[n][o] = t
                for k in range(i + 1):
                    for l in range(j + 1):
                        pt_a[n][t] = cindex(k, l)
                        pt_b[n][t] = cindex(i - k, j - l)
                        t += 1
                o += 1
        pt_off[n][o] = t
    FACT[0] = 1.0
    for k in range(1, MAXORD + 1):
        FACT[k] = FACT[k - 1] * k


_build_tables()


# --- directed scalar primitives (mirror interval.py) ---------------------------

cdef inline double dn(double x) noexcept:
    return nextafter(x, -INFINITY)


cdef inline double up(double x) noexcept:
    return nextafter(x, INFINITY)


cdef inline double pymin(double a, double b) noexcept:
    return b if b < a else a


cdef inline double pymax(double a, double b) noexcept:
    return b if b > a else a


cdef inline double two_sum_err(double a, double b, double s) noexcept:
    cdef double bb = s - a
    return (a - (s - bb)) + (b - bb)


cdef inline double two_prod_err(double a, double b, double p) noexcept:
    cdef double c, ah, al, bh, bl
    c = SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


cdef inline bint prod_exact_unknown(double a, double b, double p) noexcept:
    return fabs(p) < TINY or fabs(a) > BIG or fabs(b) > BIG


cdef inline double add_lo(double a, double b) noexcept:
    cdef double s = a + b
    if isinf(s):
        return s
    return s if two_sum_err(a, b, s) >= 0.0 else dn(s)


cdef inline double add_hi(double a, double b) noexcept:
    cdef double s = a + b
    if isinf(s):
        return s
    return s if two_sum_err(a, b, s) <= 0.0 else up(s)


cdef inline double mul_lo(double a, double b) noexcept:
    cdef double p = a * b
    if a == 0.0 or b == 0.0:
        return p
    if prod_exact_unknown(a, b, p):
        return dn(p)
    return p if two_prod_err(a, b, p) >= 0.0 else dn(p)


cdef inline double mul_hi(double a, double b) noexcept:
    cdef double p = a * b
    if a == 0.0 or b == 0.0:
        return p
    if prod_exact_unknown(a, b, p):
        return up(p)
    return p if two_prod_err(a, b, p) <= 0.0 else up(p)


cdef inline double div_dir(double a, double b, int* d) noexcept:
    cdef double q = a / b
    cdef double p, e, r
    if a == 0.0:
        d[0] = 0
        return q
    if fabs(q) < TINY or fabs(a) < TINY or prod_exact_unknown(q, b, q * b) or fabs(q) > BIG:
        d[0] = 2
        return q
    p = q * b
    e = two_prod_err(q, b, p)
    r = (a - p) - e
    if r == 0.0:
        d[0] = 0
        return q
    d[0] = 1 if (r > 0.0) == (b > 0.0) else -1
    return q


cdef inline double div_lo(double a, double b) noexcept:
    cdef int d
    cdef double q = div_dir(a, b, &d)
    return q if d == 0 or d == 1 else dn(q)


cdef inline double div_hi(double a, double b) noexcept:
    cdef int d
    cdef double q = div_dir(a, b, &d)
    return q if d == 0 or d == -1 else up(q)


cdef inline double sqrt_dir(double x, int* d) noexcept:
    cdef double s = c_sqrt(x)
    cdef double p, r
    if x == 0.0:
        d[0] = 0
        return s
    if x < TINY or x > BIG:
        d[0] = 2
        return s
    p = s * s
    r = (x - p) - two_prod_err(s, s, p)
    if r == 0.0:
        d[0] = 0
        return s
    d[0] = 1 if r > 0.0 else -1
    return s


cdef inline double sqrt_lo(double x) noexcept:
    cdef int d
    cdef double s = sqrt_dir(x, &d)
    return s if d == 0 or d == 1 else dn(s)


cdef inline double sqrt_hi(double x) noexcept:
    cdef int d
    cdef double s = sqrt_dir(x, &d)
    return s if d == 0 or d == -1 else up(s)


# Overflow shows up as an infinite endpoint, which iv_check rejects.
cdef inline double exp_lo(double x) noexcept:
    if x == 0.0:
        return 1.0
    return pymax(dn(c_exp(x)), 0.0)


cdef inline double exp_hi(double x) noexcept:
    if x == 0.0:
        return 1.0
    return up(c_exp(x))


cdef inline double log_lo(double x) noexcept:
    if x == 1.0:
        return 0.0
    return dn(c_log(x))


cdef inline double log_hi(double x) noexcept:
    if x == 1.0:
        return 0.0
    return up(c_log(x))


cdef inline double pow_lo(double x, double y) noexcept:
    if y == 1.0 or x == 1.0 or x == 0.0 or y == 0.0:
        return 1.0 if (x == 1.0 or y == 0.0) else x
    if y == 2.0:
        return mul_lo(x, x)
    if y == 0.5:
        return sqrt_lo(x)
    return pymax(dn(c_pow(x, y)), 0.0)


cdef inline double pow_hi(double x, double y) noexcept:
    if y == 1.0 or x == 1.0 or x == 0.0 or y == 0.0:
        return 1.0 if (x == 1.0 or y == 0.0) else x
    if y == 2.0:
        return mul_hi(x, x)
    if y == 0.5:
        return sqrt_hi(x)
    return up(c_pow(x, y))


# --- interval operations -------------------------------------------------------------

ctypedef struct iv:
    double lo
    double hi


cdef int _overflow(double lo, double hi) except -1:
    raise IntervalOverflow(f"interval endpoint overflow: [{lo!r}, {hi!r}]")


cdef inline int mk(iv* o, double lo, double hi) except -1:
    if isinf(lo) or isinf(hi):
        _overflow(lo, hi)
    o.lo = lo
    o.hi = hi
    return 0


cdef inline int iv_add(iv* o, iv a, iv b) except -1:
    return mk(o, add_lo(a.lo, b.lo), add_hi(a.hi, b.hi))


cdef inline int iv_sub(iv* o, iv a, iv b) except -1:
    return mk(o, add_lo(a.lo, -b.hi), add_hi(a.hi, -b.lo))


cdef inline void iv_neg(iv* o, iv a) noexcept:
    o.lo = -a.hi
    o.hi = -a.lo


cdef int iv_mul(iv* o, iv a, iv b) except -1:
    cdef double al = a.lo, ah = a.hi, bl = b.lo, bh = b.hi
    if al >= 0.0:
        if bl >= 0.0:
            return mk(o, mul_lo(al, bl), mul_hi(ah, bh))
        if bh <= 0.0:
            return mk(o, mul_lo(ah, bl), mul_hi(al, bh))
        return mk(o, mul_lo(ah, bl), mul_hi(ah, bh))
    if ah <= 0.0:
        if bl >= 0.0:
            return mk(o, mul_lo(al, bh), mul_hi(ah, bl))
        if bh <= 0.0:
            return mk(o, mul_lo(ah, bh), mul_hi(al, bl))
        return mk(o, mul_lo(al, bh), mul_hi(al, bl))
    if bl >= 0.0:
        return mk(o, mul_lo(al, bh), mul_hi(ah, bh))
    if bh <= 0.0:
        return mk(o, mul_lo(ah, bl), mul_hi(al, bl))
    return mk(o, pymin(mul_lo(al, bh), mul_lo(ah, bl)), pymax(mul_hi(al, bl), mul_hi(ah, bh)))


cdef int iv_div(iv* o, iv a, iv b) except -1:
    cdef double al = a.lo, ah = a.hi, bl = b.lo, bh = b.hi
    if bl > 0.0:
        if al >= 0.0:
            return mk(o, div_lo(al, bh), div_hi(ah, bl))
        if ah <= 0.0:
            return mk(o, div_lo(al, bl), div_hi(ah, bh))
        return mk(o, div_lo(al, bl), div_hi(ah, bl))
    if bh < 0.0:
        if al >= 0.0:
            return mk(o, div_lo(ah, bh), div_hi(al, bl))
        if ah <= 0.0:
            return mk(o, div_lo(ah, bl), div_hi(al, bh))
        return mk(o, div_lo(ah, bh), div_hi(al, bh))
    raise DomainError(f"division by an interval containing zero: [{bl!r}, {bh!r}]")


cdef inline int iv_exp(iv* o, iv x) except -1:
    return mk(o, exp_lo(x.lo), exp_hi(x.hi))


cdef int iv_log_sing(iv* o, iv x) except -1:
    # log for jets: a base reaching zero is a singularity of the expansion
    if x.lo <= 0.0:
        raise SingularityError(f"log of interval reaching zero [{x.lo!r}, {x.hi!r}]")
    return mk(o, log_lo(x.lo), log_hi(x.hi))


cdef int iv_pow(iv* o, iv base, iv expo) except -1:
    cdef double bl = base.lo, bh = base.hi, el = expo.lo, eh = expo.hi
    cdef double lo, hi
    if bl < 0.0:
        raise DomainError(f"pow with negative base [{bl!r}, {bh!r}]")
    if bl == 0.0:
        if el == 0.0 and eh == 0.0:
            return mk(o, 1.0, 1.0)
        if el <= 0.0:
            raise SingularityError(f"pow: zero base with non-positive exponent [{el!r}, {eh!r}]")
        if bh == 0.0:
            return mk(o, 0.0, 0.0)
        return mk(o, 0.0, pymax(pow_hi(bh, el), pow_hi(bh, eh)))
    if bl == bh and el == eh:
        return mk(o, pow_lo(bl, el), pow_hi(bl, el))
    lo = pymin(pymin(pymin(pow_lo(bl, el), pow_lo(bl, eh)), pow_lo(bh, el)), pow_lo(bh, eh))
    hi = pymax(pymax(pymax(pow_hi(bl, el), pow_hi(bl, eh)), pow_hi(bh, el)), pow_hi(bh, eh))
    return mk(o, lo, hi)


cdef inline iv thin(double x) noexcept:
    cdef iv r
    r.lo = x
    r.hi = x
    return r


cdef inline bint iv_is_zero(iv x) noexcept:
    return x.lo == 0.0 and x.hi == 0.0


# --- Python boundary ---------------------------------------------------------------


cdef int coerce(object x, iv* o) except -1:
    """1 on success, 0 if ``x`` is neither an Interval nor a real number."""
    cdef double v
    if isinstance(x, _Interval):
        o.lo = x.lo
        o.hi = x.hi
        return 1
    if isinstance(x, (int, float)):
        v = float(x)
        if v != v:
            raise DomainError("NaN interval endpoint")
        if isinf(v):
            raise IntervalOverflow(f"interval endpoint overflow: [{v!r}, {v!r}]")
        o.lo = v
        o.hi = v
        return 1
    return 0


cdef object to_py(iv x):
    r = _new(_Interval)
    r.lo = x.lo
    r.hi = x.hi
    return r


cdef IJet blank(int order):
    cdef IJet j = IJet.__new__(IJet)
    j.order = order
    j.n = ncoef(order)
    return j


cdef IJet copy_jet(IJet a, int order):
    cdef IJet j = blank(order)
    cdef int k
    for k in range(j.n):
        j.c[k] = a.c[k]
    return j


cdef IJet const_jet(iv v, int order):
    cdef IJet j = blank(order)
    cdef int k
    j.c[0] = v
    for k in range(1, j.n):
        j.c[k] = thin(0.0)
    return j


cdef IJet jet_mul(IJet a, IJet b):
    cdef int n = a.order if a.order < b.order else b.order
    cdef IJet out = blank(n)
    cdef int o, t, t0, t1
    cdef iv acc, term
    for o in range(out.n):
        t0 = pt_off[n][o]
        t1 = pt_off[n][o + 1]
        iv_mul(&acc, a.c[pt_a[n][t0]], b.c[pt_b[n][t0]])
        for t in range(t0 + 1, t1):
            iv_mul(&term, a.c[pt_a[n][t]], b.c[pt_b[n][t]])
            iv_add(&acc, acc, term)
        out.c[o] = acc
    return out


cdef IJet jet_scale(IJet a, iv s, bint left):
    # left: s * x (scalar on the left operand of the interval product)
    cdef IJet out = blank(a.order)
    cdef int k
    for k in range(a.n):
        if left:
            iv_mul(&out.c[k], s, a.c[k])
        else:
            iv_mul(&out.c[k], a.c[k], s)
    return out


cdef IJet compose(IJet x, iv* taylor):
    """sum_k taylor[k] * (x - x.value)**k, by Horner's rule."""
    cdef int n = x.order
    cdef int k
    cdef IJet delta = copy_jet(x, n)
    delta.c[0] = thin(0.0)
    cdef IJet acc = const_jet(taylor[n], n)
    for k in range(n - 1, -1, -1):
        acc = jet_mul(acc, delta)
        iv_add(&acc.c[0], acc.c[0], taylor[k])
    return acc


cdef IJet exp_from(IJet x, iv e0):
    cdef iv taylor[MAXORD + 1]
    cdef int k
    taylor[0] = e0
    for k in range(1, x.order + 1):
        iv_div(&taylor[k], e0, thin(FACT[k]))
    return compose(x, taylor)


cdef IJet jet_log(IJet x):
    cdef iv taylor[MAXORD + 1]
    cdef iv r, rk, term
    cdef int k
    cdef iv u0 = x.c[0]
    iv_log_sing(&taylor[0], u0)
    if x.order >= 1:
        iv_div(&r, thin(1.0), u0)
        rk = r
        for k in range(1, x.order + 1):
            iv_div(&term, rk, thin(<double>k))
            if k % 2 == 1:
                taylor[k] = term
            else:
                iv_neg(&taylor[k], term)
            iv_mul(&rk, rk, r)
    return compose(x, taylor)


cdef IJet jet_recip(IJet x):
    cdef iv taylor[MAXORD + 1]
    cdef iv r, rk
    cdef int k
    iv_div(&r, thin(1.0), x.c[0])
    taylor[0] = r
    rk = r
    for k in range(1, x.order + 1):
        iv_mul(&rk, rk, r)
        if k % 2 == 0:
            taylor[k] = rk
        else:
            iv_neg(&taylor[k], rk)
    return compose(x, taylor)


cdef IJet jet_powc(IJet x, iv e):
    cdef iv taylor[MAXORD + 1]
    cdef iv f, binom, em, pw
    cdef int k
    cdef iv u0 = x.c[0]
    iv_pow(&taylor[0], u0, e)
    for k in range(1, x.order + 1):
        iv_sub(&em, e, thin(<double>(k - 1)))
        iv_div(&f, em, thin(<double>k))
        if k == 1:
            binom = f
        else:
            iv_mul(&binom, binom, f)
        if iv_is_zero(binom):
            taylor[k] = binom
            continue
        iv_sub(&em, e, thin(<double>k))
        iv_pow(&pw, u0, em)
        iv_mul(&taylor[k], binom, pw)
    return compose(x, taylor)


cdef bint jet_is_constant(IJet x) noexcept:
    cdef int k
    for k in range(1, x.n):
        if not iv_is_zero(x.c[k]):
            return False
    return True


cdef class IJet:
    """Bivariate Taylor polynomial with interval coefficients."""

    cdef readonly int order
    cdef int n
    cdef iv c[NMAX]

    def __init__(self, coeffs=(), int order=0):
        if order < 0 or order > MAXORD:
            raise DomainError(f"jet order must be in [0, {MAXORD}]")
        self.order = order
        self.n = ncoef(order)
        coeffs = list(coeffs)
        if len(coeffs) != self.n:
            raise DomainError(f"order {order} needs {self.n} coefficients, got {len(coeffs)}")
        cdef int k
        for k in range(self.n):
            if not coerce(coeffs[k], &self.c[k]):
                raise TypeError(f"unsupported coefficient {coeffs[k]!r}")

    # construction
    @classmethod
    def constant(cls, value, int order):
        cdef iv v
        if not coerce(value, &v):
            raise TypeError(f"unsupported value {value!r}")
        return const_jet(v, order)

    @classmethod
    def variable(cls, value, int var, int order, bint seed=True):
        cdef iv v
        if not coerce(value, &v):
            raise TypeError(f"unsupported value {value!r}")
        cdef IJet j = const_jet(v, order)
        if seed and order >= 1:
            j.c[1 + var] = thin(1.0)
        return j

    # access
    @property
    def value(self):
        return to_py(self.c[0])

    def coef(self, int i, int j):
        return to_py(self.c[cindex(i, j)])

    def coeffs(self):
        return [to_py(self.c[k]) for k in range(self.n)]

    def get(self, int k):
        if k < 0 or k >= self.n:
            raise IndexError(k)
        return to_py(self.c[k])

    def set(self, int k, value):
        if k < 0 or k >= self.n:
            raise IndexError(k)
        if not coerce(value, &self.c[k]):
            raise TypeError(f"unsupported value {value!r}")

    def is_constant(self):
        return jet_is_constant(self)

    def truncate(self, int order):
        if order > self.order:
            raise DomainError("cannot raise the order of a jet")
        return copy_jet(self, order)

    def with_value(self, value):
        cdef IJet out = copy_jet(self, self.order)
        if not coerce(value, &out.c[0]):
            raise TypeError(f"unsupported value {value!r}")
        return out

    def d(self, int var):
        """Partial derivative along variable ``var`` (order drops by one)."""
        if self.order < 1:
            raise DomainError("derivative of an order-0 jet")
        cdef IJet out = blank(self.order - 1)
        cdef int d, jj, i, j, o = 0, src, k
        for d in range(self.order):
            for jj in range(d + 1):
                j = jj
                i = d - jj
                if var == 0:
                    src = cindex(i + 1, j)
                    k = i + 1
                else:
                    src = cindex(i, j + 1)
                    k = j + 1
                if k != 1:
                    iv_mul(&out.c[o], self.c[src], thin(<double>k))
                else:
                    out.c[o] = self.c[src]
                o += 1
        return out

    def __repr__(self):
        return f"IJet(order={self.order}, c={self.coeffs()!r})"

    def __reduce__(self):
        return (IJet, (self.coeffs(), self.order))

    # arithmetic
    def __neg__(self):
        cdef IJet out = blank(self.order)
        cdef int k
        for k in range(self.n):
            iv_neg(&out.c[k], self.c[k])
        return out

    def __add__(self, other):
        cdef iv s
        cdef IJet a, b, out
        cdef int n, k
        if isinstance(other, IJet):
            a = self
            b = other
            n = a.order if a.order < b.order else b.order
            out = blank(n)
            for k in range(out.n):
                iv_add(&out.c[k], a.c[k], b.c[k])
            return out
        if not coerce(other, &s):
            return NotImplemented
        out = copy_jet(self, self.order)
        iv_add(&out.c[0], out.c[0], s)
        return out

    def __radd__(self, other):
        cdef iv s
        if not coerce(other, &s):
            return NotImplemented
        cdef IJet out = copy_jet(self, self.order)
        if isinstance(other, _Interval):
            iv_add(&out.c[0], s, self.c[0])
        else:
            iv_add(&out.c[0], self.c[0], s)
        return out

    def __sub__(self, other):
        cdef iv s
        cdef IJet a, b, out
        cdef int n, k
        if isinstance(other, IJet):
            a = self
            b = other
            n = a.order if a.order < b.order else b.order
            out = blank(n)
            for k in range(out.n):
                iv_sub(&out.c[k], a.c[k], b.c[k])
            return out
        if not coerce(other, &s):
            return NotImplemented
        out = copy_jet(self, self.order)
        iv_sub(&out.c[0], out.c[0], s)
        return out

    def __rsub__(self, other):
        cdef iv s
        if not coerce(other, &s):
            return NotImplemented
        cdef IJet out = -self
        iv_sub(&out.c[0], s, self.c[0])
        return out

    def __mul__(self, other):
        cdef iv s
        if isinstance(other, IJet):
            return jet_mul(self, other)
        if not coerce(other, &s):
            return NotImplemented
        return jet_scale(self, s, False)

    def __rmul__(self, other):
        cdef iv s
        if not coerce(other, &s):
            return NotImplemented
        # float * Interval dispatches to Interval.__rmul__, i.e. x * other
        return jet_scale(self, s, isinstance(other, _Interval))

    def __truediv__(self, other):
        cdef iv s
        cdef IJet q, out
        cdef int k
        if isinstance(other, IJet):
            q = jet_mul(self, jet_recip(other))
            iv_div(&q.c[0], self.c[0], (<IJet>other).c[0])
            return q
        if not coerce(other, &s):
            return NotImplemented
        out = blank(self.order)
        for k in range(self.n):
            iv_div(&out.c[k], self.c[k], s)
        return out

    def __rtruediv__(self, other):
        cdef iv s
        if not coerce(other, &s):
            return NotImplemented
        cdef IJet q = jet_scale(jet_recip(self), s, False)
        iv_div(&q.c[0], s, self.c[0])
        return q

    def __pow__(self, other, mod):
        cdef iv s, p0
        cdef IJet base, w, o
        cdef int n
        if isinstance(other, IJet):
            o = other
            if jet_is_constant(o):
                return jet_powc(self, o.c[0])
            n = self.order if self.order < o.order else o.order
            base = copy_jet(self, n)
            w = jet_mul(copy_jet(o, n), jet_log(base))
            iv_pow(&p0, base.c[0], o.c[0])
            return exp_from(w, p0)
        if not coerce(other, &s):
            return NotImplemented
        return jet_powc(self, s)

    def __rpow__(self, other, mod):
        # other ** self with scalar base > 0
        cdef iv s, L, p0
        if not coerce(other, &s):
            return NotImplemented
        iv_log_sing(&L, s)
        cdef IJet w = jet_scale(self, L, False)
        iv_pow(&p0, s, self.c[0])
        return exp_from(w, p0)

    # composition with scalar functions
    def compose(self, taylor):
        cdef iv tl[MAXORD + 1]
        cdef int k
        if len(taylor) < self.order + 1:
            raise DomainError("compose needs order + 1 Taylor coefficients")
        for k in range(self.order + 1):
            if not coerce(taylor[k], &tl[k]):
                raise TypeError(f"unsupported coefficient {taylor[k]!r}")
        return compose(self, tl)

    def exp(self):
        cdef iv e0
        iv_exp(&e0, self.c[0])
        return exp_from(self, e0)

    def log(self):
        return jet_log(self)

    def recip(self):
        return jet_recip(self)

    def powc(self, e):
        cdef iv s
        if not coerce(e, &s):
            raise TypeError(f"unsupported exponent {e!r}")
        return jet_powc(self, s)

    def sqrt(self):
        return jet_powc(self, thin(0.5))
