"""Exact integer linear algebra and outward-rounded intervals.

Vectors are tuples of ints. Matrices are tuples of rows; a "basis matrix"
stores its vectors as columns unless a function says otherwise.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import PrecisionExhausted

DEFAULT_PRECISION = 128
MAX_PRECISION = 4096


# ---------------------------------------------------------------- vectors

def dot(x, y):
    return sum(a * b for a, b in zip(x, y))


def norm_sq(x):
    return sum(a * a for a in x)


def wedge(x, y):
    """Plücker coordinates of x ∧ y, ordered by (i, j) with i < j."""
    n = len(x)
    return tuple(x[i] * y[j] - x[j] * y[i] for i in range(n) for j in range(i + 1, n))


def wedge_norm_sq(x, y):
    return sum(m * m for m in wedge(x, y))


def content(x):
    g = 0
    for a in x:
        g = math.gcd(g, a)
    return g


def normalize(x):
    """Primitive representative with first nonzero coordinate positive."""
    g = content(x)
    if g == 0:
        raise ValueError("zero vector has no projective representative")
    x = tuple(a // g for a in x)
    for a in x:
        if a:
            return x if a > 0 else tuple(-b for b in x)
    return x


def clear_denominators(v):
    """Integer vector proportional to a vector of rationals (not normalized)."""
    den = 1
    for a in v:
        den = math.lcm(den, Fraction(a).denominator)
    return tuple(int(Fraction(a) * den) for a in v)


def isqrt_ceil(n):
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def is_square(n):
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def is_rational_square(a):
    a = Fraction(a)
    return a >= 0 and is_square(a.numerator) and is_square(a.denominator)


# --------------------------------------------------------------- matrices

def identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(m):
    return tuple(zip(*m))


def mat_mul(a, b):
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(m, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def columns(m):
    return [tuple(c) for c in transpose(m)]


def from_columns(cols):
    return transpose(cols)


def inverse(m):
    """Inverse of a square rational matrix by Gauss-Jordan elimination."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple(tuple(row[n:]) for row in a)


def det(rows):
    """Determinant of a square integer matrix (Bareiss, fraction free)."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows):
    """Rank of an integer (or rational) matrix given by rows."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return 0
    ncol = len(a[0])
    rk = 0
    for c in range(ncol):
        p = next((r for r in range(rk, len(a)) if a[r][c] != 0), None)
        if p is None:
            continue
        a[rk], a[p] = a[p], a[rk]
        for r in range(rk + 1, len(a)):
            if a[r][c] != 0:
                f = a[r][c] / a[rk][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[rk])]
        rk += 1
        if rk == len(a):
            break
    return rk


def in_span(x, vectors):
    """True when x lies in the rational span of the given vectors."""
    vectors = list(vectors)
    if not any(x):
        return True
    if not vectors:
        return False
    return rank(vectors + [x]) == rank(vectors)


def hnf(rows):
    """Row Hermite normal form of an integer matrix, zero rows dropped."""
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    ncol = len(a[0])
    r0 = 0
    for c in range(ncol):
        if r0 == len(a):
            break
        while True:
            nz = [r for r in range(r0, len(a)) if a[r][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda r: abs(a[r][c]))
            a[r0], a[p] = a[p], a[r0]
            done = True
            for r in range(r0 + 1, len(a)):
                if a[r][c]:
                    q = a[r][c] // a[r0][c]
                    a[r] = [x - q * y for x, y in zip(a[r], a[r0])]
                    if a[r][c]:
                        done = False
            if done:
                break
        if r0 < len(a) and a[r0][c] != 0:
            if a[r0][c] < 0:
                a[r0] = [-x for x in a[r0]]
            for r in range(r0):
                q = a[r][c] // a[r0][c]
                if q:
                    a[r] = [x - q * y for x, y in zip(a[r], a[r0])]
            r0 += 1
    return [tuple(r) for r in a[:r0]]


def integer_kernel(rows, ncols=None):
    """Z-basis (HNF rows) of {x in Z^n : M x = 0} for an integer matrix M.

    The basis spans the saturated lattice, so every vector in it is primitive.
    """
    rows = [list(r) for r in rows]
    n = ncols if ncols is not None else len(rows[0])
    m = len(rows)
    # rows of [M^T | I], reduced by unimodular row operations
    aug = [[rows[i][j] for i in range(m)] + [int(k == j) for k in range(n)] for j in range(n)]
    r0 = 0
    for c in range(m):
        if r0 == n:
            break
        while True:
            nz = [r for r in range(r0, n) if aug[r][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda r: abs(aug[r][c]))
            aug[r0], aug[p] = aug[p], aug[r0]
            done = True
            for r in range(r0 + 1, n):
                if aug[r][c]:
                    q = aug[r][c] // aug[r0][c]
                    aug[r] = [x - q * y for x, y in zip(aug[r], aug[r0])]
                    if aug[r][c]:
                        done = False
            if done:
                break
        if r0 < n and aug[r0][c] != 0:
            r0 += 1
    kern = [tuple(row[m:]) for row in aug if not any(row[:m])]
    return hnf(kern)


def complete_basis(vectors, dim):
    """Unit vectors (in index order) completing the given vectors to a basis."""
    have = list(vectors)
    extra = []
    for i in range(dim):
        e = tuple(int(i == j) for j in range(dim))
        if not in_span(e, have):
            have.append(e)
            extra.append(e)
    return extra


# -------------------------------------------------------------- intervals

@lru_cache(maxsize=None)
def _ctx(precision, up):
    return gmpy2.context(precision=precision,
                         round=gmpy2.RoundUp if up else gmpy2.RoundDown,
                         emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())


def _to_mpq(v):
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _round(v, precision, up):
    with _ctx(precision, up):
        return mpfr(_to_mpq(v))


class IntervalReal:
    """Closed interval [lo, hi] with MPFR endpoints rounded outward."""

    __slots__ = ("lo", "hi", "precision")

    def __init__(self, lo, hi=None, precision=DEFAULT_PRECISION):
        if hi is None:
            hi = lo
        if not isinstance(lo, type(mpfr(0))):
            lo = _round(lo, precision, False)
        if not isinstance(hi, type(mpfr(0))):
            hi = _round(hi, precision, True)
        if lo > hi:
            raise ValueError("empty interval")
        self.lo, self.hi, self.precision = lo, hi, precision

    @classmethod
    def exact(cls, value, precision=DEFAULT_PRECISION):
        return cls(_round(value, precision, False), _round(value, precision, True), precision)

    def _coerce(self, other):
        if isinstance(other, IntervalReal):
            return other
        return IntervalReal.exact(other, self.precision)

    def _prec(self, other):
        return max(self.precision, other.precision)

    def __add__(self, other):
        o = self._coerce(other)
        p = self._prec(o)
        return IntervalReal(_ctx(p, False).add(self.lo, o.lo), _ctx(p, True).add(self.hi, o.hi), p)

    __radd__ = __add__

    def __neg__(self):
        c = _ctx(self.precision, True)
        return IntervalReal(c.minus(self.hi), c.minus(self.lo), self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        p = self._prec(o)
        d, u = _ctx(p, False), _ctx(p, True)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        lo = min(d.mul(a, b) for a, b in pairs)
        hi = max(u.mul(a, b) for a, b in pairs)
        return IntervalReal(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        p = self._prec(o)
        d, u = _ctx(p, False), _ctx(p, True)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        lo = min(d.div(a, b) for a, b in pairs)
        hi = max(u.div(a, b) for a, b in pairs)
        return IntervalReal(lo, hi, p)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return IntervalReal(mpfr(0), max(_ctx(self.precision, True).minus(self.lo), self.hi), self.precision)

    def square(self):
        a = abs(self)
        return a * a

    def sqrt(self):
        if self.hi < 0:
            raise ValueError("sqrt of negative interval")
        lo = max(self.lo, mpfr(0))
        p = self.precision
        return IntervalReal(_ctx(p, False).sqrt(lo), _ctx(p, True).sqrt(self.hi), p)

    def log(self):
        if self.lo <= 0:
            raise ValueError("log of interval touching zero")
        p = self.precision
        return IntervalReal(_ctx(p, False).log(self.lo), _ctx(p, True).log(self.hi), p)

    def max(self, other):
        o = self._coerce(other)
        return IntervalReal(max(self.lo, o.lo), max(self.hi, o.hi), self._prec(o))

    def min(self, other):
        o = self._coerce(other)
        return IntervalReal(min(self.lo, o.lo), min(self.hi, o.hi), self._prec(o))

    def hull(self, other):
        o = self._coerce(other)
        return IntervalReal(min(self.lo, o.lo), max(self.hi, o.hi), self._prec(o))

    def widen(self, radius):
        """Enlarge by a nonnegative radius on both sides."""
        r = self._coerce(radius)
        return IntervalReal(_ctx(self.precision, False).sub(self.lo, r.hi),
                            _ctx(self.precision, True).add(self.hi, r.hi), self.precision)

    def contains(self, value):
        v = _to_mpq(value) if not isinstance(value, IntervalReal) else None
        if v is None:
            return self.lo <= value.lo and value.hi <= self.hi
        return mpq(self.lo) <= v <= mpq(self.hi)

    def width(self):
        return _ctx(self.precision, True).sub(self.hi, self.lo)

    def mid(self):
        with gmpy2.context(precision=self.precision + 1,
                           emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min()):
            return (self.lo + self.hi) / 2

    def lt(self, other):
        """Certainly less than."""
        return self.hi < self._coerce(other).lo

    def gt(self, other):
        return self.lo > self._coerce(other).hi

    def overlaps(self, other):
        o = self._coerce(other)
        return not (self.hi < o.lo or o.hi < self.lo)

    def log10_mid(self):
        m = self.mid()
        if m == 0:
            return float("-inf")
        return float(gmpy2.log10(abs(m)))

    def __float__(self):
        return float(self.mid())

    def format(self, digits=20):
        return format(self.lo, f".{digits}Dg"), format(self.hi, f".{digits}Ug")

    def __repr__(self):
        lo, hi = self.format(12)
        return f"[{lo}, {hi}]"

    def __eq__(self, other):
        return (isinstance(other, IntervalReal) and self.lo == other.lo
                and self.hi == other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))


def interval_sqrt(n, precision=DEFAULT_PRECISION):
    """Enclosure of sqrt of a nonnegative rational."""
    return IntervalReal.exact(n, precision).sqrt()


def norm(x, precision=DEFAULT_PRECISION):
    return interval_sqrt(norm_sq(x), precision)


def proj_dist(x, y, precision=DEFAULT_PRECISION):
    """Projective distance ||x∧y|| / (||x|| ||y||) as an interval in [0, 1]."""
    num = wedge_norm_sq(x, y)
    if num == 0:
        return IntervalReal(mpfr(0), mpfr(0), precision)
    return IntervalReal.exact(Fraction(num, norm_sq(x) * norm_sq(y)), precision).sqrt()


def with_precision(fn, accept, precision=DEFAULT_PRECISION, cap=MAX_PRECISION):
    """Call fn(precision), doubling precision until accept(result) holds."""
    p = precision
    while True:
        res = fn(p)
        if accept(res):
            return res
        if p >= cap:
            raise PrecisionExhausted(f"precision cap of {cap} bits reached")
        p = min(2 * p, cap)


def det_minors(vectors):
    """All maximal minors of a k x n integer matrix (rows are vectors)."""
    k = len(vectors)
    n = len(vectors[0])
    return [det([[v[c] for c in cols] for v in vectors]) for cols in combinations(range(n), k)]


def multi_wedge_norm_sq(vectors):
    """Squared norm of v_1 ∧ ... ∧ v_k (sum of squared maximal minors)."""
    return sum(m * m for m in det_minors(vectors))
