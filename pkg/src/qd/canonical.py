"""Reduction to the two canonical shapes and their automorphisms.

Diag:       t0^2 - a1 t1^2 - ... - an tn^2   with a1 > 0 a non-square
Hyperbolic: t0 t1 - a2 t2^2 - ... - an tn^2  with some a_i != 0

Both shapes carry integer coefficients.  ``a * q(T t)`` equals the shape.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .errors import NotCanonical
from .pell import pell_fundamental
from .qform import QuadraticForm, diagonalize, is_indefinite
from .witt import TRIAL_LIMIT


class Kind(enum.Enum):
    DIAG = "Diag"
    HYPERBOLIC = "Hyperbolic"


@dataclass(frozen=True)
class CanonicalReduction:
    kind: Kind
    scale: Fraction
    transform: tuple      # rational matrix, columns are the new basis
    coeffs: tuple         # (a1, ..., an) for Diag, (a2, ..., an) for Hyperbolic

    @property
    def dim(self):
        return len(self.transform)

    def form(self):
        n = self.dim
        if self.kind is Kind.DIAG:
            c = {(0, 0): 1}
            c.update({(i, i): -a for i, a in enumerate(self.coeffs, start=1)})
        else:
            c = {(0, 1): 1}
            c.update({(i, i): -a for i, a in enumerate(self.coeffs, start=2)})
        return QuadraticForm(n, c)


def _square_free_with_root(n):
    """(s, r) with n = s r^2, stripping squares of primes up to the trial limit."""
    r = 1
    p = 2
    while p * p <= abs(n) and p <= TRIAL_LIMIT:
        while n % (p * p) == 0:
            n //= p * p
            r *= p
        p += 1 if p == 2 else 2
    if n and exact.is_square(abs(n)):
        r *= math.isqrt(abs(n))
        n = 1 if n > 0 else -1
    return n, r


def _integerize(a):
    """(c, s) with c = a s^2 a squarefree-ish integer, s > 0 rational."""
    a = Fraction(a)
    if a == 0:
        return 0, Fraction(1)
    n = a.numerator * a.denominator
    c, r = _square_free_with_root(n)
    # a * (den / r)^2 = n / r^2 = c
    return c, Fraction(a.denominator, r)


def _existing_shape(q):
    n = q.dim
    offdiag = [k for k in q.coeffs if k[0] != k[1]]
    if offdiag == [] and q.coeff(0, 0) == 1 and n >= 2:
        a1 = -q.coeff(1, 1)
        if a1 > 0 and not exact.is_square(a1):
            return Kind.DIAG, tuple(-q.coeff(i, i) for i in range(1, n))
    if offdiag == [(0, 1)] and q.coeff(0, 1) == 1 and not q.coeff(0, 0) and not q.coeff(1, 1) and n >= 3:
        a = tuple(-q.coeff(i, i) for i in range(2, n))
        if a[0]:
            return Kind.HYPERBOLIC, a
    return None


def _pair(diag):
    pos = next((i for i, v in enumerate(diag) if v > 0), None)
    neg = next((i for i, v in enumerate(diag) if v < 0), None)
    return pos, neg


def has_li_point(q):
    """Whether the real quadric carries a point with Q-linearly independent coordinates."""
    if q.dim < 2 or not is_indefinite(q):
        return False
    _, d = diagonalize(q)
    nonzero = [v for v in d if v != 0]
    if len(nonzero) >= 3:
        return True
    p, m = _pair(d)
    return not exact.is_rational_square(-d[p] / d[m])


def reduce_canonical(q):
    """CanonicalReduction for q; Hyperbolic is preferred when -a0 a1 is a square."""
    shape = _existing_shape(q)
    if shape is not None:
        return CanonicalReduction(shape[0], Fraction(1), exact.identity(q.dim), shape[1])
    if not has_li_point(q):
        raise NotCanonical("the quadric has no point with linearly independent coordinates")
    basis, d = diagonalize(q)
    n = q.dim
    p, m = _pair(d)
    rest = [i for i in range(n) if i not in (p, m)]
    rest = [i for i in rest if d[i] != 0] + [i for i in rest if d[i] == 0]
    cols = exact.columns(basis)
    scale = 1 / d[p]
    a1 = -d[m] / d[p]
    new_cols = []
    coeffs = []
    if exact.is_rational_square(a1):
        r = Fraction(math.isqrt(a1.numerator), math.isqrt(a1.denominator))
        # t0^2 - r^2 t1^2 = u v  with  t0 = (u + v)/2,  t1 = (u - v)/(2r)
        e0, e1 = cols[p], cols[m]
        new_cols.append(tuple(x / 2 + y / (2 * r) for x, y in zip(e0, e1)))
        new_cols.append(tuple(x / 2 - y / (2 * r) for x, y in zip(e0, e1)))
        kind = Kind.HYPERBOLIC
    else:
        c, s = _integerize(a1)
        new_cols.append(cols[p])
        new_cols.append(tuple(x * s for x in cols[m]))
        coeffs.append(c)
        kind = Kind.DIAG
    for i in rest:
        c, s = _integerize(-d[i] / d[p])
        new_cols.append(tuple(x * s for x in cols[i]))
        coeffs.append(c)
    if kind is Kind.HYPERBOLIC and not any(coeffs):
        raise NotCanonical("hyperbolic shape needs a third nonzero coefficient")
    red = CanonicalReduction(kind, scale, exact.from_columns(new_cols), tuple(coeffs))
    check_reduction(q, red)
    return red


def check_reduction(q, red):
    """Exact check that scale * q(T t) equals the canonical polynomial."""
    g = exact.mat_mul(exact.mat_mul(exact.transpose(red.transform), q.gram()), red.transform)
    want = red.form().gram()
    for i in range(red.dim):
        for j in range(red.dim):
            if red.scale * g[i][j] != want[i][j]:
                raise AssertionError("canonical reduction failed its identity check")
    return True


def automorphism_generator(red):
    """An infinite-order rational isometry of the canonical form."""
    n = red.dim
    t = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    if red.kind is Kind.DIAG:
        a1 = red.coeffs[0]
        u, v = pell_fundamental(a1)
        t[0][0], t[0][1] = Fraction(u), Fraction(a1 * v)
        t[1][0], t[1][1] = Fraction(v), Fraction(u)
    else:
        t[0][0], t[1][1] = Fraction(2), Fraction(1, 2)
    return tuple(tuple(r) for r in t)


def is_automorphism(q, t):
    g = exact.mat_mul(exact.mat_mul(exact.transpose(t), q.gram()), t)
    return g == q.gram()


def pushforward_point(t, x):
    """Primitive integer representative of T x."""
    return exact.normalize(exact.clear_denominators(exact.mat_vec(t, x)))


def to_original(red, t):
    """Integer representative in the original coordinates of a canonical-frame vector."""
    return pushforward_point(red.transform, t)


def to_canonical(red, x):
    return pushforward_point(exact.inverse(red.transform), x)

