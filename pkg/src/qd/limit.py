"""Certified real points of projective space.

A LimitPoint is known through integer anchors a_k together with upper bounds
r_k >= dist([a_k], xi).  Measures of integer points relative to xi are
computed exactly against an anchor and then widened by ||x|| r_k, which
avoids the cancellation a floating representation of xi would suffer.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from . import exact
from .errors import DomainError
from .exact import DEFAULT_PRECISION, IntervalReal, _ctx

SQRT2_UP = Fraction(141422, 100000)


def _up(v, precision=DEFAULT_PRECISION):
    return IntervalReal.exact(v, precision).hi


class LimitPoint:
    """xi in P^n(R) with a ladder of (anchor, radius) pairs, finest last."""

    def __init__(self, anchors, precision=DEFAULT_PRECISION):
        if not anchors:
            raise ValueError("need at least one anchor")
        self.precision = precision
        self.anchors = [(exact.normalize(a), self._radius(r)) for a, r in anchors]

    def _radius(self, r):
        # radii are upper bounds, so never round them to a coarser mpfr
        if isinstance(r, type(mpfr(0))):
            return r
        return _up(Fraction(r), self.precision)

    @classmethod
    def from_vector(cls, v, precision=DEFAULT_PRECISION):
        """Exact rational point (radius zero)."""
        return cls([(exact.clear_denominators(v), mpfr(0))], precision)

    @property
    def dim(self):
        return len(self.anchor)

    @property
    def anchor(self):
        return self.anchors[-1][0]

    @property
    def radius(self):
        return self.anchors[-1][1]

    @property
    def error_radius(self):
        return IntervalReal(self.radius, self.radius, self.precision)

    def coarsen(self, tolerance):
        """The smallest anchor whose radius is at most tolerance."""
        for a, r in self.anchors:
            if r <= tolerance:
                return LimitPoint([(a, r)], self.precision)
        return LimitPoint([self.anchors[-1]], self.precision)

    def with_precision(self, precision):
        return LimitPoint(self.anchors, precision)

    def xi(self, precision=None):
        """Enclosures of the coordinates of the unit representative."""
        p = precision or self.precision
        a = self.anchor
        na = exact.norm(a, p)
        slack = IntervalReal(mpfr(0), self.radius, p) * SQRT2_UP
        return tuple((IntervalReal.exact(c, p) / na).widen(slack.hi) for c in a)

    # -- measures ------------------------------------------------------

    def key(self, x):
        """Exact integer ordering key: ||x ∧ a||^2 for the finest anchor."""
        return exact.wedge_norm_sq(x, self.anchor)

    def D(self, x, precision=None):
        """||x ∧ xi|| / ||xi||, the Euclidean distance from x to the line of xi."""
        p = precision or self.precision
        a = self.anchor
        base = IntervalReal.exact(Fraction(exact.wedge_norm_sq(x, a), exact.norm_sq(a)), p).sqrt()
        if self.radius == 0:
            return base
        err = exact.norm(x, p) * IntervalReal(self.radius, self.radius, p)
        w = base.widen(err.hi)
        return IntervalReal(max(w.lo, mpfr(0)), w.hi, p)

    def L(self, x, precision=None):
        """max_i |x_0 xi_i - x_i xi_0| for the representative with xi_0 = 1."""
        p = precision or self.precision
        a = self.anchor
        if a[0] == 0 and self.radius == 0:
            raise DomainError("xi_0 = 0; L needs a representative with xi_0 != 0")
        na = exact.norm(a, p)
        m = max(abs(x[0] * a[i] - x[i] * a[0]) for i in range(1, len(a)))
        num = IntervalReal.exact(m, p) / na
        den = IntervalReal.exact(abs(a[0]), p) / na
        if self.radius > 0:
            # the unit representative moves by at most sqrt(2) r
            delta = (IntervalReal(self.radius, self.radius, p) * SQRT2_UP).hi
            num = num.widen(_ctx(p, True).mul(delta, abs(x[0]) + max(abs(c) for c in x[1:])))
            den = den.widen(delta)
            if den.lo <= 0:
                raise DomainError("the enclosure of xi_0 contains 0")
            num = IntervalReal(max(num.lo, mpfr(0)), num.hi, p)
        return num / den

    def dist(self, x, precision=None):
        p = precision or self.precision
        return self.D(x, p) / exact.norm(x, p)

    def separated_from(self, other):
        """Certified distinctness of two limit points."""
        d = exact.proj_dist(self.anchor, other.anchor, self.precision)
        return d.lo > _ctx(self.precision, True).add(self.radius, other.radius)

    # -- transport -----------------------------------------------------

    def pushforward(self, t):
        """Image under a rational matrix T, radius scaled by (|T|_F |T^-1|_F)^2."""
        tinv = exact.inverse(t)
        f1 = sum(Fraction(v) ** 2 for row in t for v in row)
        f2 = sum(Fraction(v) ** 2 for row in tinv for v in row)
        k = _up(f1 * f2, self.precision)
        out = []
        for a, r in self.anchors:
            img = exact.clear_denominators(exact.mat_vec(t, a))
            out.append((img, _ctx(self.precision, True).mul(r, k)))
        return LimitPoint(out, self.precision)

    # -- serialization --------------------------------------------------

    def to_json(self):
        return json.dumps({
            "anchors": [{"point": [gmpy2.mpz(c).digits() for c in a], "radius": format(r, ".17Ug")}
                        for a, r in self.anchors],
            "precision": self.precision,
        })

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, str) else text
        p = int(obj.get("precision", DEFAULT_PRECISION))
        if "anchors" in obj:
            anchors = [([int(gmpy2.mpz(c)) for c in e["point"]], e["radius"]) for e in obj["anchors"]]
            return cls(anchors, p)
        # plain rational coordinates
        return cls.from_vector([Fraction(str(c)) for c in obj["coords"]], p)

    def __repr__(self):
        bits = max(abs(c).bit_length() for c in self.anchor)
        return f"LimitPoint(dim={self.dim}, anchor_bits={bits}, radius<={format(self.radius, '.3Ug')})"


def tail_radius(dists, safety=3):
    """Bound on the distance from the last point to the limit.

    dists are interval enclosures of dist([x_k], [x_{k+1}]) for consecutive
    points ending at the anchor.  With theta the last measured contraction
    ratio, the tail sum is at most d theta / (1 - theta); the safety factor
    replaces 1 / (1 - theta).
    """
    if len(dists) < 2:
        raise ValueError("need two consecutive distances")
    d_last, d_prev = dists[-1], dists[-2]
    theta = d_last.hi / d_prev.lo if d_prev.lo > 0 else mpfr("inf")
    if not theta < mpfr(1) / safety:
        return None
    c = _ctx(d_last.precision, True)
    return c.mul(c.mul(mpfr(safety), theta), d_last.hi)
