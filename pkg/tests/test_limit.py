from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from oracles import D_mpmath
from qd import exact
from qd.errors import DomainError
from qd.limit import LimitPoint, tail_radius


XI = LimitPoint.from_vector([Fraction(1), Fraction(1, 2), Fraction(1, 4)])


def test_L_examples():
    assert XI.L((4, 2, 1)).contains(0) and XI.L((4, 2, 1)).hi == 0
    assert XI.L((1, 1, 0)).contains(Fraction(1, 2))
    assert float(XI.L((1, 1, 0)).width()) < 1e-30


def test_D_examples():
    assert XI.D((4, 2, 1)).hi == 0
    x = (3, 1, 1)
    d = XI.D(x)
    assert d.overlaps(exact.norm(x) * exact.proj_dist(x, (4, 2, 1)))


def test_L_needs_nonzero_first_coordinate():
    with pytest.raises(DomainError):
        LimitPoint.from_vector([0, 1, 1]).L((1, 0, 0))


def test_D_against_mpmath(ref_seq, ref_xi):
    a = ref_seq.points[-1]
    for x in ref_seq.points[2:12] + [(1, 0, 0), (110, 4, 21)]:
        d = ref_xi.D(x)
        want = gmpy2.mpq(D_mpmath(a, x))
        assert gmpy2.mpq(d.lo) <= want <= gmpy2.mpq(d.hi)


def test_radius_bounds_distance(ref_seq, ref_xi):
    # each anchor's radius bounds its distance to the finest anchor
    last = ref_seq.points[-1]
    for a, r in ref_xi.anchors[:-1]:
        assert exact.proj_dist(a, last).lo <= r


def test_coarsen_and_precision(ref_xi):
    c = ref_xi.coarsen(mpfr("1e-20"))
    assert c.radius <= mpfr("1e-20") and len(c.anchors) == 1
    assert ref_xi.with_precision(512).precision == 512


def test_json_round_trip(ref_xi):
    back = LimitPoint.from_json(ref_xi.to_json())
    assert back.anchor == ref_xi.anchor and back.radius >= ref_xi.radius
    assert LimitPoint.from_json('{"coords": ["1", "1/2", "1/4"]}').anchor == (4, 2, 1)


def test_tail_radius():
    ds = [exact.proj_dist((1, k, k * k), (1, k + 1, (k + 1) ** 2)) for k in range(1, 5)]
    assert tail_radius(ds) is None or tail_radius(ds) >= ds[-1].hi
