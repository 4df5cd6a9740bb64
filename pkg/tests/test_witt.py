import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hilbert_bruteforce, witt_index_bruteforce
from qd import exact, witt
from qd.errors import DomainError, NotFound
from qd.qform import QuadraticForm, eval_b, eval_q


def Q(dim, **kw):
    c = {}
    for k, v in kw.items():
        i, j = int(k[1]), int(k[2])
        c[(i, j)] = v
    return QuadraticForm(dim, c)


def test_isotropy_examples():
    assert not witt.is_isotropic(QuadraticForm.diagonal([1, 1]))
    assert witt.is_isotropic(Q(2, c01=1))
    assert not witt.is_isotropic(QuadraticForm.diagonal([1, -2]))
    assert not witt.is_isotropic(QuadraticForm.diagonal([1, 1, -3]))
    assert witt.is_isotropic(QuadraticForm.diagonal([1, 1, -2]))


def test_hilbert_examples():
    assert witt.hilbert_symbol(1, 7, 3) == 1
    assert witt.hilbert_symbol(1, -5, witt.INF) == 1
    assert witt.hilbert_symbol(-1, -1, witt.INF) == -1
    assert witt.hilbert_symbol(2, 5, 5) == -1


SQF = [a for a in range(-30, 31) if a and all(a % (p * p) for p in (2, 3, 5))]


@settings(max_examples=150)
@given(st.sampled_from(SQF), st.sampled_from(SQF), st.sampled_from([2, 3, 5, 7]))
def test_hilbert_matches_local_solubility(a, b, p):
    assert witt.hilbert_symbol(a, b, p) == hilbert_bruteforce(a, b, p)


@given(st.sampled_from(SQF), st.sampled_from(SQF))
def test_hilbert_product_formula(a, b):
    places = {2} | set(witt.factor(a)) | set(witt.factor(b))
    prod = witt.hilbert_symbol(a, b, witt.INF)
    for p in places:
        prod *= witt.hilbert_symbol(a, b, p)
    assert prod == 1


@given(st.sampled_from(SQF), st.sampled_from(SQF), st.sampled_from(SQF), st.sampled_from([2, 3, 5, 7, witt.INF]))
def test_hilbert_bilinear(a, b, c, p):
    bc = witt.squarefree_part(b * c)
    assert witt.hilbert_symbol(a, bc, p) == witt.hilbert_symbol(a, b, p) * witt.hilbert_symbol(a, c, p)


def test_factor():
    assert witt.factor(360) == {2: 3, 3: 2, 5: 1}
    n = 1000003 * 1000033
    assert witt.factor(n) == {1000003: 1, 1000033: 1}
    with pytest.raises(DomainError):
        witt.factor(0)


def test_squarefree_part():
    assert witt.squarefree_part(Fraction(-12, 5)) == -15
    assert witt.squarefree_part(49) == 1


def test_isotropic_vector_examples():
    assert witt.isotropic_vector(Q(3, c01=1, c22=-1)) == (1, 0, 0)
    x = witt.isotropic_vector(Q(4, c01=1, c23=1), height_cap=10)
    assert eval_q(Q(4, c01=1, c23=1), x) == 0 and exact.content(x) == 1
    with pytest.raises(NotFound):
        witt.isotropic_vector(QuadraticForm.diagonal([1, 1, -3]), max_points=2000)


def test_shell_is_colex_sorted_and_primitive():
    s = witt.shell(3, 2)
    assert s == sorted(s, key=witt.colex_key)
    assert all(max(map(abs, x)) == 2 and exact.content(x) == 1 for x in s)
    assert len(set(s)) == len(s)


def test_hyperbolic_split_examples():
    (u, v), f, emb = witt.hyperbolic_split(Q(2, c01=1), (1, 0))
    assert exact.wedge_norm_sq(v, (0, 1)) == 0 and f.dim == 0
    (u, v), f, emb = witt.hyperbolic_split(Q(3, c01=1, c22=-1), (1, 0, 0))
    assert f.dim == 1 and f.coeff(0, 0) < 0
    (u, v), f, emb = witt.hyperbolic_split(Q(4, c01=1, c23=1), (1, 0, 0, 0))
    assert f.dim == 2 and witt.witt_index(f) == 1 and witt.is_isotropic(f)


@st.composite
def forms(draw, dmax=4, c=5):
    d = draw(st.integers(2, dmax))
    q = QuadraticForm(d, {(i, j): draw(st.integers(-c, c)) for i in range(d) for j in range(i, d)})
    return q if not q.is_zero() else QuadraticForm(d, {(0, 1): 1})


@settings(max_examples=60, deadline=None)
@given(forms())
def test_decomposition_invariants(q):
    w = witt.witt_decompose(q)
    vs = w.all_vectors()
    assert exact.rank(vs) == q.dim == len(vs)
    for u, v in w.hyperbolic_pairs:
        assert eval_q(q, u) == 0 and eval_q(q, v) == 0 and eval_b(q, u, v) != 0
    blocks = [[k] for k in w.kernel_basis] + [list(p) for p in w.hyperbolic_pairs] + [list(w.anisotropic_basis)]
    for i, bi in enumerate(blocks):
        for bj in blocks[i + 1:]:
            assert all(eval_b(q, x, y) == 0 for x in bi for y in bj)
    # the anisotropic block carries no small zero
    aniso = w.anisotropic_basis
    if aniso:
        f = q.pullback(exact.from_columns(aniso))
        assert not witt.is_isotropic(f)


def test_witt_index_examples():
    assert witt.witt_index(Q(2, c01=1)) == 1
    assert witt.witt_index(QuadraticForm.diagonal([1, 1])) == 0
    assert witt.witt_index(Q(4, c01=1, c23=1)) == 2


@settings(max_examples=40, deadline=None)
@given(forms())
def test_witt_index_matches_bruteforce(q):
    assert witt.witt_index(q) == witt_index_bruteforce(q, 8)


def test_avoid_subspaces_examples():
    q = Q(3, c01=1, c22=-1)
    assert witt.avoid_subspaces(q, [[(1, 0, 0)]]) == (1, 1, 1)
    assert witt.avoid_subspaces(q, []) == (1, 0, 0)
    q4 = Q(4, c01=1, c22=-1, c33=-1)
    x = witt.avoid_subspaces(q4, [[(1, 0, 0, 0)], [(0, 1, 0, 0), (0, 0, 1, 0)]])
    assert x[2] != 0 and eval_q(q4, x) == 0
    with pytest.raises(DomainError):
        witt.avoid_subspaces(Q(4, c01=1, c23=1), [])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4).map(tuple), min_size=1, max_size=4))
def test_avoid_random_lines(lines):
    q = Q(4, c01=1, c22=-2, c33=-3)
    subs = [[l] for l in lines if any(l)]
    x = witt.avoid_subspaces(q, subs)
    assert eval_q(q, x) == 0
    assert not any(exact.in_span(x, s) for s in subs)


def test_parameter_sweep_order():
    assert list(witt.parameter_sweep(1, 2)) == [(0,), (1,), (-1,), (2,), (-2,)]
    assert list(witt.parameter_sweep(2, 1))[:3] == [(0, 0), (1, 0), (-1, 0)]
