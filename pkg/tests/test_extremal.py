import pytest

from qd import canonical, exact, extremal, spectral
from qd.errors import DomainError, DigitBudgetExceeded
from qd.qform import QuadraticForm, eval_b, eval_q
from conftest import hyperbolic


def test_seed_examples():
    red = canonical.reduce_canonical(hyperbolic(2))
    pts, _ = extremal.initial_points(red, ell=5)
    assert pts == [(2, 1, 1), (1, 1, 0), (26, 1, 5)]
    red = canonical.reduce_canonical(QuadraticForm.diagonal([1, -2, 0]))
    pts, _ = extremal.initial_points(red, B=10)
    assert pts[0] == (1, 0, 1)
    assert pts[1:] == [(3, 2, 0), (17, 12, 0)]


def test_first_step_and_det(ref_seq):
    assert ref_seq.points[3] == (466, 17, 89)
    assert ref_seq.bvals[2][2] == 18
    assert {abs(d) for d in extremal.window_dets(ref_seq)} == {20}


def test_exact_invariants(ref_seq):
    n = ref_seq.n
    for i, x in enumerate(ref_seq.points):
        assert eval_q(ref_seq.form, x) == 1
        for j in range(1, min(i, n) + 1):
            assert ref_seq.bvals[i][j] == eval_b(ref_seq.form, ref_seq.points[i - j], x)
    for i in range(n, len(ref_seq.points) - 1):
        assert ref_seq.bvals[i + 1][1] == ref_seq.bvals[i][n]


def test_m_table():
    for n in (2, 3, 5):
        m = extremal.m_table(n, 30)
        assert extremal.check_m_table(m, n)
        for i in range(n + 1, 31):
            assert m[i][1] == m[i - 1][n]


def test_growth_and_wedge_ratios(ref_seq):
    rho2 = float(spectral.rho(2).mid())
    gr = extremal.growth_ratios(ref_seq)
    assert all(abs(g - rho2) <= 0.02 for g in gr[12:])
    diag = extremal.diagnostics(ref_seq)
    wr = [float(d.wedge_ratio) for d in diag[2:-1]]
    assert max(wr) / min(wr) < 10


def test_limit_point(ref_seq):
    short = extremal.build(canonical.reduce_canonical(hyperbolic(2)), 8, ell=5)
    xi = extremal.limit_point(short)
    d = exact.proj_dist(short.points[9], short.points[10])
    assert xi.radius <= 3 * d.hi
    xi = extremal.limit_point(ref_seq)
    vals = [float(xi.D(x) * exact.norm(x)) for x in ref_seq.points[3:-2]]
    assert max(vals) / min(vals) < 10
    from qd.qform import eval_q_interval
    assert eval_q_interval(ref_seq.form, xi.xi()).contains(0)


def test_limit_point_needs_points():
    seq = extremal.build(canonical.reduce_canonical(hyperbolic(2)), 1, ell=5)
    with pytest.raises(DomainError):
        extremal.limit_point(seq)


def test_orbit(ref_xi, ref_seq):
    from qd.qform import eval_q_interval
    red = ref_seq.reduction
    assert extremal.orbit(red, ref_xi, 0) == [ref_xi]
    imgs = extremal.orbit(red, ref_xi, 4)
    for i, a in enumerate(imgs):
        assert eval_q_interval(ref_seq.form, a.xi()).contains(0)
        for b in imgs[i + 1:]:
            assert a.separated_from(b)


def test_psi_monitor_bounded(ref_seq, ref_xi):
    w = extremal.psi_monitor(ref_seq, ref_xi)
    assert all(v < 100 for v in w.values())


def test_digit_budget():
    red = canonical.reduce_canonical(hyperbolic(2))
    with pytest.raises(DigitBudgetExceeded):
        extremal.build(red, 20, ell=5, digit_budget=100)


def test_n3_sequence():
    seq = extremal.build(canonical.reduce_canonical(hyperbolic(3)), 10, ell=5)
    assert len({abs(d) for d in extremal.window_dets(seq)}) == 1


SPLIT4 = QuadraticForm(4, {(0, 1): 1, (2, 3): 1})


def test_chain_examples():
    chain = extremal.isotropic_chain(SPLIT4, 2)
    assert chain[0] == (1, 0, 0, 0)
    assert eval_q(SPLIT4, chain[1]) == 0 and eval_b(SPLIT4, chain[0], chain[1]) == 0
    assert not exact.in_span(chain[1], [chain[0]])


def test_chain_conditions():
    chain = extremal.isotropic_chain(SPLIT4, 8)
    assert extremal.check_chain(SPLIT4, chain) is None
    for a, b in zip(chain, chain[1:]):
        assert exact.norm_sq(b) > exact.norm_sq(a)
    d = [exact.proj_dist(a, b) for a, b in zip(chain, chain[1:])]
    for a, b in zip(d, d[1:]):
        assert (b * 3).hi <= a.lo


def test_chain_rejects_low_index():
    with pytest.raises(DomainError):
        extremal.isotropic_chain(hyperbolic(3), 3)


def test_chain_with_phi_runs_out_of_digits():
    # the phi condition needs tower-sized shifts after a few steps
    with pytest.raises(DigitBudgetExceeded):
        extremal.isotropic_chain(SPLIT4, 10, phi=extremal.phi_log)
