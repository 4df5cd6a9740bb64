"""The growth rate rho_n, its Pisot property, and the log-trace dynamics.

rho_n is the root in (1, 2) of p(x) = x^n - x^(n-1) - ... - 1.  Along an
extremal sequence the vector

    v_i = (log|b_i^(1)|, ..., log|b_i^(n)|, log||y_i^(1)||, ..., log||y_i^(n)||, log X_i)

is almost mapped to v_{i+1} by an integer matrix T whose dominant
eigenvalue is rho_n, so v_i stays within bounded distance of alpha rho^i v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath
import sympy
from gmpy2 import mpfr

from . import exact
from .errors import DomainError
from .exact import DEFAULT_PRECISION, IntervalReal


def p_coeffs(n):
    """Coefficients of x^n - x^(n-1) - ... - 1, highest degree first."""
    return [1] + [-1] * n


def _horner(coeffs, x):
    v = 0
    for c in coeffs:
        v = v * x + c
    return v


def p_eval(n, x):
    return _horner(p_coeffs(n), x)


def h_eval(n, x):
    """h(x) = (x - 1) p(x) = x^(n+1) - 2 x^n + 1."""
    return x ** (n + 1) - 2 * x ** n + 1


def rho(n, tol=Fraction(1, 10**15), precision=None):
    """Enclosure of rho_n of width <= tol, by bisection on exact dyadic rationals."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if n == 1:
        return IntervalReal.exact(1, precision or DEFAULT_PRECISION)
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo, hi = Fraction(1), Fraction(2)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if p_eval(n, mid) < 0:
            lo = mid
        else:
            hi = mid
    assert p_eval(n, lo) < 0 < p_eval(n, hi)
    bits = max(DEFAULT_PRECISION, lo.denominator.bit_length() + 8, precision or 0)
    return IntervalReal(mpfr(gmpy2.mpq(lo.numerator, lo.denominator), bits),
                        mpfr(gmpy2.mpq(hi.numerator, hi.denominator), bits), bits)


@dataclass(frozen=True)
class PisotReport:
    n: int
    rho: IntervalReal
    conjugate_moduli: list
    conjugate_radii: list
    is_pisot: bool


def pisot_check(n, dps=40):
    """Roots of p by simultaneous iteration, each with an a-posteriori radius.

    A disc of radius n |p(z)/p'(z)| about z holds a root of p; the discs are
    checked to be pairwise disjoint, so they isolate all n roots.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    with mpmath.workdps(dps):
        coeffs = p_coeffs(n)
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * dps)
        dp = [c * (n - k) for k, c in enumerate(coeffs[:-1])]
        radii = []
        for z in roots:
            d = mpmath.polyval(dp, z)
            if d == 0:
                raise DomainError("root finder returned a multiple root")
            radii.append(n * abs(mpmath.polyval(coeffs, z) / d))
        for i in range(n):
            for j in range(i + 1, n):
                if abs(roots[i] - roots[j]) <= radii[i] + radii[j]:
                    raise DomainError("root discs overlap; raise dps")
        r = rho(n, Fraction(1, 10**30))
        rmid = mpmath.mpf(str(r.mid()))
        k = min(range(n), key=lambda i: abs(roots[i] - rmid))
        if abs(roots[k] - rmid) > radii[k] + mpmath.mpf(10) ** -25:
            raise DomainError("rho not among the computed roots")
        mods = [float(abs(z)) for i, z in enumerate(roots) if i != k]
        rads = [float(radii[i]) for i in range(n) if i != k]
        bound = 1 - 1e-9 if n <= 12 else 1.0
        ok = all(m + e < bound for m, e in zip(mods, rads))
    return PisotReport(n, r, mods, rads, ok)


def identity_residuals(n, precision=256):
    """|sum_{k<=n} rho^-k - 1| and |2 - rho - rho^-n| as interval upper bounds."""
    r = rho(n, Fraction(1, 2 ** (precision - 16)), precision)
    inv = IntervalReal.exact(1, r.precision) / r
    s = IntervalReal.exact(0, r.precision)
    t = IntervalReal.exact(1, r.precision)
    for _ in range(n):
        t = t * inv
        s = s + t
    one = IntervalReal.exact(1, r.precision)
    two = IntervalReal.exact(2, r.precision)
    return float(abs(s - one).hi), float(abs(two - r - t).hi)


# ---------------------------------------------------------- transfer operator

def transfer_operator(n):
    """(2n+1) x (2n+1) integer matrix of
    (x, y, z) -> (x_n, x_1 + x_n, ..., x_{n-1} + x_n, y_n, y_1 + x_n, ..., y_{n-1} + x_n, z + x_n)."""
    if n < 2:
        raise DomainError("n must be at least 2")
    N = 2 * n + 1
    T = [[0] * N for _ in range(N)]
    xn = n - 1
    T[0][xn] = 1
    for j in range(1, n):
        T[j][j - 1] += 1
        T[j][xn] += 1
    T[n][2 * n - 1] = 1
    for j in range(1, n):
        T[n + j][n + j - 1] += 1
        T[n + j][xn] += 1
    T[2 * n][2 * n] = 1
    T[2 * n][xn] += 1
    return T


_x = sympy.Symbol("x")


def expected_charpoly(n):
    p = _x ** n - sum(_x ** k for k in range(n))
    return sympy.expand(p * (_x ** n - 1) * (_x - 1))


def charpoly(T):
    return sympy.Matrix(T).charpoly(_x).as_expr()


def _mat_poly(T, coeffs):
    """Horner evaluation of an integer polynomial at an integer matrix."""
    N = len(T)
    R = [[0] * N for _ in range(N)]
    for c in coeffs:
        R = [list(row) for row in exact.mat_mul(R, T)]
        for i in range(N):
            R[i][i] += c
    return R


def check_transfer(n):
    """Exact checks: char poly = p q r, p q annihilates T, eigenvalue 1 has a 2-dim eigenspace."""
    T = transfer_operator(n)
    cp_ok = sympy.expand(charpoly(T) - expected_charpoly(n)) == 0
    pq = sympy.Poly(sympy.expand((_x ** n - sum(_x ** k for k in range(n))) * (_x ** n - 1)), _x)
    Z = _mat_poly(T, [int(c) for c in pq.all_coeffs()])
    annihilates = all(v == 0 for row in Z for v in row)
    TI = [[T[i][j] - (i == j) for j in range(len(T))] for i in range(len(T))]
    eig1 = len(T) - exact.rank(TI)
    return {"charpoly": cp_ok, "minpoly_pq": annihilates, "eigenspace_1_dim": eig1}


def eigenvector(n, precision=DEFAULT_PRECISION):
    """(1 - rho^-1, ..., 1 - rho^-n, same again, 1) as mpfr midpoints."""
    r = rho(n, Fraction(1, 2 ** precision), precision)
    mid = r.mid()
    head = [1 - mid ** -k for k in range(1, n + 1)]
    return head + head + [mpfr(1, precision)], mid


def eigen_residual(n, precision=DEFAULT_PRECISION):
    """||T v - rho v|| / ||v|| for the closed-form v."""
    T = transfer_operator(n)
    v, r = eigenvector(n, precision)
    res = [sum(T[i][j] * v[j] for j in range(len(v))) - r * v[i] for i in range(len(v))]
    return float(gmpy2.sqrt(sum(c * c for c in res)) / gmpy2.sqrt(sum(c * c for c in v)))


# ------------------------------------------------------------------ fit

@dataclass(frozen=True)
class TransferFit:
    alpha: float
    rho: float
    operator_dim: int
    indices: list          # i for which v_i is defined
    deviations: dict       # i -> ||v_i - alpha rho^i v||
    step_residuals: dict   # i -> ||v_{i+1} - T v_i|| (mpfr, may be far below float range)
    b_log_ratios: dict     # (i, j) -> log|b_i^(j)| / (alpha (rho^i - rho^(i-j)))


def _log_abs(v, precision):
    return gmpy2.log(mpfr(abs(v), precision))


def _half_log_ratio(num, den, precision):
    """(1/2) log(num/den) for positive integers, accurate when the ratio is near 1."""
    with gmpy2.context(precision=precision):
        return gmpy2.log1p(mpfr(gmpy2.mpq(num - den, den))) / 2


def _log_ratio(num, den, precision):
    with gmpy2.context(precision=precision):
        return gmpy2.log1p(mpfr(gmpy2.mpq(num - den, den)))


def log_vector(seq, i, precision=DEFAULT_PRECISION):
    n = seq.n
    b = [_log_abs(seq.bvals[i][j], precision) for j in range(1, n + 1)]
    y = [gmpy2.log(mpfr(exact.norm_sq(seq.wedges[i][j]), precision)) / 2 for j in range(1, n + 1)]
    z = gmpy2.log(mpfr(seq.norm_sq(i), precision)) / 2
    return b + y + [z]


def step_residual(seq, i, precision=DEFAULT_PRECISION):
    """||v_{i+1} - T v_i||, with every component formed as a log of an exact ratio."""
    n = seq.n
    bn = seq.bvals[i][n]
    comps = []
    # x block: component 1 vanishes identically, then log|b_{i+1}^(j)| - log|b_i^(n)| - log|b_i^(j-1)|
    comps.append(_log_ratio(abs(seq.bvals[i + 1][1]), abs(bn), precision))
    for j in range(2, n + 1):
        comps.append(_log_ratio(abs(seq.bvals[i + 1][j]), abs(bn * seq.bvals[i][j - 1]), precision))
    comps.append(_half_log_ratio(exact.norm_sq(seq.wedges[i + 1][1]), exact.norm_sq(seq.wedges[i][n]), precision))
    for j in range(2, n + 1):
        comps.append(_half_log_ratio(exact.norm_sq(seq.wedges[i + 1][j]),
                                     bn * bn * exact.norm_sq(seq.wedges[i][j - 1]), precision))
    comps.append(_half_log_ratio(seq.norm_sq(i + 1), bn * bn * seq.norm_sq(i), precision))
    with gmpy2.context(precision=precision):
        return gmpy2.sqrt(sum(c * c for c in comps))


def appendix_fit(seq, precision=DEFAULT_PRECISION):
    """Fit v_i ~ alpha rho^i v along an extremal sequence.

    alpha is the least-squares solution of log X_i = alpha rho^i over the
    last half of the indices.
    """
    n = seq.n
    if len(seq) < n + 5:
        raise DomainError(f"need at least {n + 5} points, got {len(seq)}")
    idx = list(range(n, len(seq)))
    r_iv = rho(n, Fraction(1, 2 ** precision), precision)
    r = r_iv.mid()
    v, _ = eigenvector(n, precision)
    vecs = {i: log_vector(seq, i, precision) for i in idx}
    tail = idx[len(idx) // 2:]
    with gmpy2.context(precision=precision):
        num = sum(vecs[i][-1] * r ** i for i in tail)
        den = sum(r ** (2 * i) for i in tail)
        alpha = num / den
        devs = {}
        for i in idx:
            s = alpha * r ** i
            devs[i] = float(gmpy2.sqrt(sum((a - s * c) ** 2 for a, c in zip(vecs[i], v))))
        ratios = {}
        for i in idx:
            for j in range(1, n + 1):
                pred = alpha * (r ** i - r ** (i - j))
                ratios[(i, j)] = float(vecs[i][j - 1] / pred)
    steps = {i: step_residual(seq, i, precision) for i in idx[:-1]}
    return TransferFit(float(alpha), float(r), 2 * n + 1, idx, devs, steps, ratios)


def fit_summary(fit: TransferFit, start=5):
    """Checks used by the acceptance suite: monotone step residuals and bounded deviations."""
    after = [i for i in fit.indices if i >= start]
    steps = [fit.step_residuals[i] for i in after if i in fit.step_residuals]
    monotone = all(b <= a for a, b in zip(steps, steps[1:]))
    base = fit.deviations[start] if start in fit.deviations else math.nan
    worst = max(fit.deviations[i] for i in after)
    return {
        "alpha": fit.alpha,
        "steps_non_increasing": monotone,
        "deviation_at_start": base,
        "max_deviation": worst,
        "deviation_ratio": worst / base if base else math.inf,
        "log10_step_residuals": {i: float(gmpy2.log10(s)) if s > 0 else -math.inf
                                 for i, s in fit.step_residuals.items()},
    }
