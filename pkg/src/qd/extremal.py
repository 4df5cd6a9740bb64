"""Extremal sequences on canonical quadrics and isotropic chains.

The sequence satisfies x_{i+1} = b(x_{i-n}, x_i) x_i - x_{i-n}, i.e.
x_{i+1} = psi(x_i, x_{i-n}) because q(x_i) = 1.  Coordinates grow doubly
exponentially, so everything is kept as exact integers and real quantities
are only formed as intervals at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from . import exact
from .canonical import CanonicalReduction, Kind, automorphism_generator
from .errors import DigitBudgetExceeded, DomainError, NotFound, SeedCheckFailed
from .exact import DEFAULT_PRECISION, IntervalReal, _ctx
from .limit import LimitPoint, tail_radius
from .pell import pell_fundamental, pell_solutions, trinomial_solve
from .qform import QuadraticForm, eval_b, eval_q, kernel, psi
from .witt import shell, witt_decompose

DEFAULT_C0 = 64
DEFAULT_DIGIT_BUDGET = 2_000_000


def _check_digits(x, budget):
    bits = max(abs(c).bit_length() for c in x)
    if bits * math.log10(2) > budget:
        raise DigitBudgetExceeded(f"coordinate with ~{int(bits * math.log10(2))} digits exceeds the budget of {budget}")


# ------------------------------------------------------------------ seeds

def _traces(form, pts, i, n):
    """(b_i^{(j)}, y_i^{(j)}) for j = 0..min(n, i) by direct evaluation."""
    x = pts[i]
    bs, ys = [], []
    for j in range(min(n, i) + 1):
        bs.append(eval_b(form, pts[i - j], x))
        ys.append(exact.wedge(pts[i - j], x))
    return bs, ys


def default_B(form, pts, n, C0=DEFAULT_C0):
    """(8 C_n)^5 with C_n = max{C0, B_{n-1}, X_{n-1}, Y_{n-1}} from x_0..x_{n-1}."""
    big = C0
    for i in range(n):
        bs, ys = _traces(form, pts, i, n)
        big = max(big, max(abs(b) for b in bs))
        big = max(big, exact.isqrt_ceil(exact.norm_sq(pts[i])))
        for y in ys[1:]:
            big = max(big, exact.isqrt_ceil(exact.norm_sq(y)))
    return (8 * big) ** 5


def _unit(dim, i, c=1):
    v = [0] * dim
    v[i] = c
    return v


def initial_points(red: CanonicalReduction, B=None, ell=None, C0=DEFAULT_C0):
    """Seed x_0..x_n for the canonical form of red.  Returns (points, B).

    Hyperbolic: ell may be given directly (then B = |a_2| ell^2).
    Diag: x_n is the first Pell point past the fundamental one with second
    coordinate >= B (ell acts as B).
    """
    form = red.form()
    dim = red.dim
    n = dim - 1
    pts = []
    if red.kind is Kind.DIAG:
        a = red.coeffs
        for i in range(n - 1):
            k, l, m = trinomial_solve(a[0], a[i + 1])
            v = _unit(dim, 0, k)
            v[1] = l
            v[i + 2] = m
            pts.append(tuple(v))
        u1, v1 = pell_fundamental(a[0])
        pts.append(tuple([u1, v1] + [0] * (dim - 2)))
        if B is None:
            B = ell if ell is not None else default_B(form, pts, n, C0)
        k = 2
        while True:
            u, v = pell_solutions(a[0], k)[-1]
            if v >= B and v != v1:
                break
            k += 1
        pts.append(tuple([u, v] + [0] * (dim - 2)))
    else:
        a = red.coeffs
        if a[0] == 0:
            raise SeedCheckFailed("hyperbolic seed needs a_2 != 0")
        for i in range(n - 1):
            v = [a[i] + 1, 1] + [0] * (dim - 2)
            v[i + 2] = 1
            pts.append(tuple(v))
        pts.append(tuple([1, 1] + [0] * (dim - 2)))
        if ell is None:
            if B is None:
                B = default_B(form, pts, n, C0)
            ell = max(1, exact.isqrt_ceil(-(-B // abs(a[0]))))
        elif B is None:
            B = abs(a[0]) * ell * ell
        pts.append(tuple([a[0] * ell * ell + 1, 1, ell] + [0] * (dim - 3)))
    check_seed(form, pts, B, C0)
    return pts, B


def check_seed(form, pts, B, C0=DEFAULT_C0):
    n = len(pts) - 1
    for i, x in enumerate(pts):
        if eval_q(form, x) != 1:
            raise SeedCheckFailed(f"q(x_{i}) = {eval_q(form, x)} != 1")
    d = exact.det(pts)
    if d == 0:
        raise SeedCheckFailed("seed points are linearly dependent")
    lo, hi = Fraction(B, C0), Fraction(B * C0)
    xn = pts[n]
    checks = [("||x_n||^2", exact.norm_sq(xn), True), ("|det|", abs(d), False)]
    for i in range(1, n):
        checks.append((f"|b(x_{i},x_n)|", abs(eval_b(form, pts[i], xn)), False))
        checks.append((f"||x_{i}^x_n||^2", exact.wedge_norm_sq(pts[i], xn), True))
    for name, val, squared in checks:
        ok = lo * lo <= val <= hi * hi if squared else lo <= val <= hi
        if not ok:
            raise SeedCheckFailed(f"{name} = {val} outside [B/C0, C0 B] for B={B}, C0={C0}")
    return d


# --------------------------------------------------------------- sequence

@dataclass
class ExtremalSequence:
    form: QuadraticForm
    n: int
    points: list
    B: int
    reduction: CanonicalReduction | None = None
    C0: int = DEFAULT_C0
    digit_budget: int = DEFAULT_DIGIT_BUDGET
    bvals: list = field(default_factory=list)     # bvals[i][j] = b(x_{i-j}, x_i)
    wedges: list = field(default_factory=list)    # wedges[i][j] = x_{i-j} ∧ x_i
    det: int = 0

    @property
    def seed(self):
        return self.points[: self.n + 1]

    def __len__(self):
        return len(self.points)

    def norm_sq(self, i):
        return exact.norm_sq(self.points[i])

    def wedge_norm_sq(self, i, j):
        return exact.norm_sq(self.wedges[i][j])

    def log_height(self, i):
        return 0.5 * math.log(self.norm_sq(i))


def build(red, steps=0, B=None, ell=None, C0=DEFAULT_C0, digit_budget=DEFAULT_DIGIT_BUDGET):
    pts, B = initial_points(red, B, ell, C0)
    form = red.form()
    n = red.dim - 1
    seq = ExtremalSequence(form, n, list(pts), B, red, C0, digit_budget)
    for i in range(len(pts)):
        bs, ys = _traces(form, pts, i, n)
        seq.bvals.append(bs)
        seq.wedges.append(ys)
    seq.det = exact.det(pts)
    return extend(seq, steps)


def extend(seq: ExtremalSequence, steps: int):
    """Append points by the recurrence; traces are checked against their recursions."""
    n, form = seq.n, seq.form
    for _ in range(steps):
        i = len(seq.points) - 1
        if i < n:
            raise DomainError("sequence shorter than its seed")
        x, y = seq.points[i], seq.points[i - n]
        c = seq.bvals[i][n]
        new = tuple(c * a - b for a, b in zip(x, y))
        _check_digits(new, seq.digit_budget)
        if new != psi(form, x, y):
            raise AssertionError("recurrence disagrees with psi")
        seq.points.append(new)
        bs, ys = _traces(form, seq.points, i + 1, n)
        # interlocked recursions for the traces
        for j in range(1, n + 1):
            want_b = c * seq.bvals[i][j - 1] - seq.bvals[i + 1 - j][n + 1 - j]
            want_y = tuple(c * u + v for u, v in zip(seq.wedges[i][j - 1], seq.wedges[i + 1 - j][n + 1 - j]))
            if want_b != bs[j] or want_y != ys[j]:
                raise AssertionError(f"trace recursion fails at i={i + 1}, j={j}")
        if eval_q(form, new) != 1:
            raise AssertionError("q(x) != 1 along the sequence")
        seq.bvals.append(bs)
        seq.wedges.append(ys)
    return seq


def window_dets(seq):
    n = seq.n
    return [exact.det(seq.points[i - n: i + 1]) for i in range(n, len(seq.points))]


# ------------------------------------------------------------ m(i, j)

def m_table(n, imax):
    """m[i][j] for 0 <= i <= imax, 1 <= j <= n (index 0 of each row unused)."""
    m = []
    for i in range(imax + 1):
        row = [0] * (n + 1)
        if i == n:
            row[1:] = [1] * n
        elif i > n:
            prev = m[i - 1]
            row[1] = prev[n]
            for j in range(2, n + 1):
                row[j] = prev[n] + prev[j - 1]
        m.append(row)
    return m


def check_m_table(m, n):
    """Exact check of monotonicity in j and 3/2 m(i,n) <= m(i+1,n) <= 2 m(i,n)."""
    for i in range(n, len(m)):
        row = m[i]
        if any(row[j] > row[j + 1] for j in range(1, n)):
            return False
        if i + 1 < len(m):
            a, b = row[n], m[i + 1][n]
            if not (3 * a <= 2 * b and b <= 2 * a):
                return False
    return True


# ---------------------------------------------------------- diagnostics

@dataclass
class IndexDiagnostics:
    index: int
    X: IntervalReal
    growth_ratio: float | None
    wedge_ratio: IntervalReal | None
    D_to_limit: IntervalReal | None


def diagnostics(seq, xi: LimitPoint | None = None, precision=DEFAULT_PRECISION):
    out = []
    pts = seq.points
    for i, x in enumerate(pts):
        X = exact.norm(x, precision)
        gr = wr = dl = None
        if i + 1 < len(pts):
            gr = seq.log_height(i + 1) / seq.log_height(i) if exact.norm_sq(x) > 1 else None
            w = exact.wedge_norm_sq(x, pts[i + 1])
            wr = IntervalReal.exact(Fraction(w * exact.norm_sq(x), exact.norm_sq(pts[i + 1])), precision).sqrt()
        if xi is not None:
            dl = xi.D(x, precision)
        out.append(IndexDiagnostics(i, X, gr, wr, dl))
    return out


def growth_ratios(seq):
    return [seq.log_height(i + 1) / seq.log_height(i) for i in range(len(seq.points) - 1)]


# ----------------------------------------------------------- limit point

def limit_point(seq, precision=DEFAULT_PRECISION, tolerance=None, safety=3):
    """Certified limit of [x_i], anchored at every point of the sequence.

    The radius at the last point comes from the geometric tail with the
    last measured contraction ratio; earlier anchors add the measured gaps.
    """
    pts = seq.points
    N = len(pts) - 1
    if N < seq.n + 2:
        raise DomainError("need at least n + 3 points for a limit point")
    while True:
        d = [exact.proj_dist(pts[k], pts[k + 1], precision) for k in range(N)]
        rN = tail_radius(d, safety)
        if rN is None:
            raise DomainError("tail not contracting; extend the sequence")
        if tolerance is None or d[-1].width() <= tolerance * d[-1].hi or precision >= exact.MAX_PRECISION:
            break
        precision *= 2
    up = _ctx(precision, True)
    radii = [mpfr(0)] * (N + 1)
    radii[N] = rN
    for k in range(N - 1, -1, -1):
        radii[k] = up.add(radii[k + 1], d[k].hi)
    return LimitPoint(list(zip(pts, radii)), precision)


def orbit(red, xi: LimitPoint, count):
    """[xi, T xi, ..., T^count xi] for the automorphism generator T of red."""
    t = automorphism_generator(red)
    out = [xi]
    for _ in range(count):
        out.append(out[-1].pushforward(t))
    return out


def psi_monitor(seq, xi, start=None, stop=None, precision=DEFAULT_PRECISION):
    """Largest observed ratios for the metrical estimates of psi.

    keys: "q" for |q(x)| / (||x|| L(x)), "L_psi" for
    L(z) / (||y|| L(x)^2 + ||x|| L(x) L(y)) and "norm_psi" for
    ||z|| / (||x||^2 L(y) + ||y|| L(x)^2 + ||x|| L(x) L(y)), z = psi(x, y).
    """
    n = seq.n
    pts = seq.points
    start = n if start is None else start
    stop = len(pts) - 3 if stop is None else stop
    worst = {"q": 0.0, "L_psi": 0.0, "norm_psi": 0.0}
    for i in range(start, stop):
        x, y, z = pts[i], pts[i - n], pts[i + 1]
        Lx, Ly, Lz = xi.L(x, precision), xi.L(y, precision), xi.L(z, precision)
        nx, ny, nz = exact.norm(x, precision), exact.norm(y, precision), exact.norm(z, precision)
        worst["q"] = max(worst["q"], float(abs(eval_q(seq.form, x)) / (nx * Lx)))
        worst["L_psi"] = max(worst["L_psi"], float(Lz / (ny * Lx * Lx + nx * Lx * Ly)))
        worst["norm_psi"] = max(worst["norm_psi"], float(nz / (nx * nx * Ly + ny * Lx * Lx + nx * Lx * Ly)))
    return worst


# -------------------------------------------------------- isotropic chains

def phi_log(X: IntervalReal):
    """phi(X) = log(3X) / X."""
    return (X * 3).log() / X


def _outside(x, q, kern, span_pts, perp_pts):
    if exact.in_span(x, kern):
        return False
    if exact.in_span(x, span_pts):
        return False
    if perp_pts and all(eval_b(q, x, w) == 0 for w in perp_pts):
        return False
    return True


def _saturate(rows, dim):
    """HNF basis of (Q-span of rows) ∩ Z^dim."""
    return exact.integer_kernel(exact.integer_kernel(rows, dim), dim)


def _complete(x, basis):
    """y with {x, y} a basis of the rank-2 lattice spanned by `basis` (x primitive in it)."""
    g1, g2 = basis
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            d = g1[i] * g2[j] - g1[j] * g2[i]
            if d:
                a = Fraction(x[i] * g2[j] - x[j] * g2[i], d)
                c = Fraction(g1[i] * x[j] - g1[j] * x[i], d)
                a, c = int(a), int(c)
                g, s, t = gmpy2.gcdext(a, c)
                if abs(g) != 1:
                    raise DomainError("point is not primitive in its plane lattice")
                e, f = -int(t) * int(g), int(s) * int(g)
                return tuple(e * u + f * v for u, v in zip(g1, g2))
    raise DomainError("degenerate plane basis")


def _next_zero(q, chain, kern, n, cap=40):
    """A zero x of q with b(x, x_k) = 0 meeting conditions (i), (iii), (iv).

    Zeros orthogonal to x_k are produced from the previous point u = x_{k-1}
    as psi(w, u) for w orthogonal to x_k.  When q has rank 4 modulo its
    radical those zeros fill two maximal isotropic subspaces and the new
    point is taken as a lattice complement of x_k in one of them.
    """
    k = len(chain)                        # chain holds x_1..x_k
    xk = chain[-1]
    j = max(1, k + 1 - n)
    span_pts = chain[j - 1:]
    perp_pts = chain[k + 1 - n:] if k + 1 >= n else []

    def ok(x):
        return (any(x) and eval_q(q, x) == 0 and eval_b(q, x, xk) == 0
                and _outside(x, q, kern, span_pts, perp_pts))

    if k == 1:
        for h in range(1, cap + 1):
            for x in shell(q.dim, h):
                if ok(x):
                    return x
        raise NotFound("no second chain point of small height")
    u = chain[-2]
    vb = exact.integer_kernel([exact.mat_vec(q.bilinear_matrix(), xk)], q.dim)
    rank_mod_k = q.dim - len(kern)
    if rank_mod_k == 4:
        w = next((b for b in vb if eval_b(q, b, u) != 0), None)
        if w is None:
            raise DomainError("previous point is orthogonal to the whole hyperplane")
        v = exact.normalize(psi(q, w, u))
        for gen in (v, u):
            plane = _saturate([xk, gen], q.dim)
            xt = _complete(xk, plane)
            for h in range(0, cap + 1):
                combos = [()] if not kern else ([tuple([0] * len(kern))] if h == 0 else shell(len(kern), h))
                for c in combos:
                    x = tuple(a + sum(ci * kv[r] for ci, kv in zip(c, kern)) for r, a in enumerate(xt))
                    if ok(x):
                        return exact.normalize(x)
                if not kern:
                    break
        raise NotFound("no admissible zero in either maximal isotropic subspace")
    for h in range(1, cap + 1):
        for c in shell(len(vb), h):
            w = tuple(sum(ci * b[r] for ci, b in zip(c, vb)) for r in range(q.dim))
            z = psi(q, w, u)
            if any(z):
                z = exact.normalize(z)
                if ok(z):
                    return z
    raise NotFound("parameter cap exhausted")


def _first_zero(q, kern, cap=40):
    for h in range(1, cap + 1):
        for x in shell(q.dim, h):
            if eval_q(q, x) == 0 and not exact.in_span(x, kern):
                return x
    raise NotFound("no zero outside the radical")


def _bits_needed(W, phi, budget_bits, precision):
    """Least t with X = 2^t meeting X phi(X) >= (3/2) sqrt(W)."""
    target = IntervalReal.exact(W, precision).sqrt() * Fraction(3, 2)

    def ok(t):
        X = IntervalReal.exact(2 ** t, precision)
        return (X * phi(X)).lo >= target.hi

    t = 1
    while not ok(t):
        t *= 2
        if t > 2 * budget_bits:
            return None
    lo, hi = t // 2, t
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class ChainStep:
    point: tuple
    shift: int
    W: int      # ||x~ ∧ x_k||^2, invariant under the shift


def isotropic_chain(q, steps, phi=None, digit_budget=DEFAULT_DIGIT_BUDGET,
                    precision=DEFAULT_PRECISION, log=None):
    """Chain x_1, x_2, ... of zeros with consecutive pairs spanning isotropic planes.

    Each new point is shifted by a multiple of its predecessor so that
    heights increase and consecutive distances contract by 1/3; with phi
    given they also fall below (2/3) X_{i-1}^{-1} phi(X_i).
    Returns the list of points (ChainStep records are passed to log).
    """
    if q.dim < 4 or witt_decompose(q).witt_index < 2:
        raise DomainError("isotropic chains need Witt index >= 2")
    n = q.dim - 1
    kern = kernel(q)
    budget_bits = int(digit_budget / math.log10(2))
    chain = [_first_zero(q, kern)]
    if steps <= 1:
        return chain[:steps]
    while len(chain) < steps:
        k = len(chain)
        xt = _next_zero(q, chain, kern, n)
        xk = chain[-1]
        W = exact.wedge_norm_sq(xt, xk)
        nk = exact.norm_sq(xk)
        need_sq = nk + 1                                   # (v)
        if k >= 2:
            dprev = exact.proj_dist(chain[-2], xk, precision)
            # sqrt(W) / (X_k X_{k+1}) <= dprev / 3
            thr = IntervalReal.exact(W, precision).sqrt() * 3 / (exact.norm(xk, precision) * dprev.lo)
            need_sq = max(need_sq, int(_ctx(precision, True).mul(thr.hi, thr.hi)) + 1)
            if phi is not None:
                t = _bits_needed(W, phi, budget_bits, precision)
                if t is None or t > budget_bits:
                    raise DigitBudgetExceeded(
                        f"step {k + 1}: phi condition needs more than {digit_budget} digits "
                        f"(||x~ ∧ x_k||^2 = {W})")
                need_sq = max(need_sq, 4 ** t)
        s = exact.dot(xt, xk)
        nt = exact.norm_sq(xt)
        # smallest m >= 1 with max over signs of ||xt ± m xk||^2 >= need_sq
        lo_m, hi_m = 0, 1
        while nt + 2 * hi_m * abs(s) + hi_m * hi_m * nk < need_sq:
            lo_m, hi_m = hi_m, hi_m * 2
        while hi_m - lo_m > 1:
            mid = (lo_m + hi_m) // 2
            if nt + 2 * mid * abs(s) + mid * mid * nk >= need_sq:
                hi_m = mid
            else:
                lo_m = mid
        m = hi_m
        chosen = None
        for tries in range(64):
            for b in (m + tries, -(m + tries)):
                x = tuple(a + b * c for a, c in zip(xt, xk))
                if exact.norm_sq(x) < need_sq:
                    continue
                if not _admissible(q, chain, x, kern, n, phi, precision):
                    continue
                chosen = (exact.normalize(x), b)
                break
            if chosen:
                break
        if chosen is None:
            raise NotFound(f"no admissible shift at step {k + 1}")
        _check_digits(chosen[0], digit_budget)
        chain.append(chosen[0])
        if log is not None:
            log(ChainStep(chosen[0], chosen[1], W))
    return chain


def _admissible(q, chain, x, kern, n, phi, precision):
    """Conditions (i)-(vi) for x as the next chain point."""
    k = len(chain)
    xk = chain[-1]
    if eval_q(q, x) or eval_b(q, x, xk):
        return False
    j = max(1, k + 1 - n)
    perp = chain[k + 1 - n:] if k + 1 >= n else []
    if not _outside(x, q, kern, chain[j - 1:], perp):
        return False
    if exact.norm_sq(x) <= exact.norm_sq(xk):
        return False
    if k >= 2:
        d = exact.proj_dist(x, xk, precision)
        dprev = exact.proj_dist(xk, chain[-2], precision)
        if not (d * 3).hi <= dprev.lo:
            return False
        if phi is not None:
            X, Xk = exact.norm(x, precision), exact.norm(xk, precision)
            bound = phi(X) * 2 / Xk
            if not (d * 3).hi <= bound.lo:
                return False
    return True


def check_chain(q, chain):
    """Exact conditions (i)-(iv) along a chain x_1..x_N; returns the first failing index or None."""
    n = q.dim - 1
    kern = kernel(q)
    for idx, x in enumerate(chain, start=1):
        if eval_q(q, x) != 0 or exact.in_span(x, kern):
            return idx
        if idx >= 2 and eval_b(q, x, chain[idx - 2]) != 0:
            return idx
        if idx >= 2:
            j = max(1, idx - n)
            if exact.in_span(x, chain[j - 1: idx - 1]):
                return idx
        if idx >= n:
            w = chain[idx - n: idx - 1]
            if w and all(eval_b(q, x, p) == 0 for p in w):
                return idx
    return None


def chain_limit(chain, precision=DEFAULT_PRECISION):
    """Limit point of a contracting chain: radius (1/2) dist(x_N, x_{N-1})."""
    d = exact.proj_dist(chain[-1], chain[-2], precision)
    return LimitPoint([(chain[-1], _ctx(precision, True).div(d.hi, 2))], precision)


def chain_checkpoints(chain, phi=phi_log, precision=DEFAULT_PRECISION):
    """[(i, X_{i-1} dist(xi, [x_{i-1}]), phi(X_i))] for i = 2..N-1 (1-based)."""
    xi = chain_limit(chain, precision)
    out = []
    for i in range(2, len(chain)):
        prev, cur = chain[i - 2], chain[i - 1]
        val = xi.D(prev, precision)
        out.append((i, val, phi(exact.norm(cur, precision))))
    return out
