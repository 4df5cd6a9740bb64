"""Isotropy over Q, hyperbolic splitting and Witt decomposition."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from sympy import isprime
from sympy.ntheory import pollard_rho

from . import exact
from .errors import DomainError, FactorizationNeeded, NotFound
from .qform import QuadraticForm, diagonalize, eval_b, eval_q, kernel

INF = "inf"
TRIAL_LIMIT = 10**6
DEFAULT_MAX_POINTS = 10**5


# ---------------------------------------------------------- factorization

def factor(n, rho_steps=20000):
    """Prime factorization {p: e} of |n| (trial division, then Pollard rho)."""
    n = abs(n)
    if n == 0:
        raise DomainError("cannot factor 0")
    out = {}
    d = 2
    while d * d <= n and d <= TRIAL_LIMIT:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if isprime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = exact.isqrt_ceil(m)
        if r * r == m:
            stack += [r, r]
            continue
        f = None
        for seed in range(2, 6):
            f = pollard_rho(m, s=seed, max_steps=rho_steps)
            if f:
                break
        if not f:
            raise FactorizationNeeded(f"could not factor {m}")
        stack += [f, m // f]
    return dict(sorted(out.items()))


def squarefree_part(a):
    """Signed squarefree integer in the square class of the nonzero rational a."""
    a = Fraction(a)
    if a == 0:
        raise DomainError("zero has no square class")
    n = a.numerator * a.denominator
    s = 1 if n > 0 else -1
    for p, e in factor(n).items():
        if e % 2:
            s *= p
    return s


def _val(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def _legendre(u, p):
    r = pow(u % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _as_int(a):
    a = Fraction(a)
    if a == 0:
        raise DomainError("Hilbert symbol needs nonzero arguments")
    return a.numerator * a.denominator


def hilbert_symbol(a, b, p):
    """(a, b)_p for nonzero rationals; p is a prime or INF."""
    a, b = _as_int(a), _as_int(b)
    if p == INF:
        return -1 if a < 0 and b < 0 else 1
    alpha, u = _val(a, p)
    beta, v = _val(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    s = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        s *= _legendre(u, p)
    if alpha % 2:
        s *= _legendre(v, p)
    return s


def is_local_square(d, p):
    d = _as_int(d)
    if p == INF:
        return d > 0
    v, u = _val(d, p)
    if v % 2:
        return False
    if p == 2:
        return u % 8 == 1
    return _legendre(u, p) == 1


def _local_isotropic(a, p):
    r = len(a)
    if r < 2:
        return False
    if p == INF:
        return any(x > 0 for x in a) and any(x < 0 for x in a)
    if r >= 5:
        return True
    d = math.prod(a)
    if r == 2:
        return is_local_square(-d, p)
    eps = 1
    for i in range(r):
        for j in range(i + 1, r):
            eps *= hilbert_symbol(a[i], a[j], p)
    if r == 3:
        return hilbert_symbol(-1, -d, p) == eps
    return (not is_local_square(d, p)) or eps == hilbert_symbol(-1, -1, p)


def is_isotropic_diagonal(diag):
    """Hasse-Minkowski test for sum a_i x_i^2 with nonzero rational a_i."""
    a = [squarefree_part(x) for x in diag if x != 0]
    r = len(a)
    if r < 2:
        return False
    if r == 2:
        return exact.is_square(-a[0] * a[1])
    if not _local_isotropic(a, INF):
        return False
    if r >= 5:
        return True
    primes = {2}
    for x in a:
        primes.update(factor(x))
    return all(_local_isotropic(a, p) for p in sorted(primes))


def local_isotropy_report(q):
    """{place: bool} for the nondegenerate part of q at the relevant places."""
    a = [squarefree_part(x) for x in diagonalize(q)[1] if x != 0]
    primes = {2}
    for x in a:
        primes.update(factor(x))
    out = {INF: _local_isotropic(a, INF)}
    for p in sorted(primes):
        out[p] = _local_isotropic(a, p)
    return out


def is_isotropic(q):
    """True iff q has a nontrivial rational zero (a radical vector counts)."""
    _, d = diagonalize(q)
    if any(v == 0 for v in d):
        return True
    return is_isotropic_diagonal(d)


# --------------------------------------------------------- witness search

def colex_key(x):
    """Order used for witnesses: last coordinate most significant, |.| first."""
    return tuple((abs(c), c < 0) for c in reversed(x))


def shell(dim, h):
    """Primitive vectors of max-norm h with first nonzero entry positive."""
    if h == 0:
        return []
    out = []
    for x in itertools.product(range(-h, h + 1), repeat=dim):
        if max(abs(c) for c in x) != h:
            continue
        first = next(c for c in x if c)
        if first < 0 or exact.content(x) != 1:
            continue
        out.append(x)
    out.sort(key=colex_key)
    return out


def isotropic_vector(q, height_cap=None, max_points=DEFAULT_MAX_POINTS):
    """Smallest-height primitive zero of q by shell enumeration.

    Within the first shell containing zeros the colex-smallest is returned.
    Raises NotFound once the height cap or point budget is exhausted.
    """
    seen = 0
    h = 1
    while height_cap is None or h <= height_cap:
        pts = shell(q.dim, h)
        zeros = [x for x in pts if eval_q(q, x) == 0]
        if zeros:
            return zeros[0]
        seen += len(pts)
        if seen > max_points:
            break
        h += 1
    raise NotFound(f"no zero of height <= {h} (searched {seen} points)")


# ------------------------------------------------------ hyperbolic split

def hyperbolic_split(q, u):
    """Hyperbolic pair (u, v) through the isotropic vector u, and the complement.

    Returns ((u, v), complement_form, embedding) where embedding is an integer
    matrix whose columns span {x : b(x,u) = b(x,v) = 0} and complement_form
    is q restricted along that embedding.
    """
    u = tuple(u)
    if not any(u) or eval_q(q, u) != 0:
        raise DomainError("u must be a nonzero zero of q")
    w = None
    for i in range(q.dim):
        e = tuple(int(i == j) for j in range(q.dim))
        if eval_b(q, u, e) != 0:
            w = e
            break
    if w is None:
        raise DomainError("u lies in the radical of q")
    buw = eval_b(q, u, w)
    v = exact.normalize(tuple(buw * wi - eval_q(q, w) * ui for wi, ui in zip(w, u)))
    bmat = q.bilinear_matrix()
    rows = [exact.mat_vec(bmat, u), exact.mat_vec(bmat, v)]
    comp = exact.integer_kernel(rows, q.dim)
    emb = exact.from_columns(comp) if comp else tuple(() for _ in range(q.dim))
    form = q.pullback(emb) if comp else QuadraticForm(0, {})
    return (u, v), form, emb


@dataclass(frozen=True)
class WittDecomposition:
    kernel_basis: tuple
    hyperbolic_pairs: tuple
    anisotropic_basis: tuple

    @property
    def witt_index(self):
        return len(self.hyperbolic_pairs)

    def all_vectors(self):
        out = list(self.kernel_basis)
        for u, v in self.hyperbolic_pairs:
            out += [u, v]
        return out + list(self.anisotropic_basis)


def _apply(cols, y):
    return tuple(sum(c[r] * yi for c, yi in zip(cols, y)) for r in range(len(cols[0])))


def witt_decompose(q, height_cap=None, max_points=DEFAULT_MAX_POINTS):
    """V = ker ⊥ H_1 ⊥ ... ⊥ H_m ⊥ W with integral bases in the input coordinates."""
    kern = kernel(q)
    cols = exact.complete_basis(kern, q.dim)
    f = q.pullback(exact.from_columns(cols)) if cols else QuadraticForm(0, {})
    pairs = []
    while f.dim >= 2 and is_isotropic(f):
        z = isotropic_vector(f, height_cap, max_points)
        (u, v), f2, emb = hyperbolic_split(f, z)
        pairs.append((exact.normalize(_apply(cols, u)), exact.normalize(_apply(cols, v))))
        sub = exact.columns(emb) if f2.dim else []
        cols = [_apply(cols, c) for c in sub]
        f = f2
    aniso = tuple(exact.normalize(c) for c in cols)
    return WittDecomposition(tuple(kern), tuple(pairs), aniso)


def witt_index(q, **kw):
    return witt_decompose(q, **kw).witt_index


# --------------------------------------------------------- avoidance sweep

def _sweep_rank(c):
    return 2 * c - 1 if c > 0 else -2 * c


def parameter_sweep(k, cap):
    """Integer k-tuples by max-norm shell, colex in the order 0, 1, -1, 2, -2, ..."""
    if k == 0:
        yield ()
        return
    for h in range(cap + 1):
        tuples = [t for t in itertools.product(range(-h, h + 1), repeat=k)
                  if max(abs(c) for c in t) == h]
        tuples.sort(key=lambda t: tuple(_sweep_rank(c) for c in reversed(t)))
        yield from tuples


def hyperbolic_shape_coeffs(q):
    """(a_2, ..., a_n) when q = t0 t1 - sum a_i t_i^2 with some a_i != 0, else None."""
    if q.dim < 3 or q.coeff(0, 1) != 1 or q.coeff(0, 0) or q.coeff(1, 1):
        return None
    for (i, j) in q.coeffs:
        if i != j and (i, j) != (0, 1):
            return None
    a = tuple(-q.coeff(i, i) for i in range(2, q.dim))
    return a if any(a) else None


def phi(a, t):
    """The zero (1, sum a_i t_i^2, t_2, ..., t_n) of t0 t1 - sum a_i t_i^2."""
    return (1, sum(ai * ti * ti for ai, ti in zip(a, t))) + tuple(t)


def avoid_subspaces(q, subspaces, cap=None):
    """A zero of the hyperbolic-shape form q outside every listed proper subspace.

    Each subspace is given by a list of spanning vectors.  The parameters of
    phi are swept by shell; the default cap 2 * len(subspaces) always suffices.
    """
    a = hyperbolic_shape_coeffs(q)
    if a is None:
        raise DomainError("avoid_subspaces needs the shape t0*t1 - sum a_i t_i^2")
    subspaces = [list(s) for s in subspaces]
    for s in subspaces:
        if s and exact.rank(s) >= q.dim:
            raise DomainError("subspace to avoid is not proper")
    if cap is None:
        cap = 2 * len(subspaces)
    for t in parameter_sweep(q.dim - 2, cap):
        x = phi(a, t)
        if not any(exact.in_span(x, s) for s in subspaces):
            return x
    raise NotFound(f"parameter cap {cap} exhausted")
