"""Independent brute-force oracles used by the tests.

None of these call into the package's algorithms beyond evaluating forms.
"""
import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def hilbert_bruteforce(a, b, p):
    """(a, b)_p for squarefree a, b by searching a primitive solution of
    z^2 = a x^2 + b y^2 modulo p^2 (odd p) or 2^6."""
    if p == "inf":
        return -1 if a < 0 and b < 0 else 1
    m = p ** 2 if p != 2 else 64
    r = np.arange(m, dtype=np.int64)
    X, Y, Z = np.meshgrid(r, r, r, indexing="ij")
    ok = (Z * Z - a * X * X - b * Y * Y) % m == 0
    prim = (X % p != 0) | (Y % p != 0) | (Z % p != 0)
    return 1 if (ok & prim).any() else -1


def _zeros(q, H):
    d = q.dim
    axis = np.arange(-H, H + 1, dtype=np.int64)
    P = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
    val = np.zeros(len(P), dtype=np.int64)
    for (i, j), c in q.coeffs.items():
        val += c * P[:, i] * P[:, j]
    P = P[(val == 0) & (np.abs(P).sum(axis=1) > 0)]
    # one of +-x, primitive
    keep = []
    for x in P:
        first = next(c for c in x if c)
        if first > 0 and math.gcd(*[int(c) for c in x]) == 1:
            keep.append(x)
    return np.array(keep, dtype=np.int64).reshape(-1, d)


def max_isotropic_dim(q, H=8):
    """Largest dimension of a totally isotropic subspace spanned by zeros of max-norm <= H."""
    V = _zeros(q, H)
    if len(V) == 0:
        return 0
    B = np.array(q.bilinear_matrix(), dtype=np.int64)
    G = V @ B @ V.T
    ev = np.linalg.eigvalsh(B.astype(float))
    k = int((abs(ev) < 1e-9).sum())
    upper = k + min(int((ev > 1e-9).sum()), int((ev < -1e-9).sum()))
    best = 0

    def rec(chosen, cand):
        nonlocal best
        best = max(best, len(chosen))
        if best >= upper:
            return
        for pos, idx in enumerate(cand):
            trial = V[chosen + [idx]]
            if np.linalg.matrix_rank(trial.astype(float)) <= len(chosen):
                continue
            rest = [j for j in cand[pos + 1:] if G[idx, j] == 0]
            rec(chosen + [idx], rest)
            if best >= upper:
                return

    rec([], list(range(len(V))))
    return best


def witt_index_bruteforce(q, H=8):
    ev = np.linalg.eigvalsh(np.array(q.bilinear_matrix(), dtype=float))
    k = int((abs(ev) < 1e-9).sum())
    return max_isotropic_dim(q, H) - k


def pell_bruteforce(a, vmax=10**6):
    for v in range(1, vmax):
        u2 = 1 + a * v * v
        u = math.isqrt(u2)
        if u * u == u2:
            return u, v
    return None


def D_mpmath(xi_vec, x, dps=None):
    """||x ∧ xi|| / ||xi|| with xi given by a (huge) integer vector, as a Fraction.

    The wedge cancels about 2 log10 ||x|| digits, so the working precision
    grows with x.
    """
    if dps is None:
        dps = 100 + 3 * max(len(str(abs(c))) for c in x)
    with mpmath.workdps(dps):
        v = [mpmath.mpf(c) for c in xi_vec]
        n2 = sum(c * c for c in v)
        w = sum((x[i] * v[j] - x[j] * v[i]) ** 2 for i in range(len(v)) for j in range(i + 1, len(v)))
        r = mpmath.sqrt(w / n2)
        man, exp = r.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)


def rho_mpmath(n, dps=50):
    """Root in (1, 2) of x^n - x^(n-1) - ... - 1 by mpmath's secant/Newton solver."""
    with mpmath.workdps(dps):
        f = lambda x: x ** n - sum(x ** k for k in range(n))
        return mpmath.findroot(f, mpmath.mpf("1.9"))


def brute_records(xi_vec, X, admit=lambda x: True):
    """Records of D(X) by enumerating max-norm <= X in exact rational arithmetic."""
    from fractions import Fraction
    d = len(xi_vec)
    n2 = sum(c * c for c in xi_vec)
    best = None
    pts = []
    for x in itertools.product(range(-X, X + 1), repeat=d):
        s = sum(c * c for c in x)
        if s == 0 or s > X * X or not admit(x):
            continue
        first = next(c for c in x if c)
        if first < 0:
            continue
        w = sum((x[i] * xi_vec[j] - x[j] * xi_vec[i]) ** 2 for i in range(d) for j in range(i + 1, d))
        pts.append((math.isqrt(s - 1) + 1, Fraction(w, n2), x))
    pts.sort()
    out = []
    for h, val, x in pts:
        if best is None or val < best:
            best = val
            out.append((h, x))
    return out
