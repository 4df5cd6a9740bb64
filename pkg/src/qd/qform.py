"""Integral quadratic forms, their bilinear forms and the map psi."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .errors import DomainError


@dataclass(frozen=True)
class QuadraticForm:
    """q(x) = sum_{i<=j} c_ij x_i x_j on Q^dim with integer c_ij.

    ``scale`` records the factor used to clear denominators when the form
    was built from rational coefficients (``q_int = scale * q_rat``).
    """

    dim: int
    coeffs: dict = field(default_factory=dict)
    scale: int = 1

    def __post_init__(self):
        clean = {}
        for (i, j), c in self.coeffs.items():
            if i > j:
                i, j = j, i
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise DomainError(f"index ({i},{j}) out of range for dim {self.dim}")
            if c != int(c):
                raise DomainError("coefficients must be integers; use from_rational")
            clean[(i, j)] = clean.get((i, j), 0) + int(c)
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(clean.items()) if v})

    @classmethod
    def from_rational(cls, dim, coeffs):
        den = 1
        for c in coeffs.values():
            den = math.lcm(den, Fraction(c).denominator)
        return cls(dim, {k: int(Fraction(c) * den) for k, c in coeffs.items()}, den)

    @classmethod
    def diagonal(cls, values):
        return cls(len(values), {(i, i): v for i, v in enumerate(values)})

    @classmethod
    def from_gram(cls, a):
        """Form with q(x) = x^T A x for a symmetric rational A (scaled to Z)."""
        n = len(a)
        coeffs = {}
        for i in range(n):
            coeffs[(i, i)] = Fraction(a[i][i])
            for j in range(i + 1, n):
                coeffs[(i, j)] = 2 * Fraction(a[i][j])
        return cls.from_rational(n, coeffs)

    def __hash__(self):
        return hash((self.dim, tuple(self.coeffs.items())))

    def is_zero(self):
        return not self.coeffs

    def coeff(self, i, j):
        if i > j:
            i, j = j, i
        return self.coeffs.get((i, j), 0)

    def bilinear_matrix(self):
        """Integer matrix B with b(x, y) = x^T B y; its diagonal is 2 c_ii."""
        n = self.dim
        m = [[0] * n for _ in range(n)]
        for (i, j), c in self.coeffs.items():
            if i == j:
                m[i][i] = 2 * c
            else:
                m[i][j] = m[j][i] = c
        return tuple(tuple(r) for r in m)

    def gram(self):
        """Rational matrix A with q(x) = x^T A x."""
        return tuple(tuple(Fraction(v, 2) for v in row) for row in self.bilinear_matrix())

    def max_coeff(self):
        return max((abs(c) for c in self.coeffs.values()), default=0)

    def __call__(self, x):
        return eval_q(self, x)

    def pullback(self, t):
        """The form x -> q(T x) for a rational (dim x k) matrix T, rescaled to Z."""
        a = self.gram()
        g = exact.mat_mul(exact.mat_mul(exact.transpose(t), a), t)
        return QuadraticForm.from_gram(g)

    def __str__(self):
        parts = []
        for (i, j), c in self.coeffs.items():
            mono = f"t{i}^2" if i == j else f"t{i}*t{j}"
            parts.append(f"{c:+d}*{mono}")
        return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class Signature:
    pos: int
    neg: int
    zero: int


def eval_q(q, x):
    if len(x) != q.dim:
        raise DomainError(f"vector of length {len(x)} for form of dim {q.dim}")
    return sum(c * x[i] * x[j] for (i, j), c in q.coeffs.items())


def eval_b(q, x, y):
    """Polarization b(x, y) = q(x + y) - q(x) - q(y); b(x, x) = 2 q(x)."""
    if len(x) != q.dim or len(y) != q.dim:
        raise DomainError("dimension mismatch")
    s = 0
    for (i, j), c in q.coeffs.items():
        if i == j:
            s += 2 * c * x[i] * y[i]
        else:
            s += c * (x[i] * y[j] + x[j] * y[i])
    return s


def psi(q, x, y):
    """psi(x, y) = b(x, y) x - q(x) y."""
    bx, qx = eval_b(q, x, y), eval_q(q, x)
    return tuple(bx * a - qx * c for a, c in zip(x, y))


def eval_q_interval(q, x):
    """q evaluated on a vector of IntervalReal coordinates."""
    total = None
    for (i, j), c in q.coeffs.items():
        term = x[i] * x[j] * c
        total = term if total is None else total + term
    if total is None:
        return exact.IntervalReal.exact(0)
    return total


def diagonalize(q):
    """Congruence diagonalization over Q.

    Returns (basis, diag): basis is a rational matrix whose columns are
    pairwise b-orthogonal, and q(basis @ y) = sum diag[i] * y_i^2.

    Pivot rule: the remaining diagonal entry of largest absolute value
    (lowest index on ties); when every remaining diagonal entry vanishes
    the first nonzero off-diagonal pair (i, j) is mixed via e_i += e_j.
    """
    n = q.dim
    a = [list(r) for r in q.gram()]
    p = [list(r) for r in exact.identity(n)]   # columns are basis vectors

    def add_col(dst, src, f):
        for r in range(n):
            p[r][dst] += f * p[r][src]
        for r in range(n):
            a[r][dst] += f * a[r][src]
        for c in range(n):
            a[dst][c] += f * a[src][c]

    def swap(i, j):
        for r in range(n):
            p[r][i], p[r][j] = p[r][j], p[r][i]
        a[i], a[j] = a[j], a[i]
        for r in range(n):
            a[r][i], a[r][j] = a[r][j], a[r][i]

    for k in range(n):
        best = max(range(k, n), key=lambda i: (abs(a[i][i]), -i))
        if a[best][best] == 0:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            add_col(i, j, 1)
            best = i
        if best != k:
            swap(k, best)
        piv = a[k][k]
        for j in range(k + 1, n):
            if a[k][j] != 0:
                add_col(j, k, -a[k][j] / piv)
    diag = tuple(a[i][i] for i in range(n))
    return tuple(tuple(r) for r in p), diag


def signature(q):
    _, d = diagonalize(q)
    return Signature(sum(1 for v in d if v > 0), sum(1 for v in d if v < 0), sum(1 for v in d if v == 0))


def rank(q):
    return exact.rank(q.bilinear_matrix())


def is_indefinite(q):
    s = signature(q)
    return s.pos > 0 and s.neg > 0


def kernel(q):
    """Saturated integer basis of the radical of b, Hermite reduced (rows)."""
    return exact.integer_kernel(q.bilinear_matrix(), q.dim)


def norm_bound(q):
    """Upper bound for max |q| on the unit sphere (Frobenius norm of the Gram matrix)."""
    s = sum(Fraction(v) ** 2 for row in q.gram() for v in row)
    return math.sqrt(float(s))


def operator_norm(q):
    """max |q| on the unit sphere, computed in floating point."""
    g = np.array([[float(v) for v in row] for row in q.gram()])
    return float(max(abs(np.linalg.eigvalsh(g))))


# ------------------------------------------------------------------- JSON

def _parse_coeff(c):
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float):
        if not c.is_integer():
            raise DomainError(f"non-integral float coefficient {c}; pass it as a string")
        return int(c)
    return c


def from_json(text):
    """Parse {"dim": n, "coeffs": [[i, j, c], ...]}; c may be an int or "p/q"."""
    try:
        obj = json.loads(text) if isinstance(text, str) else text
        dim = int(obj["dim"])
        triples = obj["coeffs"]
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"malformed form JSON: {e}") from None
    coeffs = {}
    for t in triples:
        if len(t) != 3:
            raise DomainError(f"coefficient entry {t} is not [i, j, c]")
        i, j, c = int(t[0]), int(t[1]), _parse_coeff(t[2])
        key = (min(i, j), max(i, j))
        coeffs[key] = coeffs.get(key, 0) + Fraction(c)
    q = QuadraticForm.from_rational(dim, coeffs)
    if "scale" in obj:
        q = QuadraticForm(q.dim, q.coeffs, q.scale * int(obj["scale"]))
    if q.is_zero():
        raise DomainError("the zero form is not allowed")
    return q


def to_json(q):
    obj = {"dim": q.dim, "coeffs": [[i, j, c] for (i, j), c in q.coeffs.items()]}
    if q.scale != 1:
        obj["scale"] = q.scale
    return json.dumps(obj)
