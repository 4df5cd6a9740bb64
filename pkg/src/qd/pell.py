"""Pell equations and the trinomial equation x^2 - a y^2 - b z^2 = 1."""
from __future__ import annotations

import math

from .errors import DomainError
from .exact import is_square


def pell_fundamental(a):
    """Least positive (u, v) with u^2 - a v^2 = 1, via the continued fraction of sqrt(a)."""
    if a <= 0 or is_square(a):
        raise DomainError(f"Pell equation needs a positive non-square, got {a}")
    a0 = math.isqrt(a)
    m, d, c = 0, 1, a0
    h0, h1 = 1, a0
    k0, k1 = 0, 1
    while h1 * h1 - a * k1 * k1 != 1:
        m = d * c - m
        d = (a - m * m) // d
        c = (a0 + m) // d
        h0, h1 = h1, c * h1 + h0
        k0, k1 = k1, c * k1 + k0
    return h1, k1


def pell_solutions(a, count):
    """The first `count` positive solutions, powers of the fundamental unit."""
    u1, v1 = pell_fundamental(a)
    out = []
    u, v = u1, v1
    for _ in range(count):
        out.append((u, v))
        u, v = u * u1 + a * v * v1, u * v1 + v * u1
    return out


def sweep_order():
    yield 0
    m = 1
    while True:
        yield m
        yield -m
        m += 1


def nonsquare_shift(a, b, limit=10**6):
    """First m in 0, 1, -1, 2, -2, ... with a m^2 + b positive and not a square."""
    if a <= 0:
        raise DomainError("a must be positive")
    for i, m in enumerate(sweep_order()):
        if i > limit:
            break
        c = a * m * m + b
        if c > 0 and not is_square(c):
            return m
    raise DomainError("no admissible shift found")


def trinomial_solve(a, b):
    """(x, y, z) with x^2 - a y^2 - b z^2 = 1 and x z != 0.

    For b != 0 this puts y = m z where a m^2 + b is a non-square, which turns
    the equation into a Pell equation in (x, z).
    """
    if a <= 0:
        raise DomainError("a must be positive")
    if b == 0:
        return 1, 0, 1
    m = nonsquare_shift(a, b)
    x, z = pell_fundamental(a * m * m + b)
    y = m * z
    if x * x - a * y * y - b * z * z != 1 or x * z == 0:
        raise AssertionError(f"trinomial check failed for a={a}, b={b}")
    return x, y, z
