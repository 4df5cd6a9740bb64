"""Uniform and ordinary approximation to a point on a quadric.

D(x) = ||x ∧ xi|| / ||xi|| and D(X; E) = min over 0 < ||x|| <= X in E.
Scans emit one record per integer height X at which D(X; E) strictly drops.
The ordering of points uses the exact integer key ||x ∧ a||^2 of the
scan anchor a, so both scan engines agree bit for bit.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from . import exact
from .errors import DomainError, PrecisionExhausted
from .exact import DEFAULT_PRECISION, IntervalReal
from .limit import LimitPoint
from .qform import eval_q


class Filter(enum.Enum):
    ALL = "All"
    NONZEROS = "NonZerosOfQ"
    ZEROS = "ZerosOfQ"

    def admits(self, q, x):
        if self is Filter.ALL:
            return True
        z = eval_q(q, x) == 0
        return z if self is Filter.ZEROS else not z


@dataclass(frozen=True)
class ScanRecord:
    X: int
    value: IntervalReal
    minimizer: tuple
    filter: Filter


def D_of(xi: LimitPoint, x, precision=None):
    return xi.D(x, precision)


def L_of(xi: LimitPoint, x, precision=None):
    return xi.L(x, precision)


# ------------------------------------------------------------ records

def height(x):
    """Least integer X with ||x|| <= X."""
    return exact.isqrt_ceil(exact.norm_sq(x))


def records_from_candidates(xi, candidates, X_max, filt, q=None):
    """Drop records of D(X; E) for X <= X_max, from a candidate superset.

    The candidates must contain every point that attains D(X; E) for some X.
    """
    pts = set()
    for x in candidates:
        if not any(x):
            continue
        x = exact.normalize(x)
        if exact.norm_sq(x) <= X_max * X_max and filt.admits(q, x):
            pts.add(x)
    by_h = {}
    for x in pts:
        by_h.setdefault(height(x), []).append((xi.key(x), x))
    out = []
    best = None
    for h in sorted(by_h):
        k, x = min(by_h[h])
        if best is None or k < best:
            best = k
            out.append(ScanRecord(h, xi.D(x), x, filt))
    return out


def _certify(records):
    for a, b in zip(records, records[1:]):
        if not b.value.lt(a.value):
            return False
    return True


# ------------------------------------------------------ exhaustive scan

def _float_unit(a):
    n2 = exact.norm_sq(a)
    return np.array([float(Fraction(c * abs(c), n2)) for c in a])


def _signed_sqrt(v):
    return np.sign(v) * np.sqrt(np.abs(v))


def _exhaustive_candidates(xi, X, filt, q):
    """All points with max-norm <= X are measured in floating point; those
    that could be minimal (with a rounding allowance) are returned."""
    a = xi.anchor
    d = len(a)
    u = _signed_sqrt(_float_unit(a))
    axis = np.arange(-X, X + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
    Y = np.stack([g.ravel() for g in grids], axis=1)
    ynorm = (Y * Y).sum(axis=1)
    slack = 4.0 * d * (X + 1) * 2.0 ** -50
    qc = list(q.coeffs.items()) if q is not None else []

    def slab(x0):
        norm2 = x0 * x0 + ynorm
        keep = (norm2 <= X * X) & (norm2 > 0)
        cols = [np.full(keep.sum(), x0, dtype=np.int64)] + [Y[keep, i] for i in range(d - 1)]
        n2 = norm2[keep]
        D2 = np.zeros(len(n2))
        for i in range(d):
            for j in range(i + 1, d):
                m = cols[i] * u[j] - cols[j] * u[i]
                D2 += m * m
        if filt is not Filter.ALL:
            qv = np.zeros(len(n2), dtype=np.int64)
            for (i, j), c in qc:
                qv += c * cols[i] * cols[j]
            adm = (qv == 0) if filt is Filter.ZEROS else (qv != 0)
        else:
            adm = np.ones(len(n2), dtype=bool)
        h = np.ceil(np.sqrt(n2.astype(np.float64))).astype(np.int64)
        return cols, D2, h, adm

    best = np.full(X + 2, np.inf)
    for x0 in range(0, X + 1):
        cols, D2, h, adm = slab(x0)
        np.minimum.at(best, h[adm], np.sqrt(D2[adm]))
    prefix = np.minimum.accumulate(best)
    bound = np.concatenate([[np.inf], prefix[:-1]])
    out = []
    for x0 in range(0, X + 1):
        cols, D2, h, adm = slab(x0)
        c = adm & (np.sqrt(D2) <= bound[h] + slack)
        idx = np.nonzero(c)[0]
        for k in idx:
            out.append(tuple(int(col[k]) for col in cols))
    return out


# ------------------------------------------------------------ fast scan

def _first_admissible(xi, q, filt, X_max):
    """Points of the lowest integer height containing an admissible point."""
    if filt is Filter.ZEROS:
        from .witt import is_isotropic
        if not is_isotropic(q):
            return []
    d = xi.dim
    qc = list(q.coeffs.items()) if q is not None else []
    h = 1
    while True:
        h = min(h, X_max)
        axis = np.arange(-h, h + 1, dtype=np.int64)
        P = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
        n2 = (P * P).sum(axis=1)
        ok = (n2 > 0) & (n2 <= h * h)
        if filt is not Filter.ALL:
            qv = np.zeros(len(P), dtype=np.int64)
            for (i, j), c in qc:
                qv += c * P[:, i] * P[:, j]
            ok &= (qv == 0) if filt is Filter.ZEROS else (qv != 0)
        if ok.any():
            hs = np.ceil(np.sqrt(n2[ok].astype(np.float64))).astype(np.int64)
            h0 = int(hs.min())
            return [tuple(int(c) for c in row) for row in P[ok][hs <= h0 + 1]
                    if height(tuple(int(c) for c in row)) == h0]
        if h == X_max:
            return []
        h *= 2


def _slab_candidates(xi, q, filt, X_max, c_lo, c_hi, R0):
    """Box enumeration in the slabs x_k = c for c_lo <= c <= c_hi."""
    a = xi.anchor
    d = len(a)
    k = max(range(d), key=lambda i: (abs(a[i]), -i))
    ak = a[k]
    na2 = exact.norm_sq(a)
    sigma = math.sqrt(na2 / (ak * ak)) * (1 + 1e-12)
    others = [i for i in range(d) if i != k]
    best_key = None
    pending = []
    out = []
    for c in range(c_lo, c_hi + 1):
        # admissible points of norm <= c certify the pruning radius
        still = []
        for n2, key in pending:
            if n2 <= c * c:
                if best_key is None or key < best_key:
                    best_key = key
            else:
                still.append((n2, key))
        pending = still
        if best_key is None:
            R = R0
        else:
            R = math.sqrt(float(Fraction(best_key, na2))) * (1 + 1e-9) + 1e-300
        R = min(R, R0)
        hw = Fraction(R * sigma) + Fraction(1, 10**9)
        ranges = []
        for i in others:
            centre = Fraction(c * a[i], ak)
            ranges.append(range(math.ceil(centre - hw), math.floor(centre + hw) + 1))
        for ys in itertools.product(*ranges):
            x = [0] * d
            x[k] = c
            for i, y in zip(others, ys):
                x[i] = y
            x = tuple(x)
            n2 = exact.norm_sq(x)
            if n2 == 0 or n2 > X_max * X_max:
                continue
            if not filt.admits(q, x):
                continue
            key = xi.key(x)
            if best_key is not None and key > best_key:
                continue
            out.append(x)
            pending.append((n2, key))
    return out


def _fast_candidates(xi, X_max, filt, q, workers=1):
    first = _first_admissible(xi, q, filt, X_max)
    if not first:
        return []
    na2 = exact.norm_sq(xi.anchor)
    kmin = min(xi.key(x) for x in first)
    R0 = math.sqrt(float(Fraction(kmin, na2))) * (1 + 1e-9) + 1e-300
    if workers <= 1 or X_max < 64:
        return first + _slab_candidates(xi, q, filt, X_max, 0, X_max, R0)
    bounds = np.linspace(0, X_max + 1, workers + 1).astype(int)
    jobs = [(xi, q, filt, X_max, int(lo), int(hi) - 1, R0) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    out = list(first)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_slab_job, jobs):
            out += part
    return out


def _slab_job(args):
    return _slab_candidates(*args)


def scan(xi: LimitPoint, X_max: int, filt=Filter.ALL, q=None, mode="fast", workers=1,
         precision=DEFAULT_PRECISION):
    """Records of D(X; E) for 1 <= X <= X_max.

    mode "exact" measures every point of max-norm <= X_max; mode "fast"
    sweeps the coordinate where xi is largest and only visits the boxes
    that can hold points closer to xi than the best admissible point of
    smaller height.  Both give identical records.
    """
    if filt is not Filter.ALL and q is None:
        raise DomainError("restricted scans need the form")
    if X_max < 1:
        return []
    # anchor fine enough that its radius is negligible below height X_max
    tol = gmpy2.mpfr(2) ** -(precision + 64) / X_max
    work = xi.coarsen(tol).with_precision(precision)
    while True:
        if mode == "exact":
            cands = _exhaustive_candidates(work, X_max, filt, q)
        elif mode == "fast":
            cands = _fast_candidates(work, X_max, filt, q, workers)
        else:
            raise DomainError(f"unknown scan mode {mode!r}")
        recs = records_from_candidates(work, cands, X_max, filt, q)
        if _certify(recs):
            return recs
        finer = [r for a, r in xi.anchors if r < work.radius]
        if not finer:
            raise PrecisionExhausted("record values could not be separated")
        work = xi.coarsen(max(finer) / 2 ** 64).with_precision(precision)


def records_from_points(xi, points, filt=Filter.ALL, precision=None):
    """Treat given points (e.g. a sequence) as the successive minimal points."""
    return [ScanRecord(height(x), xi.D(x, precision), exact.normalize(x), filt) for x in points]


# ------------------------------------------------------------------ CSV

CSV_HEADER = ["X", "value_lo", "value_hi", "point", "filter"]


def records_to_csv(records, digits=20):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        lo, hi = r.value.format(digits)
        w.writerow([r.X, lo, hi, " ".join(str(c) for c in r.minimizer), r.filter.value])
    return buf.getvalue()


def records_from_csv(text, precision=DEFAULT_PRECISION):
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        lo = gmpy2.mpfr(row["value_lo"], precision)
        hi = gmpy2.mpfr(row["value_hi"], precision)
        pt = tuple(int(c) for c in row["point"].split())
        out.append(ScanRecord(int(row["X"]), IntervalReal(lo, hi, precision), pt, Filter(row["filter"])))
    return out


# ------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExponentEstimate:
    lambda_hat: float
    lambda_: float
    residual_hat: float
    residual: float
    n_points: int


def _logv(r):
    m = r.value.mid()
    if m <= 0:
        m = r.value.hi
    return float(gmpy2.log(m))


def _slope(xs, ys):
    xs, ys = np.asarray(xs), np.asarray(ys)
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    res = ys - A @ coef
    return float(coef[0]), float(np.max(np.abs(res))) if len(res) else 0.0


def estimate_exponents(records, drop=3):
    """(lambda_hat, lambda) from the staircase X -> D(X; E).

    lambda comes from the lower corners (log X_k, log v_k), lambda_hat from
    the upper corners (log X_{k+1}, log v_k); the first `drop` records are
    discarded as transient.
    """
    recs = list(records)[drop:]
    if len(recs) < 3:
        raise DomainError("need at least three records after the transient")
    lx = [math.log(r.X) for r in recs]
    lv = [_logv(r) for r in recs]
    s_low, res_low = _slope(lx, lv)
    s_up, res_up = _slope(lx[1:], lv[:-1])
    return ExponentEstimate(-s_up, -s_low, res_up, res_low, len(recs))


def mm_value(lambda_hat, lambda_, n):
    """lambda_hat + lambda_hat^2/lambda + ... + lambda_hat^n/lambda^(n-1)."""
    if lambda_ == math.inf:
        return lambda_hat
    return sum(lambda_hat ** k / lambda_ ** (k - 1) for k in range(1, n + 1))


# ------------------------------------------------------------- monitors

@dataclass(frozen=True)
class LowerBoundReport:
    min_value_times_X: float
    max_value_times_X_pow: float


def _scaled(r, power):
    """D(X)·X^power as a float, via logarithms so tiny values survive."""
    return math.exp(_logv(r) + power * math.log(r.X))


def lower_bound_monitor(records, rho=None):
    """min D(X)·X over the records and max D(X)·X^(1/rho)."""
    if not records:
        return LowerBoundReport(math.inf, 0.0)
    lo = min(_scaled(r, 1.0) for r in records)
    hi = max(_scaled(r, 1.0 / rho) for r in records) if rho else math.nan
    return LowerBoundReport(lo, hi)


def half_exponent_monitor(records, q=None, witt_index=None):
    """min D(X; Z(q))·X^(1/2); None when the form has Witt index >= 2."""
    if witt_index is None and q is not None:
        from .witt import witt_index as wi
        witt_index = wi(q)
    if witt_index is not None and witt_index >= 2:
        return None
    if not records:
        return math.inf
    return min(_scaled(r, 0.5) for r in records)


def height_gap_check(q, x, y, precision=DEFAULT_PRECISION):
    """(||y|| / ||x ∧ y||^2, c) with c = 2 m ||q||, for a zero y of q.

    The pair must be independent and must not span a totally isotropic plane.
    """
    if eval_q(q, y) != 0:
        raise DomainError("y must be a zero of q")
    w = exact.wedge_norm_sq(x, y)
    if w == 0:
        raise DomainError("x and y are dependent")
    from .qform import eval_b, operator_norm
    if eval_q(q, x) == 0 and eval_b(q, x, y) == 0:
        raise DomainError("x and y span a totally isotropic plane")
    ratio = exact.norm(y, precision) / IntervalReal.exact(w, precision)
    return ratio, 2 * operator_norm(q)


def D_L_ratio(xi, points, precision=None):
    """(min, max) of D(x)/L(x) over points."""
    vals = [float(xi.D(x, precision) / xi.L(x, precision)) for x in points if xi.L(x, precision).lo > 0]
    return (min(vals), max(vals)) if vals else (math.nan, math.nan)


def wedge_bound_ratio(xi, vectors, precision=None):
    """||x_1 ∧ ... ∧ x_k|| / sum_i ||x_i|| prod_{j != i} L(x_j)."""
    p = precision or xi.precision
    num = IntervalReal.exact(exact.multi_wedge_norm_sq(vectors), p).sqrt()
    Ls = [xi.L(v, p) for v in vectors]
    den = None
    for i, v in enumerate(vectors):
        term = exact.norm(v, p)
        for j, L in enumerate(Ls):
            if j != i:
                term = term * L
        den = term if den is None else den + term
    return float(num / den)
