"""Command line front end: ``qd <subcommand> ...``.

Exit status: 0 ok, 1 usage, 2 domain error, 3 precision or budget exhausted.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import approx, canonical, exact, extremal, pell, qform, spectral, witt
from .errors import BudgetExceeded, DomainError
from .limit import LimitPoint

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


@dataclasses.dataclass
class RunConfig:
    precision: int = exact.DEFAULT_PRECISION
    workers: int = 1
    digit_budget: int = extremal.DEFAULT_DIGIT_BUDGET
    C0: int = extremal.DEFAULT_C0
    ell: int | None = None
    B: int | None = None
    output: str | None = None

    def validate(self):
        for name in ("precision", "workers", "digit_budget", "C0", "ell", "B"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise DomainError(f"{name} must be positive")
        return self

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj).validate()


def resolve_config(args, env=None):
    """Config file, then QD_THREADS, then command line flags."""
    env = os.environ if env is None else env
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = RunConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    if env.get("QD_THREADS"):
        try:
            cfg.workers = int(env["QD_THREADS"])
        except ValueError:
            raise DomainError("QD_THREADS must be an integer") from None
    for name in ("precision", "workers", "digit_budget", "C0", "ell", "B", "output"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if cfg.output and Path(cfg.output).is_dir():
        cmd = getattr(args, "cmd", "out")
        cfg.output = str(Path(cfg.output) / f"{cmd}{_EXT.get(cmd, '.json')}")
    return cfg.validate()


_EXT = {"extremal": ".jsonl", "chain": ".jsonl", "scan": ".csv", "rho": ".txt"}


# ------------------------------------------------------------------ output

def _emit(text, path=None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, sort_keys=True) + "\n"


def _interval(iv, digits=20):
    lo, hi = iv.format(digits)
    return {"lo": lo, "hi": hi}


def _frac(v):
    return str(Fraction(v))


def _load_form(path):
    return qform.from_json(Path(path).read_text(encoding="utf-8"))


def _reduction_json(red):
    return {
        "kind": red.kind.value,
        "scale": _frac(red.scale),
        "transform": [[_frac(v) for v in row] for row in red.transform],
        "coeffs": list(red.coeffs),
        "form": json.loads(qform.to_json(red.form())),
    }


# ------------------------------------------------------------- sequences

def sequence_lines(seq, start=0):
    n = seq.n
    for i in range(start, len(seq.points)):
        x = seq.points[i]
        rec = {"type": "point", "i": i, "point": [str(c) for c in x], "q": qform.eval_q(seq.form, x)}
        rec["det"] = str(exact.det(seq.points[i - n: i + 1])) if i >= n else None
        if i + 1 < len(seq.points):
            rec["growth_ratio"] = seq.log_height(i + 1) / seq.log_height(i) if seq.log_height(i) > 0 else None
            lw = 0.5 * _log_int(exact.wedge_norm_sq(x, seq.points[i + 1]))
            rec["wedge_ratio"] = math.exp(lw - seq.log_height(i + 1) + seq.log_height(i))
        else:
            rec["growth_ratio"] = rec["wedge_ratio"] = None
        yield rec


def _log_int(n):
    b = n.bit_length()
    if b < 1000:
        return math.log(n)
    return math.log(n >> (b - 64)) + (b - 64) * math.log(2)


def write_sequence(seq, path=None):
    head = {"type": "header", "form": json.loads(qform.to_json(seq.form)), "n": seq.n, "B": str(seq.B),
            "C0": seq.C0}
    if seq.reduction is not None:
        head["reduction"] = _reduction_json(seq.reduction)
    lines = [_dump(head)] + [_dump(r) for r in sequence_lines(seq)]
    _emit("".join(lines), path)


def read_sequence(path, digit_budget=extremal.DEFAULT_DIGIT_BUDGET):
    """Sequence from JSON-lines; the points are regenerated from the seed and compared."""
    lines = [json.loads(s) for s in Path(path).read_text(encoding="utf-8").splitlines() if s.strip()]
    if not lines or lines[0].get("type") != "header":
        raise DomainError("sequence file lacks a header line")
    head = lines[0]
    form = qform.from_json(json.dumps(head["form"]))
    n = int(head["n"])
    pts = [tuple(int(c) for c in r["point"]) for r in lines[1:]]
    if len(pts) < n + 1:
        raise DomainError("sequence shorter than its seed")
    seq = extremal.ExtremalSequence(form, n, list(pts[: n + 1]), int(head["B"]),
                                    C0=int(head.get("C0", extremal.DEFAULT_C0)), digit_budget=digit_budget)
    for i in range(n + 1):
        bs, ys = extremal._traces(form, seq.points, i, n)
        seq.bvals.append(bs)
        seq.wedges.append(ys)
    seq.det = exact.det(seq.points)
    extremal.extend(seq, len(pts) - n - 1)
    if seq.points != pts:
        raise DomainError("sequence file does not follow the recurrence")
    return seq


# ------------------------------------------------------------ subcommands

def cmd_form(args, cfg):
    q = _load_form(args.form)
    basis, d = qform.diagonalize(q)
    sig = qform.signature(q)
    out = {"form": json.loads(qform.to_json(q)), "dim": q.dim, "rank": qform.rank(q),
           "signature": [sig.pos, sig.neg, sig.zero], "diagonal": [_frac(v) for v in d],
           "kernel": [list(v) for v in qform.kernel(q)], "indefinite": qform.is_indefinite(q)}
    _emit(_dump(out), cfg.output)


def cmd_witt(args, cfg):
    q = _load_form(args.form)
    w = witt.witt_decompose(q, max_points=args.cap)
    out = {"witt_index": w.witt_index,
           "kernel_basis": [list(v) for v in w.kernel_basis],
           "hyperbolic_pairs": [[list(u), list(v)] for u, v in w.hyperbolic_pairs],
           "anisotropic_basis": [list(v) for v in w.anisotropic_basis]}
    _emit(_dump(out), cfg.output)


def cmd_canonical(args, cfg):
    red = canonical.reduce_canonical(_load_form(args.form))
    _emit(_dump(_reduction_json(red)), cfg.output)


def cmd_pell(args, cfg):
    sols = pell.pell_solutions(args.a, args.count)
    _emit(_dump({"a": args.a, "solutions": [[str(u), str(v)] for u, v in sols]}), cfg.output)


def cmd_trinomial(args, cfg):
    x, y, z = pell.trinomial_solve(args.a, args.b)
    _emit(_dump({"a": args.a, "b": args.b, "x": x, "y": y, "z": z}), cfg.output)


def _build(args, cfg):
    q = _load_form(args.form)
    red = canonical.reduce_canonical(q)
    return extremal.build(red, args.steps, B=cfg.B, ell=cfg.ell, C0=cfg.C0, digit_budget=cfg.digit_budget)


def cmd_extremal(args, cfg):
    seq = _build(args, cfg)
    write_sequence(seq, cfg.output)
    if args.xi_out or args.orbit:
        xi = extremal.limit_point(seq, cfg.precision)
        if args.xi_out:
            Path(args.xi_out).write_text(xi.to_json() + "\n", encoding="utf-8")
        if args.orbit:
            for k, p in enumerate(extremal.orbit(seq.reduction, xi, args.orbit)):
                sys.stderr.write(f"orbit {k}: {p!r}\n")


def cmd_chain(args, cfg):
    q = _load_form(args.form)
    phi = extremal.phi_log if args.phi == "log" else None
    steps = []
    chain = extremal.isotropic_chain(q, args.steps, phi, cfg.digit_budget, cfg.precision, log=steps.append)
    bad = extremal.check_chain(q, chain)
    lines = [_dump({"i": i + 1, "point": [str(c) for c in x]}) for i, x in enumerate(chain)]
    lines.append(_dump({"check_chain_first_failure": bad}))
    _emit("".join(lines), cfg.output)


_FILTERS = {"all": approx.Filter.ALL, "nonzero": approx.Filter.NONZEROS, "zero": approx.Filter.ZEROS}


def cmd_scan(args, cfg):
    xi = LimitPoint.from_json(Path(args.xi).read_text(encoding="utf-8"))
    q = _load_form(args.form) if args.form else None
    recs = approx.scan(xi, args.xmax, _FILTERS[args.filter], q, "exact" if args.exact else "fast",
                       cfg.workers, cfg.precision)
    _emit(approx.records_to_csv(recs), cfg.output)


def cmd_exponents(args, cfg):
    recs = approx.records_from_csv(Path(args.records).read_text(encoding="utf-8"))
    est = approx.estimate_exponents(recs, args.drop)
    out = dataclasses.asdict(est)
    if args.n:
        out["mm_value"] = approx.mm_value(est.lambda_hat, est.lambda_, args.n)
    _emit(_dump(out), cfg.output)


def certified_decimal(iv, digits):
    """Truncated decimal expansion shared by both ends of a positive interval."""
    lo, hi = Fraction(*iv.lo.as_integer_ratio()), Fraction(*iv.hi.as_integer_ratio())
    for k in range(digits, -1, -1):
        a, b = math.floor(lo * 10**k), math.floor(hi * 10**k)
        if a == b:
            return f"{a // 10**k}.{a % 10**k:0{k}d}" if k else str(a)
    raise DomainError("interval too wide for a certified digit")


def cmd_rho(args, cfg):
    tol = Fraction(str(args.tol))
    r = spectral.rho(args.n, tol)
    if args.interval:
        lo, hi = r.format(max(12, int(-math.log10(float(tol))) + 2))
        _emit(_dump({"lo": lo, "hi": hi}), cfg.output)
    else:
        digits = max(10, int(-math.log10(float(tol))) - 2)
        _emit(certified_decimal(r, digits) + "\n", cfg.output)


def cmd_fit(args, cfg):
    seq = read_sequence(args.seq, cfg.digit_budget)
    fit = spectral.appendix_fit(seq, cfg.precision)
    s = spectral.fit_summary(fit, args.start)
    s["log10_step_residuals"] = {str(k): v for k, v in s["log10_step_residuals"].items()}
    s["deviations"] = {str(k): v for k, v in fit.deviations.items()}
    s["rho"] = fit.rho
    s["operator_dim"] = fit.operator_dim
    _emit(_dump(s), cfg.output)


def cmd_pipeline(args, cfg):
    q = _load_form(args.form)
    red = canonical.reduce_canonical(q)
    seq = extremal.build(red, args.steps, B=cfg.B, ell=cfg.ell, C0=cfg.C0, digit_budget=cfg.digit_budget)
    n = seq.n
    xi = extremal.limit_point(seq, cfg.precision)
    form = red.form()
    scan = approx.scan(xi, args.xmax, approx.Filter.NONZEROS, form, "fast", cfg.workers, cfg.precision)
    k = min(len(seq.points), args.index + 1)
    recs = approx.records_from_points(xi, seq.points[:k])
    est = approx.estimate_exponents(recs)
    r = spectral.rho(n, Fraction(1, 10**20))
    fit = spectral.appendix_fit(seq, cfg.precision)
    fs = spectral.fit_summary(fit, min(5, len(seq) - 2))
    lb = approx.lower_bound_monitor(scan, float(r.mid()))
    ratios = extremal.growth_ratios(seq)
    report = {
        "n": n,
        "reduction": _reduction_json(red),
        "steps": args.steps,
        "rho": _interval(r),
        "one_over_rho": 1 / float(r.mid()),
        "window_dets": sorted({str(d) for d in extremal.window_dets(seq)}),
        "last_growth_ratio": ratios[-1],
        "limit_point": {"anchor_bits": max(abs(c).bit_length() for c in xi.anchor),
                        "radius_hi": format(xi.radius, ".6Ug")},
        "exponents": dataclasses.asdict(est),
        "mm_value": approx.mm_value(est.lambda_hat, est.lambda_, n),
        "scan": {"xmax": args.xmax, "filter": "NonZerosOfQ", "records": len(scan),
                 "min_value_times_X": lb.min_value_times_X,
                 "max_value_times_X_pow_inv_rho": lb.max_value_times_X_pow},
        "fit": {"alpha": fs["alpha"], "steps_non_increasing": fs["steps_non_increasing"],
                "deviation_ratio": fs["deviation_ratio"]},
        "config": json.loads(cfg.to_json()),
    }
    _emit(_dump(report), cfg.output)


# ------------------------------------------------------------------ parser

def _common(p):
    p.add_argument("--config", help="RunConfig JSON file")
    p.add_argument("--precision", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--digit-budget", dest="digit_budget", type=int)
    p.add_argument("--output", "-o")


def build_parser():
    ap = argparse.ArgumentParser(prog="qd", description="Extremal points on rational quadrics.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("form", help="classify a form")
    p.add_argument("--form", required=True)
    _common(p)
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("witt", help="Witt decomposition")
    p.add_argument("--form", required=True)
    p.add_argument("--cap", type=int, default=witt.DEFAULT_MAX_POINTS)
    _common(p)
    p.set_defaults(func=cmd_witt)

    p = sub.add_parser("canonical", help="canonical reduction")
    p.add_argument("--form", required=True)
    _common(p)
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("pell", help="solutions of u^2 - a v^2 = 1")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_pell)

    p = sub.add_parser("trinomial", help="x^2 - a y^2 - b z^2 = 1 with x z != 0")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_trinomial)

    for name, fn in (("extremal", cmd_extremal), ("pipeline", cmd_pipeline)):
        p = sub.add_parser(name)
        p.add_argument("--form", required=True)
        p.add_argument("--steps", type=int, default=18)
        p.add_argument("--B", type=int)
        p.add_argument("--ell", type=int)
        p.add_argument("--C0", type=int)
        _common(p)
        p.set_defaults(func=fn)
        if name == "extremal":
            p.add_argument("--orbit", type=int, default=0)
            p.add_argument("--xi-out", dest="xi_out")
        else:
            p.add_argument("--xmax", type=int, default=10**4)
            p.add_argument("--index", type=int, default=15, help="last sequence index used for exponents")

    p = sub.add_parser("chain", help="isotropic chain on a form of Witt index >= 2")
    p.add_argument("--form", required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--phi", choices=["log", "none"], default="none")
    _common(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("scan", help="records of D(X; E)")
    p.add_argument("--xi", required=True)
    p.add_argument("--form")
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--filter", choices=sorted(_FILTERS), default="all")
    p.add_argument("--exact", action="store_true", help="exhaustive engine")
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("exponents", help="exponent estimates from scan records")
    p.add_argument("--records", required=True)
    p.add_argument("--drop", type=int, default=3)
    p.add_argument("--n", type=int)
    _common(p)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("rho", help="the Pisot number rho_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", default="1e-12")
    p.add_argument("--interval", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("fit", help="log-trace fit of a sequence file")
    p.add_argument("--seq", required=True)
    p.add_argument("--start", type=int, default=5)
    _common(p)
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except BudgetExceeded as e:
        sys.stderr.write(f"qd: budget exhausted: {e}\n")
        return 3
    except (DomainError, ZeroDivisionError) as e:
        sys.stderr.write(f"qd: {e}\n")
        return 2
    except (OSError, json.JSONDecodeError) as e:
        sys.stderr.write(f"qd: {e}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
