"""Command-line front end.

Every command first prints its resolved configuration as ``#`` comment
lines, then its results.  Exit codes: 0 success, 2 usage error,
3 configuration not found, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shlex
import sys
from contextlib import contextmanager

import numpy as np

from . import apps, gates, rng
from .bitstream import Bitstream, StreamError
from .circuits import FUNCTIONS, VARIANTS, ConfigNotFound, DomainError, builtin_spec, canonical_variant, evaluate, true_reference
from .evaluation import (
    CSV_HEADER,
    correlation_profile,
    export_report,
    fmt,
    fom,
    hw_cost,
    is_stochastic,
    load_hw_costs,
    mse_from_csv,
    mse_sweep,
    write_report,
)

EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 2, 3, 4


class UsageError(Exception):
    pass


def _echo(out, **cfg):
    out.write("# " + json.dumps(cfg, sort_keys=True) + "\n")


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        try:
            fh = open(path, "w", newline="")
        except OSError as exc:
            raise OSError(f"cannot open {path}: {exc.strerror}") from exc
        with fh:
            yield fh


def _variants(arg: str) -> list:
    return list(VARIANTS) if arg == "all" else [canonical_variant(arg)]


def _functions(arg: str) -> list:
    if arg == "all":
        return list(FUNCTIONS)
    if arg not in FUNCTIONS:
        raise UsageError(f"unknown function {arg!r}; choose from {', '.join(FUNCTIONS)}")
    return [arg]


def _n_list(arg: str) -> list:
    try:
        ns = [int(v) for v in arg.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --n-list {arg!r}") from None
    for n in ns:
        if n < 2 or n & (n - 1):
            raise UsageError(f"N must be a power of two, got {n}")
    return ns


def _width(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise UsageError(f"N must be a power of two, got {n}")
    return n.bit_length() - 1


# -- commands -------------------------------------------------------------------


def cmd_gen(a, out):
    m = a.bits
    if m < 1 or m > 24:
        raise UsageError("--bits must be in 1..24")
    try:
        if a.rng == "counter":
            src = rng.counter(m)
        elif a.rng == "vdc":
            src = rng.vdc(a.base, m)
        elif a.rng == "lfsr":
            taps = rng.taps_from_polynomial(a.poly) if a.poly else None
            src = rng.lfsr(m, taps, a.seed)
        else:
            src = rng.sobol(a.dim, m)
    except rng.RngError as exc:
        raise UsageError(str(exc)) from None
    _echo(out, command="gen", source=src.to_dict(), count=a.count, offset=a.offset)
    vals = src.values(a.count, a.offset)
    sep = " " if a.oneline else "\n"
    out.write(sep.join(str(int(v)) for v in vals) + "\n")


def cmd_eval(a, out):
    fn = _functions(a.fn)[0]
    variant = canonical_variant(a.variant)
    N = a.n
    _width(N)
    if not 0 <= a.x <= 1:
        raise UsageError("--x must lie in [0, 1]")
    X = int(round(a.x * N))
    spec = builtin_spec(fn, variant, N)
    _echo(out, command="eval", config=spec.to_dict(), X=X)
    try:
        est = float(evaluate(spec, X))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    ref = true_reference(fn, X / N)
    out.write(f"{fn} {variant} N={N} X={X} x={fmt(X / N)} estimate={fmt(est)} reference={fmt(ref)} error={fmt(est - ref)}\n")


def cmd_sweep(a, out):
    fns = _functions(a.fn)
    variants = _variants(a.variant)
    ns = _n_list(a.n_list)
    if a.trials is not None:
        if a.trials < 1:
            raise UsageError("--trials must be >= 1")
        if a.trials > 1 and not any(v.endswith("lfsr") for v in variants):
            raise UsageError("--trials > 1 is only meaningful for LFSR variants")
    reports = []
    for v in variants:
        for f in fns:
            for n in ns:
                try:
                    spec = builtin_spec(f, v, n)
                except ConfigNotFound:
                    if len(variants) * len(fns) * len(ns) == 1:
                        raise
                    continue
                trials = a.trials if is_stochastic(spec) else 1
                _echo(out, command="sweep", config=spec.to_dict(), trials=trials or 1000, reference=a.reference)
                reports.append(mse_sweep(f, v, n, trials, a.reference, spec=spec, threads=a.threads))
    out.write("function,variant,N,trials,mse\n")
    for r in reports:
        out.write(f"{r.function},{r.variant},{r.N},{r.trials},{fmt(r.mse)}\n")
    if a.out:
        if a.format == "csv":
            with _open_out(a.out) as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(CSV_HEADER)
                for r in reports:
                    for x, e, ref, s in zip(r.X, r.estimate, r.reference, r.sq_error):
                        w.writerow([r.function, r.variant, r.N, int(x), fmt(e), fmt(ref), fmt(s)])
        elif len(reports) == 1:
            export_report(reports[0], a.out, "json")
        else:
            docs = []
            for r in reports:
                buf = io.StringIO()
                write_report(r, buf, "json")
                docs.append(json.loads(buf.getvalue()))
            with _open_out(a.out) as fh:
                json.dump(docs, fh, indent=1)
                fh.write("\n")


def cmd_corr(a, out):
    fn = _functions(a.fn)[0]
    variant = canonical_variant(a.variant)
    _width(a.n)
    spec = builtin_spec(fn, variant, a.n)
    _echo(out, command="corr", config=spec.to_dict(), stage=a.stage)
    profs = correlation_profile(fn, variant, a.n)
    if a.stage != "all":
        profs = [p for p in profs if p.stage == a.stage]
        if not profs:
            raise UsageError(f"stage {a.stage!r} not available for {fn}")
    with _open_out(a.out) as fh:
        fh.write("stage,X,scc,zce\n")
        for p in profs:
            for x, s, z in zip(p.X, p.scc, p.zce):
                fh.write(f"{p.stage},{int(x)},{fmt(s)},{fmt(z)}\n")


def cmd_fom(a, out):
    records = load_hw_costs(a.hw)
    if a.mse:
        try:
            table = mse_from_csv(a.mse)
        except OSError as exc:
            raise OSError(f"cannot read {a.mse}: {exc.strerror}") from exc
    else:
        table = {}
        for v in _variants(a.variant):
            for f in _functions(a.fn):
                for n in _n_list(a.n_list):
                    try:
                        table[(f, v, n)] = mse_sweep(f, v, n, a.trials).mse
                    except ConfigNotFound:
                        continue
    _echo(out, command="fom", hw=a.hw or "bundled", mse=a.mse or "computed")
    out.write("function,variant,N,mse,area_um2,power_uw,cpl_ns,fom\n")
    for (f, v, n), m in sorted(table.items()):
        try:
            hw = hw_cost(f, v, n, records)
        except ConfigNotFound:
            continue
        out.write(f"{f},{v},{n},{fmt(m)},{fmt(hw.area)},{fmt(hw.power)},{fmt(hw.cpl)},{fmt(fom(m, hw))}\n")


def _provider(a):
    return apps.SinCosProvider(None if a.variant == "exact" else a.variant, a.n)


def cmd_app(a, out):
    prov = _provider(a)
    if a.app == "rotate":
        _echo(out, command="app rotate", provider=repr(prov), alpha=a.alpha, interp=a.interp)
        if a.input:
            img = apps.read_pgm(a.input)
        else:
            img = apps.marker_pattern(a.size) if a.pattern == "marker" else apps.checkerboard(a.size)
        if not 0 <= a.alpha <= 1:
            raise UsageError("--alpha must lie in [0, 1]")
        res = apps.rotate_image(img, a.alpha, prov, a.interp)
        if a.out:
            apps.write_pgm(res, a.out)
        s, c = prov(a.alpha)
        out.write(f"alpha={fmt(a.alpha)} sin={fmt(s)} cos={fmt(c)} angle_error_deg={fmt(apps.angle_error(a.alpha, prov)) if a.alpha > 0 else 0}\n")
    elif a.app == "angle":
        _echo(out, command="app angle", provider=repr(prov), step=a.step)
        alphas = apps.alpha_grid(a.step)
        errs = [apps.angle_error(float(al), prov) for al in alphas]
        with _open_out(a.out) as fh:
            if a.out:
                fh.write("alpha,e_deg\n")
                for al, e in zip(alphas, errs):
                    fh.write(f"{fmt(al)},{fmt(e)}\n")
        out.write(f"mean_angle_error_deg={fmt(np.mean(errs))}\n")
    else:
        _echo(out, command="app arm", provider=repr(prov), grid=a.grid, L1=a.l1, L2=a.l2)
        rows = apps.perr_records(a.l1, a.l2, a.grid, prov)
        if a.out:
            with _open_out(a.out) as fh:
                fh.write("alpha1,alpha2,x_ref,y_ref,x_sc,y_sc,perr\n")
                for r in rows:
                    fh.write(",".join(fmt(v) for v in r) + "\n")
        out.write(f"mean_perr={fmt(np.mean([r[-1] for r in rows]))}\n")


def cmd_gate(a, out):
    try:
        sa = Bitstream.from_bits(a.a)
        sb = Bitstream.from_bits(a.b)
    except StreamError as exc:
        raise UsageError(str(exc)) from None
    _echo(out, command="gate", op=a.op, a=a.a, b=a.b, depth=a.depth)
    if a.op == "correlate":
        tr = gates.correlate_max(sa, sb, a.depth, trace=True)
    else:
        tr = {"jkff": gates.jkff_div, "cordiv": gates.cordiv}[a.op](sa, sb, trace=True)
    if a.trace:
        tr.write_csv(a.trace, ["a", "b"])
    out.write(f"output={tr.output} value={fmt(tr.output.ones() / tr.output.length)}\n")


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdcsc", description="Stochastic-computing function simulator")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="dump a number source")
    g.add_argument("--rng", choices=rng.KINDS, required=True)
    g.add_argument("--bits", type=int, required=True)
    g.add_argument("--base", type=int, default=2)
    g.add_argument("--poly", default=None, help='e.g. "x^10+x^8+x^6+1"')
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--offset", type=int, default=0)
    g.add_argument("--oneline", action="store_true", help="space-separated output")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="evaluate one circuit at one input")
    e.add_argument("--fn", required=True)
    e.add_argument("--variant", default="transc-star")
    e.add_argument("--n", type=int, default=1024)
    e.add_argument("--x", type=float, required=True, help="input value in [0, 1]")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="exhaustive MSE sweeps")
    s.add_argument("--fn", default="all")
    s.add_argument("--variant", default="transc-star")
    s.add_argument("--n-list", default="1024")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--reference", choices=("true", "maclaurin"), default="true")
    s.add_argument("--out", default=None)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("corr", help="SCC/ZCE profile of intermediate stages")
    c.add_argument("--fn", default="sin")
    c.add_argument("--variant", default="transc-star")
    c.add_argument("--n", type=int, default=1024)
    c.add_argument("--stage", default="all")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_corr)

    f = sub.add_parser("fom", help="figure of merit from MSE and hardware data")
    f.add_argument("--hw", default=None, help="hardware cost CSV (default: bundled)")
    f.add_argument("--mse", default=None, help="report CSV from sweep")
    f.add_argument("--fn", default="all")
    f.add_argument("--variant", default="transc-star")
    f.add_argument("--n-list", default="1024")
    f.add_argument("--trials", type=int, default=None)
    f.set_defaults(func=cmd_fom)

    a = sub.add_parser("app", help="image rotation and two-link arm")
    a.add_argument("app", choices=("rotate", "angle", "arm"))
    a.add_argument("--variant", default="transc-star", help="circuit variant or 'exact'")
    a.add_argument("--n", type=int, default=1024)
    a.add_argument("--alpha", type=float, default=0.5)
    a.add_argument("--input", default=None, help="PGM image (rotate)")
    a.add_argument("--pattern", choices=("checkerboard", "marker"), default="marker")
    a.add_argument("--size", type=int, default=128)
    a.add_argument("--interp", choices=("nearest", "bilinear"), default="nearest")
    a.add_argument("--step", type=float, default=0.01)
    a.add_argument("--grid", type=int, default=32)
    a.add_argument("--l1", type=float, default=0.5)
    a.add_argument("--l2", type=float, default=0.5)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_app)

    t = sub.add_parser("gate", help="run a sequential element on two streams")
    t.add_argument("--op", choices=("jkff", "cordiv", "correlate"), required=True)
    t.add_argument("--a", required=True, help="0/1 string")
    t.add_argument("--b", required=True, help="0/1 string")
    t.add_argument("--depth", type=int, default=None)
    t.add_argument("--trace", default=None, help="per-cycle CSV path")
    t.set_defaults(func=cmd_gate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        sys.stdout.write("# vdcsc " + shlex.join(argv) + "\n")
        args.func(args, sys.stdout)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigNotFound as exc:
        print(f"error: configuration not found: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, StreamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
