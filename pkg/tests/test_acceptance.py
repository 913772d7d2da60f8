"""Acceptance suite: one PASS/FAIL line per criterion, then an honest assert."""

import hashlib
import time
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from vdcsc import apps as A
from vdcsc import circuits as C
from vdcsc import evaluation as E
from vdcsc import gates, rng
from vdcsc.bitstream import Bitstream, decode, encode, scc, zce

STAR_LIMIT = dict(sin=1.6, cos=3.3, tan=2.2, tanh=8.7, sigmoid=0.22, exp_neg=9.1, arctan=2.6, sinc=0.38, ln1p=3.0)
CLUB_REF = dict(sin=0.888, cos=1.342, tan=5.471, tanh=3.164, sigmoid=0.151, exp_neg=1.73, arctan=1.733, sinc=0.181, ln1p=0.734)
PARHI_REF = dict(sin=2.256, cos=2.518, tan=9.845, tanh=6.579, sigmoid=2.903, exp_neg=9.331, arctan=1.947, sinc=7.081, ln1p=4.131)
DIGESTS = {
    "hw_costs.csv": "b94451bcf2e18910fe7fd2b44c166045a79c3ade58cf38df772b95ddb7ff3e8b",
    "hw_rng.csv": "7ed9dc905069edb9a3dfb216f987368ef6c07e8b415dfc5b7a04d944bc9ff33b",
    "cross_paradigm.csv": "744e23c877f8cf8821f241297af82bc8b0057e02e816c004f5fffce228b2d003",
}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def e4(v):
    return f"{v * 1e4:.3f}"


def test_criterion_01_vdc_exact(capsys):
    t0 = time.perf_counter()
    bad = 0
    for n in range(1, 11):
        base = 2**n
        got = rng.vdc(base, 10).values(1024)
        want = [int(rng.radical_inverse(i, base) * 1024) for i in range(1024)]
        bad += int(np.sum(got != np.array(want)))
        if 10 % n == 0 and sorted(got.tolist()) != list(range(1024)):
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 1
    report(capsys, 1, ok, f"VDC-2^n n=1..10 m=10, mismatches={bad}, {dt:.3f}s (< 1 s)")
    assert ok


def test_criterion_02_encoding_exact(capsys):
    t0 = time.perf_counter()
    bad = 0
    for m in range(6, 11):
        N = 2**m
        X = np.arange(N + 1)
        sources = [rng.counter(m)] + [rng.vdc(2**n, m) for n in range(1, m + 1) if m % n == 0]
        for src in sources:
            bad += int(np.sum(encode(X, src).ones() != X))
            bad += sum(decode(encode(int(x), src)) != Fraction(int(x), N) for x in (0, 1, N // 3, N - 1, N))
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 1
    report(capsys, 2, ok, f"decode(encode(X)) = X/N for N=64..1024, mismatches={bad}, {dt:.3f}s (< 1 s)")
    assert ok


def test_criterion_03_correlation_examples(capsys):
    B = Bitstream.from_bits
    pairs = [("00001111", "00111111", 1, Fraction(4, 8)), ("11110000", "00111111", -1, Fraction(2, 8)), ("01010101", "00111111", 0, Fraction(3, 8))]
    got = [(scc(B(a), B(b)), decode(gates.and2(B(a), B(b)))) for a, b, _, _ in pairs]
    z = zce(B("01010101"), B("00111111"))
    ok = all(s == w and d == dw for (s, d), (_, _, w, dw) in zip(got, pairs)) and z == 0
    report(capsys, 3, ok, f"SCC={[float(s) for s, _ in got]} AND={[str(d) for _, d in got]} ZCE={float(z)}")
    assert ok


@pytest.fixture(scope="module")
def mse1024():
    out = {}
    for v in ("transc-star", "transc-club"):
        for f in C.FUNCTIONS:
            out[v, f] = E.mse_sweep(f, v, 1024).mse
    return out


def test_criterion_04_table_reproduction(capsys, mse1024):
    star_bad = [f for f in C.FUNCTIONS if mse1024["transc-star", f] > STAR_LIMIT[f] * 1e-4]
    club_bad = [f for f in C.FUNCTIONS if mse1024["transc-club", f] > 3 * CLUB_REF[f] * 1e-4]
    ok = not star_bad and not club_bad
    star = " ".join(f"{f}={e4(mse1024['transc-star', f])}" for f in C.FUNCTIONS)
    club = " ".join(f"{f}={e4(mse1024['transc-club', f])}" for f in C.FUNCTIONS)
    report(capsys, 4, ok, f"x1e-4 star[{star}] club[{club}] over-limit star={star_bad} club={club_bad}")
    assert ok


def test_criterion_05_sin_trend(capsys):
    ladder = [E.mse_sweep("sin", "transc-star", n).mse for n in (64, 128, 256, 512, 1024)]
    ok = all(a >= b for a, b in zip(ladder, ladder[1:]))
    report(capsys, 5, ok, "sin star N=64..1024 x1e-4: " + " -> ".join(e4(v) for v in ladder))
    assert ok


def test_criterion_06_baseline_dominance(capsys, mse1024):
    t0 = time.perf_counter()
    parhi = {f: E.mse_sweep(f, "parhi-lfsr", 1024, trials=1000, threads=4).mse for f in C.FUNCTIONS}
    dt = time.perf_counter() - t0
    not_dominated = [f for f in C.FUNCTIONS if not mse1024["transc-star", f] < parhi[f]]
    out_of_band = [f for f in C.FUNCTIONS if not PARHI_REF[f] / 3 <= parhi[f] * 1e4 <= 3 * PARHI_REF[f]]
    ok = not not_dominated and not out_of_band and dt < 900
    detail = " ".join(f"{f}={e4(parhi[f])}" for f in C.FUNCTIONS)
    report(capsys, 6, ok, f"parhi-lfsr 1000 trials x1e-4 [{detail}] star-not-better={not_dominated} outside [1/3,3]x={out_of_band} {dt:.0f}s")
    assert ok


def test_criterion_07_sin_stage_correlation(capsys):
    profs = {p.stage: p for p in E.correlation_profile("sin", "transc-star", 1024)}
    i1 = float(np.mean(profs["i1"].scc == -1))
    i2 = float(np.mean(np.abs(profs["i2"].scc) <= 0.1))
    zce_ok = {s: float(np.mean(np.abs(profs[s].zce) <= 0.05)) for s in ("i2", "i3", "i4")}
    ok = i1 >= 0.99 and i2 >= 0.9 and all(v >= 0.9 for v in zce_ok.values())
    report(capsys, 7, ok, f"i1 SCC=-1 frac={i1:.3f} (>=0.99), i2 |SCC|<=0.1 frac={i2:.3f} (>=0.9), |ZCE|<=0.05 fracs={zce_ok}")
    assert ok


def test_criterion_08_fom(capsys):
    hw = E.hw_cost("sin", "transc-star", 1024)
    v = E.fom(0.523e-4, hw)
    ok = abs(v / 0.0965 - 1) <= 1e-3
    report(capsys, 8, ok, f"FoM(0.523e-4; area={hw.area}, power={hw.power}, cpl={hw.cpl}) = {v:.6f} vs 0.0965")
    assert ok


def test_criterion_09_apps(capsys):
    t0 = time.perf_counter()
    exact = max(A.angle_error(float(a), A.SinCosProvider()) for a in A.alpha_grid())
    ang = {n: A.mean_angle_error(A.SinCosProvider("transc-star", n)) for n in (256, 512, 1024)}
    perr = {n: (A.perr_sweep(variant="transc-star", N=n), A.perr_sweep(variant="parhi-lfsr", N=n)) for n in (256, 512, 1024)}
    dt = time.perf_counter() - t0
    ok = (
        exact <= 1e-12
        and ang[1024] <= 0.25
        and ang[256] >= ang[512] >= ang[1024]
        and all(s < p for s, p in perr.values())
        and dt < 120
    )
    angs = " ".join(f"{n}:{v:.3f}" for n, v in ang.items())
    perrs = " ".join(f"{n}:{s:.4f}<{p:.4f}" for n, (s, p) in perr.items())
    report(capsys, 9, ok, f"exact err={exact:.1e} deg, star angle err [{angs}] deg, PErr star<parhi [{perrs}], {dt:.0f}s")
    assert ok


def test_criterion_10_hardware_data(capsys):
    root = resources.files("vdcsc").joinpath("data")
    digests_ok = all(hashlib.sha256(root.joinpath(n).read_bytes()).hexdigest() == d for n, d in DIGESTS.items())
    recs = E.load_hw_costs()
    ok = digests_ok and len(recs) == 108 and abs(E.fom(0.523e-4, E.hw_cost("sin", "transc-star", 1024)) / 0.0965 - 1) <= 1e-3
    report(capsys, 10, ok, f"bundled tables byte-exact={digests_ok}, {len(recs)} cost records, FoM arithmetic ok")
    assert ok
