"""Accuracy sweeps, correlation profiles, figure of merit and report export."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .bitstream import pair_counts, scc_counts, zce_counts
from .circuits import (
    ConfigNotFound,
    HornerSpec,
    QuotientSpec,
    builtin_spec,
    canonical_variant,
    eval_circuit,
    evaluate,
    maclaurin_reference,
    spec_from_dict,
    true_reference,
)

CSV_HEADER = ("function", "variant", "N", "X", "estimate", "reference", "sq_error")
SEED_MULTIPLIER = 2654435761
DEFAULT_LFSR_TRIALS = 1000

# hardware data uses one design name per circuit family
HW_DESIGN = {
    "transc-star": "transc-star",
    "transc-club": "transc-club",
    "parhi-lfsr": "parhi",
    "parhi-sobol": "parhi",
    "chu-lfsr": "chu",
    "chu-sobol": "chu",
}


def fmt(v) -> str:
    """Float formatting used by every report (9 significant digits)."""
    return f"{float(v):.9g}"


def trial_seed(t: int, m: int) -> int:
    return (t * SEED_MULTIPLIER) % (1 << m) | 1


def is_stochastic(spec) -> bool:
    """True when the circuit uses LFSR sources, i.e. trials differ."""
    parts = [spec.numerator, spec.denominator] if isinstance(spec, QuotientSpec) else [spec]
    return any(s.kind == "lfsr" for p in parts for s in (p.input_source, *p.coeff_sources))


def sweep_inputs(function: str, N: int) -> np.ndarray:
    X = np.arange(N + 1)
    if function == "tan":
        X = X[X <= 0.78 * N]
    return X


@dataclass
class EvalReport:
    function: str
    variant: str
    N: int
    trials: int
    X: np.ndarray
    estimate: np.ndarray
    reference: np.ndarray
    config: dict = field(default_factory=dict)
    reference_kind: str = "true"

    @property
    def sq_error(self) -> np.ndarray:
        return (self.estimate - self.reference) ** 2

    @property
    def mse(self) -> float:
        if len(self.X) == 0:
            return float("nan")
        return float(np.mean(self.sq_error))

    def trial_mse(self) -> np.ndarray:
        """Per-trial MSE (records are stored trial-major)."""
        return self.sq_error.reshape(self.trials, -1).mean(axis=1)

    def __len__(self):
        return len(self.X)


def mse_sweep(
    function: str,
    variant: str,
    N: int,
    trials: int | None = None,
    reference: str = "true",
    spec=None,
    threads: int = 1,
    estimator=None,
) -> EvalReport:
    """Exhaustive sweep over X = 0..N (tan: X/N <= 0.78).

    Deterministic circuits run once.  LFSR circuits run ``trials`` times
    (default 1000) with seeds from :func:`trial_seed`.  ``estimator`` replaces
    the circuit (``f(spec, X) -> estimates``) for harness self-tests.
    """
    variant = canonical_variant(variant)
    if spec is None:
        spec = builtin_spec(function, variant, N)
    if is_stochastic(spec):
        trials = DEFAULT_LFSR_TRIALS if trials is None else trials
    else:
        trials = 1
    if trials < 1:
        raise ValueError("trials must be >= 1")
    X = sweep_inputs(function, N)
    ref_fn = true_reference if reference == "true" else maclaurin_reference
    ref = np.asarray(ref_fn(function, X / N), dtype=float)
    est_fn = estimator or (lambda s, xs: evaluate(s, xs))
    m = N.bit_length() - 1

    def one(t):
        s = spec.with_seed(trial_seed(t, m)) if trials > 1 or is_stochastic(spec) else spec
        return np.asarray(est_fn(s, X), dtype=float)

    if threads > 1 and trials > 1:
        with ThreadPoolExecutor(threads) as ex:
            ests = list(ex.map(one, range(trials)))
    else:
        ests = [one(t) for t in range(trials)]
    return EvalReport(
        function,
        variant,
        N,
        trials,
        np.tile(X, trials),
        np.concatenate(ests),
        np.tile(ref, trials),
        spec.to_dict(),
        reference,
    )


@dataclass
class CorrelationProfile:
    stage: str
    X: np.ndarray
    scc: np.ndarray
    zce: np.ndarray
    bins: np.ndarray = field(default_factory=lambda: np.linspace(-1.0, 1.0, 21))

    @property
    def scc_hist(self) -> np.ndarray:
        return np.histogram(np.clip(self.scc, -1, 1), bins=self.bins)[0]

    @property
    def zce_hist(self) -> np.ndarray:
        return np.histogram(np.clip(self.zce, -1, 1), bins=self.bins)[0]

    def fraction(self, metric: str, lo: float, hi: float) -> float:
        v = self.scc if metric == "scc" else self.zce
        return float(np.mean((v >= lo) & (v <= hi)))


def correlation_profile(function: str, variant: str, N: int, spec: HornerSpec | None = None) -> list:
    """SCC and ZCE between the two inputs of each cascade gate, for every X.

    Stage ``i1`` is the squaring gate (x and its delayed copy); ``i2``,
    ``i3`` ... are the successive cascade stages.
    """
    spec = spec or builtin_spec(function, variant, N)
    if isinstance(spec, QuotientSpec):
        spec = spec.numerator
    X = np.arange(N + 1)
    out = eval_circuit(spec, X)
    res = []
    for name, s1, s2 in out.pairs:
        if name == "out":
            continue
        p = pair_counts(s1, s2)
        res.append(
            CorrelationProfile(
                name,
                X,
                np.broadcast_to(scc_counts(p.a, p.b, p.c, p.d), X.shape).astype(float),
                np.broadcast_to(zce_counts(p.a, p.b, p.c, p.d), X.shape).astype(float),
            )
        )
    return res


# -- hardware data and figure of merit ----------------------------------------


@dataclass(frozen=True)
class HwCostRecord:
    function: str
    design: str
    N: int
    area: float
    cpl: float
    power: float
    energy: float


def _data_text(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text()


def load_hw_costs(path: str | Path | None = None) -> list:
    text = Path(path).read_text() if path else _data_text("hw_costs.csv")
    recs = []
    for row in csv.DictReader(io.StringIO(text)):
        recs.append(
            HwCostRecord(
                row["function"],
                row["design"],
                int(row["N"]),
                float(row["area_um2"]),
                float(row["cpl_ns"]),
                float(row["power_uw"]),
                float(row["energy_pj"]),
            )
        )
    return recs


def hw_cost(function: str, variant: str, N: int, records: list | None = None) -> HwCostRecord:
    design = HW_DESIGN.get(canonical_variant(variant), variant)
    for r in records if records is not None else load_hw_costs():
        if r.function == function and r.design == design and r.N == N:
            return r
    raise ConfigNotFound(f"no hardware data for ({function}, {design}, N={N})")


def load_table(name: str) -> list:
    """Rows of a bundled CSV (``hw_rng.csv``, ``cross_paradigm.csv``)."""
    return list(csv.DictReader(io.StringIO(_data_text(name))))


def fom(mse: float, hw: HwCostRecord) -> float:
    """(1 / MSE) / (area * power * CPL)."""
    if mse <= 0:
        raise ValueError("mse must be positive")
    return (1.0 / mse) / (hw.area * hw.power * hw.cpl)


# -- export ---------------------------------------------------------------------


def export_report(report: EvalReport, path, format: str = "csv") -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            write_report(report, fh, format)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc


def write_report(report: EvalReport, fh, format: str = "csv") -> None:
    if format == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for x, e, r, s in zip(report.X, report.estimate, report.reference, report.sq_error):
            w.writerow([report.function, report.variant, report.N, int(x), fmt(e), fmt(r), fmt(s)])
    elif format == "json":
        doc = {
            "function": report.function,
            "variant": report.variant,
            "N": report.N,
            "trials": report.trials,
            "reference": report.reference_kind,
            "mse": fmt(report.mse) if len(report) else None,
            "config": report.config,
            "records": [
                {"X": int(x), "estimate": fmt(e), "reference": fmt(r), "sq_error": fmt(s)}
                for x, e, r, s in zip(report.X, report.estimate, report.reference, report.sq_error)
            ],
        }
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def read_report_json(path) -> tuple:
    """(EvalReport, spec) from a JSON report."""
    doc = json.loads(Path(path).read_text())
    recs = doc["records"]
    rep = EvalReport(
        doc["function"],
        doc["variant"],
        int(doc["N"]),
        int(doc["trials"]),
        np.array([r["X"] for r in recs], dtype=np.int64),
        np.array([float(r["estimate"]) for r in recs]),
        np.array([float(r["reference"]) for r in recs]),
        doc["config"],
        doc.get("reference", "true"),
    )
    return rep, spec_from_dict(doc["config"])


def mse_from_csv(path) -> dict:
    """Mean squared error per (function, variant, N) from a report CSV."""
    acc: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["function"], row["variant"], int(row["N"]))
            s, n = acc.get(key, (0.0, 0))
            acc[key] = (s + float(row["sq_error"]), n + 1)
    return {k: s / n for k, (s, n) in acc.items()}
