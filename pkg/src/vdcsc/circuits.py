"""Horner-cascade circuits for truncated Maclaurin expansions.

A function is written as nested factors ``t_j = 1 - c_j * f_j * t_{j-1}``
(innermost first) where ``f_j`` is 1, x or x^2.  In hardware each stage is
an AND of the factor stream, the coefficient stream and the previous stage,
followed by an inverter.  Circuit descriptions (:class:`HornerSpec`) are
data: they live in JSON files under ``configs/`` and name the number source
of every stream plus the flip-flop delays inserted to decorrelate reused
streams.

Delay sites, in the order a ``delay_plan`` lists them:

* ``sq``: the delayed copy of x used to form x^2 (at least one cycle)
* one site per stage after the first whose factor is not a constant
* ``comb``: the copy of x feeding the output multiplier (``times_x`` only)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Sequence

import numpy as np

from . import rng
from .bitstream import Bitstream, encode, rotate, shift
from .gates import and_n, cordiv, correlate_max
from .rng import SequenceSource

F = Fraction

FUNCTIONS = ("sin", "cos", "tan", "tanh", "arctan", "sigmoid", "exp_neg", "sinc", "ln1p")
VARIANTS = ("transc-star", "transc-club", "parhi-lfsr", "chu-lfsr", "parhi-sobol", "chu-sobol")
VARIANT_ALIASES = {
    "star": "transc-star",
    "club": "transc-club",
    "transc★": "transc-star",
    "transc♣": "transc-club",
    "parhi": "parhi-lfsr",
    "chu": "chu-lfsr",
}
FACTORS = ("const", "x", "x2")

# Factored forms, innermost stage first: (factor, coefficient), combiner.
FORMS = {
    "sin": ([("x2", F(1, 42)), ("x2", F(1, 20)), ("x2", F(1, 6))], "times_x"),
    "cos": ([("x2", F(1, 56)), ("x2", F(1, 30)), ("x2", F(1, 12)), ("x2", F(1, 2))], "direct"),
    "tanh": ([("x2", F(17, 42)), ("x2", F(2, 5)), ("x2", F(1, 3))], "times_x"),
    "arctan": ([("x2", F(5, 21)), ("x2", F(3, 5)), ("x2", F(1, 3))], "times_x"),
    "sigmoid": ([("x2", F(1, 10)), ("x2", F(1, 12)), ("x", F(1, 2)), ("const", F(1, 2))], "direct"),
    "exp_neg": ([("x", F(1, 5)), ("x", F(1, 4)), ("x", F(1, 3)), ("x", F(1, 2)), ("x", F(1))], "direct"),
    "sinc": ([("x2", F(1, 42)), ("x2", F(1, 20)), ("x2", F(1, 6))], "direct"),
    "ln1p": ([("x", F(4, 5)), ("x", F(3, 4)), ("x", F(2, 3)), ("x", F(1, 2))], "times_x"),
}

# Expanded truncated series as {power: coefficient}.
SERIES = {
    "sin": {1: F(1), 3: F(-1, 6), 5: F(1, 120), 7: F(-1, 5040)},
    "cos": {0: F(1), 2: F(-1, 2), 4: F(1, 24), 6: F(-1, 720), 8: F(1, 40320)},
    "tanh": {1: F(1), 3: F(-1, 3), 5: F(2, 15), 7: F(-17, 315)},
    "arctan": {1: F(1), 3: F(-1, 3), 5: F(1, 5), 7: F(-1, 7)},
    "sigmoid": {0: F(1, 2), 1: F(1, 4), 3: F(-1, 48), 5: F(1, 480)},
    "exp_neg": {0: F(1), 1: F(-1), 2: F(1, 2), 3: F(-1, 6), 4: F(1, 24), 5: F(-1, 120)},
    "sinc": {0: F(1), 2: F(-1, 6), 4: F(1, 120), 6: F(-1, 5040)},
    "ln1p": {1: F(1), 2: F(-1, 2), 3: F(1, 3), 4: F(-1, 4), 5: F(1, 5)},
}


class ConfigNotFound(KeyError):
    """No bundled configuration for the requested combination."""


class DomainError(ValueError):
    """Argument outside the supported input range."""


def canonical_variant(variant: str) -> str:
    v = variant.lower()
    if v.startswith("sota-"):
        v = v[5:]
    v = VARIANT_ALIASES.get(v, v)
    if v not in VARIANTS:
        raise ConfigNotFound(f"unknown variant {variant!r}")
    return v


@dataclass(frozen=True)
class Stage:
    factor: str
    coeff: Fraction

    def __post_init__(self):
        if self.factor not in FACTORS:
            raise ValueError(f"unknown factor {self.factor!r}")
        if not 0 <= self.coeff <= 1:
            raise ValueError("coefficients must lie in [0, 1]")


@dataclass(frozen=True)
class HornerSpec:
    """One function circuit: stages inner to outer plus stream sources.

    ``coeff_sources`` holds one source per stage whose coefficient is not 1.
    ``delay_target`` selects where the stage delays act: on the recycled
    factor stream (``"factor"``), on a flip-flop chain along the factor so
    that each stage adds to the delay of the one before (``"chain"``), or on
    the incoming previous stage (``"carry"``).  ``delay_mode`` chooses
    periodic rotation or a shift with a zero fill.
    """

    function: str
    variant: str
    N: int
    stages: tuple
    combiner: str
    delay_plan: tuple
    input_source: SequenceSource
    coeff_sources: tuple
    delay_target: str = "factor"
    delay_mode: str = "rotate"
    notes: str = ""

    def __post_init__(self):
        if self.combiner not in ("direct", "times_x"):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if self.input_source.N != self.N:
            raise ValueError("input source width does not match N")
        needed = sum(1 for s in self.stages if s.coeff != 1)
        if len(self.coeff_sources) != needed:
            raise ValueError(f"expected {needed} coefficient sources, got {len(self.coeff_sources)}")
        for src in self.coeff_sources:
            if src.N != self.N:
                raise ValueError("coefficient source width does not match N")
        if len(self.delay_plan) > len(self.delay_sites):
            raise ValueError(f"delay plan {self.delay_plan} longer than sites {self.delay_sites}")
        if any(d < 0 for d in self.delay_plan):
            raise ValueError("delays must be non-negative")
        if self.delay_target not in ("factor", "chain", "carry"):
            raise ValueError(f"unknown delay target {self.delay_target!r}")

    @property
    def uses_square(self) -> bool:
        return any(s.factor == "x2" for s in self.stages)

    @property
    def delay_sites(self) -> tuple:
        sites = ["sq"] if self.uses_square else []
        sites += [f"s{j + 1}" for j, s in enumerate(self.stages) if j > 0 and s.factor != "const"]
        if self.combiner == "times_x":
            sites.append("comb")
        return tuple(sites)

    def delays(self) -> dict:
        plan = list(self.delay_plan) + [0] * len(self.delay_sites)
        return dict(zip(self.delay_sites, plan))

    def with_seed(self, seed: int) -> "HornerSpec":
        """Same circuit with every LFSR source reseeded."""

        def re(src):
            return replace(src, seed=seed % src.N or 1) if src.kind == "lfsr" else src

        return replace(self, input_source=re(self.input_source), coeff_sources=tuple(re(s) for s in self.coeff_sources))

    def real_value(self, x: float) -> float:
        """Cascade evaluated in real arithmetic."""
        t = None
        for s in self.stages:
            f = {"const": 1.0, "x": x, "x2": x * x}[s.factor]
            t = 1.0 - float(s.coeff) * f * (1.0 if t is None else t)
        return x * t if self.combiner == "times_x" else t

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "variant": self.variant,
            "N": self.N,
            "stages": [[s.factor, str(s.coeff)] for s in self.stages],
            "combiner": self.combiner,
            "delay_plan": list(self.delay_plan),
            "delay_sites": list(self.delay_sites),
            "delay_target": self.delay_target,
            "delay_mode": self.delay_mode,
            "input": self.input_source.to_dict(),
            "coeffs": [s.to_dict() for s in self.coeff_sources],
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HornerSpec":
        return cls(
            function=d["function"],
            variant=d["variant"],
            N=int(d["N"]),
            stages=tuple(Stage(f, Fraction(c)) for f, c in d["stages"]),
            combiner=d["combiner"],
            delay_plan=tuple(int(v) for v in d["delay_plan"]),
            input_source=SequenceSource.from_dict(d["input"]),
            coeff_sources=tuple(SequenceSource.from_dict(s) for s in d["coeffs"]),
            delay_target=d.get("delay_target", "factor"),
            delay_mode=d.get("delay_mode", "rotate"),
            notes=d.get("notes", ""),
        )


@dataclass(frozen=True)
class QuotientSpec:
    """tan as sin/cos: two cascades, a correlator and a CORDIV divider."""

    function: str
    variant: str
    N: int
    numerator: HornerSpec
    denominator: HornerSpec
    depth: int | None = None
    max_x: float = 0.78

    def with_seed(self, seed: int) -> "QuotientSpec":
        return replace(self, numerator=self.numerator.with_seed(seed), denominator=self.denominator.with_seed(seed))

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "variant": self.variant,
            "N": self.N,
            "numerator": self.numerator.to_dict(),
            "denominator": self.denominator.to_dict(),
            "depth": self.depth,
            "max_x": self.max_x,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuotientSpec":
        return cls(
            function=d["function"],
            variant=d["variant"],
            N=int(d["N"]),
            numerator=HornerSpec.from_dict(d["numerator"]),
            denominator=HornerSpec.from_dict(d["denominator"]),
            depth=d.get("depth"),
            max_x=float(d.get("max_x", 0.78)),
        )


def spec_from_dict(d: dict):
    return QuotientSpec.from_dict(d) if "numerator" in d else HornerSpec.from_dict(d)


@dataclass
class CircuitOutput:
    output: Bitstream
    taps: dict
    # (tap name, first gate input, second gate input) for correlation profiling
    pairs: list = field(default_factory=list)


# -- configuration tables ---------------------------------------------------


def _source(entry: dict, m: int) -> SequenceSource:
    kind = entry["kind"]
    if kind == "vdc":
        return rng.vdc(int(entry["base"]), m)
    if kind == "counter":
        return rng.counter(m)
    if kind == "lfsr":
        taps = entry.get("taps")
        taps = tuple(taps) if taps is not None else rng.taps_from_polynomial(entry["poly"])
        return rng.lfsr(m, taps, entry.get("seed"))
    if kind == "sobol":
        return rng.sobol(int(entry["dim"]), m)
    raise ValueError(f"unknown source kind {kind!r}")


def _build(function: str, variant: str, N: int, entry: dict) -> HornerSpec:
    m = N.bit_length() - 1
    stages, combiner = FORMS[function]
    return HornerSpec(
        function=function,
        variant=variant,
        N=N,
        stages=tuple(Stage(f, c) for f, c in stages),
        combiner=combiner,
        delay_plan=tuple(entry.get("delays", ())),
        input_source=_source(entry["input"], m),
        coeff_sources=tuple(_source(c, m) for c in entry["coeffs"]),
        delay_target=entry.get("delay_target", "factor"),
        notes=entry.get("notes", ""),
    )


def load_config(variant: str) -> dict:
    variant = canonical_variant(variant)
    try:
        text = resources.files(__package__).joinpath("configs", f"{variant}.json").read_text()
    except FileNotFoundError as exc:
        raise ConfigNotFound(variant) from exc
    return json.loads(text)


def available(variant: str) -> list:
    """(function, N) pairs bundled for ``variant``."""
    cfg = load_config(variant)
    return sorted((f, int(n)) for f, per_n in cfg["functions"].items() for n in per_n)


def builtin_spec(function: str, variant: str, N: int, literal: bool = False):
    """Bundled circuit for (function, variant, N).

    Entries that were re-tuned keep the reference assignment under
    ``table``; ``literal=True`` returns that one instead.
    """
    variant = canonical_variant(variant)
    if function not in FUNCTIONS:
        raise ConfigNotFound(f"unknown function {function!r}")
    cfg = load_config(variant)
    try:
        entry = cfg["functions"][function][str(N)]
    except KeyError as exc:
        raise ConfigNotFound(f"no configuration for ({function}, {variant}, N={N})") from exc
    if literal:
        entry = entry.get("table", entry)
    if function == "tan":
        return QuotientSpec(
            "tan",
            variant,
            N,
            _build("sin", variant, N, entry["numerator"]),
            _build("cos", variant, N, entry["denominator"]),
            entry.get("depth"),
        )
    return _build(function, variant, N, entry)


# -- simulation ---------------------------------------------------------------


def quantize(c: Fraction, N: int) -> int:
    """Nearest integer to c*N, halves rounded up."""
    return math.floor(c * N + F(1, 2))


def _delay(s: Bitstream, k: int, mode: str) -> Bitstream:
    if k == 0:
        return s
    return rotate(s, k) if mode == "rotate" else shift(s, k, False)


def eval_circuit(spec: HornerSpec, X) -> CircuitOutput:
    """Simulate ``spec`` for input(s) ``X`` (integer or integer array)."""
    x = encode(X, spec.input_source)
    d = spec.delays()
    mode = spec.delay_mode
    taps = {"x": x}
    pairs = []
    sq = None
    if spec.uses_square:
        xd = _delay(x, max(d["sq"], 1), mode)
        sq = x & xd
        taps["i1"] = sq
        pairs.append(("i1", x, xd))
    ones = Bitstream.constant(True, spec.N)
    coeff = iter(spec.coeff_sources)
    t = None
    chain = 0
    for j, st in enumerate(spec.stages):
        site = d.get(f"s{j + 1}", 0)
        chain += site
        f = {"const": None, "x": x, "x2": sq}[st.factor]
        if f is not None and spec.delay_target != "carry":
            f = _delay(f, chain if spec.delay_target == "chain" else site, mode)
        carry = t
        if carry is not None and spec.delay_target == "carry":
            carry = _delay(carry, site, mode)
        c = encode(quantize(st.coeff, spec.N), next(coeff)) if st.coeff != 1 else None
        ins = [s for s in (f, c, carry) if s is not None]
        t = ~and_n(ins) if ins else ~ones
        name = f"i{j + 1 + spec.uses_square}"
        taps[f"t{j + 1}"] = taps[name] = t
        # the pair carrying the product of interest at this stage
        if carry is None:
            pair = (f, c) if f is not None and c is not None else None
        else:
            pair = (f if f is not None else c, carry) if (f is not None or c is not None) else None
        if pair is not None:
            pairs.append((name, *pair))
    if spec.combiner == "times_x":
        xc = _delay(x, d["comb"], mode)
        out = t & xc
        pairs.append(("out", xc, t))
    else:
        out = t
    taps["out"] = out
    return CircuitOutput(out, taps, pairs)


def eval_quotient(spec: QuotientSpec, X, check_domain: bool = True) -> CircuitOutput:
    Xa = np.asarray(X)
    if check_domain and np.any(Xa > spec.max_x * spec.N):
        raise DomainError(f"tan is supported for x <= {spec.max_x}")
    s = eval_circuit(spec.numerator, X).output
    c = eval_circuit(spec.denominator, X).output
    s2, c2 = correlate_max(s, c, spec.depth or spec.N)
    q = cordiv(s2, c2)
    return CircuitOutput(q, {"sin": s, "cos": c, "sin_corr": s2, "quotient": q}, [("corr", s2, c2)])


def evaluate(spec, X) -> np.ndarray | float:
    """Decoded output value(s) of any bundled circuit kind."""
    out = (eval_quotient(spec, X) if isinstance(spec, QuotientSpec) else eval_circuit(spec, X)).output
    return out.mean()


def eval_tan(variant: str, N: int, X: int) -> Fraction:
    spec = builtin_spec("tan", variant, N)
    if not 0 <= X <= N:
        raise DomainError("X out of range")
    out = eval_quotient(spec, X).output
    return Fraction(out.ones(), N)


def poly_power(X: int, k: int, N: int, source: SequenceSource, mode: str = "rotate") -> Bitstream:
    """x^k from one stream: AND of k copies delayed by 0..k-1 cycles."""
    if k not in (2, 3, 4, 5):
        raise ValueError("k must be in 2..5")
    if source.N != N:
        raise ValueError("source width does not match N")
    x = encode(X, source)
    return and_n([_delay(x, j, mode) for j in range(k)])


# -- real-valued references ---------------------------------------------------


def maclaurin_reference(function: str, x):
    """Truncated series used by the circuits (tan = ratio of sin and cos)."""
    if function == "tan":
        return maclaurin_reference("sin", x) / maclaurin_reference("cos", x)
    xa = np.asarray(x, dtype=float)
    out = sum(float(c) * xa**p for p, c in SERIES[function].items())
    return float(out) if np.ndim(out) == 0 else out


def true_reference(function: str, x):
    xa = np.asarray(x, dtype=float)
    if function == "sinc":
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(xa == 0, 1.0, np.sin(xa) / np.where(xa == 0, 1.0, xa))
    else:
        fn = {
            "sin": np.sin,
            "cos": np.cos,
            "tan": np.tan,
            "tanh": np.tanh,
            "arctan": np.arctan,
            "sigmoid": lambda v: 1.0 / (1.0 + np.exp(-v)),
            "exp_neg": lambda v: np.exp(-v),
            "ln1p": np.log1p,
        }[function]
        out = fn(xa)
    return float(out) if np.ndim(out) == 0 else out


def horner_real(function: str, x: float) -> float:
    """Nested form of ``FORMS`` in real arithmetic."""
    stages, comb = FORMS[function]
    t = None
    for fac, c in stages:
        f = {"const": 1.0, "x": x, "x2": x * x}[fac]
        t = 1.0 - float(c) * f * (1.0 if t is None else t)
    return x * t if comb == "times_x" else t


def spec_variants(function: str, N: int, variants: Sequence[str] = VARIANTS) -> list:
    """Bundled specs for ``function`` at ``N`` across ``variants``."""
    out = []
    for v in variants:
        try:
            out.append(builtin_spec(function, v, N))
        except ConfigNotFound:
            pass
    return out
