"""Stochastic-computing simulator for transcendental functions built on
Van der Corput bit-stream generators."""

from .bitstream import Bitstream, PairCounts, decode, encode, pair_counts, rotate, scc, zce
from .circuits import (
    FUNCTIONS,
    VARIANTS,
    ConfigNotFound,
    DomainError,
    HornerSpec,
    QuotientSpec,
    builtin_spec,
    eval_circuit,
    eval_tan,
    maclaurin_reference,
    poly_power,
    true_reference,
)
from .rng import SequenceSource, lfsr_value_at, radical_inverse, sobol_value_at, vdc_value_at

__version__ = "0.1.0"
