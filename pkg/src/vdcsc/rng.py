"""Deterministic number sources for bit-stream generation.

Every source is indexable: ``value_at(i)`` is a pure function of the source
description and the index, so sweeps can be split freely across workers.
Four kinds are provided:

* ``counter``: ``i mod 2**m``
* ``vdc``: Van der Corput generator built by reversing n-bit groups of a counter
* ``lfsr``: Fibonacci linear feedback shift register
* ``sobol``: binary Sobol sequence with a bundled direction-number table
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

KINDS = ("counter", "vdc", "lfsr", "sobol")

# Primitive polynomials (s, a, m_1..m_s) for Sobol dimensions 2 onwards,
# taken from the widely used Joe & Kuo table.  Dimension 1 is the
# van der Corput sequence and needs no entry.
_SOBOL_TABLE = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
)
SOBOL_MAX_DIM = len(_SOBOL_TABLE) + 1

# Known maximal-length tap sets, keyed by register width.
DEFAULT_TAPS = {
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 11, 10, 4),
}


class RngError(ValueError):
    """Invalid generator argument."""


def radical_inverse(i: int, base: int) -> Fraction:
    """Reflect the base-``base`` digits of ``i`` about the radix point."""
    if base < 2:
        raise RngError(f"base must be >= 2, got {base}")
    if i < 0:
        raise RngError(f"index must be non-negative, got {i}")
    num, den = 0, 1
    while i:
        i, digit = divmod(i, base)
        num = num * base + digit
        den *= base
    return Fraction(num, den)


def vdc_value_at(n: int, m: int, i: int) -> int:
    """Group-reversal VDC-2^n value for index ``i`` on an m-bit counter."""
    if n < 1 or m < 1:
        raise RngError("group size and width must be positive")
    groups = -(-m // n)
    word = i % (1 << m)
    mask = (1 << n) - 1
    rev = 0
    for _ in range(groups):
        rev = (rev << n) | (word & mask)
        word >>= n
    return rev >> (groups * n - m)


def taps_from_polynomial(poly: str | Sequence[int]) -> tuple[int, ...]:
    """Parse ``"x^10+x^8+x^6+1"`` (or an exponent list) into feedback taps.

    A trailing constant term ``1`` is the feedback input itself in the
    polynomial notation.  When the remaining tap count is odd, the all-ones
    state maps onto itself, so the constant is read as a tap on stage 1.
    """
    if isinstance(poly, str):
        exps = []
        for term in poly.replace(" ", "").replace("-", "+").split("+"):
            if not term:
                continue
            if term == "1":
                exps.append(0)
            elif term == "x":
                exps.append(1)
            elif term.startswith("x^"):
                exps.append(int(term[2:]))
            elif term.startswith("x"):
                exps.append(int(term[1:]))
            else:
                raise RngError(f"cannot parse polynomial term {term!r}")
    else:
        exps = [int(e) for e in poly]
    taps = sorted({e for e in exps if e > 0}, reverse=True)
    if not taps:
        raise RngError("polynomial has no taps")
    if 0 in exps and len(taps) % 2 == 1 and 1 not in taps:
        taps.append(1)
    return tuple(taps)


def lfsr_step(state: int, taps: Sequence[int], m: int) -> int:
    fb = 0
    for t in taps:
        fb ^= (state >> (t - 1)) & 1
    return ((state << 1) | fb) & ((1 << m) - 1)


@dataclass(frozen=True)
class SequenceSource:
    """Description of a number source emitting integers in ``[0, 2**m)``.

    ``n`` is the VDC group size, ``taps``/``seed`` configure an LFSR and
    ``dim`` selects the Sobol dimension.
    """

    kind: str
    m: int
    n: int = 1
    taps: tuple[int, ...] = ()
    seed: int = 0
    dim: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RngError(f"unknown source kind {self.kind!r}")
        if self.m < 1:
            raise RngError("width must be positive")
        if self.kind == "vdc" and self.n < 1:
            raise RngError("VDC group size must be positive")
        if self.kind == "lfsr":
            if not self.taps or max(self.taps) != self.m or min(self.taps) < 1:
                raise RngError(f"taps {self.taps} invalid for width {self.m}")
            if self.seed % (1 << self.m) == 0:
                raise RngError("LFSR seed must be nonzero")
        if self.kind == "sobol" and not 1 <= self.dim <= SOBOL_MAX_DIM:
            raise RngError(f"Sobol dimension must be in 1..{SOBOL_MAX_DIM}")

    @property
    def N(self) -> int:
        return 1 << self.m

    @property
    def label(self) -> str:
        if self.kind == "vdc":
            return f"VDC-{1 << self.n}"
        if self.kind == "lfsr":
            return f"LFSR{list(self.taps)}@{self.seed}"
        if self.kind == "sobol":
            return f"Sobol-{self.dim}"
        return "Counter"

    def value_at(self, i: int) -> int:
        if i < 0:
            raise RngError("index must be non-negative")
        if self.kind == "counter":
            return i % self.N
        if self.kind == "vdc":
            return vdc_value_at(self.n, self.m, i)
        return int(self.values(i + 1)[i])

    def values(self, count: int, offset: int = 0) -> np.ndarray:
        """``value_at(offset + k)`` for ``k < count`` as an int64 array."""
        idx = np.arange(offset, offset + count, dtype=np.int64)
        if self.kind == "counter":
            return idx % self.N
        if self.kind == "vdc":
            return _vdc_table(self.n, self.m)[idx % self.N]
        if self.kind == "lfsr":
            orbit = _lfsr_orbit(self.taps, self.seed % (1 << self.m), self.m)
            return orbit[idx % len(orbit)]
        return _sobol_table(self.dim, self.m)[idx % self.N]

    def stream(self, offset: int = 0) -> Iterator[int]:
        """Cycle-by-cycle view of the source."""
        i = offset
        while True:
            yield self.value_at(i)
            i += 1

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "m": self.m}
        if self.kind == "vdc":
            d["n"] = self.n
        elif self.kind == "lfsr":
            d["taps"] = list(self.taps)
            d["seed"] = self.seed
        elif self.kind == "sobol":
            d["dim"] = self.dim
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceSource":
        return cls(
            kind=d["kind"],
            m=int(d["m"]),
            n=int(d.get("n", 1)),
            taps=tuple(int(t) for t in d.get("taps", ())),
            seed=int(d.get("seed", 0)),
            dim=int(d.get("dim", 1)),
        )


def counter(m: int) -> SequenceSource:
    return SequenceSource("counter", m)


def vdc(base: int, m: int) -> SequenceSource:
    """VDC-``base`` source; ``base`` must be a power of two."""
    if base < 2 or base & (base - 1):
        raise RngError(f"VDC base must be a power of two >= 2, got {base}")
    return SequenceSource("vdc", m, n=base.bit_length() - 1)


def lfsr(m: int, taps: Sequence[int] | str | None = None, seed: int | None = None) -> SequenceSource:
    if taps is None:
        if m not in DEFAULT_TAPS:
            raise RngError(f"no default taps for width {m}")
        taps = DEFAULT_TAPS[m]
    elif isinstance(taps, str):
        taps = taps_from_polynomial(taps)
    if seed is None:
        seed = (1 << m) - 1
    return SequenceSource("lfsr", m, taps=tuple(int(t) for t in taps), seed=seed)


def sobol(dim: int, m: int) -> SequenceSource:
    return SequenceSource("sobol", m, dim=dim)


def lfsr_value_at(taps: Sequence[int], seed: int, i: int, m: int) -> int:
    """Register state after ``i`` shifts from ``seed``."""
    return lfsr(m, tuple(taps), seed).value_at(i)


def sobol_value_at(dim: int, m: int, i: int) -> int:
    if i >= 1 << m:
        raise RngError("Sobol index must be below 2**m")
    return sobol(dim, m).value_at(i)


@functools.lru_cache(maxsize=None)
def _vdc_table(n: int, m: int) -> np.ndarray:
    groups = -(-m // n)
    word = np.arange(1 << m, dtype=np.int64)
    rev = np.zeros_like(word)
    mask = (1 << n) - 1
    for _ in range(groups):
        rev = (rev << n) | (word & mask)
        word >>= n
    rev >>= groups * n - m
    rev.setflags(write=False)
    return rev


@functools.lru_cache(maxsize=None)
def _lfsr_orbit(taps: tuple[int, ...], seed: int, m: int) -> np.ndarray:
    """States visited from ``seed`` until the orbit closes.

    The top tap is always stage m, so the update is a bijection and every
    orbit returns to its seed.
    """
    states = [seed]
    s = lfsr_step(seed, taps, m)
    while s != seed:
        states.append(s)
        s = lfsr_step(s, taps, m)
    out = np.array(states, dtype=np.int64)
    out.setflags(write=False)
    return out


def _direction_numbers(dim: int, bits: int) -> list[int]:
    if dim == 1:
        return [1 << (bits - 1 - k) for k in range(bits)]
    s, a, m_init = _SOBOL_TABLE[dim - 2]
    mk = list(m_init)
    for k in range(s, bits):
        val = mk[k - s] ^ (mk[k - s] << s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                val ^= mk[k - j] << j
        mk.append(val)
    return [mk[k] << (bits - 1 - k) for k in range(bits)]


@functools.lru_cache(maxsize=None)
def _sobol_table(dim: int, m: int) -> np.ndarray:
    v = _direction_numbers(dim, m)
    out = np.zeros(1 << m, dtype=np.int64)
    for i in range(1, 1 << m):
        c = i
        x = 0
        k = 0
        while c:
            if c & 1:
                x ^= v[k]
            c >>= 1
            k += 1
        out[i] = x
    out.setflags(write=False)
    return out
