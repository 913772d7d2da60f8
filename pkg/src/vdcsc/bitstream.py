"""Packed bit-streams, comparator encoding and correlation metrics.

A :class:`Bitstream` stores bits MSB-first in ``uint8`` words
(``np.packbits`` layout).  Leading axes form a batch, so one object can hold
the streams for every input value of a sweep and all gate operations run
word-parallel across the whole batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import SequenceSource


class StreamError(ValueError):
    """Invalid stream argument or mismatched lengths."""


class Bitstream:
    __slots__ = ("words", "length")

    def __init__(self, words: np.ndarray, length: int):
        words = np.asarray(words, dtype=np.uint8)
        if words.shape[-1] != (length + 7) // 8:
            raise StreamError("word count does not match length")
        pad = (-length) % 8
        if pad:
            words = words.copy()
            words[..., -1] &= np.uint8((0xFF << pad) & 0xFF)
        words.setflags(write=False)
        self.words = words
        self.length = length

    @classmethod
    def from_bits(cls, bits) -> "Bitstream":
        """Build from a 0/1 string or a boolean array (last axis = time)."""
        if isinstance(bits, str):
            clean = "".join(c for c in bits if not c.isspace() and c != "_")
            if set(clean) - {"0", "1"}:
                raise StreamError(f"not a 0/1 string: {bits!r}")
            bits = np.array([c == "1" for c in clean], dtype=bool)
        bits = np.asarray(bits, dtype=bool)
        if bits.shape[-1] == 0:
            raise StreamError("stream length must be positive")
        return cls(np.packbits(bits, axis=-1), bits.shape[-1])

    @classmethod
    def constant(cls, value: bool, length: int, batch: tuple = ()) -> "Bitstream":
        fill = 0xFF if value else 0
        return cls(np.full(batch + ((length + 7) // 8,), fill, dtype=np.uint8), length)

    @property
    def batch_shape(self) -> tuple:
        return self.words.shape[:-1]

    @property
    def bits(self) -> np.ndarray:
        return np.unpackbits(self.words, axis=-1, count=self.length).astype(bool)

    def ones(self):
        """Number of ones per stream (int, or int array for a batch)."""
        cnt = np.bitwise_count(self.words).sum(axis=-1, dtype=np.int64)
        return int(cnt) if cnt.ndim == 0 else cnt

    def mean(self):
        """Decoded value as float (array for a batch)."""
        return np.asarray(self.ones()) / self.length if self.batch_shape else self.ones() / self.length

    def __getitem__(self, idx) -> "Bitstream":
        if not self.batch_shape:
            raise StreamError("cannot index an unbatched stream")
        return Bitstream(self.words[idx], self.length)

    def _check(self, other: "Bitstream"):
        if not isinstance(other, Bitstream):
            return NotImplemented
        if other.length != self.length:
            raise StreamError(f"length mismatch: {self.length} vs {other.length}")

    def __and__(self, other):
        self._check(other)
        return Bitstream(self.words & other.words, self.length)

    def __or__(self, other):
        self._check(other)
        return Bitstream(self.words | other.words, self.length)

    def __xor__(self, other):
        self._check(other)
        return Bitstream(self.words ^ other.words, self.length)

    def __invert__(self):
        return Bitstream(~self.words, self.length)

    def __eq__(self, other):
        if not isinstance(other, Bitstream):
            return NotImplemented
        return (
            self.length == other.length
            and self.words.shape == other.words.shape
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.length, self.words.shape, self.words.tobytes()))

    def __len__(self):
        return self.length

    def __str__(self):
        if self.batch_shape:
            return "\n".join(str(self[i]) for i in range(self.batch_shape[0]))
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self):
        if self.batch_shape:
            return f"Bitstream(batch={self.batch_shape}, length={self.length})"
        return f"Bitstream('{self}')"


def encode(X, source: SequenceSource, offset: int = 0) -> Bitstream:
    """Comparator encoding: bit i is 1 iff ``X > R(offset + i)``.

    ``X`` may be an integer or an integer array; the result is batched over
    the shape of ``X``.
    """
    Xa = np.asarray(X, dtype=np.int64)
    N = source.N
    if np.any(Xa < 0) or np.any(Xa > N):
        raise StreamError(f"X must lie in [0, {N}]")
    R = source.values(N, offset)
    return Bitstream.from_bits(Xa[..., None] > R)


def decode(s: Bitstream) -> Fraction:
    """Exact ones/N of an unbatched stream."""
    if s.batch_shape:
        raise StreamError("decode expects a single stream; use Bitstream.mean for batches")
    return Fraction(s.ones(), s.length)


def rotate(s: Bitstream, k: int) -> Bitstream:
    """Circular shift: output index i takes input index (i + k) mod N."""
    k %= s.length
    if k == 0:
        return s
    return Bitstream.from_bits(np.roll(s.bits, -k, axis=-1))


def shift(s: Bitstream, k: int, initial: bool = False) -> Bitstream:
    """Non-circular delay used for sensitivity studies.

    The same direction as :func:`rotate`, with the ``k`` vacated positions
    filled by ``initial``.
    """
    if k <= 0:
        return s
    b = s.bits
    out = np.full_like(b, initial)
    if k < s.length:
        out[..., : s.length - k] = b[..., k:]
    return Bitstream.from_bits(out)


@dataclass(frozen=True)
class PairCounts:
    """Joint occurrences of the bit pairs 11, 10, 01 and 00."""

    a: object
    b: object
    c: object
    d: object

    @property
    def N(self):
        return self.a + self.b + self.c + self.d


def pair_counts(s1: Bitstream, s2: Bitstream) -> PairCounts:
    s1._check(s2)
    n1 = np.asarray(s1.ones())
    n2 = np.asarray(s2.ones())
    a = np.asarray((s1 & s2).ones())
    b = n1 - a
    c = n2 - a
    d = s1.length - a - b - c
    if a.ndim == 0:
        return PairCounts(int(a), int(b), int(c), int(d))
    return PairCounts(a, b, c, d)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def scc_counts(a, b, c, d):
    """SCC from pair counts; degenerate denominators give 0."""
    a, b, c, d = (np.asarray(v, dtype=np.int64) for v in (a, b, c, d))
    N = a + b + c + d
    cov = a * d - b * c
    p1 = a + b
    p2 = a + c
    pos = N * np.minimum(p1, p2) - p1 * p2
    neg = p1 * p2 - N * np.maximum(a - d, 0)
    den = np.where(cov > 0, pos, neg)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den != 0, cov / np.where(den == 0, 1, den), 0.0)
    return _scalar(out)


def scc(s1: Bitstream, s2: Bitstream):
    p = pair_counts(s1, s2)
    return scc_counts(p.a, p.b, p.c, p.d)


def zce_counts(a, b, c, d):
    """Zero-correlation error: the deviation from the nearest achievable
    independent overlap, 0 when the overlap already equals the product."""
    a, b, c, d = (np.asarray(v, dtype=np.int64) for v in (a, b, c, d))
    N = a + b + c + d
    prod = (a + b) * (a + c)
    delta = a / N - prod / N**2
    delta0 = np.floor(prod / N + 0.5) / N - prod / N**2
    out = np.where(a * N == prod, 0.0, delta - delta0)
    return _scalar(out)


def zce(s1: Bitstream, s2: Bitstream):
    p = pair_counts(s1, s2)
    return zce_counts(p.a, p.b, p.c, p.d)
