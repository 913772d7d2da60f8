"""Stochastic-computing primitives.

Combinational gates are word-parallel operations on packed streams.
Sequential elements (JK divider, CORDIV, correlator) step cycle by cycle but
vectorise across the batch axis, so a whole sweep advances together.
Every operation accepts ``trace=True`` to return a :class:`GateTrace`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .bitstream import Bitstream, StreamError, rotate, shift


@dataclass
class GateTrace:
    inputs: list
    output: Bitstream
    state_log: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def write_csv(self, path, names: Sequence[str] | None = None):
        """Per-cycle dump of inputs, state and output (unbatched streams)."""
        names = list(names or [f"in{k}" for k in range(len(self.inputs))])
        cols = [s.bits for s in self.inputs]
        out = self.output.bits
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["cycle", *names, "state", "output"] if self.state_log is not None else ["cycle", *names, "output"]
            w.writerow(header)
            for i in range(self.output.length):
                row = [i, *(int(c[i]) for c in cols)]
                if self.state_log is not None:
                    row.append(int(self.state_log[i]))
                row.append(int(out[i]))
                w.writerow(row)


def _check(*streams: Bitstream):
    n = streams[0].length
    for s in streams[1:]:
        if s.length != n:
            raise StreamError(f"length mismatch: {n} vs {s.length}")


def _ret(out, inputs, trace, state=None, **extra):
    return GateTrace(list(inputs), out, state, extra) if trace else out


def and2(a: Bitstream, b: Bitstream, trace: bool = False):
    _check(a, b)
    return _ret(a & b, (a, b), trace)


def or2(a: Bitstream, b: Bitstream, trace: bool = False):
    _check(a, b)
    return _ret(a | b, (a, b), trace)


def xor2(a: Bitstream, b: Bitstream, trace: bool = False):
    _check(a, b)
    return _ret(a ^ b, (a, b), trace)


def not1(a: Bitstream, trace: bool = False):
    return _ret(~a, (a,), trace)


def nand2(a: Bitstream, b: Bitstream, trace: bool = False):
    _check(a, b)
    return _ret(~(a & b), (a, b), trace)


def and_n(streams: Sequence[Bitstream]) -> Bitstream:
    """Multi-input AND as a balanced tree of two-input gates."""
    streams = list(streams)
    if not streams:
        raise StreamError("and_n needs at least one input")
    _check(*streams)
    while len(streams) > 1:
        nxt = [streams[k] & streams[k + 1] for k in range(0, len(streams) - 1, 2)]
        if len(streams) % 2:
            nxt.append(streams[-1])
        streams = nxt
    return streams[0]


def mux_add(a: Bitstream, b: Bitstream, sel: Bitstream, trace: bool = False):
    """Scaled addition: ``sel ? a : b``."""
    _check(a, b, sel)
    return _ret((sel & a) | (~sel & b), (a, b, sel), trace)


def mux_sub(a: Bitstream, b: Bitstream, sel: Bitstream, trace: bool = False):
    """Scaled subtraction: ``sel ? a : not b``."""
    _check(a, b, sel)
    return _ret((sel & a) | (~sel & ~b), (a, b, sel), trace)


def dff_delay(s: Bitstream, k: int = 1, mode: str = "rotate", initial: bool = False, trace: bool = False):
    """Chain of ``k`` flip-flops.

    ``mode="rotate"`` treats the stream as periodic; ``mode="shift"`` fills
    the first ``k`` cycles with ``initial``.
    """
    if k < 0:
        raise StreamError("delay must be non-negative")
    if mode == "rotate":
        out = rotate(s, k)
    elif mode == "shift":
        out = shift(s, k, initial)
    else:
        raise StreamError(f"unknown delay mode {mode!r}")
    return _ret(out, (s,), trace)


def _cycles(*streams: Bitstream):
    # time-major views so that each cycle is a contiguous batch vector
    return [np.ascontiguousarray(np.moveaxis(s.bits, -1, 0)) for s in streams]


def _pack(out_t: np.ndarray) -> Bitstream:
    return Bitstream.from_bits(np.moveaxis(out_t, 0, -1))


def jkff_div(j: Bitstream, k: Bitstream, trace: bool = False):
    """JK flip-flop divider; output is the state after each update."""
    _check(j, k)
    jt, kt = _cycles(j, k)
    y = np.zeros(jt.shape[1:], dtype=bool)
    out = np.empty_like(jt)
    for i in range(jt.shape[0]):
        y = (jt[i] & ~y) | (~kt[i] & y)
        out[i] = y
    res = _pack(out)
    return _ret(res, (j, k), trace, np.moveaxis(out, 0, -1))


def cordiv(dividend: Bitstream, divisor: Bitstream, trace: bool = False):
    """Correlated divider: copy the dividend when the divisor is 1, else
    repeat the last copied bit (state starts at 0)."""
    _check(dividend, divisor)
    at, bt = _cycles(dividend, divisor)
    s = np.zeros(at.shape[1:], dtype=bool)
    out = np.empty_like(at)
    for i in range(at.shape[0]):
        s = np.where(bt[i], at[i], s)
        out[i] = s
    res = _pack(out)
    return _ret(res, (dividend, divisor), trace, np.moveaxis(out, 0, -1))


def correlate_max(a: Bitstream, b: Bitstream, depth: int | None = None, trace: bool = False):
    """Re-time ``a`` towards maximal positive correlation with ``b``.

    Ones of ``a`` that meet a 0 in ``b`` are deferred in a counter (up to
    ``depth``) and released on later cycles where ``b`` is 1 and ``a`` is 0.
    Returns ``(a', b)``; with ``trace=True`` the trace's ``extra`` holds the
    residual counter value (ones dropped at stream end).
    """
    _check(a, b)
    if depth is None:
        depth = a.length
    if depth < 1:
        raise StreamError("depth must be positive")
    at, bt = _cycles(a, b)
    c = np.zeros(at.shape[1:], dtype=np.int64)
    out = np.empty_like(at)
    log = np.empty(at.shape, dtype=np.int64)
    for i in range(at.shape[0]):
        ai, bi = at[i], bt[i]
        defer = ai & ~bi & (c < depth)
        release = ~ai & bi & (c > 0)
        out[i] = (ai & ~defer) | release
        c = c + defer - release
        log[i] = c
    a2 = _pack(out)
    if trace:
        residual = int(c) if c.ndim == 0 else c
        return GateTrace([a, b], a2, np.moveaxis(log, 0, -1), {"b": b, "residual": residual})
    return a2, b
