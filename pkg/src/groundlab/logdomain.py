"""Rigorous base-2 logarithms as exact rational intervals.

Quantities like 16^(3^k) are far too large to hold as numbers, but their
logarithms are exact rationals, and logarithms of awkward integers can be
enclosed in rational intervals as tight as needed.  A LogInterval [lo, hi]
always satisfies lo <= log2(value) <= hi with lo, hi exact Fractions, so
every comparison made through it is a proof, not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .tiles import InputError

_Q = Union[int, Fraction]

# denominators in capped bounds never exceed 2^_CAP_BITS
_CAP_BITS = 120


@dataclass(frozen=True)
class LogInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise InputError(f"inverted interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, v: _Q) -> "LogInterval":
        v = Fraction(v)
        return cls(v, v)

    def __add__(self, other: "LogInterval") -> "LogInterval":
        return LogInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "LogInterval") -> "LogInterval":
        return LogInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "LogInterval":
        return LogInterval(-self.hi, -self.lo)

    def scale(self, c: _Q) -> "LogInterval":
        c = Fraction(c)
        if c >= 0:
            return LogInterval(c * self.lo, c * self.hi)
        return LogInterval(c * self.hi, c * self.lo)

    def shift(self, c: _Q) -> "LogInterval":
        c = Fraction(c)
        return LogInterval(self.lo + c, self.hi + c)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, v: _Q) -> bool:
        return self.lo <= Fraction(v) <= self.hi

    def definitely_less(self, other: "LogInterval") -> bool:
        return self.hi < other.lo

    def definitely_greater(self, other: "LogInterval") -> bool:
        return self.lo > other.hi

    def overlaps(self, other: "LogInterval") -> bool:
        return not (self.definitely_less(other) or self.definitely_greater(other))

    def midpoint_float(self) -> float:
        return float((self.lo + self.hi) / 2)

    def __repr__(self):
        return f"LogInterval({float(self.lo):.6g}, {float(self.hi):.6g})"


def log2_of_int(n: int, bits: int = 48) -> LogInterval:
    """Enclose log2(n) by extracting binary digits from a mantissa interval.

    The mantissa is tracked as an integer interval with floor/ceil rounding
    through repeated squaring; when the interval straddles a digit boundary
    the enclosure returned is still rigorous, just wider than 2^-bits.
    """
    if n <= 0:
        raise InputError("log2 of a non-positive integer")
    e = n.bit_length() - 1
    if n == 1 << e:
        return LogInterval.exact(e)
    w = bits + 32
    if e <= w:
        a = b = n << (w - e)
    else:
        a = n >> (e - w)
        b = a + 1
    two = 2 << w
    acc = 0
    for i in range(1, bits + 1):
        a = (a * a) >> w
        b = ((b * b) + (1 << w) - 1) >> w
        bit_lo = a >= two
        bit_hi = b >= two
        if bit_lo != bit_hi:
            # digit uncertain: everything past the previous digit is slack
            return LogInterval(e + Fraction(acc, 1 << (i - 1)),
                               e + Fraction(acc + 1, 1 << (i - 1)))
        acc <<= 1
        if bit_lo:
            acc += 1
            a >>= 1
            b = (b + 1) >> 1
    return LogInterval(e + Fraction(acc, 1 << bits),
                       e + Fraction(acc + 1, 1 << bits))


def log2_of_fraction(q: Fraction, bits: int = 48) -> LogInterval:
    q = Fraction(q)
    if q <= 0:
        raise InputError("log2 of a non-positive rational")
    return log2_of_int(q.numerator, bits) - log2_of_int(q.denominator, bits)


def log2_pow2_plus(n: int, c: int) -> LogInterval:
    """Enclose log2(2^n + c) without ever materializing 2^n."""
    if n < 0 or c < 0:
        raise InputError("log2_pow2_plus needs n, c >= 0")
    if c == 0:
        return LogInterval.exact(n)
    if n <= 64:
        return log2_of_int((1 << n) + c)
    # log2(1 + c 2^-n) <= 2 c 2^-n, with the denominator capped for sanity
    slack = Fraction(2 * c, 1 << min(n, _CAP_BITS))
    return LogInterval(Fraction(n), n + slack)


def log2_pow2_minus(n: int, c: int) -> LogInterval:
    """Enclose log2(2^n - c); requires c < 2^(n-1) so the bound is valid."""
    if n < 1 or c < 0:
        raise InputError("log2_pow2_minus needs n >= 1, c >= 0")
    if c == 0:
        return LogInterval.exact(n)
    if c.bit_length() > n - 1:
        raise InputError("c too large for the minus bound")
    if n <= 64:
        return log2_of_int((1 << n) - c)
    # for x = c 2^-n <= 1/2: log2(1 - x) >= -2x (chord bound on [0, 1/2])
    slack = Fraction(2 * c, 1 << min(n, _CAP_BITS))
    return LogInterval(n - slack, Fraction(n))
