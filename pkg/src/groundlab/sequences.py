"""Dyadic measure sequences, connectification, finite accumulation views.

Computability here means: a total deterministic program producing, for each
index, a measure whose weights are dyadic rationals.  Dyadic measures are
dense among word measures and closed under the convex interpolation used by
connectify, so everything stays exact.

A finite-horizon accumulation view is an epsilon-net of a tail segment; it
approximates the true accumulation set, which is a limit object no finite
computation pins down.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

from .measures import WordMeasure, greedy_net, weak_star_distance
from .tiles import InputError


def is_dyadic(q: Fraction) -> bool:
    d = Fraction(q).denominator
    return d & (d - 1) == 0


class DyadicMeasure(WordMeasure):
    """Word measure whose weights all have power-of-two denominators."""

    def __init__(self, depth: int, weights):
        super().__init__(depth, weights)
        for w in self.weights:
            if not is_dyadic(w):
                raise InputError(f"non-dyadic weight {w}")

    @classmethod
    def from_word_measure(cls, m: WordMeasure) -> "DyadicMeasure":
        return cls(m.depth, m.weights)


def bernoulli(p, depth: int = 1) -> DyadicMeasure:
    """Product measure with per-letter chance p of 'd'; p must be dyadic."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise InputError("p must lie in [0, 1]")
    ws = []
    for i in range(2 ** depth):
        w = Fraction(1)
        for j in range(depth):
            w *= p if (i >> j) & 1 else 1 - p
        ws.append(w)
    return DyadicMeasure(depth, ws)


@dataclass
class ComputableSequence:
    """Total deterministic index -> dyadic measure, fixed declared depth."""

    generator: Callable[[int], DyadicMeasure]
    depth: int
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def term(self, n: int) -> DyadicMeasure:
        if n < 0:
            raise InputError("sequence index must be >= 0")
        if n not in self._cache:
            m = self.generator(n)
            if not isinstance(m, DyadicMeasure):
                m = DyadicMeasure.from_word_measure(m)
            if m.depth != self.depth:
                raise InputError(f"term {n} has depth {m.depth}, "
                                 f"declared {self.depth}")
            self._cache[n] = m
        return self._cache[n]


def constant_sequence(m: DyadicMeasure, name: str = "constant") -> ComputableSequence:
    return ComputableSequence(lambda n: m, m.depth, name)


def alternating_sequence(a: DyadicMeasure, b: DyadicMeasure,
                         name: str = "alternating") -> ComputableSequence:
    if a.depth != b.depth:
        raise InputError("alternating terms need equal depth")
    return ComputableSequence(lambda n: a if n % 2 == 0 else b, a.depth, name)


def sweep_fraction(n: int) -> Fraction:
    """Breadth-first dyadic enumeration: 0, 1/2, 1/4, 3/4, 1/8, 3/8, ..."""
    if n == 0:
        return Fraction(0)
    v = n.bit_length()
    r = n - (1 << (v - 1))
    return Fraction(2 * r + 1, 1 << v)


def dyadic_sweep(depth: int = 1) -> ComputableSequence:
    """Sequence dense in the Bernoulli segment between the two point masses."""
    return ComputableSequence(lambda n: bernoulli(sweep_fraction(n), depth),
                              depth, "sweep")


# ---------------------------------------------------------- connectify ----

def _block_size(n: int) -> int:
    # power of two >= n + 1, so interpolation coefficients stay dyadic and
    # block n is wide enough for the 1/floor(sqrt(m)) envelope
    return 1 << (n + 1).bit_length()


def connectify_envelope(m: int) -> Fraction:
    """Declared bound on d(y_m, y_{m+1}) for the connectified sequence."""
    if m < 1:
        raise InputError("envelope defined for m >= 1")
    return Fraction(1, math.isqrt(m))


def _locate(m: int) -> tuple:
    # walk blocks: output index m -> (original index n, step s within block)
    n = 0
    while m >= _block_size(n):
        m -= _block_size(n)
        n += 1
    return n, m


def connectify(seq: ComputableSequence) -> ComputableSequence:
    """Insert convex interpolation so consecutive distances vanish.

    Block n holds _block_size(n) steps from term n toward term n + 1; every
    original term appears verbatim at the block boundaries, so the original
    tail embeds in the output tail and the accumulation set gains only the
    connecting segments.
    """
    def gen(m: int) -> DyadicMeasure:
        n, s = _locate(m)
        if s == 0:
            return seq.term(n)
        a, b = seq.term(n), seq.term(n + 1)
        c = Fraction(s, _block_size(n))
        ws = [(1 - c) * wa + c * wb for wa, wb in zip(a.weights, b.weights)]
        return DyadicMeasure(seq.depth, ws)

    return ComputableSequence(gen, seq.depth, f"connectify({seq.name})")


def original_position(seq_index: int) -> int:
    """Output index where connectify places original term seq_index."""
    return sum(_block_size(j) for j in range(seq_index))


# ------------------------------------------------- finite accumulation ----

@dataclass
class AccumulationSet:
    start: int
    stop: int
    resolution: Fraction
    representatives: List[DyadicMeasure]
    indices: List[int]
    hausdorff: Fraction

    def covers(self, point: WordMeasure, slack: Fraction = Fraction(0)) -> bool:
        return any(weak_star_distance(point, r) <= self.resolution + slack
                   for r in self.representatives)

    def to_json(self) -> str:
        doc = {
            "start": self.start,
            "stop": self.stop,
            "resolution": [self.resolution.numerator,
                           self.resolution.denominator],
            "hausdorff": [self.hausdorff.numerator,
                          self.hausdorff.denominator],
            "representatives": [
                {w: [v.numerator, v.denominator]
                 for w, v in sorted(r.as_dict().items())}
                for r in self.representatives],
            "indices": list(self.indices),
        }
        return json.dumps(doc, indent=1)


def finite_accumulation(seq: ComputableSequence, N: int,
                        resolution) -> AccumulationSet:
    """Epsilon-net of the tail {term(n) : ceil(N/2) <= n <= N}."""
    if N < 1:
        raise InputError("horizon N must be >= 1")
    resolution = Fraction(resolution)
    if resolution <= 0:
        raise InputError("resolution must be > 0")
    start = (N + 1) // 2
    points = [seq.term(n) for n in range(start, N + 1)]
    reps, _, worst = greedy_net(points, resolution)
    return AccumulationSet(start, N, resolution,
                           [points[i] for i in reps],
                           [start + i for i in reps], worst)


# ----------------------------------------------------------- built-ins ----

def named_sequence(name: str, depth: int = 1) -> ComputableSequence:
    """Built-in sequences addressable by name (for config files and tests)."""
    du = bernoulli(0, depth)
    dd = bernoulli(1, depth)
    table = {
        "constant-u": lambda: constant_sequence(du, "constant-u"),
        "constant-d": lambda: constant_sequence(dd, "constant-d"),
        "uniform": lambda: constant_sequence(bernoulli(Fraction(1, 2), depth),
                                             "uniform"),
        "alternating": lambda: alternating_sequence(du, dd),
        "sweep": lambda: dyadic_sweep(depth),
    }
    if name not in table:
        raise InputError(f"unknown sequence {name!r}; "
                         f"choices: {sorted(table)}")
    return table[name]()


def sequence_from_json(text: str) -> ComputableSequence:
    """{"builtin": name, "depth": l, "connectify": bool} descriptor."""
    try:
        doc = json.loads(text)
        seq = named_sequence(doc["builtin"], int(doc.get("depth", 1)))
        if doc.get("connectify", False):
            seq = connectify(seq)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed sequence descriptor: {exc}") from exc
    return seq
