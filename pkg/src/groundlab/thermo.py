"""Marker cardinality growth, entropy criteria, and temperature windows.

Everything here lives in the base-2 log domain: the marker counts at scale k
have exponents like 16^(3^k), so the numbers themselves are untouchable but
their logarithms are exact rationals (or tight rational intervals).  All
comparisons go through LogInterval so that every pass/fail verdict is a
rigorous statement about the extended-precision values, never about floats.

Scale k uses squares of side l(k) = 2^(n(k)) - 1 with n(k) = 2*3^k + 1, the
hierarchy level at which a fresh macro-tile row appears.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .layers import OdometerSchedule, default_schedule
from .logdomain import LogInterval, log2_of_fraction, log2_of_int, log2_pow2_minus
from .tiles import InputError

_Q = Union[int, Fraction]

# exponents 4*3^k are materialized as exact integers; past this scale the
# supporting bigints pass 20M bits and the caller must be told, not given
# saturated garbage
PRECISION_MAX_K = 14


def scale_index(k: int) -> int:
    """Hierarchy level n(k) = 2*3^k + 1 whose side hosts the scale-k markers."""
    if k < 0:
        raise InputError("scale index needs k >= 0")
    return 2 * 3 ** k + 1


def window_side_log2(k: int) -> LogInterval:
    """log2 of the side l(k) = 2^(n(k)) - 1."""
    return log2_pow2_minus(scale_index(k), 1)


def window_area_log2(k: int) -> LogInterval:
    """log2 of the area of the scale-k square window, side l(k)."""
    return window_side_log2(k).scale(2)


@dataclass(frozen=True)
class CardinalityBound:
    """Bounds on log2 of the marker counts at one scale.

    log2_QH encloses log2 of the number of hot markers, log2_QB the blocking
    ones; log2_area is the log2 area of the scale-k window.  Bounds are exact
    Fractions, so the interval endpoints can be compared exactly.
    """

    k: int
    seed_mode: str
    log2_QH: LogInterval
    log2_QB: LogInterval
    log2_area: LogInterval

    def log2_growth_rate(self) -> Tuple[Fraction, Fraction]:
        """Bounds on log2(C) where hot count = C^(16^(3^k))."""
        total = Fraction(1 << (4 * 3 ** self.k))
        return (self.log2_QH.lo / total, self.log2_QH.hi / total)


def pair_seed_shift(k: int) -> LogInterval:
    """Additive log2 term the pair-seed mode contributes to the blocking count:
    each blocking marker carries one of the k+1 selector words."""
    if k < 0:
        raise InputError("pair seed shift needs k >= 0")
    return log2_of_int(k + 1)


def cardinality_bounds(k: int, seed_mode: str = "single") -> CardinalityBound:
    """Enclose log2 of the scale-k marker counts.

    Hot markers: 4^(-k) * 16^(3^k) <= log2 count <= 16^(3^k), both ends exact.
    Blocking markers: 3/4 of the hot exponent; in pair-seed mode each blocking
    marker additionally carries one of k+1 selector words, adding log2(k+1).
    """
    if seed_mode not in ("single", "pair"):
        raise InputError(f"unknown seed mode {seed_mode!r}")
    if k < 0:
        raise InputError("cardinality bounds need k >= 0")
    if k > PRECISION_MAX_K:
        raise InputError(
            f"exponent 4*3^{k} exceeds the supported precision range "
            f"(k <= {PRECISION_MAX_K})")
    hi = Fraction(1 << (4 * 3 ** k))
    qh = LogInterval(hi / 4 ** k, hi)
    qb = qh.scale(Fraction(3, 4))
    if seed_mode == "pair":
        qb = qb + pair_seed_shift(k)
    return CardinalityBound(k=k, seed_mode=seed_mode, log2_QH=qh,
                            log2_QB=qb, log2_area=window_area_log2(k))


def normalized_entropy(bound: CardinalityBound) -> Tuple[Fraction, Fraction]:
    """Exact bounds on the per-side entropy log2(QH) / l(k).

    Reducing the Fractions costs a bigint gcd, so this is meant for small k;
    entropy_criterion never calls it and stays fast at every scale.
    """
    side = (1 << scale_index(bound.k)) - 1
    return (bound.log2_QH.lo / side, bound.log2_QH.hi / side)


def kappa_for(k: int, schedule: Optional[OdometerSchedule] = None,
              c: _Q = 1) -> Fraction:
    """Non-hot density budget c / t_k for the odometer schedule."""
    sched = schedule if schedule is not None else default_schedule()
    return Fraction(c) / sched.t(k)


def entropy_criterion(k: int, bounds: Mapping[int, CardinalityBound],
                      kappa: _Q) -> str:
    """Check h(k+2) >= (1 - kappa) * h(k) for per-side entropies h.

    Returns "pass" or "fail" when the interval bounds decide the inequality,
    "indeterminate" when they straddle it.
    """
    kappa = Fraction(kappa)
    if not 0 <= kappa <= 1:
        raise InputError("kappa must lie in [0, 1]")
    try:
        b0, b2 = bounds[k], bounds[k + 2]
    except KeyError:
        raise InputError(f"entropy criterion needs bounds at {k} and {k + 2}")
    if kappa == 1:
        return "pass"
    q = 1 - kappa
    s0, s2 = scale_index(b0.k), scale_index(b2.k)
    side0, side2 = log2_pow2_minus(s0, 1), log2_pow2_minus(s2, 1)
    log_q = log2_of_fraction(q)
    t_lo = log2_of_fraction(b2.log2_QH.lo) - side2
    t_hi = log2_of_fraction(b2.log2_QH.hi) - side2
    f_lo = log2_of_fraction(b0.log2_QH.lo) - side0
    f_hi = log2_of_fraction(b0.log2_QH.hi) - side0
    if t_lo.lo >= (log_q + f_hi).hi:
        return "pass"
    if t_hi.hi < (log_q + f_lo).lo:
        return "fail"

    # log enclosures straddle the inequality: settle it exactly.  Cross
    # multiplication only (bigint division would be quadratic).
    def h_ge(a: Fraction, b: Fraction) -> bool:
        # a / (2^s2 - 1) >= q * b / (2^s0 - 1)
        lhs = a.numerator * ((1 << s0) - 1) * q.denominator * b.denominator
        rhs = q.numerator * b.numerator * a.denominator * ((1 << s2) - 1)
        return lhs >= rhs

    if h_ge(b2.log2_QH.lo, b0.log2_QH.hi):
        return "pass"
    if not h_ge(b2.log2_QH.hi, b0.log2_QH.lo):
        return "fail"
    return "indeterminate"


@dataclass(frozen=True)
class TemperatureWindow:
    k: int
    log2_beta_lo: LogInterval
    log2_beta_hi: LogInterval
    C: Fraction
    C_prime: Fraction
    r: int

    def nonempty(self) -> bool:
        return self.log2_beta_lo.definitely_less(self.log2_beta_hi)

    def log2_width(self) -> LogInterval:
        return self.log2_beta_hi - self.log2_beta_lo


def temperature_window(k: int, C: _Q = 1, C_prime: _Q = 1,
                       r: int = 2) -> TemperatureWindow:
    """Inverse-temperature window for the scale-k marker set.

    With eps(k) = l(k)^(-1/2):
      beta_lo = (C / eps) * area(k)
      beta_hi = C' * eps * area(k+2) / boundary(k+2, r)
    where boundary(N, r) = |I_N| - |I_(N-2r)| = 4r(N - r) is the mass a range-r
    interaction can place near the rim of the side-N square.
    """
    C, Cp = Fraction(C), Fraction(C_prime)
    if C <= 0 or Cp <= 0:
        raise InputError("constants C, C' must be positive")
    if not isinstance(r, int) or r < 1:
        raise InputError("interaction range r must be an integer >= 1")
    log_eps = window_side_log2(k).scale(Fraction(-1, 2))
    beta_lo = log2_of_fraction(C) - log_eps + window_area_log2(k)
    # side at scale k+2 is 2^n - 1, so side - r = 2^n - (1 + r)
    n2 = scale_index(k + 2)
    boundary = LogInterval.exact(2) + log2_of_int(r) \
        + log2_pow2_minus(n2, 1 + r)
    beta_hi = log2_of_fraction(Cp) + log_eps + window_area_log2(k + 2) \
        - boundary
    return TemperatureWindow(k=k, log2_beta_lo=beta_lo, log2_beta_hi=beta_hi,
                             C=C, C_prime=Cp, r=r)


@dataclass(frozen=True)
class OverlapRow:
    k: int
    log2_ratio: LogInterval

    def overlaps(self) -> bool:
        return self.log2_ratio.lo > 0


def overlap_check(k_range: Iterable[int], C: _Q = 1, C_prime: _Q = 1,
                  r: int = 2) -> List[OverlapRow]:
    """log2(beta_hi(k)) - log2(beta_lo(k+1)) per k; positive means the windows
    for consecutive scales overlap."""
    ks = sorted(set(k_range))
    if not ks:
        raise InputError("empty scale range")
    windows: Dict[int, TemperatureWindow] = {}
    for k in set(ks) | {k + 1 for k in ks}:
        windows[k] = temperature_window(k, C, C_prime, r)
    return [OverlapRow(k, windows[k].log2_beta_hi - windows[k + 1].log2_beta_lo)
            for k in ks]


def first_overlap_scale(rows: Iterable[OverlapRow]) -> Optional[int]:
    """Smallest k whose window definitely overlaps the next one."""
    for row in sorted(rows, key=lambda r: r.k):
        if row.overlaps():
            return row.k
    return None


def thermo_table(k_min: int, k_max: int, C: _Q = 1, C_prime: _Q = 1,
                 r: int = 2, c: _Q = 1,
                 schedule: Optional[OdometerSchedule] = None) -> List[dict]:
    """Per-scale summary rows combining windows, overlaps, and entropy."""
    if k_min < 0 or k_max < k_min:
        raise InputError("need 0 <= k_min <= k_max")
    bounds = {k: cardinality_bounds(k)
              for k in range(k_min, k_max + 3)}
    windows = {k: temperature_window(k, C, C_prime, r)
               for k in range(k_min, k_max + 2)}
    rows = []
    for k in range(k_min, k_max + 1):
        ratio = windows[k].log2_beta_hi - windows[k + 1].log2_beta_lo
        rows.append({
            "k": k,
            "log2_beta_lo": windows[k].log2_beta_lo,
            "log2_beta_hi": windows[k].log2_beta_hi,
            "overlap_log_ratio": ratio,
            "entropy_pass": entropy_criterion(k, bounds, kappa_for(k, schedule, c)),
        })
    return rows


def thermo_csv(rows: List[dict]) -> str:
    lines = ["k,log2_beta_lo,log2_beta_hi,overlap_log_ratio,entropy_pass"]
    for row in rows:
        lines.append(",".join([
            str(row["k"]),
            repr(row["log2_beta_lo"].midpoint_float()),
            repr(row["log2_beta_hi"].midpoint_float()),
            repr(row["overlap_log_ratio"].midpoint_float()),
            row["entropy_pass"],
        ]))
    return "\n".join(lines) + "\n"
