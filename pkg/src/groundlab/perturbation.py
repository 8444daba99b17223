"""Selector-rule perturbations of machine-driven measure flows.

A selector rule pins the routing word to 1^i#^* so that one registered word
machine handles every seed above the rule's threshold scale.  Adding the rule
to a base potential with any positive coefficient leaves the admissible set
unchanged, so the predicted flow depends on whether the coefficient is zero,
never on its size.  Reports therefore carry no coefficient at all: two runs
with different positive coefficients serialize byte-identically.

The flows here are the predicted word-measure marginals, mixed across scales
by the same blocking rates the layer construction uses; the lab makes no
claim about the tile-level limit itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .gibbs import Potential
from .layers import OdometerSchedule, default_schedule
from .machines import (Machine, machine_to_json, selector_weights,
                       word_measure)
from .measures import (ConditionalGridMeasure, WordMeasure,
                       conditional_grid_measure, greedy_net, mix,
                       weak_star_distance)
from .tiles import InputError

# scanning the routing word and switching to the chosen program must not
# depend on the seed, only on the (finite) enumeration entry
DISPATCH_OVERHEAD_CAP = 4096

# word_measure enumerates all 2^k seeds; flows clamp the evaluation scale
SCALE_CAP = 12


@dataclass(frozen=True)
class SelectorRule:
    """Local rule forcing the routing word to 1^index #^*.

    patterns lists the forbidden (offset, symbol) cells on the routing word;
    diameter bounds how far the rule looks, and is what a temperature-window
    analysis needs to know about it.
    """

    index: int
    patterns: Tuple[Tuple[int, str], ...]
    diameter: int

    def __post_init__(self):
        if self.index < 1:
            raise InputError("selector index must be >= 1")
        if self.diameter < max(o for o, _ in self.patterns) + 1:
            raise InputError("diameter must cover every pattern offset")

    @property
    def threshold(self) -> int:
        """Scales below this admit no seed at all under the rule."""
        return self.index

    def admits(self, x: str, y: str) -> bool:
        k = len(x)
        if len(y) != k or k < self.index:
            return False
        want = "1" * self.index + "#" * (k - self.index)
        return all(c in "01" for c in x) and y == want

    def domain_size(self, k: int) -> int:
        return 2 ** k if k >= self.index else 0

    def seed_domain(self, k: int, budget: int = 1 << 16) -> list:
        if 2 ** k > budget:
            raise InputError(f"2^{k} seeds exceed the materialization budget")
        if k < self.index:
            return []
        y = "1" * self.index + "#" * (k - self.index)
        return [(format(v, f"0{k}b"), y) for v in range(2 ** k)]


def unrestricted_domain_size(k: int) -> int:
    """Seed pairs (x, y) with x binary of length k and y any word of length <= k."""
    if k < 1:
        raise InputError("scale k must be >= 1")
    return 2 ** k * (2 ** (k + 1) - 1)


def make_selector(i: int, enumeration: Sequence[Machine]) -> SelectorRule:
    """Rule pinning the routing word to the i-th registered machine."""
    if not 1 <= i <= len(enumeration):
        raise InputError(f"selector index {i} outside enumeration of "
                         f"{len(enumeration)}")
    cells = []
    for j in range(i):
        cells += [(j, "0"), (j, "#")]   # routing cells 0..i-1 must hold 1
    cells += [(i, "0"), (i, "1")]       # cell i must hold #
    return SelectorRule(i, tuple(cells), i + 1)


def dispatch_overhead(enumeration: Sequence[Machine]) -> tuple:
    """Additive cost of swapping in each registered program; bounded."""
    costs = tuple(1 + len(machine_to_json(m)) for m in enumeration)
    if any(c > DISPATCH_OVERHEAD_CAP for c in costs):
        raise InputError("enumeration entry exceeds the dispatch overhead cap")
    return costs


@dataclass(frozen=True)
class PerturbedPotential:
    """Base potential plus a selector potential with coefficient epsilon."""

    base: Potential
    perturbation: Potential
    epsilon: Fraction

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        if eps < 0:
            raise InputError("epsilon must be >= 0")
        object.__setattr__(self, "epsilon", eps)

    def combined(self) -> Potential:
        pairs = [(rows, w) for rows, w in self.base.forbidden]
        pairs += [(rows, w * self.epsilon)
                  for rows, w in self.perturbation.forbidden]
        return Potential(tuple(pairs))

    def zero_energy_signature(self) -> frozenset:
        """Patterns with positive weight; equal for every epsilon > 0."""
        return frozenset(rows for rows, w in self.combined().forbidden
                         if w > 0)


# ------------------------------------------------------------ flow report ---

def _scale_for(j: int, depth: int, cap: int) -> int:
    return min(max(j, depth), cap)


def mixture_flow(base: Machine, enumeration: Sequence[Machine], depth: int,
                 cap: int = SCALE_CAP) -> Callable[[int], WordMeasure]:
    """Routing-weighted mixture: default machine except on the 1^i words."""
    cache = {}

    def flow(j: int) -> WordMeasure:
        if j not in cache:
            kj = _scale_for(j, depth, cap)
            parts = []
            for idx, weight in selector_weights(j, len(enumeration)):
                mach = base if idx == 0 else enumeration[idx - 1]
                parts.append((weight, word_measure(mach, kj, depth)))
            cache[j] = mix(parts)
        return cache[j]

    return flow


def selector_flow(target: Machine, depth: int,
                  cap: int = SCALE_CAP) -> Callable[[int], WordMeasure]:
    """Selector-forced flow: the target machine owns every admissible seed."""
    cache = {}

    def flow(j: int) -> WordMeasure:
        if j not in cache:
            cache[j] = word_measure(target, _scale_for(j, depth, cap), depth)
        return cache[j]

    return flow


@dataclass
class PerturbationReport:
    mode: str                 # "mixture" or "selector"
    depth: int
    horizon: int
    index: int
    threshold: int            # scales below this are excluded from blocking
    diameter: int
    rows: List[ConditionalGridMeasure]
    dist_to_base: List[Tuple[int, Fraction]]
    dist_to_target: List[Tuple[int, Fraction]]
    base_target: WordMeasure
    target_target: WordMeasure

    def flow_measures(self) -> List[WordMeasure]:
        return [r.renormalized() for r in self.rows if r.blocked_mass() > 0]

    def to_json(self) -> str:
        def frac(q):
            return [q.numerator, q.denominator]

        doc = {
            "mode": self.mode,
            "depth": self.depth,
            "horizon": self.horizon,
            "index": self.index,
            "threshold": self.threshold,
            "diameter": self.diameter,
            "rows": [{
                "k": r.k,
                "raw": [frac(w) for w in r.raw],
                "residual": frac(r.residual),
                "renormalized": ([frac(w) for w in r.renormalized().weights]
                                 if r.blocked_mass() > 0 else None),
            } for r in self.rows],
            "distances": {
                "to_base": [[k, frac(d)] for k, d in self.dist_to_base],
                "to_target": [[k, frac(d)] for k, d in self.dist_to_target],
            },
            "targets": {
                "base": {w: frac(v)
                         for w, v in sorted(self.base_target.as_dict().items())},
                "target": {w: frac(v) for w, v in
                           sorted(self.target_target.as_dict().items())},
            },
        }
        return json.dumps(doc, indent=1)


def perturbed_flow(base_machine: Machine, target_machine: Machine,
                   epsilon, depth: int, horizon: int,
                   index: int = 1,
                   enumeration: Optional[Sequence[Machine]] = None,
                   schedule: Optional[OdometerSchedule] = None,
                   cap: int = SCALE_CAP) -> PerturbationReport:
    """Predicted blocked-word flow with or without the selector rule.

    epsilon == 0 runs the routing mixture (the target machine participates
    only through its enumeration slot, if any); epsilon > 0 forces the
    selector, so the flow is the target's alone and the report is the same
    for every positive epsilon.
    """
    eps = Fraction(epsilon)
    if eps < 0:
        raise InputError("epsilon must be >= 0")
    if depth < 1 or horizon < depth:
        raise InputError("need depth >= 1 and horizon >= depth")
    if enumeration is None:
        enumeration = [target_machine]
        index = 1
    rule = make_selector(index, enumeration)

    if eps == 0:
        mode = "mixture"
        flow = mixture_flow(base_machine, enumeration, depth, cap)
        j_start = depth
        threshold = 0
    else:
        mode = "selector"
        flow = selector_flow(target_machine, depth, cap)
        j_start = max(depth, rule.threshold)
        threshold = rule.threshold
    schedule = schedule or default_schedule()

    base_target = word_measure(base_machine, _scale_for(horizon, depth, cap),
                               depth)
    target_target = word_measure(target_machine,
                                 _scale_for(horizon, depth, cap), depth)

    rows = []
    to_base = []
    to_target = []
    for k in range(j_start, horizon + 1):
        cond = conditional_grid_measure(flow, depth, k, schedule,
                                        j_start=j_start)
        rows.append(cond)
        if cond.blocked_mass() > 0:
            mu = cond.renormalized()
            to_base.append((k, weak_star_distance(mu, base_target)))
            to_target.append((k, weak_star_distance(mu, target_target)))
    return PerturbationReport(mode, depth, horizon, index, threshold,
                              rule.diameter, rows, to_base, to_target,
                              base_target, target_target)


# ------------------------------------------------------ accumulation view ---

@dataclass
class AccumulationReport:
    horizon: int
    window: int
    radius: Fraction
    representatives: List[WordMeasure]
    hausdorff: Fraction
    verdict: str              # "stable" or "oscillating"


def accumulation_report(flow: Callable[[int], WordMeasure], depth: int,
                        horizon: int, window: int,
                        radius: Fraction = Fraction(1, 256)) -> AccumulationReport:
    """Cluster the tail of a flow; one cluster means the limit stabilized."""
    if window < 0 or horizon < window:
        raise InputError("need 0 <= window <= horizon")
    points = [flow(k).marginal(depth) for k in
              range(horizon - window, horizon + 1)]
    reps, _, worst = greedy_net(points, radius)
    verdict = "stable" if len(reps) == 1 else "oscillating"
    return AccumulationReport(horizon, window, Fraction(radius),
                              [points[i] for i in reps], worst, verdict)


def report_accumulation(report: PerturbationReport, window: int,
                        radius: Fraction = Fraction(1, 256)) -> AccumulationReport:
    """Accumulation view of a perturbation report's renormalized tail."""
    measures = report.flow_measures()
    if not measures:
        raise InputError("report has no renormalizable rows")
    if window >= len(measures):
        window = len(measures) - 1
    tail = measures[len(measures) - 1 - window:]
    reps, _, worst = greedy_net(tail, radius)
    verdict = "stable" if len(reps) == 1 else "oscillating"
    return AccumulationReport(report.horizon, window, Fraction(radius),
                              [tail[i] for i in reps], worst, verdict)
