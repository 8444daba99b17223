"""Marker machinery: non-overlap verification, covering search, exact grid measures.

A marker set is a family of same-shape rectangular patterns.  Two axioms make
a family usable as a grounding device: no two patterns may agree on a proper
overlap (so occurrences cannot chain into ambiguity), and every admissible
window of side m must contain an occurrence (so markers appear everywhere).
Non-overlap is decided exactly by a shift scan; covering is searched for
counterexamples by a backtracking solver with arc-consistency propagation.

The grid measure puts an iid random marker at every site of an abutting
ell-periodic grid whose global offset is uniform in {0..ell-1}^2; cylinder
probabilities are exact rationals obtained by conditioning on the offset and
multiplying independent per-marker factors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .robinson import ORIENTATIONS, build_macro_tile
from .tiles import HOLE, InputError, Patch, Tileset


class MarkerSet:
    """Same-shape rectangular patterns with a margin factor tau."""

    def __init__(self, patterns: Iterable[Patch], tau: Fraction = Fraction(0)):
        self.patterns = tuple(patterns)
        if not self.patterns:
            raise InputError("marker set needs at least one pattern")
        w = self.patterns[0].width
        h = self.patterns[0].height
        for p in self.patterns:
            if p.width != w or p.height != h:
                raise InputError("marker patterns must share one shape")
            if not p.filled():
                raise InputError("marker patterns must be total (no holes)")
        self.width = w
        self.height = h
        self.tau = Fraction(tau)
        seen = set()
        for p in self.patterns:
            key = tuple(p.id_at(x, y) for y in range(h) for x in range(w))
            if key in seen:
                raise InputError("duplicate marker pattern")
            seen.add(key)

    @property
    def ell(self) -> int:
        if self.width != self.height:
            raise InputError("marker side requested for non-square patterns")
        return self.width

    @property
    def m(self) -> int:
        """Covering window side: (2 + tau) * ell - 1, rounded up."""
        return math.ceil((2 + self.tau) * self.ell - 1)

    def __len__(self) -> int:
        return len(self.patterns)

    # shared integer encoding so shifted comparisons are plain array equality
    def _encoded(self):
        legend = []
        lut = {}
        grids = []
        for p in self.patterns:
            g = np.empty((self.height, self.width), dtype=np.int32)
            for x, y, tid in p.cells():
                code = lut.get(tid)
                if code is None:
                    code = lut[tid] = len(legend)
                    legend.append(tid)
                g[y, x] = code
            grids.append(g)
        return grids, tuple(legend)

    def to_json(self) -> str:
        doc = {
            "tau": [self.tau.numerator, self.tau.denominator],
            "patterns": [json.loads(p.to_json()) for p in self.patterns],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MarkerSet":
        try:
            doc = json.loads(text)
            tau = Fraction(doc["tau"][0], doc["tau"][1])
            patterns = [Patch.from_ids(p["rows"]) for p in doc["patterns"]]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"malformed marker json: {exc}") from exc
        return cls(patterns, tau)


def robinson_marker_set(n: int) -> MarkerSet:
    """The four order-n macro-tiles as markers; margin factor 6/ell."""
    ell = 2 ** n - 1
    return MarkerSet([build_macro_tile(n, q) for q in ORIENTATIONS],
                     tau=Fraction(6, ell))


def nonoverlap_violations(markers: MarkerSet, stop_after: Optional[int] = None) -> list:
    """All (i, j, (dx, dy)) where pattern j shifted by (dx, dy) agrees with
    pattern i on a nonempty proper overlap (i == j with zero shift excluded)."""
    grids, _ = markers._encoded()
    w, h = markers.width, markers.height
    out = []
    for i, u in enumerate(grids):
        for j, v in enumerate(grids):
            for dy in range(-(h - 1), h):
                for dx in range(-(w - 1), w):
                    if i == j and dx == 0 and dy == 0:
                        continue
                    x0, x1 = max(0, dx), min(w, w + dx)
                    y0, y1 = max(0, dy), min(h, h + dy)
                    if x0 >= x1 or y0 >= y1:
                        continue
                    a = u[y0:y1, x0:x1]
                    b = v[y0 - dy:y1 - dy, x0 - dx:x1 - dx]
                    if (a == b).all():
                        out.append((i, j, (dx, dy)))
                        if stop_after is not None and len(out) >= stop_after:
                            return out
    return out


def verify_nonoverlap(markers: MarkerSet):
    """None when the non-overlap axiom holds, else the first violating triple."""
    bad = nonoverlap_violations(markers, stop_after=1)
    return bad[0] if bad else None


@dataclass
class CoveringResult:
    status: str              # 'none' | 'witness' | 'budget'
    witness: Optional[Patch]
    nodes: int


class _BudgetStop(Exception):
    pass


def _propagate(domains, h_compat, v_compat, queue, m):
    """Arc consistency: shrink neighbour domains until a fixpoint or a wipeout."""
    pending = list(queue)
    while pending:
        cx, cy = pending.pop()
        d = domains[cy][cx]
        for nx, ny, mat, forward in (
            (cx + 1, cy, h_compat, True),
            (cx - 1, cy, h_compat, False),
            (cx, cy + 1, v_compat, True),
            (cx, cy - 1, v_compat, False),
        ):
            if not (0 <= nx < m and 0 <= ny < m):
                continue
            nd = domains[ny][nx]
            allowed = (mat[d] if forward else mat[:, d]).any(axis=0 if forward else 1)
            shrunk = nd & allowed
            if shrunk.sum() < nd.sum():
                domains[ny][nx] = shrunk
                if not shrunk.any():
                    return False
                pending.append((nx, ny))
    return True


def search_covering_counterexample(tileset: Tileset, markers: MarkerSet,
                                   budget: int = 2_000_000) -> CoveringResult:
    """Look for an admissible m x m patch containing no marker occurrence.

    Exhausting the space proves the covering axiom for window side m.  The
    solver assigns cells in row-major order over per-cell candidate domains
    kept arc-consistent, so global parity-style forcings prune immediately.
    """
    m = markers.m
    T = len(tileset)
    w, h = markers.width, markers.height
    pat_codes = []
    for p in markers.patterns:
        pat_codes.append(
            [[tileset.index[p.id_at(x, y)] for x in range(w)] for y in range(h)]
        )

    full = np.ones(T, dtype=bool)
    if w == 1 and h == 1:
        full = full.copy()
        for codes in pat_codes:
            full[codes[0][0]] = False
        if not full.any():
            return CoveringResult("none", None, 0)

    grid = np.full((m, m), -1, dtype=np.int64)
    nodes = 0

    def forbidden_block_completed(x, y):
        # assigning (x, y) in row-major order can only complete blocks whose
        # top-right... top row ends at y and right column ends at x
        if x < w - 1 or y < h - 1:
            return False
        ax, ay = x - w + 1, y - h + 1
        for codes in pat_codes:
            match = True
            for yy in range(h):
                for xx in range(w):
                    if grid[ay + yy, ax + xx] != codes[yy][xx]:
                        match = False
                        break
                if not match:
                    break
            if match:
                return True
        return False

    def solve(cell, domains):
        nonlocal nodes
        if cell == m * m:
            return True
        y, x = divmod(cell, m)
        base = domains[y][x]
        for t in np.nonzero(base)[0]:
            nodes += 1
            if nodes > budget:
                raise _BudgetStop
            grid[y, x] = t
            if forbidden_block_completed(x, y):
                grid[y, x] = -1
                continue
            trial = [row[:] for row in domains]
            one = np.zeros(T, dtype=bool)
            one[t] = True
            trial[y][x] = one
            if _propagate(trial, tileset.h_compat, tileset.v_compat, [(x, y)], m):
                if solve(cell + 1, trial):
                    return True
            grid[y, x] = -1
        return False

    domains = [[full.copy() for _ in range(m)] for _ in range(m)]
    if not _propagate(domains, tileset.h_compat, tileset.v_compat,
                      [(x, y) for y in range(m) for x in range(m)], m):
        return CoveringResult("none", None, 0)
    try:
        found = solve(0, domains)
    except _BudgetStop:
        return CoveringResult("budget", None, nodes)
    if not found:
        return CoveringResult("none", None, nodes)
    ids = [t.id for t in tileset.tiles]
    rows = [[ids[grid[y, x]] for x in range(m)] for y in range(m)]
    return CoveringResult("witness", Patch.from_ids(rows), nodes)


def occurrence_map(config: Patch, markers: MarkerSet) -> np.ndarray:
    """Boolean cell map: cells lying inside at least one marker occurrence."""
    covered = np.zeros((config.height, config.width), dtype=bool)
    w, h = markers.width, markers.height
    for ay in range(config.height - h + 1):
        for ax in range(config.width - w + 1):
            for p in markers.patterns:
                ok = True
                for yy in range(h):
                    for xx in range(w):
                        if config.id_at(ax + xx, ay + yy) != p.id_at(xx, yy):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    covered[ay:ay + h, ax:ax + w] = True
                    break
    return covered


def marker_coverage(config: Patch, markers: MarkerSet) -> Fraction:
    """Fraction of interior cells (margin >= ell from the boundary) covered."""
    ell = markers.ell
    x0, x1 = ell, config.width - ell
    y0, y1 = ell, config.height - ell
    if x0 >= x1 or y0 >= y1:
        raise InputError("configuration too small for interior coverage")
    covered = occurrence_map(config, markers)
    interior = covered[y0:y1, x0:x1]
    return Fraction(int(interior.sum()), interior.size)


class StationaryGridMeasure:
    """Shift-invariant law of an abutting iid marker grid with uniform offset."""

    def __init__(self, markers: MarkerSet, weights: Optional[Iterable[Fraction]] = None):
        self.markers = markers
        ell = markers.ell  # requires square markers
        if weights is None:
            weights = [Fraction(1, len(markers))] * len(markers)
        self.weights = tuple(Fraction(w) for w in weights)
        if len(self.weights) != len(markers):
            raise InputError("need one weight per pattern")
        if any(w < 0 for w in self.weights):
            raise InputError("negative weight")
        if sum(self.weights) != 1:
            raise InputError("weights must sum to 1 exactly")
        self.ell = ell

    def probability(self, pattern: Patch) -> Fraction:
        """Exact cylinder probability of seeing `pattern` at its own origin."""
        ell = self.ell
        ox0, oy0 = pattern.origin
        cells = [(ox0 + x, oy0 + y, tid) for x, y, tid in pattern.cells()]
        if not cells:
            return Fraction(1)
        total = Fraction(0)
        for ox in range(ell):
            for oy in range(ell):
                # marker anchored at (ox + u*ell, oy + v*ell); collect the
                # constraint each block must satisfy
                blocks = {}
                for x, y, tid in cells:
                    u, bx = divmod(x - ox, ell)
                    v, by = divmod(y - oy, ell)
                    blocks.setdefault((u, v), []).append((bx, by, tid))
                prob = Fraction(1)
                for constraints in blocks.values():
                    p_block = Fraction(0)
                    for w, pat in zip(self.weights, self.markers.patterns):
                        if all(pat.id_at(bx, by) == tid for bx, by, tid in constraints):
                            p_block += w
                    prob *= p_block
                    if prob == 0:
                        break
                total += prob
        return total / (ell * ell)

    def entropy_per_site(self) -> float:
        h = 0.0
        for w in self.weights:
            if w > 0:
                h -= float(w) * math.log2(float(w))
        return h / (self.ell ** 2)


def grid_measure(markers: MarkerSet, weights=None) -> StationaryGridMeasure:
    return StationaryGridMeasure(markers, weights)
