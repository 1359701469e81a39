"""Exact two-level minimization: all primes, then a minimum unate cover.

Don't-cares are implicit (every minterm outside on and off), so primes are
generated per on minterm rather than by tabulating the don't-care set.  A
cube containing on minterm ``m`` avoids every off minterm ``o`` exactly when
its cared positions hit ``m ^ o`` for every ``o``; the primes through ``m``
are therefore the minimal hitting sets of that family.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .cube import (
    Cover,
    Cube,
    MinimizationProblem,
    ResourceLimit,
    full_mask,
    word,
    words,
)

log = logging.getLogger(__name__)


class ExactIntractable(ResourceLimit):
    """Raised when the exact engine trips a configured ceiling."""

    def __init__(self, what: str, limit: int):
        super().__init__(
            f"exact minimization exceeded {what} ceiling of {limit}; "
            "use the heuristic engine (--engine heuristic) for this instance"
        )
        self.what = what
        self.limit = limit


@dataclass(frozen=True)
class ExactLimits:
    max_primes: int = 200_000
    max_nodes: int = 2_000_000


# below this many rows the independent-row bound is cheap and good enough
LP_MIN_ROWS = 10


class UncoveredMinterm(ValueError):
    pass


# -- primes -----------------------------------------------------------------

def _popcounts(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.uint64:
        return np.bitwise_count(arr)
    return np.array([int(x).bit_count() for x in arr], dtype=np.int64)


def _minimal_sets(diffs: np.ndarray) -> list[int]:
    """Inclusion-minimal members of a family of bitmasks."""
    if len(diffs) == 0:
        return []
    diffs = np.unique(diffs)
    pc = _popcounts(diffs)
    kept: list[int] = []
    for level in np.unique(pc):
        cand = diffs[pc == level]
        if kept:
            alive = np.ones(len(cand), dtype=bool)
            for k in kept:
                kw = cand.dtype.type(k) if cand.dtype == np.uint64 else k
                alive &= (cand & kw) != kw
            cand = cand[alive]
        kept.extend(int(x) for x in cand)
    return kept


def _min_transversals(sets: list[int]) -> list[int]:
    """All minimal hitting sets of an antichain of nonempty bitmasks."""
    if not sets:
        return [0]
    out: list[int] = []

    def minimal(chosen: int) -> bool:
        rest = chosen
        while rest:
            e = rest & -rest
            rest ^= e
            if not any((s & chosen) == e for s in sets):
                return False
        return True

    def rec(chosen: int, forbidden: int, remaining: list[int]) -> None:
        if not remaining:
            if minimal(chosen):
                out.append(chosen)
            return
        best = None
        best_n = 1 << 30
        for s in remaining:
            n = (s & ~forbidden).bit_count()
            if n < best_n:
                best, best_n = s, n
                if n <= 1:
                    break
        cand = best & ~forbidden
        while cand:
            e = cand & -cand
            cand ^= e
            new_chosen = chosen | e
            # an element that stops having a private set can never recover
            rec(new_chosen, forbidden, [s for s in remaining if not s & e])
            forbidden |= e

    rec(0, 0, sets)
    return out


def prime_implicants(problem: MinimizationProblem, limits: ExactLimits = ExactLimits()) -> Cover:
    """Every maximal off-disjoint cube containing at least one on minterm."""
    w = problem.width
    if not problem.on:
        return Cover(w)
    off = words(w, sorted(problem.off))
    mask = full_mask(w)
    primes: set[tuple[int, int]] = set()
    for m in sorted(problem.on):
        fam = _minimal_sets(off ^ word(w, m)) if len(off) else []
        for care in _min_transversals(fam):
            primes.add((care, m & care))
        if len(primes) > limits.max_primes:
            raise ExactIntractable("prime count", limits.max_primes)
    return Cover(w, [Cube(w, c & mask, v) for c, v in primes])


# -- covering ---------------------------------------------------------------

def _incidence(primes: list[Cube], on: list[int], width: int) -> tuple[list[int], list[int]]:
    """Row (minterm) -> column bitset, column (prime) -> row bitset."""
    arr = words(width, on)
    col_rows = []
    row_cols = [0] * len(on)
    for j, p in enumerate(primes):
        hit = np.flatnonzero((arr & word(width, p.care)) == word(width, p.value))
        rows = 0
        for i in hit:
            i = int(i)
            rows |= 1 << i
            row_cols[i] |= 1 << j
        col_rows.append(rows)
    return row_cols, col_rows


def essential_primes(primes: Cover, on: Iterable[int]) -> Cover:
    on = sorted(set(on))
    plist = list(primes)
    row_cols, _ = _incidence(plist, on, primes.width) if on else ([], [])
    chosen = set()
    for m, cols in zip(on, row_cols):
        if cols == 0:
            raise UncoveredMinterm(f"on minterm {m} is covered by no prime")
        if cols & (cols - 1) == 0:
            chosen.add(plist[cols.bit_length() - 1])
    return Cover(primes.width, chosen)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _CoverSolver:
    """Branch and bound for minimum-cost unate covering.

    Columns are ordered by (literal count, textual rank).  Inside the search
    each column gets one exact integer cost: a cube-count term, then the
    literal count, then ``2**n - 2**(n - rank)``.  For sets of equal size the
    last term is smallest for the textually smallest sorted list, and every
    subset gets a distinct total, so bounds can prune on ``>=``.
    """

    def __init__(self, lits: list[int], ranks: list[int], col_rows: list[int], max_nodes: int):
        self.lits = lits
        self.ranks = ranks
        self.col_rows = col_rows
        self.max_nodes = max_nodes
        self.nodes = 0
        self.cost: dict[int, int] = {}

    def _row_cols(self, rows: int, cols: int) -> dict[int, int]:
        rc: dict[int, int] = {}
        for j in _bits(cols):
            for i in _bits(self.col_rows[j] & rows):
                rc[i] = rc.get(i, 0) | (1 << j)
        return rc

    def _order(self, j: int) -> tuple[int, int]:
        return self.lits[j], self.ranks[j]

    def _reduce(self, rows: int, cols: int, chosen: int):
        """Essential columns, row dominance and column dominance to a fixpoint.

        Returns (rows, cols, chosen), or None when some row has no column left.
        """
        while True:
            rc = self._row_cols(rows, cols)
            if len(rc) != rows.bit_count():
                return None
            changed = False
            for i, c in rc.items():
                if c & (c - 1) == 0 and rows >> i & 1:
                    chosen |= c
                    cols &= ~c
                    rows &= ~self.col_rows[c.bit_length() - 1]
                    changed = True
            if changed:
                continue
            # row dominance: a row whose columns include another row's is implied
            for i, c in sorted(rc.items(), key=lambda t: (t[1].bit_count(), t[0])):
                if not rows >> i & 1:
                    continue
                supersets = rows
                for j in _bits(c):
                    supersets &= self.col_rows[j]
                supersets &= ~(1 << i)
                if supersets:
                    rows &= ~supersets
                    changed = True
            # column dominance: drop j when a cheaper column covers all its rows;
            # any such column must also cover j's row with the fewest columns
            drop = 0
            for j in sorted(_bits(cols), key=self._order, reverse=True):
                rj = self.col_rows[j] & rows
                if not rj:
                    drop |= 1 << j
                    continue
                pivot = min(_bits(rj), key=lambda i: rc[i].bit_count())
                order_j = self._order(j)
                for k in _bits(rc[pivot] & ~drop):
                    if k != j and self.col_rows[k] & rj == rj and self._order(k) < order_j:
                        drop |= 1 << j
                        break
            if drop:
                cols &= ~drop
                changed = True
            if not changed:
                return rows, cols, chosen

    def _components(self, rows: int, cols: int) -> list[tuple[int, int]]:
        comps = []
        left = rows
        while left:
            comp_rows = frontier = left & -left
            comp_cols = 0
            while frontier:
                new_cols = 0
                for j in _bits(cols & ~comp_cols):
                    if self.col_rows[j] & frontier:
                        new_cols |= 1 << j
                comp_cols |= new_cols
                reach = 0
                for j in _bits(new_cols):
                    reach |= self.col_rows[j] & rows
                frontier = reach & ~comp_rows
                comp_rows |= reach
            comps.append((comp_rows, comp_cols))
            left &= ~comp_rows
        return comps

    def _price(self, rows: int, cols: int, width: int) -> None:
        order = sorted(_bits(cols), key=self._order)
        n = len(order)
        tie_span = n.bit_length() + n + 1
        self.width = width
        self.lit_scale = width * rows.bit_count() + 1
        per_cube = self.lit_scale << tie_span
        self.per_cube = per_cube
        self.tie_span = tie_span
        for pos, j in enumerate(sorted(order, key=lambda j: self.ranks[j])):
            self.cost[j] = per_cube + (self.lits[j] << tie_span) + (1 << n) - (1 << (n - pos))

    def _total(self, chosen: int) -> int:
        return sum(self.cost[j] for j in _bits(chosen))

    def _lower_bound(self, rows: int, cols: int) -> int:
        rc = self._row_cols(rows, cols)
        used = 0
        bound = 0
        for _, c in sorted(rc.items(), key=lambda t: (t[1].bit_count(), t[0])):
            if c & used:
                continue
            used |= c
            bound += min(self.cost[j] for j in _bits(c))
        return bound

    def _lp_bound(self, rows: int, cols: int) -> int:
        """Bound from the LP relaxation with weights ``1 + literals / M``.

        Any cover with c cubes and L literals (L < M) has value c + L/M, so
        the LP value z yields c >= floor(z) and, at that c, a literal floor.
        """
        row_ids = {i: k for k, i in enumerate(_bits(rows))}
        col_ids = list(_bits(cols))
        data_r, data_c = [], []
        for k, j in enumerate(col_ids):
            for i in _bits(self.col_rows[j] & rows):
                data_r.append(row_ids[i])
                data_c.append(k)
        a = csr_matrix(
            (-np.ones(len(data_r)), (data_r, data_c)), shape=(len(row_ids), len(col_ids))
        )
        m = self.lit_scale
        weights = np.array([1.0 + self.lits[j] / m for j in col_ids])
        res = linprog(weights, A_ub=a, b_ub=-np.ones(len(row_ids)), bounds=(0, 1), method="highs")
        if res.status != 0:
            return 0
        z = res.fun - 1e-7 * max(1.0, res.fun)
        cubes = int(np.floor(z))
        # c cubes carry at most width * c literals, so a literal remainder
        # too large for that many cubes forces another cube
        while True:
            lits = max(0, int(np.ceil((z - cubes) * m - 1e-6 * m)))
            if lits <= self.width * cubes:
                break
            cubes += 1
        return cubes * self.per_cube + (lits << self.tie_span)

    def _greedy(self, rows: int, cols: int) -> int:
        all_rows = rows
        chosen = 0
        while rows:
            best = min(
                (j for j in _bits(cols & ~chosen) if self.col_rows[j] & rows),
                key=lambda j: (self.cost[j] // (self.col_rows[j] & rows).bit_count(), j),
            )
            chosen |= 1 << best
            rows &= ~self.col_rows[best]
        for j in sorted(_bits(chosen), key=lambda j: self.cost[j], reverse=True):
            rest = chosen & ~(1 << j)
            covered = 0
            for k in _bits(rest):
                covered |= self.col_rows[k]
            if covered & all_rows == all_rows:
                chosen = rest
        return chosen

    def solve(self, rows: int, cols: int, width: int) -> int:
        red = self._reduce(rows, cols, 0)
        if red is None:
            raise UncoveredMinterm("some on minterm is covered by no prime")
        rows, cols, chosen = red
        for comp_rows, comp_cols in self._components(rows, cols):
            self._price(comp_rows, comp_cols, width)
            self.best = self._greedy(comp_rows, comp_cols)
            self.best_cost = self._total(self.best)
            self._branch(comp_rows, comp_cols, 0, 0)
            chosen |= self.best
        return chosen

    def _branch(self, rows: int, cols: int, chosen: int, spent: int) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise ExactIntractable("branch-and-bound node", self.max_nodes)
        red = self._reduce(rows, cols, chosen)
        if red is None:
            return
        rows, cols, new_chosen = red
        spent += self._total(new_chosen & ~chosen)
        chosen = new_chosen
        if spent >= self.best_cost:
            return
        if not rows:
            self.best, self.best_cost = chosen, spent
            return
        bound = self._lower_bound(rows, cols)
        if spent + bound >= self.best_cost:
            return
        if rows.bit_count() >= LP_MIN_ROWS:
            bound = max(bound, self._lp_bound(rows, cols))
            if spent + bound >= self.best_cost:
                return
        rc = self._row_cols(rows, cols)
        _, row = min(rc.items(), key=lambda t: (t[1].bit_count(), t[0]))
        for j in sorted(_bits(row), key=lambda j: self.cost[j]):
            bit = 1 << j
            self._branch(rows & ~self.col_rows[j], cols & ~bit, chosen | bit, spent + self.cost[j])
            cols &= ~bit


def unate_cover(
    primes: Cover, on: Iterable[int], limits: ExactLimits = ExactLimits()
) -> Cover:
    on = sorted(set(on))
    if not on:
        return Cover(primes.width)
    plist = list(primes)  # textual order, so index == rank
    row_cols, col_rows = _incidence(plist, on, primes.width)
    for m, c in zip(on, row_cols):
        if not c:
            raise UncoveredMinterm(f"on minterm {m} is covered by no prime")
    solver = _CoverSolver(
        [p.literals for p in plist], list(range(len(plist))), col_rows, limits.max_nodes
    )
    chosen = solver.solve((1 << len(on)) - 1, (1 << len(plist)) - 1, primes.width)
    log.debug("unate cover: %d primes, %d rows, %d nodes", len(plist), len(on), solver.nodes)
    return Cover(primes.width, [plist[j] for j in _bits(chosen)])


def minimize_exact(problem: MinimizationProblem, limits: ExactLimits = ExactLimits()) -> Cover:
    """Minimum (cube count, literal count) cover correct on the care set."""
    primes = prime_implicants(problem, limits)
    return unate_cover(primes, problem.on, limits)
