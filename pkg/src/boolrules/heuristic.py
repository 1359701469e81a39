"""Espresso-style improvement loop: expand, irredundant, reduce.

The on requirement is a list of cubes (plain minterms in the usual case).
Streaming passes whole cubes from a previous cover so they never have to be
enumerated minterm by minterm.  The off-set is always explicit minterms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cube import (
    Cover,
    CoverCost,
    Cube,
    MinimizationProblem,
    OffIndex,
    count_minterms,
    cube_difference,
    intersection,
    intersects,
    sort_key,
    subsumes,
    supercube,
    word,
    words,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoopState:
    cover: Cover
    cost: CoverCost
    iteration: int


class Requirement:
    """Cubes that a cover must contain, with vectorised containment tests."""

    def __init__(self, width: int, items: Iterable[int | Cube]):
        cubes = {Cube.minterm(width, x) if isinstance(x, int) else x for x in items}
        for c in cubes:
            if c.width != width:
                raise ValueError(f"requirement width {c.width} != {width}")
        self.width = width
        self.cubes = sorted(cubes, key=sort_key)
        self.cares = words(width, [c.care for c in self.cubes])
        self.vals = words(width, [c.value for c in self.cubes])
        self.minterm_only = all(c.is_minterm for c in self.cubes)

    def __len__(self) -> int:
        return len(self.cubes)

    def contained_in(self, cube: Cube) -> np.ndarray:
        w = self.width
        care, val = word(w, cube.care), word(w, cube.value)
        return ((self.cares & care) == care) & ((self.vals & care) == val)

    def intersecting(self, cube: Cube) -> np.ndarray:
        w = self.width
        care, val = word(w, cube.care), word(w, cube.value)
        return ((self.vals ^ val) & self.cares & care) == 0


def covered_by(cubes: list[Cube], q: Cube) -> bool:
    """True iff the union of ``cubes`` contains every minterm of ``q``."""
    live = [c for c in cubes if intersects(c, q)]
    if not live:
        return False
    if any(subsumes(c, q) for c in live):
        return True
    split = 0
    for c in live:
        split |= c.care & ~q.care
    i = (split & -split).bit_length() - 1
    return covered_by(live, q.fixed(i, 0)) and covered_by(live, q.fixed(i, 1))


def _difference(q: Cube, cubes: list[Cube]) -> list[Cube]:
    pieces = [q]
    for c in cubes:
        if not pieces:
            break
        pieces = [p for piece in pieces for p in cube_difference(piece, c)]
    return pieces


def _as_requirement(width: int, on) -> Requirement:
    return on if isinstance(on, Requirement) else Requirement(width, on)


def _as_off(width: int, off) -> OffIndex:
    return off if isinstance(off, OffIndex) else OffIndex(width, off)


def expand(cover: Cover, off) -> Cover:
    """Grow every cube to a prime against the explicit off-set.

    Cubes go largest first (then textual order); positions are freed in
    ascending bit index and a free is kept when the cube stays off-disjoint.
    Cubes already inside an expanded cube are dropped.
    """
    w = cover.width
    off = _as_off(w, off)
    order = sorted(cover, key=lambda c: (-count_minterms(c), sort_key(c)))
    done: list[Cube] = []
    for c in order:
        if any(subsumes(d, c) for d in done):
            continue
        if off.hits_cube(c):
            raise ValueError(f"cube {c} already intersects the off-set")
        care, val = c.care, c.value
        rest = care
        while rest:
            bit = rest & -rest
            rest ^= bit
            if not off.hits(care & ~bit, val & ~bit):
                care &= ~bit
                val &= ~bit
        done.append(Cube(w, care, val))
    return Cover(w, done).remove_subsumed()


class _Coverage:
    """Tracks which requirement cubes each cover cube contains."""

    def __init__(self, cubes: list[Cube], req: Requirement):
        self.cubes = list(cubes)
        self.req = req
        self.cont = [req.contained_in(c) for c in self.cubes]
        self.count = (
            np.sum(self.cont, axis=0) if self.cont else np.zeros(len(req), dtype=np.int64)
        )

    def uncovered(self, active: set[int]) -> list[int]:
        """Requirement indices not covered by the union of ``active`` cubes."""
        n = np.zeros(len(self.req), dtype=np.int64)
        for i in active:
            n += self.cont[i]
        out = []
        for j in np.flatnonzero(n == 0):
            j = int(j)
            q = self.req.cubes[j]
            if q.is_minterm or not covered_by([self.cubes[i] for i in active], q):
                out.append(j)
        return out

    def removable(self, i: int, active: set[int], count: np.ndarray) -> bool:
        c = self.cubes[i]
        alone = self.cont[i] & (count == 1)
        if alone.any():
            return False
        if self.req.minterm_only:
            return True
        others = [self.cubes[k] for k in active if k != i]
        hit = self.req.intersecting(c) & (count - self.cont[i] == 0)
        for j in np.flatnonzero(hit):
            if not covered_by(others, self.req.cubes[int(j)]):
                return False
        return True


def irredundant(cover: Cover, on) -> Cover:
    """Drop cubes until removing any one would uncover part of the on-set.

    Relatively essential cubes are kept first; the rest are added greedily by
    how many still-uncovered requirements they contain (ties in textual
    order), then a removal pass in reverse textual order trims leftovers.
    """
    w = cover.width
    req = _as_requirement(w, on)
    cov = _Coverage(list(cover), req)
    n = len(cov.cubes)
    everything = set(range(n))
    if cov.uncovered(everything):
        raise ValueError("cover does not contain the on-set")
    active = set(everything)
    essential = {i for i in range(n) if not cov.removable(i, active, cov.count)}
    chosen = set(essential)
    count = np.zeros(len(req), dtype=np.int64)
    for i in chosen:
        count += cov.cont[i]
    need = count == 0
    candidates = sorted(everything - chosen, key=lambda i: sort_key(cov.cubes[i]))
    while need.any() and candidates:
        gains = [int((cov.cont[i] & need).sum()) for i in candidates]
        best = max(gains)
        if best == 0:
            break
        i = candidates[gains.index(best)]
        candidates.remove(i)
        chosen.add(i)
        count += cov.cont[i]
        need &= ~cov.cont[i]
    if cov.uncovered(chosen):
        # only cube requirements spread over several cubes end up here
        chosen |= set(candidates)
        count = np.sum([cov.cont[i] for i in chosen], axis=0)
    for i in sorted(chosen - essential, key=lambda i: sort_key(cov.cubes[i]), reverse=True):
        if cov.removable(i, chosen, count):
            chosen.discard(i)
            count = count - cov.cont[i]
    return Cover(w, [cov.cubes[i] for i in chosen])


def reduce(cover: Cover, on) -> Cover:
    """Shrink each cube to the supercube of the on-set only it covers.

    Cubes are visited largest first, then in textual order, and each sees
    the already-reduced versions of earlier cubes.  A cube left covering
    nothing of its own is dropped.
    """
    w = cover.width
    req = _as_requirement(w, on)
    cubes: list[Cube | None] = sorted(cover, key=lambda c: (-count_minterms(c), sort_key(c)))
    cont = [req.contained_in(c) for c in cubes]
    count = np.sum(cont, axis=0) if cont else np.zeros(len(req), dtype=np.int64)
    for i, c in enumerate(cubes):
        parts: list[Cube] = [req.cubes[int(j)] for j in np.flatnonzero(cont[i] & (count == 1))]
        if not req.minterm_only:
            others = [d for k, d in enumerate(cubes) if k != i and d is not None]
            partial = req.intersecting(c) & ~(cont[i] & (count == 1))
            for j in np.flatnonzero(partial):
                q = intersection(req.cubes[int(j)], c)
                parts.extend(_difference(q, [d for d in others if intersects(d, q)]))
        new = supercube(parts)
        count = count - cont[i]
        cubes[i] = new
        if new is None:
            cont[i] = np.zeros(len(req), dtype=bool)
        else:
            cont[i] = req.contained_in(new)
            count = count + cont[i]
    return Cover(w, [c for c in cubes if c is not None])


def espresso(
    cover: Cover,
    on,
    off,
    max_iter: int = 64,
    trace: list[LoopState] | None = None,
) -> Cover:
    """Run expand -> irredundant, then reduce/expand/irredundant until the
    cost stops improving."""
    w = cover.width
    req = _as_requirement(w, on)
    off = _as_off(w, off)
    f = irredundant(expand(cover, off), req)
    state = LoopState(f, f.cost(), 0)
    if trace is not None:
        trace.append(state)
    while state.iteration < max_iter:
        g = irredundant(expand(reduce(state.cover, req), off), req)
        if g.cost() >= state.cost:
            break
        state = LoopState(g, g.cost(), state.iteration + 1)
        if trace is not None:
            trace.append(state)
    log.debug("espresso: %d iteration(s), cost %s", state.iteration, state.cost)
    return state.cover


def minimize_heuristic(
    problem: MinimizationProblem,
    seed: Cover | None = None,
    max_iter: int = 64,
    trace: list[LoopState] | None = None,
) -> Cover:
    """Prime, irredundant cover correct on the care set; not necessarily minimum.

    ``seed`` warm-starts the loop and must avoid the off-set; only the on
    minterms are required to stay covered.
    """
    w = problem.width
    if not problem.on and seed is None:
        return Cover(w)
    start = Cover(w, [Cube.minterm(w, m) for m in problem.on])
    if seed is not None:
        start = Cover(w, list(seed) + list(start))
    return espresso(start, problem.on, problem.off, max_iter, trace)
