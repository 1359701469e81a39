"""Ground-truth data generators and brute-force oracles.

All randomness comes from numpy's PCG64 bit generator seeded with the
caller's integer seed (``np.random.Generator(np.random.PCG64(seed))``), so a
seed replays the same output on any platform.

The oracles deliberately avoid the minimizer code paths: they enumerate all
``3**width`` cubes as strings and test them against explicit minterm sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
import pandas as pd

from .cube import Cover, Cube, MinimizationProblem, cube_difference

ORACLE_MAX_WIDTH = 8
LABEL = "label"


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class PlantedSpec:
    width: int
    rules: tuple[Cube, ...]
    n_rows: int
    class1_fraction: float
    seed: int
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(
            self, "rules", tuple(Cube.parse(r) if isinstance(r, str) else r for r in self.rules)
        )
        if not self.names:
            object.__setattr__(self, "names", tuple(f"f{i + 1}" for i in range(self.width)))
        if len(self.names) != self.width:
            raise ValueError("one column name per input is required")
        if any(r.width != self.width for r in self.rules):
            raise ValueError("planted rule width does not match")
        if not 0.0 <= self.class1_fraction <= 1.0:
            raise ValueError("class-1 fraction must lie in [0, 1]")
        if self.class1_fraction > 0 and not self.rules:
            raise ValueError("class-1 rows need at least one planted rule")
        if self.n_rows < 0:
            raise ValueError("row count must be non-negative")


def _cube_columns(cube: Cube) -> list[tuple[int, int]]:
    """(column index, literal) for each cared position; column 0 is leftmost."""
    text = str(cube)
    return [(k, int(ch)) for k, ch in enumerate(text) if ch != "-"]


def _inside(bits: np.ndarray, cube: Cube) -> np.ndarray:
    hit = np.ones(len(bits), dtype=bool)
    for k, lit in _cube_columns(cube):
        hit &= bits[:, k] == lit
    return hit


def generate_planted(spec: PlantedSpec) -> pd.DataFrame:
    """Binary table whose class-1 rows satisfy a planted rule and whose
    class-0 rows satisfy none of them."""
    w = spec.width
    rest = [Cube.universe(w)]
    for r in spec.rules:
        rest = [p for piece in rest for p in cube_difference(piece, r)]
    n1 = int(round(spec.n_rows * spec.class1_fraction))
    n0 = spec.n_rows - n1
    if n0 and not rest:
        raise ValueError("planted rules cover every input; no class-0 row exists")
    rng = rng_for(spec.seed)

    ones = rng.integers(0, 2, size=(n1, w), dtype=np.uint8)
    which = rng.integers(0, len(spec.rules), size=n1) if n1 else np.zeros(0, dtype=int)
    for r_idx, rule in enumerate(spec.rules):
        sel = which == r_idx
        for k, lit in _cube_columns(rule):
            ones[sel, k] = lit

    zeros = np.empty((0, w), dtype=np.uint8)
    while len(zeros) < n0:
        batch = rng.integers(0, 2, size=(max(64, 2 * (n0 - len(zeros))), w), dtype=np.uint8)
        bad = np.zeros(len(batch), dtype=bool)
        for rule in spec.rules:
            bad |= _inside(batch, rule)
        zeros = np.vstack([zeros, batch[~bad]])
    zeros = zeros[:n0]

    bits = np.vstack([ones, zeros])
    labels = np.concatenate([np.ones(n1, dtype=np.uint8), np.zeros(n0, dtype=np.uint8)])
    order = rng.permutation(len(bits))
    df = pd.DataFrame(bits[order], columns=list(spec.names))
    df[LABEL] = labels[order]
    return df


def random_instance(width: int, on_fraction: float, off_fraction: float, seed: int) -> MinimizationProblem:
    """Each minterm independently on, off or don't-care."""
    if not (0 <= on_fraction <= 1 and 0 <= off_fraction <= 1) or on_fraction + off_fraction > 1:
        raise ValueError("fractions must be in [0, 1] and sum to at most 1")
    u = rng_for(seed).random(1 << width)
    on = np.flatnonzero(u < on_fraction)
    off = np.flatnonzero((u >= on_fraction) & (u < on_fraction + off_fraction))
    return MinimizationProblem(width, map(int, on), map(int, off))


def sample_instance(width: int, n_on: int, n_off: int, seed: int) -> MinimizationProblem:
    """Exactly ``n_on`` on and ``n_off`` off minterms drawn without replacement."""
    if n_on < 0 or n_off < 0 or n_on + n_off > (1 << width):
        raise ValueError("requested counts do not fit the input space")
    picks = rng_for(seed).choice(1 << width, size=n_on + n_off, replace=False)
    return MinimizationProblem(width, map(int, picks[:n_on]), map(int, picks[n_on:]))


def random_labeled_table(width: int, n_rows: int, p_one: float, seed: int) -> pd.DataFrame:
    """Conflict-free binary table: labels come from a hidden random truth table."""
    rng = rng_for(seed)
    truth = rng.random(1 << width) < p_one
    codes = rng.integers(0, 1 << width, size=n_rows)
    shifts = np.arange(width - 1, -1, -1)
    bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    df = pd.DataFrame(bits, columns=[f"f{i + 1}" for i in range(width)])
    df[LABEL] = truth[codes].astype(np.uint8)
    return df


# -- oracles ----------------------------------------------------------------

def _guard(problem: MinimizationProblem) -> None:
    if problem.width > ORACLE_MAX_WIDTH:
        raise ValueError(f"oracle width guard: {problem.width} > {ORACLE_MAX_WIDTH}")


def _all_cubes(width: int):
    """(text, minterm set) for every cube, by explicit enumeration."""
    for chars in product("01-", repeat=width):
        slots = [("0", "1") if ch == "-" else (ch,) for ch in chars]
        mset = frozenset(int("".join(bits), 2) for bits in product(*slots))
        yield "".join(chars), mset


def _clean_cubes(problem: MinimizationProblem) -> dict[str, frozenset[int]]:
    off = set(problem.off)
    return {t: ms for t, ms in _all_cubes(problem.width) if not ms & off}


def oracle_primes(problem: MinimizationProblem) -> Cover:
    _guard(problem)
    clean = _clean_cubes(problem)
    on = set(problem.on)
    primes = []
    for text, ms in clean.items():
        if not ms & on:
            continue
        grows = (text[:k] + "-" + text[k + 1:] for k, ch in enumerate(text) if ch != "-")
        if any(g in clean for g in grows):
            continue
        primes.append(text)
    return Cover.parse(problem.width, primes)


def brute_min_cover(problem: MinimizationProblem) -> tuple[int, Cover]:
    """Minimum number of off-disjoint cubes covering the on-set, with a witness.

    Iterative deepening over subsets: a cover of size k must use some cube
    containing the lowest uncovered on minterm, so that minterm is branched on.
    """
    _guard(problem)
    on = frozenset(problem.on)
    if not on:
        return 0, Cover(problem.width)
    by_cover: dict[frozenset[int], str] = {}
    for text, ms in _clean_cubes(problem).items():
        hit = ms & on
        if hit and hit not in by_cover:
            by_cover[hit] = text
    sets = [s for s in by_cover if not any(s < t for t in by_cover)]
    biggest = max(len(s) for s in sets)

    def search(uncovered: frozenset[int], k: int, picked: list[frozenset[int]]):
        if not uncovered:
            return list(picked)
        if k == 0 or len(uncovered) > k * biggest:
            return None
        m = min(uncovered)
        for s in sets:
            if m in s:
                picked.append(s)
                found = search(uncovered - s, k - 1, picked)
                picked.pop()
                if found is not None:
                    return found
        return None

    for k in range(1, len(on) + 1):
        found = search(on, k, [])
        if found is not None:
            return k, Cover.parse(problem.width, [by_cover[s] for s in found])
    raise AssertionError("unreachable: minterm cubes always cover the on-set")
