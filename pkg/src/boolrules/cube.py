"""Ternary cubes, covers and the on/off problem container.

A cube over ``width`` inputs is stored as two integers: ``care`` (bit set
where the literal is fixed) and ``value`` (the fixed literal values, zero
wherever ``care`` is zero).  Bit index 0 is the least significant input,
written ``b_1``; the textual form puts ``b_width`` leftmost, as in PLA
cube lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np


class WidthMismatch(ValueError):
    pass


def _check(a: int, b: int) -> None:
    if a != b:
        raise WidthMismatch(f"width {a} != {b}")


def full_mask(width: int) -> int:
    return (1 << width) - 1


@dataclass(frozen=True, slots=True, order=False)
class Cube:
    width: int
    care: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("cube width must be positive")
        mask = full_mask(self.width)
        if self.care & ~mask or self.value & ~mask:
            raise ValueError("cube bits exceed width")
        # canonical form: no value bits outside the care mask
        object.__setattr__(self, "value", self.value & self.care)

    @classmethod
    def parse(cls, text: str) -> "Cube":
        text = text.strip()
        if not text:
            raise ValueError("empty cube text")
        care = value = 0
        for ch in text:
            care <<= 1
            value <<= 1
            if ch == "1":
                care |= 1
                value |= 1
            elif ch == "0":
                care |= 1
            elif ch != "-":
                raise ValueError(f"bad cube character {ch!r}")
        return cls(len(text), care, value)

    @classmethod
    def minterm(cls, width: int, m: int) -> "Cube":
        return cls(width, full_mask(width), m)

    @classmethod
    def universe(cls, width: int) -> "Cube":
        return cls(width, 0, 0)

    def __str__(self) -> str:
        out = []
        for i in range(self.width - 1, -1, -1):
            bit = 1 << i
            if not self.care & bit:
                out.append("-")
            else:
                out.append("1" if self.value & bit else "0")
        return "".join(out)

    def __repr__(self) -> str:
        return f"Cube({str(self)!r})"

    @property
    def free(self) -> int:
        return full_mask(self.width) & ~self.care

    @property
    def literals(self) -> int:
        return self.care.bit_count()

    @property
    def is_minterm(self) -> bool:
        return self.care == full_mask(self.width)

    def literal(self, index: int) -> str:
        """Literal at 0-based bit ``index`` (0 is ``b_1``)."""
        bit = 1 << index
        if not self.care & bit:
            return "-"
        return "1" if self.value & bit else "0"

    def freed(self, index: int) -> "Cube":
        bit = 1 << index
        return Cube(self.width, self.care & ~bit, self.value & ~bit)

    def fixed(self, index: int, lit: int) -> "Cube":
        bit = 1 << index
        return Cube(self.width, self.care | bit, (self.value & ~bit) | (bit if lit else 0))

    def minterms(self) -> Iterator[int]:
        """Yield contained minterms in ascending order."""
        free = self.free
        sub = 0
        while True:
            yield self.value | sub
            if sub == free:
                return
            sub = (sub - free) & free


def sort_key(cube: Cube) -> str:
    return str(cube)


def contains(cube: Cube, minterm: int | Cube) -> bool:
    if isinstance(minterm, Cube):
        _check(cube.width, minterm.width)
        if not minterm.is_minterm:
            raise ValueError("expected a minterm")
        minterm = minterm.value
    elif minterm >> cube.width:
        raise WidthMismatch(f"minterm {minterm} wider than {cube.width}")
    return (minterm & cube.care) == cube.value


def subsumes(a: Cube, b: Cube) -> bool:
    """True iff every minterm of ``b`` lies in ``a``."""
    _check(a.width, b.width)
    return (a.care & ~b.care) == 0 and (b.value & a.care) == a.value


def intersects(a: Cube, b: Cube) -> bool:
    _check(a.width, b.width)
    return ((a.value ^ b.value) & a.care & b.care) == 0


def intersection(a: Cube, b: Cube) -> Cube | None:
    if not intersects(a, b):
        return None
    return Cube(a.width, a.care | b.care, a.value | b.value)


def count_minterms(cube: Cube) -> int:
    return 1 << (cube.width - cube.literals)


def supercube(cubes: Iterable[Cube]) -> Cube | None:
    """Smallest cube containing all of ``cubes``; None for an empty input."""
    it = iter(cubes)
    first = next(it, None)
    if first is None:
        return None
    care, value = first.care, first.value
    for c in it:
        _check(first.width, c.width)
        care &= c.care & ~(value ^ c.value)
        value &= care
    return Cube(first.width, care, value)


def cube_difference(a: Cube, b: Cube) -> list[Cube]:
    """Disjoint cubes whose union is ``a`` minus ``b``.

    Positions free in ``a`` but fixed in ``b`` are split in ascending index.
    """
    _check(a.width, b.width)
    if not intersects(a, b):
        return [a]
    split = b.care & ~a.care
    pieces = []
    care, value = a.care, a.value
    i = 0
    while split >> i:
        bit = 1 << i
        if split & bit:
            pieces.append(Cube(a.width, care | bit, value | (~b.value & bit)))
            care |= bit
            value |= b.value & bit
        i += 1
    return pieces


def cube_sharp(cube: Cube, minterm: int | Cube) -> "Cover":
    if isinstance(minterm, int):
        minterm = Cube.minterm(cube.width, minterm)
    _check(cube.width, minterm.width)
    return Cover(cube.width, cube_difference(cube, minterm))


class CoverCost(NamedTuple):
    cube_count: int
    literal_count: int


class Cover:
    """An immutable, duplicate-free set of cubes of one width.

    Cubes are kept in textual order, which is the canonical order used for
    output and tie-breaking.
    """

    __slots__ = ("width", "cubes")

    def __init__(self, width: int, cubes: Iterable[Cube | str] = ()):
        if width < 1:
            raise ValueError("cover width must be positive")
        seen = set()
        for c in cubes:
            if isinstance(c, str):
                c = Cube.parse(c)
            _check(width, c.width)
            seen.add(c)
        self.width = width
        self.cubes: tuple[Cube, ...] = tuple(sorted(seen, key=sort_key))

    @classmethod
    def parse(cls, width: int, texts: Iterable[str]) -> "Cover":
        return cls(width, [Cube.parse(t) for t in texts])

    def __iter__(self) -> Iterator[Cube]:
        return iter(self.cubes)

    def __len__(self) -> int:
        return len(self.cubes)

    def __contains__(self, cube: object) -> bool:
        return cube in set(self.cubes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cover):
            return NotImplemented
        return self.width == other.width and self.cubes == other.cubes

    def __hash__(self) -> int:
        return hash((self.width, self.cubes))

    def __repr__(self) -> str:
        return f"Cover({self.width}, {[str(c) for c in self.cubes]})"

    def texts(self) -> list[str]:
        return [str(c) for c in self.cubes]

    def cost(self) -> CoverCost:
        return CoverCost(len(self.cubes), sum(c.literals for c in self.cubes))

    def eval(self, minterm: int) -> bool:
        return cover_eval(self, minterm)

    def remove_subsumed(self) -> "Cover":
        keep = []
        # larger cubes first so a cube is only compared against candidates
        ordered = sorted(self.cubes, key=lambda c: (c.literals, str(c)))
        for c in ordered:
            if not any(subsumes(k, c) for k in keep):
                keep.append(c)
        return Cover(self.width, keep)

    def minterms(self, limit: int = 1 << 22) -> set[int]:
        total = sum(count_minterms(c) for c in self.cubes)
        if total > limit:
            raise ResourceLimit(f"cover spans {total} minterms, over limit {limit}")
        out: set[int] = set()
        for c in self.cubes:
            out.update(c.minterms())
        return out

    def eval_many(self, minterms) -> np.ndarray:
        arr = words(self.width, minterms)
        hit = np.zeros(len(arr), dtype=bool)
        for c in self.cubes:
            hit |= (arr & word(self.width, c.care)) == word(self.width, c.value)
        return hit


def cover_eval(cover: Cover, minterm: int) -> bool:
    if minterm >> cover.width:
        raise WidthMismatch(f"minterm {minterm} wider than {cover.width}")
    return any((minterm & c.care) == c.value for c in cover.cubes)


class ResourceLimit(RuntimeError):
    """A configured size or effort ceiling was exceeded."""


# -- word arrays ------------------------------------------------------------
# Vectorised mask tests use uint64 when the width fits, Python ints otherwise.

def words(width: int, values) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype == (np.uint64 if width <= 64 else object):
        return values
    values = list(values)
    if width <= 64:
        return np.array(values, dtype=np.uint64)
    arr = np.empty(len(values), dtype=object)
    arr[:] = values
    return arr


def word(width: int, x: int):
    return np.uint64(x) if width <= 64 else x


# -- problem ----------------------------------------------------------------

@dataclass(frozen=True)
class MinimizationProblem:
    """On and off minterm sets; everything else is don't-care."""

    width: int
    on: frozenset[int]
    off: frozenset[int]

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("problem width must be positive")
        object.__setattr__(self, "on", frozenset(self.on))
        object.__setattr__(self, "off", frozenset(self.off))
        limit = 1 << self.width
        for m in self.on | self.off:
            if m < 0 or m >= limit:
                raise WidthMismatch(f"minterm {m} outside width {self.width}")
        both = self.on & self.off
        if both:
            raise ValueError(f"on and off sets overlap at {len(both)} minterm(s)")

    @classmethod
    def from_texts(cls, on: Iterable[str], off: Iterable[str]) -> "MinimizationProblem":
        on_c = [Cube.parse(t) for t in on]
        off_c = [Cube.parse(t) for t in off]
        widths = {c.width for c in on_c + off_c}
        if len(widths) != 1:
            raise WidthMismatch(f"mixed widths {sorted(widths)}")
        return cls(widths.pop(), {c.value for c in on_c}, {c.value for c in off_c})

    def is_correct(self, cover: Cover) -> bool:
        """Cover is true on every on minterm and false on every off minterm."""
        if cover.width != self.width:
            return False
        if self.on and not cover.eval_many(sorted(self.on)).all():
            return False
        if self.off and cover.eval_many(sorted(self.off)).any():
            return False
        return True


class OffIndex:
    """Answers 'does this cube contain an off minterm?' quickly."""

    def __init__(self, width: int, off: Iterable[int]):
        self.width = width
        self.set = frozenset(off)
        self.arr = words(width, sorted(self.set))

    def __len__(self) -> int:
        return len(self.set)

    def hits(self, care: int, value: int) -> bool:
        if not self.set:
            return False
        free = full_mask(self.width) & ~care
        n_free = free.bit_count()
        if n_free <= 6 or (1 << n_free) <= len(self.set) // 4:
            sub = 0
            while True:
                if (value | sub) in self.set:
                    return True
                if sub == free:
                    return False
                sub = (sub - free) & free
        if len(self.set) <= 24:
            return any((o & care) == value for o in self.set)
        w = self.width
        return bool(((self.arr & word(w, care)) == word(w, value)).any())

    def hits_cube(self, cube: Cube) -> bool:
        return self.hits(cube.care, cube.value)
