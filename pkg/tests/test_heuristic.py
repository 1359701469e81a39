import pytest
from hypothesis import given

from boolrules.cube import Cover, Cube, MinimizationProblem, OffIndex, contains
from boolrules.exact import minimize_exact
from boolrules.heuristic import (
    Requirement,
    covered_by,
    espresso,
    expand,
    irredundant,
    minimize_heuristic,
    reduce,
)
from boolrules.synth import random_instance

from conftest import XLT4, cubes, problems


def is_prime(cube: Cube, off) -> bool:
    idx = OffIndex(cube.width, off)
    if idx.hits_cube(cube):
        return False
    return all(idx.hits_cube(cube.freed(i)) for i in range(cube.width) if cube.literal(i) != "-")


def is_irredundant(cover: Cover, on) -> bool:
    for c in cover:
        rest = [d for d in cover if d != c]
        if all(any(contains(d, x) for d in rest) for x in on):
            return False
    return True


def test_expand_examples():
    minterms = Cover(4, [Cube.minterm(4, x) for x in range(4, 16)])
    assert expand(minterms, range(4)).texts() == ["-1--", "1---"]
    prime = Cover.parse(4, ["-1--", "1---"])
    assert expand(prime, range(4)) == prime
    assert expand(Cover.parse(2, ["11"]), []).texts() == ["--"]
    with pytest.raises(ValueError):
        expand(Cover.parse(2, ["1-"]), [0b10])


def test_expand_frees_low_positions_first():
    # from 111, freeing b_1 then b_2 is allowed; b_3 would hit 011
    assert expand(Cover.parse(3, ["111"]), [0b011]).texts() == ["1--"]


def test_irredundant_examples():
    assert irredundant(Cover.parse(2, ["1-", "-1", "11"]), [0b10, 0b01]).texts() == ["-1", "1-"]
    assert irredundant(Cover.parse(2, ["1-"]), [0b10]).texts() == ["1-"]
    assert irredundant(Cover.parse(2, ["1-", "-1"]), [0b11]).texts() == ["-1"]
    with pytest.raises(ValueError):
        irredundant(Cover.parse(2, ["1-"]), [0b01])


def test_reduce_examples():
    mins = Cover.parse(2, ["01", "10"])
    assert reduce(mins, [0b01, 0b10]) == mins
    assert reduce(Cover.parse(2, ["--"]), [0b11]).texts() == ["11"]
    assert reduce(Cover.parse(2, ["1-", "-1"]), [0b10, 0b01]).texts() == ["01", "10"]


def test_minimize_examples():
    assert minimize_heuristic(XLT4).texts() == ["-1--", "1---"]
    assert len(minimize_heuristic(MinimizationProblem(4, [], [3]))) == 0


def test_loop_trace_improves_strictly():
    trace = []
    p = random_instance(8, 0.3, 0.3, 5)
    cover = minimize_heuristic(p, trace=trace, max_iter=10)
    assert trace[-1].cover == cover
    for a, b in zip(trace, trace[1:]):
        assert b.cost < a.cost and b.iteration == a.iteration + 1
    assert len(trace) <= 11


@given(problems(max_width=6))
def test_heuristic_is_sound_prime_irredundant(problem):
    cover = minimize_heuristic(problem)
    assert problem.is_correct(cover)
    assert all(is_prime(c, problem.off) for c in cover)
    assert is_irredundant(cover, problem.on)
    assert len(cover) >= len(minimize_exact(problem))


@given(problems(max_width=6))
def test_each_phase_keeps_correctness(problem):
    start = Cover(problem.width, [Cube.minterm(problem.width, x) for x in problem.on])
    f = expand(start, problem.off)
    assert problem.is_correct(f)
    g = irredundant(f, problem.on)
    assert problem.is_correct(g) and set(g) <= set(f)
    h = reduce(g, problem.on)
    assert problem.is_correct(h)
    assert problem.is_correct(expand(h, problem.off))


@given(cubes(max_width=6), problems(max_width=6))
def test_covered_by_matches_enumeration(q, problem):
    cover = minimize_heuristic(problem)
    if cover.width != q.width:
        return
    want = all(any(contains(c, x) for c in cover) for x in q.minterms())
    assert covered_by(list(cover), q) == want


def test_cube_requirement_keeps_whole_cubes():
    # the requirement "1--" must stay covered even though no minterm lists it
    req = Requirement(3, [Cube.parse("1--"), 0b001])
    cover = espresso(Cover.parse(3, ["1--", "001"]), req, [0b000, 0b010])
    assert all(any(contains(c, x) for c in cover) for x in [4, 5, 6, 7, 1])
    assert not any(contains(c, x) for c in cover for x in (0, 2))
