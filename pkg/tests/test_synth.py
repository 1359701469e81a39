import pandas as pd
import pytest
from hypothesis import given

from boolrules.cube import MinimizationProblem, contains
from boolrules.synth import (
    LABEL,
    PlantedSpec,
    brute_min_cover,
    generate_planted,
    oracle_primes,
    random_instance,
    random_labeled_table,
    sample_instance,
)

from conftest import XLT4, problems


def test_planted_rows_respect_rule():
    spec = PlantedSpec(30, ("11111" + "-" * 25,), 100_000, 0.02, 7)
    df = generate_planted(spec)
    ones = df[df[LABEL] == 1]
    zeros = df[df[LABEL] == 0]
    assert len(ones) == 2000 and len(zeros) == 98_000
    assert (ones[[f"f{i}" for i in range(1, 6)]] == 1).all().all()
    assert not (zeros[[f"f{i}" for i in range(1, 6)]] == 1).all(axis=1).any()


def test_planted_zero_fraction_and_determinism():
    spec = PlantedSpec(6, ("11----",), 50, 0.0, 3)
    df = generate_planted(spec)
    assert (df[LABEL] == 0).all()
    pd.testing.assert_frame_equal(generate_planted(spec), df)


def test_planted_errors():
    with pytest.raises(ValueError, match="every input"):
        generate_planted(PlantedSpec(2, ("--",), 10, 0.5, 0))
    with pytest.raises(ValueError):
        PlantedSpec(3, ("11",), 10, 0.5, 0)


def test_brute_min_cover_examples():
    assert brute_min_cover(XLT4)[0] == 2
    assert brute_min_cover(MinimizationProblem(3, [], [1])) == (0, brute_min_cover(MinimizationProblem(3, [], []))[1])
    parity = MinimizationProblem.from_texts(["000", "011", "101", "110"], ["001", "010", "100", "111"])
    assert brute_min_cover(parity)[0] == 4


def test_oracle_primes_examples():
    assert oracle_primes(XLT4).texts() == ["-1--", "1---"]
    assert len(oracle_primes(MinimizationProblem(3, [], range(8)))) == 0
    assert oracle_primes(MinimizationProblem.from_texts(["10", "11"], ["00"])).texts() == ["-1", "1-"]


def test_oracle_guard():
    with pytest.raises(ValueError, match="guard"):
        oracle_primes(MinimizationProblem(9, [1], []))


@given(problems(max_width=5))
def test_oracle_self_consistency(problem):
    off = problem.off
    for p in oracle_primes(problem):
        assert any(contains(p, x) for x in problem.on)
        assert not any(contains(p, x) for x in off)
        for i in range(p.width):
            if p.literal(i) != "-":
                assert any(contains(p.freed(i), x) for x in off)
    k, witness = brute_min_cover(problem)
    assert len(witness) == k
    assert problem.is_correct(witness)


def test_random_instance():
    empty = random_instance(5, 0, 0, 1)
    assert not empty.on and not empty.off
    assert random_instance(4, 0.25, 0.25, 9) == random_instance(4, 0.25, 0.25, 9)
    sparse = random_instance(12, 0.001, 0.25, 2)
    assert len(sparse.on) < 20 and 800 < len(sparse.off) < 1250
    with pytest.raises(ValueError):
        random_instance(4, 0.7, 0.5, 0)


def test_sample_instance_counts():
    p = sample_instance(20, 100, 5, 0)
    assert len(p.on) == 100 and len(p.off) == 5


def test_random_labeled_table_conflict_free():
    df = random_labeled_table(6, 300, 0.4, 11)
    codes = df.drop(columns=LABEL).astype(str).agg("".join, axis=1)
    assert (df.groupby(codes)[LABEL].nunique() == 1).all()
