import pytest
from hypothesis import given
from hypothesis import strategies as st

from boolrules.cube import Cover, MinimizationProblem, ResourceLimit
from boolrules.pla import PlaError, read_pla, read_pla_cover, write_pla
from boolrules.synth import random_instance

from conftest import XLT4


def test_worked_example_file():
    text = write_pla(XLT4)
    assert text.count("\n") == 16 + 5
    data = read_pla(text)
    assert len(data.problem.on) == 12 and len(data.problem.off) == 4
    assert data.problem == XLT4


def test_header_only():
    data = read_pla(".i 3\n.o 1\n.e\n")
    assert data.problem == MinimizationProblem(3, [], [])


def test_cube_line_expands():
    data = read_pla(".i 4\n.o 1\n1--- 1\n.e\n")
    assert data.problem.on == frozenset(range(8, 16))


def test_dont_care_and_comment_lines():
    text = "# comment\n.i 2\n.o 1\n.ilb a b\n.ob y\n.type fr\n.p 3\n1- 1\n00 0\n01 -\n.e\n"
    data = read_pla(text)
    assert data.problem.on == {2, 3} and data.problem.off == {0}
    assert data.input_labels == ("a", "b") and data.output_label == "y"


def test_write_cover():
    cover = Cover.parse(4, ["1---", "-1--"])
    assert write_pla(cover) == ".i 4\n.o 1\n.type fr\n.p 2\n-1-- 1\n1--- 1\n.e\n"
    assert write_pla(Cover(4)) == ".i 4\n.o 1\n.type fr\n.p 0\n.e\n"
    back, _, _ = read_pla_cover(write_pla(cover))
    assert back == cover


def test_labels_written():
    text = write_pla(Cover.parse(2, ["1-"]), ("a", "b"), "y")
    assert ".ilb a b\n.ob y\n" in text
    with pytest.raises(PlaError):
        write_pla(Cover.parse(2, ["1-"]), ("a",))


@pytest.mark.parametrize(
    "text, msg",
    [
        (".i 2\n.o 2\n.e\n", "single-output"),
        (".i 2\n.o 1\n101 1\n.e\n", "bad input"),
        (".i 2\n.o 1\n1x 1\n.e\n", "bad input"),
        (".i 2\n.o 1\n.p 2\n11 1\n.e\n", ".p declares"),
        (".i 2\n.o 1\n1- 1\n11 0\n.e\n", "both on and off"),
        (".i 2\n.o 1\n.type f\n.e\n", "type fr"),
        (".o 1\n.e\n", "missing .i"),
        ("11 1\n", "before .i"),
    ],
)
def test_errors(text, msg):
    with pytest.raises(PlaError, match=msg):
        read_pla(text)


def test_expansion_guard():
    with pytest.raises(ResourceLimit):
        read_pla(".i 30\n.o 1\n" + "-" * 30 + " 1\n.e\n")


@given(st.integers(1, 8), st.floats(0, 0.5), st.floats(0, 0.5), st.integers(0, 10**6))
def test_round_trip_byte_exact(w, p_on, p_off, seed):
    problem = random_instance(w, p_on, p_off, seed)
    text = write_pla(problem)
    assert read_pla(text).problem == problem
    assert write_pla(read_pla(text).problem) == text
