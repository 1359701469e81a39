import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from boolrules.cube import Cube, MinimizationProblem

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def cubes(draw, width=None, min_width=1, max_width=8):
    w = width if width is not None else draw(st.integers(min_width, max_width))
    return Cube.parse("".join(draw(st.lists(st.sampled_from("01-"), min_size=w, max_size=w))))


@st.composite
def problems(draw, min_width=1, max_width=6):
    """Each minterm on, off or don't-care."""
    w = draw(st.integers(min_width, max_width))
    tags = draw(st.lists(st.sampled_from("10-"), min_size=1 << w, max_size=1 << w))
    on = [m for m, t in enumerate(tags) if t == "1"]
    off = [m for m, t in enumerate(tags) if t == "0"]
    return MinimizationProblem(w, on, off)


XLT4 = MinimizationProblem(4, range(4, 16), range(4))


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
