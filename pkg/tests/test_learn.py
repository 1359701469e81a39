import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boolrules.binarize import BitVector, infer_schema
from boolrules.cube import Cover, MinimizationProblem, WidthMismatch
from boolrules.learn import (
    ENGINES,
    ConflictError,
    ConflictPolicy,
    FitConfig,
    LabeledBits,
    PartSummary,
    RuleSet,
    StreamState,
    build_sets,
    cover_to_text,
    evaluate,
    fit,
    fit_parts,
    merge_problem,
    model_from_text,
    model_to_text,
    parse_rules,
    predict,
    predict_table,
    repair,
    rules_to_text,
    score,
    split_rows,
    stream_fit,
    update,
)
from boolrules.synth import LABEL, PlantedSpec, generate_planted, random_labeled_table


def xlt4_table():
    return pd.DataFrame({"x": range(16), LABEL: [0 if x < 4 else 1 for x in range(16)]})


XLT4_CONFIG = FitConfig(levels=16)


def rows(*items):
    """(bit text, label, multiplicity) triples to LabeledBits."""
    return [LabeledBits(BitVector(len(b), int(b, 2)), y, k) for b, y, k in items]


def test_build_sets_policies():
    data = rows(("01", 1, 3), ("01", 0, 1), ("10", 1, 2), ("10", 0, 2), ("11", 0, 1))
    p = build_sets(data, ConflictPolicy("majority"))
    assert p.on == {0b01} and p.off == {0b11}
    p = build_sets(data, ConflictPolicy("prefer-positive"))
    assert p.on == {0b01, 0b10} and p.off == {0b11}
    p = build_sets(data, ConflictPolicy.parse("threshold:0.6"))
    assert p.on == {0b01} and p.off == {0b10, 0b11}
    p = build_sets(data, ConflictPolicy.parse("threshold:0.5"))
    assert p.on == {0b01, 0b10}
    with pytest.raises(ConflictError):
        build_sets(data, ConflictPolicy("error"))


def test_build_sets_conflict_free_identity():
    p = build_sets(rows(("001", 1, 1), ("010", 0, 4), ("111", 1, 2)), ConflictPolicy("error"))
    assert p == MinimizationProblem(3, [1, 7], [2])


def test_build_sets_width_mismatch():
    with pytest.raises(WidthMismatch):
        build_sets(rows(("01", 1, 1), ("011", 0, 1)))


def test_policy_parsing():
    assert ConflictPolicy.parse("threshold:0.7") == ConflictPolicy("threshold", 0.7)
    assert str(ConflictPolicy.parse("threshold:0.7")) == "threshold:0.7"
    for bad in ("threshold:0", "threshold:1.5", "threshold", "vote", "majority:0.5"):
        with pytest.raises(ValueError):
            ConflictPolicy.parse(bad)


@pytest.mark.parametrize("engine", ENGINES)
def test_worked_example_fit_and_predict(engine):
    rs = fit(xlt4_table(), FitConfig(levels=16, engine=engine))
    assert rs.cover.texts() == ["-1--", "1---"]
    assert predict(rs, {"x": 6}) == 1
    assert predict(rs, {"x": 3}) == 0
    assert rs.stats == {"rows_0": 4, "rows_1": 12, "on": 12, "off": 4}


def test_all_zero_table():
    df = pd.DataFrame({"x": range(8), LABEL: [0] * 8})
    rs = fit(df)
    assert len(rs.cover) == 0
    assert predict_table(rs, df).tolist() == [0] * 8
    assert evaluate(rs, df).accuracy == 1.0
    assert rules_to_text(rs) == ["always class 0"]


def test_rules_text():
    assert cover_to_text(Cover.parse(4, ["1---", "-1--"])) == ["b_3=1 ⇒ 1", "b_4=1 ⇒ 1"]
    rs = fit(xlt4_table(), XLT4_CONFIG)
    assert rules_to_text(rs) == ["x.b_3=1 ⇒ 1", "x.b_4=1 ⇒ 1"]
    assert cover_to_text(Cover.parse(2, ["--"])) == ["always class 1"]


def test_rules_order_largest_first():
    lines = cover_to_text(Cover.parse(3, ["11-", "0--"]))
    assert lines == ["b_3=0 ⇒ 1", "b_3=1 AND b_2=1 ⇒ 1"]


def test_planted_rule_text():
    df = generate_planted(PlantedSpec(8, ("111-----",), 400, 0.1, 1))
    rs = fit(df, FitConfig(engine="heuristic"))
    assert rs.cover.texts() == ["111-----"]
    assert rules_to_text(rs) == ["f1=1 AND f2=1 AND f3=1 ⇒ 1"]


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(["level-binary", "one-hot"]))
def test_rules_round_trip(seed, encoding):
    rng = np.random.default_rng(seed)
    df = pd.DataFrame(
        {
            "x": rng.integers(0, 20, 40),
            "c": rng.choice(["red", "green", "blue"], 40),
            "b": rng.integers(0, 2, 40),
        }
    )
    df[LABEL] = ((df["x"] > 8) & (df["c"] != "red")).astype(int)
    rs = fit(df, FitConfig(levels=5, encoding=encoding, engine="heuristic"))
    assert parse_rules(rules_to_text(rs), rs.schema.total_width, rs.schema) == rs.cover


def test_metrics():
    m = score([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
    assert (m.tp, m.fp, m.tn, m.fn) == (2, 1, 1, 1)
    assert m.accuracy == pytest.approx(0.6)
    assert m.precision == pytest.approx(2 / 3) and m.recall == pytest.approx(2 / 3)
    flipped = score([1, 0, 1], [0, 1, 0])
    assert flipped.accuracy == 0.0
    assert np.isnan(score([0, 0], [0, 0]).precision)


def test_complementing_cover_scores_zero():
    df = xlt4_table()
    rs = fit(df, XLT4_CONFIG)
    flipped = RuleSet(Cover.parse(4, ["00--"]), rs.schema)
    assert evaluate(flipped, df).accuracy == 0.0


@settings(max_examples=25)
@given(st.integers(1, 8), st.integers(1, 120), st.integers(0, 10**6), st.sampled_from(ENGINES))
def test_training_soundness(width, n, seed, engine):
    df = random_labeled_table(width, n, 0.4, seed)
    rs = fit(df, FitConfig(engine=engine))
    assert evaluate(rs, df).accuracy == 1.0


def test_model_round_trip():
    rs = fit(xlt4_table(), FitConfig(levels=16, policy=ConflictPolicy.parse("threshold:0.25")))
    text = model_to_text(rs)
    back = model_from_text(text)
    assert model_to_text(back) == text
    assert back.cover == rs.cover and back.schema == rs.schema and back.policy == rs.policy
    with pytest.raises(ValueError):
        model_from_text(text.replace("#meta\n", ""))


# -- merge --------------------------------------------------------------------


@pytest.mark.parametrize("engine", ENGINES)
def test_merge_halves_of_worked_example(engine):
    df = xlt4_table()
    config = FitConfig(levels=16, engine=engine)
    rs = fit_parts(df, 2, config)
    whole = fit(df, config)
    assert predict_table(rs, df).tolist() == predict_table(whole, df).tolist()


def test_single_part_equals_fit():
    df = random_labeled_table(6, 50, 0.3, 4)
    for engine in ENGINES:
        config = FitConfig(engine=engine)
        assert fit_parts(df, 1, config).cover == fit(df, config).cover


def test_merge_votes_cross_part_conflicts():
    a = PartSummary(Cover(2), frozenset({1}), frozenset())
    b = PartSummary(Cover(2), frozenset(), frozenset({1}))
    assert merge_problem([a, b], ConflictPolicy()).on == frozenset()
    assert merge_problem([a, b], ConflictPolicy("prefer-positive")).on == {1}
    with pytest.raises(ConflictError):
        merge_problem([a, b], ConflictPolicy("error"))
    with pytest.raises(WidthMismatch):
        merge_problem([a, PartSummary(Cover(3), frozenset(), frozenset())], ConflictPolicy())


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from(ENGINES))
def test_merge_agrees_on_care_set(seed, engine):
    df = random_labeled_table(8, 120, 0.3, seed)
    config = FitConfig(engine=engine)
    schema = infer_schema(df, config.binarize)
    merged = fit_parts(df, 4, config, schema)
    whole = fit(df, config, schema)
    assert (predict_table(merged, df) == predict_table(whole, df)).all()


def test_repair_carves_out_off():
    out = repair(Cover.parse(3, ["1--", "0-1"]), [0b110, 0b001])
    assert not out.eval(0b110) and not out.eval(0b001)
    assert out.minterms() == {4, 5, 7, 3}


# -- streaming ----------------------------------------------------------------


def test_empty_batch_is_identity():
    state = StreamState(Cover.parse(3, ["1--"]), frozenset({1}))
    assert update(state, []) == state


def test_new_off_inside_previous_cube_splits_it():
    state = StreamState(Cover.parse(3, ["1--"]), frozenset({0}))
    for engine in ENGINES:
        new = update(state, rows(("101", 0, 1)), FitConfig(engine=engine))
        assert not new.cover.eval(0b101)
        assert all(new.cover.eval(x) for x in (0b100, 0b110, 0b111))
        assert new.off == {0, 0b101}


@pytest.mark.parametrize("engine", ENGINES)
def test_stream_halves_of_worked_example(engine):
    df = xlt4_table()
    schema = infer_schema(df, XLT4_CONFIG.binarize)
    config = FitConfig(levels=16, engine=engine)
    rs, state = stream_fit([df.iloc[:8], df.iloc[8:]], config, schema)
    assert predict_table(rs, df).tolist() == df[LABEL].tolist()
    assert state.off == frozenset(range(4))


def test_stream_policy_sees_previous_off():
    config = FitConfig(policy=ConflictPolicy("prefer-positive"), engine="heuristic")
    state = update(StreamState.empty(2), rows(("01", 0, 1)), config)
    state = update(state, rows(("01", 1, 1)), config)
    assert state.off == frozenset()
    assert state.cover.eval(0b01)


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from(ENGINES))
def test_stream_agrees_on_observed(seed, engine):
    df = random_labeled_table(7, 80, 0.3, seed)
    config = FitConfig(engine=engine)
    schema = infer_schema(df, config.binarize)
    rs, _ = stream_fit([df.iloc[:40], df.iloc[40:]], config, schema)
    assert (predict_table(rs, df) == df[LABEL].to_numpy()).all()


def test_split_rows():
    assert split_rows(10, 4) == [slice(0, 2), slice(2, 5), slice(5, 7), slice(7, 10)]
    with pytest.raises(ValueError):
        split_rows(3, 0)
