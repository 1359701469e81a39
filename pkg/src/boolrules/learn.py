"""Classifier built on two-level minimization of the class-1 region.

Observed patterns split into on (class 1) and off (class 0) minterms; every
unobserved pattern is a don't-care that the minimizer may absorb into a
cube.  Class 0 is the default, so a row is predicted 1 only when some cube
of the learned cover contains its bit pattern.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .binarize import (
    BinarizationSchema,
    BinarizeConfig,
    BitVector,
    check_labels,
    encode_row,
    encode_table,
    infer_schema,
    literal_condition,
    parse_condition,
    schema_from_text,
    schema_to_text,
)
from .cube import (
    Cover,
    Cube,
    MinimizationProblem,
    ResourceLimit,
    WidthMismatch,
    contains,
    count_minterms,
    cube_sharp,
    sort_key,
    word,
    words,
)
from .exact import ExactLimits, minimize_exact
from .heuristic import Requirement, espresso, minimize_heuristic
from .pla import read_pla_cover, write_pla

ENGINES = ("exact", "heuristic")


class ConflictError(ValueError):
    pass


@dataclass(frozen=True)
class ConflictPolicy:
    kind: str = "majority"
    fraction: float | None = None

    KINDS = ("error", "majority", "threshold", "prefer-positive")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown conflict policy {self.kind!r}")
        if self.kind == "threshold":
            if self.fraction is None or not 0 < self.fraction <= 1:
                raise ValueError("threshold fraction must lie in (0, 1]")
        elif self.fraction is not None:
            raise ValueError(f"policy {self.kind!r} takes no fraction")

    @classmethod
    def parse(cls, text: str) -> "ConflictPolicy":
        kind, _, frac = text.strip().partition(":")
        if kind == "threshold":
            try:
                return cls(kind, float(frac))
            except ValueError:
                raise ValueError(f"bad threshold policy {text!r}") from None
        if frac:
            raise ValueError(f"policy {kind!r} takes no fraction")
        return cls(kind)

    def __str__(self) -> str:
        return f"threshold:{self.fraction!r}" if self.kind == "threshold" else self.kind

    def resolve(self, n0: np.ndarray, n1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Boolean masks (on, off) per pattern from class-0/class-1 counts."""
        n0 = np.asarray(n0)
        n1 = np.asarray(n1)
        if self.kind == "error":
            if ((n0 > 0) & (n1 > 0)).any():
                raise ConflictError("a bit pattern occurs with both labels")
            return n1 > 0, n0 > 0
        if self.kind == "majority":
            return n1 > n0, n0 > n1
        if self.kind == "prefer-positive":
            return n1 > 0, n1 == 0
        on = n1 >= self.fraction * (n0 + n1)
        return on, ~on


@dataclass(frozen=True)
class LabeledBits:
    bits: BitVector
    label: int
    multiplicity: int = 1

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be at least 1")


def _problem_from_counts(width, patterns, n0, n1, policy) -> MinimizationProblem:
    on, off = policy.resolve(n0, n1)
    return MinimizationProblem(
        width,
        (int(p) for p in patterns[on]),
        (int(p) for p in patterns[off]),
    )


def build_sets(rows: Iterable[LabeledBits], policy: ConflictPolicy = ConflictPolicy(), width: int | None = None) -> MinimizationProblem:
    rows = list(rows)
    widths = {r.bits.width for r in rows}
    if width is not None:
        widths.add(width)
    if len(widths) != 1:
        raise WidthMismatch(f"rows have mixed or unknown widths {sorted(widths)}")
    w = widths.pop()
    counts: dict[int, list[int]] = {}
    for r in rows:
        counts.setdefault(r.bits.value, [0, 0])[r.label] += r.multiplicity
    keys = sorted(counts)
    patterns = np.empty(len(keys), dtype=object)
    patterns[:] = keys
    n0 = np.array([counts[k][0] for k in keys], dtype=np.int64)
    n1 = np.array([counts[k][1] for k in keys], dtype=np.int64)
    return _problem_from_counts(w, patterns, n0, n1, policy)


def sets_from_codes(width: int, codes: np.ndarray, labels: np.ndarray, policy: ConflictPolicy) -> MinimizationProblem:
    """Vectorised :func:`build_sets` over encoded rows."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(codes) == 0:
        return MinimizationProblem(width, (), ())
    if codes.dtype == np.uint64:
        patterns, inv = np.unique(codes, return_inverse=True)
        n1 = np.bincount(inv, weights=labels, minlength=len(patterns)).astype(np.int64)
        n0 = np.bincount(inv, minlength=len(patterns)) - n1
    else:
        c = Counter(zip(codes.tolist(), labels.tolist()))
        keys = sorted({k for k, _ in c})
        patterns = np.empty(len(keys), dtype=object)
        patterns[:] = keys
        n0 = np.array([c[(k, 0)] for k in keys], dtype=np.int64)
        n1 = np.array([c[(k, 1)] for k in keys], dtype=np.int64)
    return _problem_from_counts(width, patterns, n0, n1, policy)


@dataclass(frozen=True)
class FitConfig:
    levels: int = 4
    encoding: str = "level-binary"
    cuts: str = "quantile"
    engine: str = "exact"
    policy: ConflictPolicy = ConflictPolicy()
    label: str = "label"
    missing_category: bool = False
    max_primes: int = ExactLimits().max_primes
    max_nodes: int = ExactLimits().max_nodes
    max_iter: int = 64

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if isinstance(self.policy, str):
            object.__setattr__(self, "policy", ConflictPolicy.parse(self.policy))

    @property
    def binarize(self) -> BinarizeConfig:
        return BinarizeConfig(self.levels, self.encoding, self.cuts, self.label, self.missing_category)

    @property
    def limits(self) -> ExactLimits:
        return ExactLimits(self.max_primes, self.max_nodes)


def minimize(problem: MinimizationProblem, config: FitConfig = FitConfig(), seed: Cover | None = None) -> Cover:
    if config.engine == "exact":
        return minimize_exact(problem, config.limits)
    return minimize_heuristic(problem, seed=seed, max_iter=config.max_iter)


def check_class0(cover: Cover, off: Iterable[int]) -> None:
    off = sorted(off)
    if off and cover.eval_many(off).any():
        raise AssertionError("a learned cube contains a class-0 minterm")


@dataclass(frozen=True)
class RuleSet:
    cover: Cover
    schema: BinarizationSchema
    engine: str = "exact"
    policy: ConflictPolicy = ConflictPolicy()
    stats: dict = field(default_factory=dict)
    default_class: int = 0

    def __post_init__(self):
        if self.cover.width != self.schema.total_width:
            raise WidthMismatch("cover width differs from the schema width")
        if self.default_class != 0:
            raise ValueError("only class 0 may be the default")


def _stats(labels: np.ndarray, problem: MinimizationProblem) -> dict:
    n1 = int(np.sum(labels))
    return {"rows_0": len(labels) - n1, "rows_1": n1, "on": len(problem.on), "off": len(problem.off)}


def encode_labeled(table: pd.DataFrame, schema: BinarizationSchema) -> tuple[np.ndarray, np.ndarray]:
    return encode_table(table, schema), check_labels(table, schema.label_column)


def fit(table: pd.DataFrame, config: FitConfig = FitConfig(), schema: BinarizationSchema | None = None) -> RuleSet:
    if schema is None:
        schema = infer_schema(table, config.binarize)
    codes, labels = encode_labeled(table, schema)
    problem = sets_from_codes(schema.total_width, codes, labels, config.policy)
    cover = minimize(problem, config)
    check_class0(cover, problem.off)
    return RuleSet(cover, schema, config.engine, config.policy, _stats(labels, problem))


def predict(ruleset: RuleSet, row) -> int:
    bits = encode_row(row, ruleset.schema)
    return int(ruleset.cover.eval(bits.value))


def predict_table(ruleset: RuleSet, table: pd.DataFrame) -> np.ndarray:
    codes = encode_table(table, ruleset.schema)
    return ruleset.cover.eval_many(codes).astype(np.uint8)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n if self.n else math.nan

    @property
    def precision(self) -> float:
        # undefined (nan) when nothing is predicted positive
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else math.nan

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else math.nan

    def lines(self) -> list[str]:
        return [
            f"accuracy\t{self.accuracy:.6f}",
            f"precision\t{self.precision:.6f}",
            f"recall\t{self.recall:.6f}",
            f"tp\t{self.tp}",
            f"fp\t{self.fp}",
            f"tn\t{self.tn}",
            f"fn\t{self.fn}",
        ]


def score(labels: Sequence[int], predictions: Sequence[int]) -> Metrics:
    y = np.asarray(labels, dtype=np.int64)
    p = np.asarray(predictions, dtype=np.int64)
    if y.shape != p.shape:
        raise ValueError(f"{len(y)} labels but {len(p)} predictions")
    if not np.isin(p, [0, 1]).all():
        raise ValueError("predictions must be 0 or 1")
    return Metrics(
        int(((y == 1) & (p == 1)).sum()),
        int(((y == 0) & (p == 1)).sum()),
        int(((y == 0) & (p == 0)).sum()),
        int(((y == 1) & (p == 0)).sum()),
    )


def evaluate(ruleset: RuleSet, table: pd.DataFrame) -> Metrics:
    labels = check_labels(table, ruleset.schema.label_column)
    return score(labels, predict_table(ruleset, table))


# -- rule text ----------------------------------------------------------------

def _rule_order(cover: Cover) -> list[Cube]:
    return sorted(cover, key=lambda c: (-count_minterms(c), sort_key(c)))


def _conditions(cube: Cube, schema: BinarizationSchema | None) -> list[str]:
    out = []
    for i in range(cube.width - 1, -1, -1):
        lit = cube.literal(i)
        if lit == "-":
            continue
        out.append(f"b_{i + 1}={lit}" if schema is None else literal_condition(schema, i, int(lit)))
    return out


def cover_to_text(cover: Cover, schema: BinarizationSchema | None = None) -> list[str]:
    """One line per cube, largest first; without a schema bits read ``b_k``."""
    if not len(cover):
        return ["always class 0"]
    lines = []
    for c in _rule_order(cover):
        conds = _conditions(c, schema)
        lines.append(" AND ".join(conds) + " ⇒ 1" if conds else "always class 1")
    return lines


def rules_to_text(ruleset: RuleSet) -> list[str]:
    return cover_to_text(ruleset.cover, ruleset.schema)


def parse_rules(lines: Iterable[str], width: int, schema: BinarizationSchema | None = None) -> Cover:
    cubes = []
    for line in lines:
        line = line.strip()
        if not line or line == "always class 0":
            continue
        if line == "always class 1":
            cubes.append(Cube.universe(width))
            continue
        body, arrow, head = line.rpartition(" ⇒ ")
        if not arrow or head != "1":
            raise ValueError(f"not a rule line: {line!r}")
        care = value = 0
        for cond in body.split(" AND "):
            if schema is None:
                pos, _, lit = cond.removeprefix("b_").partition("=")
                i, bit = int(pos) - 1, int(lit)
            else:
                i, bit = parse_condition(schema, cond)
            care |= 1 << i
            value |= bit << i
        cubes.append(Cube(width, care, value))
    return Cover(width, cubes)


# -- model file ---------------------------------------------------------------

def model_to_text(ruleset: RuleSet) -> str:
    meta = {
        "engine": ruleset.engine,
        "policy": str(ruleset.policy),
        "default_class": ruleset.default_class,
        **ruleset.stats,
    }
    parts = [
        "#schema",
        schema_to_text(ruleset.schema).rstrip("\n"),
        "#cover",
        write_pla(ruleset.cover).rstrip("\n"),
        "#meta",
        *(f"{k} = {v}" for k, v in meta.items()),
    ]
    return "\n".join(parts) + "\n"


def model_from_text(text: str) -> RuleSet:
    sections: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        if line in ("#schema", "#cover", "#meta"):
            if line in sections:
                raise ValueError(f"duplicate section {line}")
            current = line
            sections[current] = []
        elif current is None:
            if line.strip():
                raise ValueError("model text must start with a section marker")
        else:
            sections[current].append(line)
    for name in ("#schema", "#cover", "#meta"):
        if name not in sections:
            raise ValueError(f"model text lacks the {name} section")
    schema = schema_from_text("\n".join(sections["#schema"]) + "\n")
    cover, _, _ = read_pla_cover("\n".join(sections["#cover"]) + "\n")
    meta = {}
    for line in sections["#meta"]:
        if line.strip():
            k, eq, v = line.partition(" = ")
            if not eq:
                raise ValueError(f"bad meta line {line!r}")
            meta[k] = v
    engine = meta.pop("engine", "exact")
    policy = ConflictPolicy.parse(meta.pop("policy", "majority"))
    default = int(meta.pop("default_class", "0"))
    stats = {k: int(v) for k, v in meta.items()}
    return RuleSet(cover, schema, engine, policy, stats, default)


# -- partition merge ----------------------------------------------------------

@dataclass(frozen=True)
class PartSummary:
    cover: Cover
    on: frozenset[int]
    off: frozenset[int]

    @property
    def width(self) -> int:
        return self.cover.width


def repair(cover: Cover, off: Iterable[int], max_pieces: int | None = None) -> Cover:
    """Carve every off minterm out of ``cover`` with sharp operations."""
    w = cover.width
    arr = words(w, sorted(set(off)))
    out = []
    for c in cover:
        inside = arr[(arr & word(w, c.care)) == word(w, c.value)] if len(arr) else arr
        pieces = [c]
        for o in inside:
            o = int(o)
            nxt = []
            for p in pieces:
                nxt.extend(cube_sharp(p, o) if contains(p, o) else [p])
            pieces = nxt
            if max_pieces is not None and len(pieces) > max_pieces:
                raise ResourceLimit(f"repairing {c} needs more than {max_pieces} pieces")
        out.extend(pieces)
    return Cover(w, out)


def summarize(problem: MinimizationProblem, config: FitConfig = FitConfig()) -> PartSummary:
    return PartSummary(minimize(problem, config), problem.on, problem.off)


def summarize_parts(problems: Sequence[MinimizationProblem], config: FitConfig = FitConfig(), workers: int = 1) -> list[PartSummary]:
    """Minimize each part on its own; results stay in part order."""
    if workers > 1 and len(problems) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(summarize, problems, [config] * len(problems)))
    return [summarize(p, config) for p in problems]


def _warm_start(covers: Iterable[Cover], width: int, off: frozenset[int], budget: int) -> Cover:
    kept = []
    for cover in covers:
        for c in cover:
            try:
                kept.extend(repair(Cover(width, [c]), off, budget))
            except ResourceLimit:
                pass  # the warm start is optional; a cube that shatters is skipped
    return Cover(width, kept)


def merge_problem(parts: Sequence[PartSummary], policy: ConflictPolicy) -> MinimizationProblem:
    """Each part's on/off minterm is one vote for its label."""
    widths = {p.width for p in parts}
    if len(widths) != 1:
        raise WidthMismatch(f"parts have mixed or missing widths {sorted(widths)}")
    w = widths.pop()
    votes: dict[int, list[int]] = {}
    for p in parts:
        for m in p.on:
            votes.setdefault(m, [0, 0])[1] += 1
        for m in p.off:
            votes.setdefault(m, [0, 0])[0] += 1
    keys = sorted(votes)
    patterns = np.empty(len(keys), dtype=object)
    patterns[:] = keys
    n0 = np.array([votes[k][0] for k in keys], dtype=np.int64)
    n1 = np.array([votes[k][1] for k in keys], dtype=np.int64)
    return _problem_from_counts(w, patterns, n0, n1, policy)


def merge_fit(
    parts: Sequence[PartSummary],
    schema: BinarizationSchema,
    config: FitConfig = FitConfig(),
) -> RuleSet:
    problem = merge_problem(parts, config.policy)
    seed = None
    if config.engine == "heuristic":
        budget = 4 * len(problem.on) + 64
        seed = _warm_start((p.cover for p in parts), problem.width, problem.off, budget)
    cover = minimize(problem, config, seed)
    check_class0(cover, problem.off)
    stats = {"parts": len(parts), "on": len(problem.on), "off": len(problem.off)}
    return RuleSet(cover, schema, config.engine, config.policy, stats)


def split_rows(n: int, k: int) -> list[slice]:
    """``k`` contiguous, nearly equal row ranges."""
    if k < 1:
        raise ValueError("part count must be positive")
    bounds = [n * i // k for i in range(k + 1)]
    return [slice(a, b) for a, b in zip(bounds, bounds[1:])]


def fit_parts(table: pd.DataFrame, k: int, config: FitConfig = FitConfig(), schema: BinarizationSchema | None = None, workers: int = 1) -> RuleSet:
    """Split rows into ``k`` parts, minimize each, then merge."""
    if schema is None:
        schema = infer_schema(table, config.binarize)
    codes, labels = encode_labeled(table, schema)
    w = schema.total_width
    problems = [sets_from_codes(w, codes[s], labels[s], config.policy) for s in split_rows(len(table), k)]
    parts = summarize_parts(problems, config, workers)
    rs = merge_fit(parts, schema, config)
    n1 = int(labels.sum())
    return replace(rs, stats={"rows_0": len(labels) - n1, "rows_1": n1, **rs.stats})


# -- streaming ----------------------------------------------------------------

@dataclass(frozen=True)
class StreamState:
    cover: Cover
    off: frozenset[int]

    @classmethod
    def empty(cls, width: int) -> "StreamState":
        return cls(Cover(width), frozenset())

    @property
    def width(self) -> int:
        return self.cover.width


def update_problem(state: StreamState, batch: MinimizationProblem, config: FitConfig = FitConfig()) -> StreamState:
    """Re-minimize the previous cover together with an already resolved batch."""
    w = state.width
    if batch.width != w:
        raise WidthMismatch(f"batch width {batch.width} != state width {w}")
    # a previous off minterm leaves the off-set only if the batch resolves it on
    off = (state.off - batch.on) | batch.off
    on_new = batch.on
    seed = repair(state.cover, off - state.off)
    if config.engine == "exact":
        on = seed.minterms() | on_new
        cover = minimize_exact(MinimizationProblem(w, on, off), config.limits)
    elif not len(seed) and not on_new:
        cover = Cover(w)
    else:
        req = Requirement(w, list(seed) + sorted(on_new))
        start = Cover(w, list(seed) + [Cube.minterm(w, m) for m in on_new])
        cover = espresso(start, req, off, config.max_iter)
    check_class0(cover, off)
    return StreamState(cover, frozenset(off))


def update(state: StreamState, rows: Iterable[LabeledBits], config: FitConfig = FitConfig()) -> StreamState:
    """Fold a batch of rows into the stream.

    Earlier off minterms vote once each for class 0 when the batch is
    resolved, so a conflicting new row is judged by the same policy.
    """
    rows = list(rows)
    if not rows:
        return StreamState(state.cover, state.off)
    prior = [LabeledBits(BitVector(state.width, m), 0) for m in state.off]
    batch = build_sets(rows + prior, config.policy, state.width)
    return update_problem(state, batch, config)


def update_codes(state: StreamState, codes: np.ndarray, labels: np.ndarray, config: FitConfig = FitConfig()) -> StreamState:
    if len(codes) == 0:
        return StreamState(state.cover, state.off)
    w = state.width
    prior = words(w, sorted(state.off))
    all_codes = np.concatenate([words(w, codes), prior]) if len(prior) else words(w, codes)
    all_labels = np.concatenate([np.asarray(labels, dtype=np.int64), np.zeros(len(prior), dtype=np.int64)])
    batch = sets_from_codes(w, all_codes, all_labels, config.policy)
    return update_problem(state, batch, config)


def stream_fit(
    batches: Iterable[pd.DataFrame],
    config: FitConfig = FitConfig(),
    schema: BinarizationSchema | None = None,
) -> tuple[RuleSet, StreamState]:
    """Fold tables one after another; the schema comes from the first batch
    unless given."""
    state = None
    n0 = n1 = 0
    for table in batches:
        if schema is None:
            schema = infer_schema(table, config.binarize)
        if state is None:
            state = StreamState.empty(schema.total_width)
        codes, labels = encode_labeled(table, schema)
        n1 += int(labels.sum())
        n0 += len(labels) - int(labels.sum())
        state = update_codes(state, codes, labels, config)
    if state is None:
        raise ValueError("no batches to stream")
    stats = {"rows_0": n0, "rows_1": n1, "off": len(state.off)}
    return RuleSet(state.cover, schema, config.engine, config.policy, stats), state
