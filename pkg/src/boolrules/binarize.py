"""Raw table columns to fixed-width bit vectors, and bits back to text.

Features are laid out left to right in schema order: ``bit_offset`` counts
character positions from the left of the textual bit string, so the first
feature occupies the most significant bits.  Within a level-binary feature
the level code is written MSB first, ``b_k`` naming its k-th bit from the
least significant end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence
from urllib.parse import quote, unquote

import numpy as np
import pandas as pd

from .cube import words

BINARY = "binary"
CATEGORICAL = "categorical"
NUMERIC = "numeric"
LEVEL_BINARY = "level-binary"
ONE_HOT = "one-hot"
KINDS = (BINARY, CATEGORICAL, NUMERIC)
ENCODINGS = (LEVEL_BINARY, ONE_HOT)
MISSING = "<missing>"


class SchemaError(ValueError):
    pass


class EncodingError(ValueError):
    pass


def discretize(value: float, cuts: Sequence[float]) -> int:
    """Number of cuts less than or equal to ``value``."""
    return int(np.searchsorted(np.asarray(cuts, dtype=float), value, side="right"))


def encode_integer(level: int, width: int) -> str:
    if width < 1:
        raise ValueError("width must be positive")
    if not 0 <= level < (1 << width):
        raise ValueError(f"level {level} does not fit in {width} bit(s)")
    return format(level, f"0{width}b")


def one_hot(index: int, cardinality: int) -> str:
    if cardinality < 1:
        raise ValueError("cardinality must be positive")
    if not 0 <= index < cardinality:
        raise ValueError(f"index {index} outside cardinality {cardinality}")
    return encode_integer(1 << index, cardinality)


def level_width(levels: int) -> int:
    return max(1, (levels - 1).bit_length())


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    encoding: str
    bit_offset: int
    bit_width: int
    cuts: tuple[float, ...] = ()
    categories: tuple[str, ...] = ()
    missing: bool = False  # one extra trailing level/category stands for missing

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown feature kind {self.kind!r}")
        if self.encoding not in ENCODINGS:
            raise SchemaError(f"unknown encoding {self.encoding!r}")
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise SchemaError(f"cuts of {self.name!r} are not strictly ascending")
        if self.kind == CATEGORICAL and self.levels < 1:
            raise SchemaError(f"categorical feature {self.name!r} has no categories")
        if self.bit_offset < 0 or self.bit_width != self.expected_width():
            raise SchemaError(
                f"feature {self.name!r}: bit_width {self.bit_width} != {self.expected_width()}"
            )

    @property
    def levels(self) -> int:
        if self.kind == BINARY:
            return 2
        base = len(self.categories) if self.kind == CATEGORICAL else len(self.cuts) + 1
        return base + int(self.missing)

    def expected_width(self) -> int:
        if self.kind == BINARY:
            return 1
        if self.encoding == ONE_HOT:
            return self.levels
        return level_width(self.levels)

    def level_label(self, level: int) -> str:
        if self.missing and level == self.levels - 1:
            return MISSING
        if self.kind == CATEGORICAL:
            return self.categories[level]
        if self.kind == BINARY:
            return str(level)
        lo = "-inf" if level == 0 else _num(self.cuts[level - 1])
        hi = "inf" if level == len(self.cuts) else _num(self.cuts[level])
        return f"[{lo}, {hi})"


def _num(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class BinarizationSchema:
    features: tuple[FeatureSpec, ...]
    label_column: str

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise SchemaError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if self.label_column in names:
            raise SchemaError("the label column cannot also be a feature")
        pos = 0
        for f in self.features:
            if f.bit_offset != pos:
                raise SchemaError(f"feature {f.name!r} offset {f.bit_offset} != {pos}")
            pos += f.bit_width

    @property
    def total_width(self) -> int:
        last = self.features[-1]
        return last.bit_offset + last.bit_width

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def shift(self, f: FeatureSpec) -> int:
        """Bit index (LSB = 0) of the feature's least significant bit."""
        return self.total_width - f.bit_offset - f.bit_width

    def locate(self, position: int) -> tuple[FeatureSpec, int]:
        """Feature owning bit index ``position`` and the 0-based bit within it."""
        if not 0 <= position < self.total_width:
            raise IndexError(f"bit {position} outside width {self.total_width}")
        for f in self.features:
            lo = self.shift(f)
            if lo <= position < lo + f.bit_width:
                return f, position - lo
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class BitVector:
    width: int
    value: int

    def __post_init__(self):
        if self.width < 1 or not 0 <= self.value < (1 << self.width):
            raise ValueError("bit vector value does not fit its width")

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def bit(self, k: int) -> int:
        """``b_k``, with ``b_1`` the least significant bit."""
        if not 1 <= k <= self.width:
            raise IndexError(k)
        return (self.value >> (k - 1)) & 1


@dataclass(frozen=True)
class BinarizeConfig:
    levels: int = 4
    encoding: str = LEVEL_BINARY
    cuts: str = "quantile"  # or "width"
    label: str = "label"
    missing_category: bool = False

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be positive")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.cuts not in ("quantile", "width"):
            raise ValueError(f"unknown cut placement {self.cuts!r}")


# -- inference ----------------------------------------------------------------

def _is_missing(col: pd.Series) -> np.ndarray:
    miss = col.isna().to_numpy()
    if col.dtype == object:
        miss |= (col.astype(str).str.strip() == "").to_numpy() & ~miss
    return miss


def check_labels(table: pd.DataFrame, label: str) -> np.ndarray:
    if label not in table.columns:
        raise SchemaError(f"label column {label!r} not found")
    raw = table[label]
    if _is_missing(raw).any():
        raise SchemaError("label column has missing values")
    vals = pd.to_numeric(raw, errors="coerce")
    if vals.isna().any() or not vals.isin([0, 1]).all():
        bad = raw[vals.isna() | ~vals.isin([0, 1])].iloc[0]
        raise SchemaError(f"label values must be 0 or 1, got {bad!r}")
    return vals.to_numpy().astype(np.uint8)


def numeric_cuts(values: np.ndarray, levels: int, method: str = "quantile") -> tuple[float, ...]:
    values = np.asarray(values, dtype=float)
    if levels <= 1 or len(values) == 0:
        return ()
    if method == "quantile":
        cuts = np.quantile(values, [k / levels for k in range(1, levels)])
    else:
        lo, hi = values.min(), values.max()
        cuts = lo + (hi - lo) * np.arange(1, levels) / levels
    # levels below the smallest observed value would never be used
    cuts = np.unique(cuts[cuts > values.min()])
    return tuple(float(c) for c in cuts)


def infer_schema(table: pd.DataFrame, config: BinarizeConfig = BinarizeConfig()) -> BinarizationSchema:
    if len(table) == 0:
        raise SchemaError("table is empty")
    check_labels(table, config.label)
    features = []
    offset = 0
    for name in table.columns:
        if name == config.label:
            continue
        col = table[name]
        miss = _is_missing(col)
        if miss.any() and not config.missing_category:
            raise SchemaError(f"column {name!r} has missing values")
        present = col[~miss]
        has_missing = bool(miss.any())
        nums = pd.to_numeric(present, errors="coerce")
        if len(present) and not nums.isna().any():
            vals = nums.to_numpy(dtype=float)
            if set(np.unique(vals)) <= {0.0, 1.0} and not has_missing:
                spec = FeatureSpec(name, BINARY, LEVEL_BINARY, offset, 1)
            else:
                cuts = numeric_cuts(vals, config.levels, config.cuts)
                n = len(cuts) + 1 + int(has_missing)
                width = n if config.encoding == ONE_HOT else level_width(n)
                spec = FeatureSpec(name, NUMERIC, config.encoding, offset, width, cuts, (), has_missing)
        else:
            cats = tuple(sorted({str(v).strip() for v in present}))
            if not cats and not has_missing:
                raise SchemaError(f"column {name!r} has no values")
            n = len(cats) + int(has_missing)
            width = n if config.encoding == ONE_HOT else level_width(n)
            spec = FeatureSpec(name, CATEGORICAL, config.encoding, offset, width, (), cats, has_missing)
        features.append(spec)
        offset += spec.bit_width
    if not features:
        raise SchemaError("table has no feature columns")
    return BinarizationSchema(tuple(features), config.label)


# -- encoding -----------------------------------------------------------------

def _levels_for(f: FeatureSpec, col: pd.Series) -> np.ndarray:
    miss = _is_missing(col)
    if miss.any() and not f.missing:
        raise EncodingError(f"missing value in column {f.name!r}")
    out = np.zeros(len(col), dtype=np.int64)
    present = col[~miss]
    if f.kind == CATEGORICAL:
        index = {c: i for i, c in enumerate(f.categories)}
        keys = [str(v).strip() for v in present]
        unseen = [k for k in keys if k not in index]
        if unseen:
            raise EncodingError(f"unseen category {unseen[0]!r} in column {f.name!r}")
        out[~miss] = [index[k] for k in keys]
    else:
        nums = pd.to_numeric(present, errors="coerce")
        if nums.isna().any():
            bad = present[nums.isna()].iloc[0]
            raise EncodingError(f"non-numeric value {bad!r} in column {f.name!r}")
        vals = nums.to_numpy(dtype=float)
        if f.kind == BINARY:
            if not np.isin(vals, [0.0, 1.0]).all():
                raise EncodingError(f"binary column {f.name!r} holds a value other than 0/1")
            out[~miss] = vals.astype(np.int64)
        else:
            out[~miss] = np.searchsorted(np.asarray(f.cuts, dtype=float), vals, side="right")
    out[miss] = f.levels - 1
    return out


def encode_table(table: pd.DataFrame, schema: BinarizationSchema) -> np.ndarray:
    """Bit codes for every row: uint64 when the width allows, Python ints otherwise."""
    w = schema.total_width
    missing = [f.name for f in schema.features if f.name not in table.columns]
    if missing:
        raise EncodingError(f"table lacks feature column(s) {missing}")
    if w <= 64:
        codes = np.zeros(len(table), dtype=np.uint64)
        for f in schema.features:
            lv = _levels_for(f, table[f.name]).astype(np.uint64)
            local = np.left_shift(np.uint64(1), lv) if f.encoding == ONE_HOT and f.kind != BINARY else lv
            codes |= np.left_shift(local, np.uint64(schema.shift(f)))
        return codes
    acc = [0] * len(table)
    for f in schema.features:
        lv = _levels_for(f, table[f.name])
        s = schema.shift(f)
        onehot = f.encoding == ONE_HOT and f.kind != BINARY
        for i, v in enumerate(lv):
            acc[i] |= ((1 << int(v)) if onehot else int(v)) << s
    return words(w, acc)


def encode_row(row: Mapping[str, Any] | Sequence[Any], schema: BinarizationSchema) -> BitVector:
    if isinstance(row, Mapping):
        record = {f.name: row.get(f.name) for f in schema.features}
    else:
        if len(row) != len(schema.features):
            raise EncodingError(f"row has {len(row)} values, schema has {len(schema.features)} features")
        record = {f.name: v for f, v in zip(schema.features, row)}
    frame = pd.DataFrame({k: pd.Series([v], dtype=object) for k, v in record.items()})
    code = encode_table(frame, schema)[0]
    return BitVector(schema.total_width, int(code))


# -- descriptions -------------------------------------------------------------

def _ranges(levels: Iterable[int]) -> str:
    levels = sorted(levels)
    parts = []
    start = prev = None
    for v in levels + [None]:
        if v is not None and prev is not None and v == prev + 1:
            prev = v
            continue
        if start is not None:
            parts.append(f"{start}..{prev}" if prev > start else str(start))
        start = prev = v
    return ",".join(parts)


def describe_bit(schema: BinarizationSchema, position: int) -> str:
    """What bit index ``position`` (0 is the overall least significant) means."""
    f, k = schema.locate(position)
    if f.kind == BINARY:
        return f"{f.name} = 1"
    if f.encoding == ONE_HOT:
        return f"{f.name} = {f.level_label(k)}"
    ones = [lv for lv in range(f.levels) if lv >> k & 1]
    return f"bit {k + 1} of {f.name}'s level (levels {_ranges(ones)})"


def literal_condition(schema: BinarizationSchema, position: int, literal: int) -> str:
    """Compact, parseable condition for one cube literal."""
    f, k = schema.locate(position)
    if f.kind == BINARY:
        return f"{f.name}={literal}"
    if f.encoding == ONE_HOT:
        op = "=" if literal else "!="
        label = f.level_label(k) if f.kind == CATEGORICAL or f.missing and k == f.levels - 1 else f"level{k}"
        return f"{f.name}{op}{label}"
    return f"{f.name}.b_{k + 1}={literal}"


def parse_condition(schema: BinarizationSchema, text: str) -> tuple[int, int]:
    """Inverse of :func:`literal_condition`: (bit index, literal)."""
    for f in sorted(schema.features, key=lambda f: -len(f.name)):
        if not text.startswith(f.name):
            continue
        rest = text[len(f.name):]
        lo = schema.shift(f)
        if f.kind == BINARY and rest in ("=0", "=1"):
            return lo, int(rest[1])
        if f.encoding == LEVEL_BINARY and f.kind != BINARY and rest.startswith(".b_"):
            k, _, lit = rest[3:].partition("=")
            if k.isdigit() and lit in ("0", "1") and 1 <= int(k) <= f.bit_width:
                return lo + int(k) - 1, int(lit)
        if f.encoding == ONE_HOT and f.kind != BINARY:
            for op, lit in (("!=", 0), ("=", 1)):
                if rest.startswith(op):
                    label = rest[len(op):]
                    for lv in range(f.levels):
                        want = (
                            f.level_label(lv)
                            if f.kind == CATEGORICAL or (f.missing and lv == f.levels - 1)
                            else f"level{lv}"
                        )
                        if label == want:
                            return lo + lv, lit
    raise ValueError(f"cannot parse condition {text!r}")


# -- schema text --------------------------------------------------------------

def _quote(s: str) -> str:
    return quote(s, safe=" !\"#$&'()*+-./:;<>=@[]^_`{|}~")


def schema_to_text(schema: BinarizationSchema) -> str:
    lines = [f"@label\t{_quote(schema.label_column)}"]
    for f in schema.features:
        if f.kind == NUMERIC:
            params = [_num(c) for c in f.cuts]
        elif f.kind == CATEGORICAL:
            params = [_quote(c) for c in f.categories]
        else:
            params = []
        if f.missing:
            params.append("?")
        lines.append(
            "\t".join([_quote(f.name), f.kind, f.encoding, str(f.bit_offset), str(f.bit_width), ",".join(params)])
        )
    return "\n".join(lines) + "\n"


def schema_from_text(text: str) -> BinarizationSchema:
    label = None
    features = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "@label":
            if len(parts) != 2:
                raise SchemaError(f"line {n}: malformed label line")
            label = unquote(parts[1])
            continue
        if len(parts) != 6:
            raise SchemaError(f"line {n}: expected 6 tab-separated fields, got {len(parts)}")
        name, kind, encoding, off, width, params = parts
        tokens = params.split(",") if params else []
        missing = bool(tokens) and tokens[-1] == "?"
        if missing:
            tokens = tokens[:-1]
        try:
            cuts = tuple(float(t) for t in tokens) if kind == NUMERIC else ()
            cats = tuple(unquote(t) for t in tokens) if kind == CATEGORICAL else ()
            features.append(
                FeatureSpec(unquote(name), kind, encoding, int(off), int(width), cuts, cats, missing)
            )
        except ValueError as exc:
            raise SchemaError(f"line {n}: {exc}") from exc
    if label is None:
        raise SchemaError("schema text lacks an @label line")
    return BinarizationSchema(tuple(features), label)
