"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data error, 3 resource guard.
Results go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from .binarize import check_labels, encode_table, infer_schema, schema_from_text, schema_to_text
from .cube import Cube, ResourceLimit
from .exact import ExactLimits, minimize_exact
from .heuristic import minimize_heuristic
from .learn import (
    ConflictPolicy,
    FitConfig,
    encode_labeled,
    evaluate,
    fit,
    fit_parts,
    merge_fit,
    model_from_text,
    model_to_text,
    predict_table,
    rules_to_text,
    score,
    sets_from_codes,
    stream_fit,
    summarize_parts,
)
from .pla import read_pla, write_pla
from .synth import LABEL, PlantedSpec, generate_planted, random_instance

log = logging.getLogger("boolrules")

EXIT_USAGE, EXIT_DATA, EXIT_RESOURCE = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def read_table(path: str, sep: str) -> pd.DataFrame:
    return pd.read_csv(path, sep=sep, dtype=str, keep_default_na=False, na_values=[""])


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fit_config(args) -> FitConfig:
    return FitConfig(
        levels=args.levels,
        encoding=args.encoding,
        cuts=args.cuts,
        engine=args.engine,
        policy=ConflictPolicy.parse(args.policy),
        label=args.label,
        missing_category=args.missing_category,
        max_primes=args.max_primes,
        max_nodes=args.max_nodes,
        max_iter=args.max_iter,
    )


def _schema_arg(args):
    return schema_from_text(Path(args.schema).read_text()) if args.schema else None


# -- subcommands --------------------------------------------------------------

def cmd_binarize(args) -> None:
    table = read_table(args.data, args.sep)
    schema = _schema_arg(args) or infer_schema(table, _fit_config(args).binarize)
    if args.schema_out:
        Path(args.schema_out).write_text(schema_to_text(schema))
    codes = encode_table(table, schema)
    w = schema.total_width
    lines = [f"{int(c):0{w}b}" for c in codes]
    if schema.label_column in table.columns:
        labels = check_labels(table, schema.label_column)
        lines = [f"{b} {y}" for b, y in zip(lines, labels)]
    _emit(args, "".join(line + "\n" for line in lines))


def cmd_minimize(args) -> None:
    data = read_pla(Path(args.input).read_text() if args.input != "-" else sys.stdin.read())
    if args.engine == "exact":
        cover = minimize_exact(data.problem, ExactLimits(args.max_primes, args.max_nodes))
    else:
        cover = minimize_heuristic(data.problem, max_iter=args.max_iter)
    log.info("minimize: %d cube(s), %d literal(s)", *cover.cost())
    _emit(args, write_pla(cover, data.input_labels, data.output_label))


def cmd_fit(args) -> None:
    table = read_table(args.data, args.sep)
    config = _fit_config(args)
    schema = _schema_arg(args)
    if args.parts > 1:
        rs = fit_parts(table, args.parts, config, schema, args.workers)
    else:
        rs = fit(table, config, schema)
    for line in rules_to_text(rs):
        log.info("rule: %s", line)
    _emit(args, model_to_text(rs))


def cmd_predict(args) -> None:
    rs = model_from_text(Path(args.model).read_text())
    table = read_table(args.data, args.sep)
    preds = predict_table(rs, table)
    _emit(args, "".join(f"{int(p)}\n" for p in preds))


def cmd_eval(args) -> None:
    table = read_table(args.data, args.sep)
    if args.predictions:
        preds = [int(s) for s in Path(args.predictions).read_text().split()]
        metrics = score(check_labels(table, args.label), preds)
    elif args.model:
        metrics = evaluate(model_from_text(Path(args.model).read_text()), table)
    else:
        raise UsageError("eval needs --model or --predictions")
    _emit(args, "\n".join(metrics.lines()) + "\n")


def cmd_merge(args) -> None:
    config = _fit_config(args)
    tables = [read_table(p, args.sep) for p in args.data]
    schema = _schema_arg(args) or infer_schema(pd.concat(tables, ignore_index=True), config.binarize)
    w = schema.total_width
    problems = []
    for t in tables:
        codes, labels = encode_labeled(t, schema)
        problems.append(sets_from_codes(w, codes, labels, config.policy))
    parts = summarize_parts(problems, config, args.workers)
    _emit(args, model_to_text(merge_fit(parts, schema, config)))


def cmd_stream(args) -> None:
    config = _fit_config(args)
    tables = (read_table(p, args.sep) for p in args.data)
    rs, _ = stream_fit(tables, config, _schema_arg(args))
    _emit(args, model_to_text(rs))


def cmd_gen(args) -> None:
    if args.planted is not None:
        rules = tuple(Cube.parse(r) for r in args.planted)
        width = rules[0].width if rules else args.width
        if width is None:
            raise UsageError("gen needs --width when no rule is planted")
        spec = PlantedSpec(width, rules, args.rows, args.class1_fraction, args.seed)
        table = generate_planted(spec)
        _emit(args, table.to_csv(sep=args.sep, index=False, lineterminator="\n"))
    else:
        if args.width is None:
            raise UsageError("gen needs --planted or --width")
        problem = random_instance(args.width, args.on_fraction, args.off_fraction, args.seed)
        _emit(args, write_pla(problem))


# -- argument parsing ---------------------------------------------------------

_DEFAULTS = {
    "levels": 4,
    "encoding": "level-binary",
    "cuts": "quantile",
    "engine": "exact",
    "policy": "majority",
    "label": LABEL,
    "missing_category": False,
    "max_primes": ExactLimits().max_primes,
    "max_nodes": ExactLimits().max_nodes,
    "max_iter": 64,
    "sep": ",",
    "parts": 1,
    "workers": 1,
}


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _common(p: argparse.ArgumentParser, learn: bool = True) -> None:
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--config", help="file of 'key = value' defaults; flags win")
    p.add_argument("--sep", default=None, help="field delimiter of data files (default ',')")
    p.add_argument("--engine", choices=["exact", "heuristic"], default=None)
    p.add_argument("--max-primes", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    if learn:
        p.add_argument("--levels", type=int, default=None, help="levels per numeric feature")
        p.add_argument("--encoding", choices=["level-binary", "one-hot"], default=None)
        p.add_argument("--cuts", choices=["quantile", "width"], default=None)
        p.add_argument("--policy", default=None, help="error | majority | threshold:F | prefer-positive")
        p.add_argument("--label", default=None, help="label column name")
        p.add_argument("--missing-category", action="store_const", const=True, default=None)
        p.add_argument("--schema", help="schema file to use instead of inferring one")
        p.add_argument("--workers", type=int, default=None, help="processes for part minimization")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boolrules", description="Rule learning by two-level Boolean minimization.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("binarize", help="encode a data file as bit strings")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--schema-out", help="also write the schema here")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("minimize", help="minimize a single-output PLA")
    _common(p, learn=False)
    p.add_argument("--in", dest="input", required=True, help="PLA file, or - for stdin")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("fit", help="learn a model from a labeled data file")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--parts", type=int, default=None, help="split rows into k parts and merge")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict 0/1 per row")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="accuracy, precision, recall and confusion counts")
    _common(p)
    p.add_argument("--model")
    p.add_argument("--predictions", help="file of 0/1 predictions, one per row")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("merge", help="fit each data file as a part, then merge")
    _common(p)
    p.add_argument("--data", required=True, nargs="+")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stream", help="fold data files in order as batches")
    _common(p)
    p.add_argument("--data", required=True, nargs="+")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("gen", help="synthetic planted dataset or random PLA instance")
    _common(p, learn=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--planted", nargs="*", metavar="CUBE", help="planted rule cubes, e.g. 111---")
    p.add_argument("--width", type=int)
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--class1-fraction", type=float, default=0.02)
    p.add_argument("--on-fraction", type=float, default=0.25)
    p.add_argument("--off-fraction", type=float, default=0.25)
    p.set_defaults(func=cmd_gen)
    return parser


def _resolve(args) -> None:
    """Fill unset options from the config file, then from built-in defaults."""
    config = read_config(args.config) if args.config else {}
    known = set(vars(args))
    for key in config:
        if key not in known:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
    for key, default in _DEFAULTS.items():
        if key not in known or getattr(args, key) is not None:
            continue
        if key in config:
            raw = config[key]
            value = _bool(raw) if isinstance(default, bool) else type(default)(raw)
        else:
            value = default
        setattr(args, key, value)
    for key, raw in config.items():
        if getattr(args, key, None) is None:
            setattr(args, key, raw)
    if getattr(args, "engine", None) not in (None, "exact", "heuristic"):
        raise UsageError(f"unknown engine {args.engine!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"boolrules: bad config value: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"boolrules {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"boolrules {args.command}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, pd.errors.ParserError) as exc:
        print(f"boolrules {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
