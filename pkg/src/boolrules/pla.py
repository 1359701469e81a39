"""Single-output PLA files with explicit on and off sets (``.type fr``)."""

from __future__ import annotations

from dataclasses import dataclass

from .cube import Cover, Cube, MinimizationProblem, ResourceLimit, count_minterms

MAX_EXPANDED = 1 << 22


class PlaError(ValueError):
    pass


@dataclass(frozen=True)
class PlaData:
    problem: MinimizationProblem
    input_labels: tuple[str, ...] = ()
    output_label: str | None = None


def _parse(text: str):
    width = None
    labels: tuple[str, ...] = ()
    out_label = None
    declared = None
    rows: list[tuple[Cube, str, int]] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            key, *args = line.split()
            if key in (".e", ".end"):
                break
            if key == ".i":
                width = _int_arg(args, n)
                if width < 1:
                    raise PlaError(f"line {n}: .i must be positive")
            elif key == ".o":
                if _int_arg(args, n) != 1:
                    raise PlaError(f"line {n}: only single-output PLAs are supported")
            elif key == ".ilb":
                labels = tuple(args)
            elif key == ".ob":
                if len(args) != 1:
                    raise PlaError(f"line {n}: .ob needs exactly one name")
                out_label = args[0]
            elif key == ".p":
                declared = _int_arg(args, n)
            elif key == ".type":
                if args != ["fr"]:
                    raise PlaError(f"line {n}: only '.type fr' is supported")
            else:
                raise PlaError(f"line {n}: unknown directive {key}")
            continue
        if width is None:
            raise PlaError(f"line {n}: cube before .i")
        parts = line.split()
        if len(parts) != 2:
            raise PlaError(f"line {n}: expected '<inputs> <output>'")
        bits, out = parts
        if len(bits) != width or set(bits) - set("01-"):
            raise PlaError(f"line {n}: bad input part {bits!r}")
        if out not in ("0", "1", "-"):
            raise PlaError(f"line {n}: bad output part {out!r}")
        rows.append((Cube.parse(bits), out, n))
    if width is None:
        raise PlaError("missing .i")
    if labels and len(labels) != width:
        raise PlaError(f".ilb names {len(labels)} inputs, .i says {width}")
    if declared is not None and declared != len(rows):
        raise PlaError(f".p declares {declared} cubes, found {len(rows)}")
    return width, labels, out_label, rows


def _int_arg(args: list[str], n: int) -> int:
    if len(args) != 1 or not args[0].isdigit():
        raise PlaError(f"line {n}: expected one integer argument")
    return int(args[0])


def read_pla(text: str, max_minterms: int = MAX_EXPANDED) -> PlaData:
    """On/off minterm sets from a PLA; output '-' rows are don't-cares."""
    width, labels, out_label, rows = _parse(text)
    total = sum(count_minterms(c) for c, out, _ in rows if out in "01")
    if total > max_minterms:
        raise ResourceLimit(f"PLA expands to {total} minterms (limit {max_minterms})")
    on: set[int] = set()
    off: set[int] = set()
    for c, out, _ in rows:
        if out == "1":
            on.update(c.minterms())
        elif out == "0":
            off.update(c.minterms())
    clash = on & off
    if clash:
        m = min(clash)
        raise PlaError(f"minterm {Cube.minterm(width, m)} is both on and off")
    return PlaData(MinimizationProblem(width, on, off), labels, out_label)


def read_pla_cover(text: str) -> tuple[Cover, tuple[str, ...], str | None]:
    """The '1' rows of a PLA as a cover (no expansion)."""
    width, labels, out_label, rows = _parse(text)
    if any(out != "1" for _, out, _ in rows):
        raise PlaError("a cover PLA may only contain rows with output 1")
    return Cover(width, [c for c, _, _ in rows]), labels, out_label


def write_pla(
    obj: Cover | MinimizationProblem,
    input_labels: tuple[str, ...] | list[str] = (),
    output_label: str | None = None,
) -> str:
    """Canonical text: header, then rows sorted textually, then ``.e``."""
    width = obj.width
    if isinstance(obj, MinimizationProblem):
        rows = [f"{Cube.minterm(width, m)} 1" for m in obj.on]
        rows += [f"{Cube.minterm(width, m)} 0" for m in obj.off]
    else:
        rows = [f"{c} 1" for c in obj]
    rows.sort()
    head = [f".i {width}", ".o 1"]
    if input_labels:
        if len(input_labels) != width or any(not s or any(ch.isspace() for ch in s) for s in input_labels):
            raise PlaError("input labels must be one whitespace-free name per input")
        head.append(".ilb " + " ".join(input_labels))
    if output_label:
        head.append(f".ob {output_label}")
    head += [".type fr", f".p {len(rows)}"]
    return "\n".join(head + rows + [".e"]) + "\n"
