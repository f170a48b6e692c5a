"""Delimited-text input and JSON/CSV/TSV output for results."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import DataMatrix, EffectSizeResult, PermutationResult
from .errors import EmptyTable, NonFiniteValue, ParseError, ValidationError

SCHEMA = "permstat/1"
CANDIDATE_DELIMITERS = ",\t; "
PLOT_COLUMNS = (
    "variable",
    "estimate",
    "ci_lower",
    "ci_upper",
    "p",
    "effect",
    "effect_ci_lower",
    "effect_ci_upper",
)


@dataclass(frozen=True)
class TableSpec:
    """Where and how to read a table.

    ``layout='wide'`` treats every selected column as a variable.
    ``layout='long'`` reads one value column and one or more label columns
    (``groups``). ``header=None`` detects a header from the first row and
    ``delimiter=None`` sniffs it.
    """

    path: str | Path
    layout: str = "wide"
    delimiter: str | None = None
    header: bool | None = None
    columns: Sequence[str] | None = None
    value: str | None = None
    groups: Sequence[str] = ()

    def __post_init__(self):
        if self.layout not in ("wide", "long"):
            raise ValidationError(f"layout must be 'wide' or 'long', got {self.layout!r}")
        if self.layout == "long" and (self.value is None or not self.groups):
            raise ValidationError("long layout needs a value column and at least one group column")


@dataclass(frozen=True)
class LongTable:
    values: np.ndarray
    labels: tuple[np.ndarray, ...]
    names: tuple[str, ...]


def _sniff_delimiter(text: str) -> str:
    sample = "\n".join(text.splitlines()[:20])
    try:
        return csv.Sniffer().sniff(sample, delimiters=CANDIDATE_DELIMITERS).delimiter
    except csv.Error:
        first = sample.splitlines()[0] if sample else ""
        for d in ",\t;":
            if d in first:
                return d
        return ","


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_rows(path, delimiter=None) -> tuple[list[list[str]], str]:
    """Non-blank rows of a delimited file, cells stripped, plus the delimiter used."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise EmptyTable(f"cannot read {path}: {exc}") from exc
    delim = delimiter or _sniff_delimiter(text)
    if delim == "\\t":
        delim = "\t"
    reader = csv.reader(io.StringIO(text), delimiter=delim, skipinitialspace=True)
    rows = [[c.strip() for c in r] for r in reader]
    # a trailing empty cell from a trailing delimiter is not data
    rows = [r[:-1] if len(r) > 1 and r[-1] == "" else r for r in rows]
    return [r for r in rows if any(r)], delim


def _split_header(rows, header):
    if header is None:
        header = any(not _is_number(c) for c in rows[0] if c)
    if header:
        return rows[0], rows[1:], 2
    return [f"v{j + 1}" for j in range(len(rows[0]))], rows, 1


def _column_index(names, key) -> int:
    if key in names:
        return names.index(key)
    if str(key).isdigit() and 1 <= int(key) <= len(names):
        return int(key) - 1
    raise ValidationError(f"column {key!r} not found; available: {list(names)}")


def _parse_float(cell: str, row: int, col: int) -> float:
    if cell == "":
        raise ParseError(f"empty cell at row {row}, column {col}", row=row, col=col)
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} at row {row}, column {col}", row=row, col=col) from None
    if not math.isfinite(v):
        raise NonFiniteValue(f"non-finite value {cell!r} at row {row}, column {col}", cells=[(row, col)])
    return v


def load_table(spec: TableSpec) -> DataMatrix | LongTable:
    """Read a wide table into a :class:`DataMatrix` or a long table into a :class:`LongTable`.

    Error coordinates are 1-based file rows and columns.
    """
    rows, _ = read_rows(spec.path, spec.delimiter)
    if not rows:
        raise EmptyTable(f"{spec.path} contains no rows")
    names, body, first_row = _split_header(rows, spec.header)
    if not body:
        raise EmptyTable(f"{spec.path} contains a header but no data rows")
    width = len(names)
    for i, r in enumerate(body):
        if len(r) != width:
            raise ParseError(
                f"row {first_row + i} has {len(r)} fields, expected {width}", row=first_row + i, col=None
            )

    if spec.layout == "wide":
        idx = list(range(width)) if spec.columns is None else [_column_index(names, c) for c in spec.columns]
        values = np.array(
            [[_parse_float(r[j], first_row + i, j + 1) for j in idx] for i, r in enumerate(body)],
            dtype=float,
        )
        return DataMatrix(values, tuple(names[j] for j in idx))

    vj = _column_index(names, spec.value)
    gj = [_column_index(names, g) for g in spec.groups]
    values = np.array([_parse_float(r[vj], first_row + i, vj + 1) for i, r in enumerate(body)])
    labels = tuple(np.array([r[j] for r in body]) for j in gj)
    return LongTable(values, labels, (names[vj], *(names[j] for j in gj)))


# -----------------------------------------------------------------------------
# Output
# -----------------------------------------------------------------------------
def records(result: PermutationResult) -> list[dict[str, Any]]:
    """One dictionary per variable (or pair)."""
    out = []
    for v, name in enumerate(result.names):
        out.append(
            {
                "variable": name,
                "statistic": float(result.statistic[v]),
                "df": result.df[v].tolist(),
                "p": float(result.p[v]),
                "p_uncorrected": float(result.p_uncorrected[v]),
                "estimate": float(result.estimate[v]),
                "se": float(result.se[v]),
                "ci_lower": float(result.ci[v, 0]),
                "ci_upper": float(result.ci[v, 1]),
            }
        )
    return out


def effect_records(result: EffectSizeResult) -> list[dict[str, Any]]:
    return [
        {
            "variable": name,
            "effect": float(result.effect[v]),
            "ci_lower": float(result.ci[v, 0]),
            "ci_upper": float(result.ci[v, 1]),
            "uncorrected": float(result.uncorrected[v]),
            "correction_factor": float(result.correction_factor[v]),
        }
        for v, name in enumerate(result.names)
    ]


def dumps(document: dict) -> str:
    """Deterministic JSON; non-finite floats use the ``Infinity``/``NaN`` tokens."""
    return json.dumps(document, indent=2, allow_nan=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(u) for u in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[dict[str, Any]], echo: dict[str, Any] | None = None) -> str:
    """Rows as CSV, preceded by ``# key=value`` lines echoing the run configuration."""
    buf = io.StringIO()
    for k, v in (echo or {}).items():
        buf.write(f"# {k}={_fmt(v)}\n")
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def emit_plot_data(result: PermutationResult | None, path, effect: EffectSizeResult | None = None) -> None:
    """Write the per-variable columns needed to redraw a results figure as TSV.

    Columns: ``variable estimate ci_lower ci_upper p effect effect_ci_lower
    effect_ci_upper``. Fields that were not computed are written as ``nan``.
    """
    if result is None and effect is None:
        raise ValidationError("emit_plot_data needs a test result or an effect-size result")
    names = result.names if result is not None else effect.names
    if result is not None and effect is not None and tuple(effect.names) != tuple(names):
        raise ValidationError("test and effect-size results cover different variables")
    nan = float("nan")
    lines = ["\t".join(PLOT_COLUMNS)]
    for v, name in enumerate(names):
        row = [name]
        if result is not None:
            row += [result.estimate[v], result.ci[v, 0], result.ci[v, 1], result.p[v]]
        else:
            row += [nan] * 4
        if effect is not None:
            row += [effect.effect[v], effect.ci[v, 0], effect.ci[v, 1]]
        else:
            row += [nan] * 3
        lines.append("\t".join(_fmt(float(c)) if not isinstance(c, str) else c for c in row))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc
