"""Reader for the converge CSV schema: n,max_error,estimated_order,f_evals."""

from __future__ import annotations

import csv
from dataclasses import dataclass

EXPECTED_HEADER = ["n", "max_error", "estimated_order", "f_evals"]


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ConvergeRow:
    n: int
    max_error: float
    estimated_order: float | None
    f_evals: int


def read_converge_csv(path: str) -> list[ConvergeRow]:
    """Parse one converge report; raises SchemaError naming the offending
    column or file on any mismatch."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != EXPECTED_HEADER:
            offending = next((f"unexpected column {got!r}"
                              for got, want in zip(header, EXPECTED_HEADER)
                              if got != want),
                             f"expected columns {EXPECTED_HEADER}, got {header}")
            raise SchemaError(f"{path}: {offending}")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(field == "" for field in record):
                raise SchemaError(f"{path}: empty row at line {lineno}")
            if len(record) != len(EXPECTED_HEADER):
                raise SchemaError(
                    f"{path}: line {lineno} has {len(record)} fields, expected 4")
            try:
                rows.append(ConvergeRow(
                    n=int(record[0]),
                    max_error=float(record[1]),
                    estimated_order=float(record[2]) if record[2] else None,
                    f_evals=int(record[3]),
                ))
            except ValueError as exc:
                bad = next(name for name, field, kind in zip(
                    EXPECTED_HEADER, record, (int, float, float, int))
                    if not _parses(field, kind, name))
                raise SchemaError(
                    f"{path}: line {lineno}, column {bad!r}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows after the header")
    return rows


def _parses(field: str, kind, name: str) -> bool:
    if name == "estimated_order" and field == "":
        return True
    try:
        kind(field)
        return True
    except ValueError:
        return False
