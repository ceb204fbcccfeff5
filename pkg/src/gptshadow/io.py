"""File formats: fragment JSON, data-table CSV and map-pair JSON."""

from __future__ import annotations

import csv
import io as _io
import json
import sys
from typing import Optional, TextIO, Union

import numpy as np

from .embedding import MapPair
from .errors import DimensionMismatch, GptError, MissingUnitRow
from .fragment import UNIT_LABEL, ZERO_LABEL, DataTable, Fragment, as_fragment
from .numerics import as_matrix

__all__ = [
    "InputError",
    "read_text",
    "load_fragment",
    "dump_fragment",
    "fragment_to_json",
    "table_to_csv",
    "table_from_csv",
    "load_table",
    "load_maps",
    "load_matrix",
    "write_text",
]


class InputError(GptError, ValueError):
    """Unreadable or malformed input file."""


def read_text(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from None


def fragment_to_json(f) -> str:
    return json.dumps(as_fragment(f).to_dict(), indent=2)


def dump_fragment(f, path: str) -> None:
    write_text(path, fragment_to_json(f) + "\n")


def load_fragment(path: Optional[str]) -> Fragment:
    """Read a fragment document, or the fragment embedded in a CLI report."""
    doc = _json(read_text(path), path or "stdin")
    if isinstance(doc, dict) and "command" in doc and isinstance(doc.get("output"), dict):
        doc = doc["output"]
    if not isinstance(doc, dict):
        raise InputError("fragment document must be a JSON object")
    return Fragment.from_dict(doc)


def table_to_csv(t: DataTable) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(t.col_labels))
    for label, row in zip(t.row_labels, t.entries):
        w.writerow([label] + [repr(float(x)) for x in row])
    return buf.getvalue()


def table_from_csv(text: str) -> DataTable:
    """Parse a table; ``#unit`` and ``#zero`` rows are mandatory."""
    rows = [r for r in csv.reader(_io.StringIO(text)) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputError("table needs a header row and at least one data row")
    header = [c.strip() for c in rows[0][1:]]
    labels, data = [], []
    for r in rows[1:]:
        if len(r) - 1 != len(header):
            raise DimensionMismatch(
                f"row {r[0]!r} has {len(r) - 1} entries, header has {len(header)}"
            )
        labels.append(r[0].strip())
        try:
            data.append([float(c) for c in r[1:]])
        except ValueError:
            raise InputError(f"non-numeric entry in row {r[0]!r}") from None
    if UNIT_LABEL not in labels:
        raise MissingUnitRow(f"table has no {UNIT_LABEL} row")
    if ZERO_LABEL not in labels:
        raise InputError(f"table has no {ZERO_LABEL} row")
    return DataTable(np.array(data), tuple(labels), tuple(header))


def load_table(path: Optional[str]) -> DataTable:
    return table_from_csv(read_text(path))


def load_maps(path: Optional[str]) -> MapPair:
    doc = _json(read_text(path), path or "stdin")
    if not isinstance(doc, dict):
        raise InputError("map document must be a JSON object with iota and kappa")
    return MapPair.from_dict(doc)


def load_matrix(path: Optional[str], key: str = "H") -> np.ndarray:
    """A matrix given as a bare array of arrays or under ``key``."""
    doc = _json(read_text(path), path or "stdin")
    if isinstance(doc, dict):
        if key not in doc:
            raise InputError(f"matrix document lacks key {key!r}")
        doc = doc[key]
    return as_matrix(doc, key)
