"""CSV and JSON I/O for matrices, coordinates and fit metadata.

Matrix files have a header row of column names and one row per record.
Missing cells hold the literal token ``NA``. Floats are written with
Python's shortest round-trip representation so reading back is exact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError

NA = "NA"


def format_float(v) -> str:
    v = float(v)
    return NA if math.isnan(v) else repr(v)


def read_matrix(path):
    """Read a numeric CSV.

    Returns
    -------
    values : ndarray, shape (n, p)
        NaN where the file holds ``NA``.
    names : list of str
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InvalidInputError(f"{path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: file is empty") from None
        names = [h.strip() for h in header]
        if not names or any(not h for h in names):
            raise InvalidInputError(f"{path}: line 1: header has an empty column name")
        rows = []
        for record in reader:
            lineno = reader.line_num
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(names):
                raise InvalidInputError(
                    f"{path}: line {lineno}: expected {len(names)} fields, got {len(record)}")
            row = []
            for col, cell in enumerate(record, start=1):
                cell = cell.strip()
                if cell == NA:
                    row.append(math.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                    ok = False
                else:
                    ok = math.isfinite(v)
                if not ok:
                    raise InvalidInputError(
                        f"{path}: line {lineno} column {col} ({names[col - 1]}): "
                        f"cannot parse {cell!r} as a finite number or {NA}")
                row.append(v)
            rows.append(row)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.array(rows, dtype=float), names


def write_matrix(path, values, names=None) -> None:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise InvalidInputError("can only write 2-D matrices")
    if names is None:
        names = [f"V{j + 1}" for j in range(values.shape[1])]
    if len(names) != values.shape[1]:
        raise InvalidInputError(f"{len(names)} names for {values.shape[1]} columns")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in values:
            w.writerow([format_float(v) for v in row])


def read_coords(path) -> np.ndarray:
    """Read an ``s1,s2`` coordinate file into an (n, 2) array."""
    values, names = read_matrix(path)
    missing = [c for c in ("s1", "s2") if c not in names]
    if missing:
        raise InvalidInputError(f"{path}: coordinates need columns s1,s2; missing {','.join(missing)}")
    out = values[:, [names.index("s1"), names.index("s2")]]
    if np.isnan(out).any():
        raise InvalidInputError(f"{path}: coordinates may not contain {NA}")
    return out


def write_coords(path, coords) -> None:
    write_matrix(path, coords, ["s1", "s2"])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


def write_records(path, records, columns) -> None:
    """Write dict rows as CSV with a fixed column order."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([format_float(v) if isinstance(v, float) else v for v in
                        (rec[c] for c in columns)])


def read_records(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
