"""CSV readers/writers.  Every writer goes through :func:`atomic_write`."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParseError
from .graph import Dataset


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _combine_complex(header: list[str]):
    """Map ``x_re``/``x_im`` column pairs onto single complex features."""
    names, plan = [], []
    i = 0
    while i < len(header):
        name = header[i]
        if name.endswith("_re") and i + 1 < len(header) and header[i + 1] == name[:-3] + "_im":
            names.append(name[:-3])
            plan.append((i, i + 1))
            i += 2
        else:
            names.append(name)
            plan.append((i, None))
            i += 1
    return names, plan


def read_dataset(path) -> Dataset:
    """Parse ``id,f1,f2,...``; ``<name>_re,<name>_im`` pairs become complex."""
    rows = _rows(path)
    if not rows:
        raise ParseError(path, 1, "empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "id":
        raise ParseError(path, 1, "header must be 'id,f1,f2,...'")
    names, plan = _combine_complex(header[1:])
    is_complex = any(im is not None for _, im in plan)
    ids, feats = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        if not all(np.isfinite(vals)):
            raise ParseError(path, lineno, "non-finite value")
        if is_complex:
            vals = [vals[re] + 1j * vals[im] if im is not None else vals[re] for re, im in plan]
        ids.append(row[0].strip())
        feats.append(vals)
    if len(ids) < 2:
        raise ParseError(path, len(rows), "a dataset needs at least two rows")
    if len(set(ids)) != len(ids):
        raise ParseError(path, 1, "duplicate ids")
    dtype = np.complex128 if is_complex else np.float64
    return Dataset(tuple(ids), np.asarray(feats, dtype=dtype))


def dataset_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    x = ds.features
    if np.iscomplexobj(x):
        header = ["id"]
        for j in range(x.shape[1]):
            header += [f"f{j + 1}_re", f"f{j + 1}_im"]
        w.writerow(header)
        for i, row in zip(ds.ids, x):
            w.writerow([i] + [fmt(v) for z in row for v in (z.real, z.imag)])
    else:
        w.writerow(["id"] + [f"f{j + 1}" for j in range(x.shape[1])])
        for i, row in zip(ds.ids, x):
            w.writerow([i] + [fmt(v) for v in row])
    return buf.getvalue()


@dataclass(frozen=True)
class EmbeddingTable:
    """Rows of an embedding CSV split by dataset tag."""

    ids1: tuple[str, ...]
    y1: np.ndarray
    ids2: tuple[str, ...]
    y2: np.ndarray


def embedding_csv(ids1, y1, ids2, y2) -> str:
    y1 = np.atleast_2d(np.asarray(y1, dtype=float))
    y2 = np.atleast_2d(np.asarray(y2, dtype=float))
    if y1.shape[1] != y2.shape[1]:
        raise DataError("both datasets need the same embedding dimension")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "dataset"] + [f"c{j + 1}" for j in range(y1.shape[1])])
    for tag, ids, y in (("1", ids1, y1), ("2", ids2, y2)):
        for i, row in zip(ids, y):
            w.writerow([i, tag] + [fmt(v) for v in row])
    return buf.getvalue()


def read_embedding(path) -> EmbeddingTable:
    rows = _rows(path)
    if not rows:
        raise ParseError(path, 1, "empty file")
    header = rows[0]
    if header[:2] != ["id", "dataset"] or len(header) < 3:
        raise ParseError(path, 1, "header must be 'id,dataset,c1,...'")
    parts = {"1": ([], []), "2": ([], [])}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        if row[1] not in parts:
            raise ParseError(path, lineno, f"dataset tag must be 1 or 2, got {row[1]!r}")
        try:
            coords = [float(c) for c in row[2:]]
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        parts[row[1]][0].append(row[0])
        parts[row[1]][1].append(coords)
    m = len(header) - 2
    (i1, c1), (i2, c2) = parts["1"], parts["2"]
    if not i1 and not i2:
        raise ParseError(path, 2, "no embedding rows")
    return EmbeddingTable(
        tuple(i1), np.asarray(c1, dtype=float).reshape(-1, m),
        tuple(i2), np.asarray(c2, dtype=float).reshape(-1, m),
    )


def trace_csv(values) -> str:
    lines = ["iter,objective"]
    lines += [f"{i},{fmt(v)}" for i, v in enumerate(values)]
    return "\n".join(lines) + "\n"


def matrix_csv(ids, w) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["id"] + list(ids))
    for i, row in zip(ids, np.asarray(w)):
        out.writerow([i] + [fmt(v) for v in row])
    return buf.getvalue()
