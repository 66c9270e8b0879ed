"""Graph file formats and deterministic report serialisation."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .graph import Graph

SCHEMA_VERSION = 1


class InputError(ValueError):
    """A user-supplied file or parameter is invalid."""


def read_matrix_market(path) -> Graph:
    try:
        M = scipy.io.mmread(str(path))
    except (OSError, ValueError, IndexError) as exc:
        raise InputError(f"cannot read Matrix Market file {path}: {exc}") from exc
    M = scipy.sparse.coo_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"{path}: matrix is not square ({M.shape})")
    A = np.zeros(M.shape, dtype=np.uint8)
    A[M.row, M.col] = 1
    A[M.col, M.row] = 1
    if np.any(np.diagonal(A)):
        raise InputError(f"{path}: self-loops are not allowed")
    return Graph(A)


def matrix_market_bytes(g: Graph) -> bytes:
    """Coordinate, pattern, symmetric (lower triangle stored)."""
    lower = scipy.sparse.tril(scipy.sparse.coo_matrix(g.adj), k=-1)
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, lower, field="pattern", symmetry="symmetric")
    return buf.getvalue()


def write_matrix_market(g: Graph, path) -> None:
    atomic_write(path, matrix_market_bytes(g))


def read_edge_list(path, n: int | None = None) -> Graph:
    """Tab-separated ``u<TAB>v`` lines, 0-indexed, undirected; duplicates ignored, ``#`` starts a comment."""
    edges = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read edge list {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected two columns, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-integer vertex in {line!r}") from None
        if u < 0 or v < 0:
            raise InputError(f"{path}:{lineno}: negative vertex index")
        if u == v:
            raise InputError(f"{path}:{lineno}: self-loop {u}")
        edges.append((u, v))
    top = max((max(e) for e in edges), default=-1) + 1
    if n is None:
        n = top
    elif top > n:
        raise InputError(f"{path}: vertex {top - 1} out of range for --n {n}")
    if n < 1:
        raise InputError(f"{path}: empty graph; pass --n")
    return Graph.from_edges(n, sorted(set((min(e), max(e)) for e in edges)))


def edge_list_bytes(g: Graph) -> bytes:
    return "".join(f"{u}\t{v}\n" for u, v in g.edges()).encode()


def write_edge_list(g: Graph, path) -> None:
    atomic_write(path, edge_list_bytes(g))


def read_graph(path, n: int | None = None) -> Graph:
    """Dispatch on suffix: ``.mtx`` is Matrix Market, anything else an edge list."""
    if str(path).endswith(".mtx"):
        g = read_matrix_market(path)
        if n is not None and g.n != n:
            raise InputError(f"{path}: has {g.n} vertices, --n says {n}")
        return g
    return read_edge_list(path, n)


def graph_bytes(g: Graph, path) -> bytes:
    return matrix_market_bytes(g) if str(path).endswith(".mtx") else edge_list_bytes(g)


def write_graph(g: Graph, path) -> None:
    atomic_write(path, graph_bytes(g, path))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(obj):
    # JSON-safe copy: arrays to lists, non-finite floats to None
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, NaN/inf as null."""
    return json.dumps(_plain(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, dumps(obj).encode())


def read_json(path):
    return json.loads(Path(path).read_text())


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if isinstance(x, float) and not math.isfinite(x) else (repr(x) if isinstance(x, float) else x) for x in row])
    return buf.getvalue().encode()


def write_csv(path, header, rows) -> None:
    atomic_write(path, csv_bytes(header, rows))


def read_csv_matrix(path) -> np.ndarray:
    """Numeric body of a CSV written by :func:`write_csv` (header skipped, blanks as NaN)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(x) if x != "" else np.nan for x in r] for r in rows], dtype=float)
