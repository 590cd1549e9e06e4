"""File formats: Matrix Market, dense CSV, tensors, factor directories.

Floats are written with ``repr`` (shortest round-trip form), so every
write/read cycle is bit-exact. Parse errors carry the 1-based physical
line number of the offending line.
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone

import numpy as np

from .exceptions import MatrixFormatError
from .matrices import DenseMatrix, SparseMatrix
from .tensor import DenseTensor

_MM_BANNER = "%%MatrixMarket"


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- matrix market


def write_matrix_market(a, path) -> None:
    """Dense -> array format, sparse -> coordinate format (real general)."""
    with open(path, "w") as fh:
        if isinstance(a, SparseMatrix):
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{a.rows} {a.cols} {a.nnz}\n")
            for i in range(a.rows):
                lo, hi = a.row_offsets[i], a.row_offsets[i + 1]
                for j, v in zip(a.col_indices[lo:hi], a.values[lo:hi]):
                    fh.write(f"{i + 1} {j + 1} {_fmt(v)}\n")
        else:
            arr = a.data
            fh.write("%%MatrixMarket matrix array real general\n")
            fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
            for j in range(arr.shape[1]):  # array format is column-major
                for i in range(arr.shape[0]):
                    fh.write(f"{_fmt(arr[i, j])}\n")


def _mm_parse_header(line: str, path) -> tuple[str, str]:
    fields = line.strip().split()
    if len(fields) != 5 or fields[0] != _MM_BANNER or fields[1].lower() != "matrix":
        raise MatrixFormatError("not a Matrix Market matrix header", path, 1)
    layout, scalar, symmetry = (f.lower() for f in fields[2:5])
    if layout not in ("coordinate", "array"):
        raise MatrixFormatError(f"unsupported layout {layout!r}", path, 1)
    if scalar != "real":
        raise MatrixFormatError(f"unsupported scalar type {scalar!r} (real only)", path, 1)
    if symmetry != "general":
        raise MatrixFormatError(f"unsupported symmetry {symmetry!r} (general only)", path, 1)
    return layout, scalar


def read_matrix_market(path):
    """Returns DenseMatrix for array files, SparseMatrix for coordinate files."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty file", path, 1)
    layout, _ = _mm_parse_header(lines[0], path)

    body = [
        (no, line)
        for no, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixFormatError("missing size line", path, len(lines))
    size_no, size_line = body[0]
    fields = size_line.split()

    if layout == "array":
        if len(fields) != 2:
            raise MatrixFormatError("array size line must be 'rows cols'", path, size_no)
        try:
            rows, cols = int(fields[0]), int(fields[1])
        except ValueError:
            raise MatrixFormatError("malformed size line", path, size_no) from None
        if len(body) - 1 != rows * cols:
            raise MatrixFormatError(
                f"expected {rows * cols} value lines, found {len(body) - 1}", path, size_no
            )
        data = np.empty((rows, cols))
        idx = 0
        for no, line in body[1:]:
            try:
                v = float(line)
            except ValueError:
                raise MatrixFormatError(f"bad value {line.strip()!r}", path, no) from None
            data[idx % rows, idx // rows] = v  # column-major on disk
            idx += 1
        return DenseMatrix(data).require_finite()

    if len(fields) != 3:
        raise MatrixFormatError("coordinate size line must be 'rows cols nnz'", path, size_no)
    try:
        rows, cols, nnz = (int(f) for f in fields)
    except ValueError:
        raise MatrixFormatError("malformed size line", path, size_no) from None
    if len(body) - 1 != nnz:
        raise MatrixFormatError(f"expected {nnz} entries, found {len(body) - 1}", path, size_no)
    ri = np.empty(nnz, dtype=np.int64)
    ci = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for pos, (no, line) in enumerate(body[1:]):
        fields = line.split()
        if len(fields) != 3:
            raise MatrixFormatError("coordinate entry must be 'i j value'", path, no)
        try:
            ri[pos] = int(fields[0]) - 1
            ci[pos] = int(fields[1]) - 1
            vals[pos] = float(fields[2])
        except ValueError:
            raise MatrixFormatError(f"bad entry {line.strip()!r}", path, no) from None
        if not (0 <= ri[pos] < rows and 0 <= ci[pos] < cols):
            raise MatrixFormatError("coordinate index out of range", path, no)
    return SparseMatrix.from_coo(rows, cols, ri, ci, vals).require_finite()


# ------------------------------------------------------------------- dense csv


def write_dense_csv(a: DenseMatrix, path) -> None:
    arr = a.data
    with open(path, "w") as fh:
        fh.write(f"{arr.shape[0]},{arr.shape[1]}\n")
        for i in range(arr.shape[0]):
            fh.write(",".join(_fmt(v) for v in arr[i]) + "\n")


def read_dense_csv(path) -> DenseMatrix:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty file", path, 1)
    header = lines[0].split(",")
    if len(header) != 2:
        raise MatrixFormatError("header row must be 'rows,cols'", path, 1)
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError("header row must be 'rows,cols'", path, 1) from None
    value_lines = [(no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if len(value_lines) != rows:
        raise MatrixFormatError(f"expected {rows} value rows, found {len(value_lines)}", path, 1)
    data = np.empty((rows, cols))
    for i, (no, line) in enumerate(value_lines):
        fields = line.split(",")
        if len(fields) != cols:
            raise MatrixFormatError(f"expected {cols} values, found {len(fields)}", path, no)
        try:
            data[i] = [float(f) for f in fields]
        except ValueError:
            raise MatrixFormatError("bad value in row", path, no) from None
    return DenseMatrix(data).require_finite()


def read_matrix(path):
    """Sniff Matrix Market vs CSV by content."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith(_MM_BANNER):
        return read_matrix_market(path)
    return read_dense_csv(path)


# --------------------------------------------------------------------- tensors


def write_tensor(t: DenseTensor, path) -> None:
    """JSON shape header line, then one value per line in storage order."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"shape": list(t.shape)}) + "\n")
        for v in t.data.ravel():
            fh.write(_fmt(v) + "\n")


def read_tensor(path) -> DenseTensor:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty file", path, 1)
    try:
        header = json.loads(lines[0])
        shape = tuple(int(s) for s in header["shape"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise MatrixFormatError('first line must be a JSON header {"shape": [...]}', path, 1) from None
    values = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise MatrixFormatError(f"bad value {line.strip()!r}", path, no) from None
    expected = int(np.prod(shape))
    if len(values) != expected:
        raise MatrixFormatError(f"expected {expected} values, found {len(values)}", path, 1)
    return DenseTensor(np.array(values).reshape(shape)).require_finite()


# --------------------------------------------------------- factor directories


def save_factorization(fact, out_dir, extra_meta: dict | None = None) -> None:
    """P.mtx / D.mtx / Q.mtx plus meta.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    write_matrix_market(fact.p, os.path.join(out_dir, "P.mtx"))
    write_matrix_market(fact.d, os.path.join(out_dir, "D.mtx"))
    write_matrix_market(fact.q, os.path.join(out_dir, "Q.mtx"))
    meta = {
        "objective_history": fact.objective_history,
        "sweeps_used": fact.sweeps_used,
        "converged": fact.converged,
        "config": fact.config.to_dict(),
        "reg": fact.reg.to_dict(),
        "flops": fact.total_flops().to_dict(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    meta.update(extra_meta or {})
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_factorization(out_dir):
    """Round-trip loader; returns (P, D, Q, meta dict)."""
    p = read_matrix_market(os.path.join(out_dir, "P.mtx"))
    d = read_matrix_market(os.path.join(out_dir, "D.mtx"))
    q = read_matrix_market(os.path.join(out_dir, "Q.mtx"))
    with open(os.path.join(out_dir, "meta.json")) as fh:
        meta = json.load(fh)
    return p, d, q, meta
