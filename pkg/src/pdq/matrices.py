"""Dense and compressed-sparse-row matrix value types.

Both types are immutable after construction and wrap float64 numpy
storage. Operations elsewhere in the package unwrap to ndarrays, so the
wrappers stay thin: shape bookkeeping plus the structural invariants a
file reader or generator must guarantee.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse

from .exceptions import InvalidArgumentError


class DenseMatrix:
    """Row-major float64 matrix."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidArgumentError(f"dense matrix needs 2 dimensions, got {arr.ndim}")
        self.data = arr
        self.data.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def require_finite(self) -> "DenseMatrix":
        """Raise unless every entry is finite. Used on file/generator input."""
        if not np.isfinite(self.data).all():
            raise InvalidArgumentError("dense matrix contains NaN or Inf entries")
        return self

    def to_array(self) -> np.ndarray:
        return self.data.copy()

    def __eq__(self, other):
        return (
            isinstance(other, DenseMatrix)
            and self.shape == other.shape
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


class SparseMatrix:
    """Compressed-sparse-row matrix.

    Invariants enforced at construction: ``row_offsets`` is non-decreasing
    with length ``rows + 1`` and final entry ``len(values)``; column indices
    are strictly increasing within each row and below ``cols``; no stored
    value has magnitude <= the drop tolerance used to build it.
    """

    __slots__ = ("_rows", "_cols", "row_offsets", "col_indices", "values", "_csr")

    def __init__(self, rows, cols, row_offsets, col_indices, values, drop_tol: float = 0.0):
        rows = int(rows)
        cols = int(cols)
        offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        vals = np.ascontiguousarray(values, dtype=np.float64)
        if rows < 0 or cols < 0:
            raise InvalidArgumentError("negative matrix dimensions")
        if offsets.ndim != 1 or offsets.shape[0] != rows + 1:
            raise InvalidArgumentError("row_offsets must have length rows + 1")
        if offsets[0] != 0 or np.any(np.diff(offsets) < 0) or offsets[-1] != vals.shape[0]:
            raise InvalidArgumentError("row_offsets must be non-decreasing from 0 to len(values)")
        if indices.shape != vals.shape:
            raise InvalidArgumentError("col_indices and values must have equal length")
        if vals.size and (indices.min() < 0 or indices.max() >= cols):
            raise InvalidArgumentError("column index out of range")
        for i in range(rows):
            lo, hi = offsets[i], offsets[i + 1]
            if hi - lo > 1 and np.any(np.diff(indices[lo:hi]) <= 0):
                raise InvalidArgumentError(f"column indices in row {i} are not strictly increasing")
        if vals.size and np.any(np.abs(vals) <= drop_tol):
            raise InvalidArgumentError("stored value at or below the drop tolerance")
        self._rows = rows
        self._cols = cols
        self.row_offsets = offsets
        self.col_indices = indices
        self.values = vals
        for a in (offsets, indices, vals):
            a.setflags(write=False)
        self._csr = None

    @classmethod
    def from_dense(cls, dense, drop_tol: float = 0.0) -> "SparseMatrix":
        arr = dense.data if isinstance(dense, DenseMatrix) else np.asarray(dense, dtype=np.float64)
        mask = np.abs(arr) > drop_tol
        counts = mask.sum(axis=1)
        offsets = np.concatenate(([0], np.cumsum(counts)))
        rows_idx, cols_idx = np.nonzero(mask)
        return cls(arr.shape[0], arr.shape[1], offsets, cols_idx, arr[rows_idx, cols_idx], drop_tol)

    @classmethod
    def from_coo(cls, rows, cols, row_idx, col_idx, values, drop_tol: float = 0.0) -> "SparseMatrix":
        """Build from unordered coordinate triplets (no duplicates allowed)."""
        ri = np.asarray(row_idx, dtype=np.int64)
        ci = np.asarray(col_idx, dtype=np.int64)
        vals = np.asarray(values, dtype=np.float64)
        if ri.size and (ri.min() < 0 or ri.max() >= rows or ci.min() < 0 or ci.max() >= cols):
            raise InvalidArgumentError("coordinate index out of range")
        order = np.lexsort((ci, ri))
        ri, ci, vals = ri[order], ci[order], vals[order]
        if ri.size > 1 and np.any((np.diff(ri) == 0) & (np.diff(ci) == 0)):
            raise InvalidArgumentError("duplicate coordinate entry")
        keep = np.abs(vals) > drop_tol
        ri, ci, vals = ri[keep], ci[keep], vals[keep]
        offsets = np.concatenate(([0], np.cumsum(np.bincount(ri, minlength=rows))))
        return cls(rows, cols, offsets, ci, vals, drop_tol)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def require_finite(self) -> "SparseMatrix":
        if self.values.size and not np.isfinite(self.values).all():
            raise InvalidArgumentError("sparse matrix contains NaN or Inf entries")
        return self

    def to_csr(self) -> scipy.sparse.csr_matrix:
        """Scipy view used internally for sparse-times-dense kernels."""
        if self._csr is None:
            self._csr = scipy.sparse.csr_matrix(
                (self.values, self.col_indices, self.row_offsets), shape=self.shape, copy=False
            )
        return self._csr

    def densify(self) -> DenseMatrix:
        out = np.zeros(self.shape)
        for i in range(self._rows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            out[i, self.col_indices[lo:hi]] = self.values[lo:hi]
        return DenseMatrix(out)

    def __repr__(self):
        return f"SparseMatrix({self._rows}x{self._cols}, nnz={self.nnz})"


Matrix = DenseMatrix | SparseMatrix


def as_dense_array(a) -> np.ndarray:
    """Unwrap a DenseMatrix (or pass through a 2-D ndarray)."""
    if isinstance(a, DenseMatrix):
        return a.data
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    return arr
