"""Structural invariants of the matrix value types."""

import numpy as np
import pytest

from pdq.exceptions import InvalidArgumentError
from pdq.matrices import DenseMatrix, SparseMatrix


def test_dense_requires_2d():
    with pytest.raises(InvalidArgumentError):
        DenseMatrix(np.ones(3))


def test_dense_finite_check():
    m = DenseMatrix([[1.0, np.nan]])
    with pytest.raises(InvalidArgumentError):
        m.require_finite()
    DenseMatrix([[1.0, 2.0]]).require_finite()


def test_dense_is_immutable():
    m = DenseMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        m.data[0, 0] = 5.0


def test_sparse_roundtrip_from_dense():
    a = np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [0.0, 3.0, 0.0]])
    sp = SparseMatrix.from_dense(a)
    assert sp.nnz == 3
    assert np.array_equal(sp.densify().data, a)
    assert list(sp.row_offsets) == [0, 2, 2, 3]


def test_sparse_offsets_validation():
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(2, 2, [0, 1], [0], [1.0])  # offsets too short
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(2, 2, [0, 2, 1], [0, 1], [1.0, 2.0])  # decreasing
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(2, 2, [0, 1, 1], [0, 1], [1.0, 2.0])  # last != nnz


def test_sparse_column_order_validation():
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(1, 3, [0, 2], [2, 1], [1.0, 2.0])  # not increasing
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(1, 3, [0, 2], [1, 1], [1.0, 2.0])  # duplicate column
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(1, 2, [0, 1], [5], [1.0])  # out of range


def test_sparse_rejects_stored_zeros():
    with pytest.raises(InvalidArgumentError):
        SparseMatrix(1, 2, [0, 1], [0], [0.0])


def test_sparse_drop_tolerance():
    a = np.array([[1.0, 1e-13], [0.5, 2.0]])
    sp = SparseMatrix.from_dense(a, drop_tol=1e-12)
    assert sp.nnz == 3


def test_sparse_from_coo_rejects_duplicates():
    with pytest.raises(InvalidArgumentError):
        SparseMatrix.from_coo(2, 2, [0, 0], [1, 1], [1.0, 2.0])


def test_sparse_from_coo_sorts():
    sp = SparseMatrix.from_coo(2, 3, [1, 0, 0], [2, 1, 0], [5.0, 3.0, 1.0])
    dense = sp.densify().data
    assert dense[0, 0] == 1.0 and dense[0, 1] == 3.0 and dense[1, 2] == 5.0


def test_sparse_finite_check():
    sp = SparseMatrix(1, 2, [0, 1], [0], [np.inf])
    with pytest.raises(InvalidArgumentError):
        sp.require_finite()
