"""File format round-trips are bit-exact; parse errors carry line numbers."""

import numpy as np
import pytest

from pdq.exceptions import MatrixFormatError
from pdq.io import (
    load_factorization,
    read_dense_csv,
    read_matrix,
    read_matrix_market,
    read_tensor,
    save_factorization,
    write_dense_csv,
    write_matrix_market,
    write_tensor,
)
from pdq.matrices import DenseMatrix, SparseMatrix
from pdq.solver import SolverConfig, solve
from pdq.tensor import DenseTensor


def test_matrix_market_dense_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(1)
    a = DenseMatrix(rng.standard_normal((7, 5)) * 10.0 ** rng.integers(-8, 8, size=(7, 5)))
    path = tmp_path / "a.mtx"
    write_matrix_market(a, path)
    back = read_matrix_market(path)
    assert isinstance(back, DenseMatrix)
    assert np.array_equal(back.data, a.data)


def test_matrix_market_sparse_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    arr = rng.standard_normal((9, 6)) * (rng.random((9, 6)) < 0.3)
    sp = SparseMatrix.from_dense(arr)
    path = tmp_path / "s.mtx"
    write_matrix_market(sp, path)
    back = read_matrix_market(path)
    assert isinstance(back, SparseMatrix)
    assert np.array_equal(back.values, sp.values)
    assert np.array_equal(back.col_indices, sp.col_indices)
    assert np.array_equal(back.row_offsets, sp.row_offsets)


def test_matrix_market_roundtrips_many_seeds(tmp_path):
    for trial in range(25):
        rng = np.random.default_rng(100 + trial)
        n, m = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        dense = DenseMatrix(rng.standard_normal((n, m)))
        p = tmp_path / f"d{trial}.mtx"
        write_matrix_market(dense, p)
        assert np.array_equal(read_matrix_market(p).data, dense.data)

        sp = SparseMatrix.from_dense(rng.standard_normal((n, m)) * (rng.random((n, m)) < 0.4))
        p = tmp_path / f"s{trial}.mtx"
        write_matrix_market(sp, p)
        back = read_matrix_market(p)
        assert np.array_equal(back.values, sp.values)
        assert np.array_equal(back.col_indices, sp.col_indices)


def test_csv_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    a = DenseMatrix(rng.standard_normal((4, 6)))
    path = tmp_path / "a.csv"
    write_dense_csv(a, path)
    assert np.array_equal(read_dense_csv(path).data, a.data)


def test_read_matrix_sniffs_format(tmp_path):
    a = DenseMatrix(np.eye(3))
    write_matrix_market(a, tmp_path / "a.any")
    write_dense_csv(a, tmp_path / "b.any")
    assert np.array_equal(read_matrix(tmp_path / "a.any").data, a.data)
    assert np.array_equal(read_matrix(tmp_path / "b.any").data, a.data)


def test_mm_bad_header_reports_line(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 2.0\n")
    with pytest.raises(MatrixFormatError) as err:
        read_matrix_market(path)
    assert err.value.line_number == 1


def test_mm_bad_value_reports_line(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 1\n1.5\nnope\n")
    with pytest.raises(MatrixFormatError) as err:
        read_matrix_market(path)
    assert err.value.line_number == 4


def test_mm_wrong_count_reports_error(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n")
    with pytest.raises(MatrixFormatError):
        read_matrix_market(path)


def test_mm_array_column_major_layout(tmp_path):
    path = tmp_path / "cm.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n4.0\n")
    a = read_matrix_market(path)
    assert np.array_equal(a.data, np.array([[1.0, 3.0], [2.0, 4.0]]))


def test_csv_bad_row_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("2,2\n1.0,2.0\n3.0\n")
    with pytest.raises(MatrixFormatError) as err:
        read_dense_csv(path)
    assert err.value.line_number == 3


def test_tensor_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(4)
    t = DenseTensor(rng.standard_normal((3, 4, 2)))
    path = tmp_path / "t.tns"
    write_tensor(t, path)
    back = read_tensor(path)
    assert back.shape == t.shape
    assert np.array_equal(back.data, t.data)


def test_tensor_bad_header(tmp_path):
    path = tmp_path / "t.tns"
    path.write_text("not json\n1.0\n")
    with pytest.raises(MatrixFormatError) as err:
        read_tensor(path)
    assert err.value.line_number == 1


def test_factorization_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    a = DenseMatrix(rng.standard_normal((10, 8)))
    fact = solve(a, SolverConfig(rank=3))
    out = tmp_path / "fact"
    save_factorization(fact, out)
    p, d, q, meta = load_factorization(out)
    assert np.array_equal(p.data, fact.p.data)
    assert np.array_equal(d.data, fact.d.data)
    assert np.array_equal(q.data, fact.q.data)
    assert meta["converged"] == fact.converged
    assert meta["config"]["rank"] == 3
    assert "timestamp" in meta
