"""Primitive operations against small closed-form cases and property oracles."""

import numpy as np
import pytest

from pdq.exceptions import InvalidArgumentError, SingularMatrixError
from pdq.linalg import condition_number, frobenius_norm, lu, lu_solve, matmul, qr, svd
from pdq.matrices import DenseMatrix, SparseMatrix


def dense(a):
    return DenseMatrix(np.asarray(a, dtype=float))


# ------------------------------------------------------------------ matmul


def test_matmul_identity():
    b = dense([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    out = matmul(dense(np.eye(3)), b)
    assert np.array_equal(out.data, b.data)


def test_matmul_diagonal_scaling():
    out = matmul(dense([[2.0, 0.0], [0.0, 3.0]]), dense([[1.0, 0.0], [0.0, 1.0]]))
    assert np.array_equal(out.data, np.array([[2.0, 0.0], [0.0, 3.0]]))


def test_matmul_sparse_matches_densified_product():
    # oracle: densify the sparse operand and multiply densely
    rng = np.random.default_rng(11)
    a = rng.standard_normal((8, 8)) * (rng.random((8, 8)) < 0.2)
    sp = SparseMatrix.from_dense(a)
    b = dense(rng.standard_normal((8, 8)))
    expected = sp.densify().data @ b.data
    got = matmul(sp, b).data
    assert np.max(np.abs(got - expected)) <= 1e-12


def test_matmul_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        matmul(dense(np.ones((2, 3))), dense(np.ones((2, 2))))
    with pytest.raises(InvalidArgumentError):
        matmul(SparseMatrix.from_dense(np.ones((2, 3))), dense(np.ones((2, 2))))


# ------------------------------------------------------------------- norms


def test_frobenius_trivial_cases():
    assert frobenius_norm(dense(np.zeros((3, 3)))) == 0.0
    assert frobenius_norm(dense(np.eye(4))) == 2.0
    assert frobenius_norm(dense([[3.0, 4.0], [0.0, 0.0]])) == 5.0


def test_frobenius_sparse_agrees_with_dense():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((10, 7)) * (rng.random((10, 7)) < 0.3)
    sp = SparseMatrix.from_dense(a)
    assert abs(frobenius_norm(sp) - frobenius_norm(sp.densify())) <= 1e-12


# --------------------------------------------------------------------- svd


def test_svd_diagonal():
    res = svd(dense(np.diag([3.0, 2.0, 1.0])))
    assert np.allclose(res.singular_values, [3.0, 2.0, 1.0], atol=1e-14)


def test_svd_rank_one():
    u = np.array([3.0, 4.0]) / 5.0
    v = np.array([1.0, 0.0, 0.0])
    res = svd(dense(np.outer(u, v)))
    assert abs(res.singular_values[0] - 1.0) <= 1e-14
    assert abs(res.singular_values[1]) <= 1e-14


def test_svd_reconstruction_oracle():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((6, 6))
    res = svd(dense(a))
    resid = np.linalg.norm(res.reconstruct().data - a)
    assert resid <= 1e-10 * np.linalg.norm(a)
    assert np.all(np.diff(res.singular_values) <= 0)
    assert np.all(res.singular_values >= 0)


def test_svd_invariants_random_trials():
    # 100 seeded trials, sizes up to 64: relative reconstruction <= 1e-10
    # and ||A||_F^2 equals the sum of squared singular values
    for trial in range(100):
        rng = np.random.default_rng(1000 + trial)
        n = int(rng.integers(2, 65))
        m = int(rng.integers(2, 65))
        a = rng.standard_normal((n, m))
        res = svd(dense(a))
        norm_a = np.linalg.norm(a)
        assert np.linalg.norm(res.reconstruct().data - a) <= 1e-10 * norm_a
        assert abs(norm_a**2 - np.sum(res.singular_values**2)) <= 1e-10 * norm_a**2


# -------------------------------------------------------- condition number


def test_condition_number_trivials():
    assert condition_number(dense(np.eye(5))) == pytest.approx(1.0, rel=1e-12)
    assert condition_number(dense(np.diag([10.0, 0.1]))) == pytest.approx(100.0, rel=1e-12)


def test_condition_number_constructed_kappa():
    from pdq.generators import gen_ill_conditioned

    a = gen_ill_conditioned(40, 1e6, seed=2)
    assert condition_number(a) == pytest.approx(1e6, rel=0.01)


def test_condition_number_singular_is_infinite():
    assert condition_number(dense(np.zeros((3, 3)))) == float("inf")


# ---------------------------------------------------------------------- qr


def test_qr_identity():
    res = qr(dense(np.eye(3)))
    assert np.allclose(res.q.data @ res.r.data, np.eye(3), atol=1e-14)
    assert not res.rank_deficient


def test_qr_permutation_input():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    res = qr(dense(a))
    assert np.max(np.abs(np.abs(res.q.data) - np.eye(2)[::-1])) <= 1e-14
    off_diag = res.r.data[np.tril_indices(2, -1)]
    assert np.max(np.abs(off_diag)) <= 1e-14
    assert np.allclose(np.abs(np.diag(res.r.data)), 1.0, atol=1e-14)


def test_qr_property_oracle():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((10, 4))
    res = qr(dense(a))
    assert np.max(np.abs(res.q.data.T @ res.q.data - np.eye(4))) <= 1e-12
    assert np.linalg.norm(res.q.data @ res.r.data - a) <= 1e-12 * np.linalg.norm(a)


def test_qr_requires_tall():
    with pytest.raises(InvalidArgumentError):
        qr(dense(np.ones((2, 3))))


# ---------------------------------------------------------------------- lu


def test_lu_identity():
    res = lu(dense(np.eye(3)))
    assert np.array_equal(res.lower.data, np.eye(3))
    assert np.array_equal(res.upper.data, np.eye(3))


def test_lu_forces_pivot():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    res = lu(dense(a))
    assert np.linalg.norm(a[res.perm] - res.lower.data @ res.upper.data) <= 1e-12


def test_lu_reconstruction_diag_dominant():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((12, 12))
    np.fill_diagonal(a, 1.0 + np.sum(np.abs(a), axis=1))
    res = lu(dense(a))
    recon = res.lower.data @ res.upper.data
    assert np.linalg.norm(a[res.perm] - recon) <= 1e-12 * np.linalg.norm(a)


def test_lu_singular_names_column():
    with pytest.raises(SingularMatrixError) as err:
        lu(dense(np.array([[1.0, 2.0], [2.0, 4.0]])))
    assert err.value.column == 1


def test_lu_requires_square():
    with pytest.raises(InvalidArgumentError):
        lu(dense(np.ones((2, 3))))


def test_lu_solve_matches_numpy():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((7, 7)) + 7 * np.eye(7)
    b = rng.standard_normal((7, 3))
    x = lu_solve(lu(dense(a)), dense(b))
    assert np.allclose(a @ x.data, b, atol=1e-10)


def test_factorization_primitives_random_reconstruction():
    # shared invariant: qr and lu reconstruct to 1e-10 relative across seeds
    for trial in range(100):
        rng = np.random.default_rng(4000 + trial)
        n = int(rng.integers(2, 65))
        a = rng.standard_normal((n, n)) + n * np.eye(n)
        norm_a = np.linalg.norm(a)
        qres = qr(dense(a))
        assert np.linalg.norm(qres.q.data @ qres.r.data - a) <= 1e-10 * norm_a
        lres = lu(dense(a))
        assert (
            np.linalg.norm(a[lres.perm] - lres.lower.data @ lres.upper.data) <= 1e-10 * norm_a
        )
