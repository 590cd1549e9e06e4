"""Numerical primitives: products, norms, SVD, QR, LU, condition numbers.

SVD and QR are backed by LAPACK through numpy (deterministic for a given
input and build). LU with partial pivoting is implemented here so exact
singularity is reported with the failing pivot column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError, NumericalFailureError, SingularMatrixError
from .matrices import DenseMatrix, SparseMatrix, as_dense_array

# Singular values below this are treated as zero by condition_number.
SIGMA_FLOOR = 1e-300
# Nominal LAPACK iteration cap reported when an SVD fails to converge.
_SVD_ITER_CAP = 30


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: ``u @ diag(singular_values) @ vt`` reconstructs the input."""

    u: DenseMatrix
    singular_values: np.ndarray
    vt: DenseMatrix

    def reconstruct(self) -> DenseMatrix:
        return DenseMatrix((self.u.data * self.singular_values) @ self.vt.data)


@dataclass(frozen=True)
class QrResult:
    """Reduced QR. ``rank_deficient`` flags a zero diagonal entry in r."""

    q: DenseMatrix
    r: DenseMatrix
    rank_deficient: bool


@dataclass(frozen=True)
class LuResult:
    """PA = LU with partial pivoting; ``perm`` maps row i of PA to row perm[i] of A."""

    perm: np.ndarray
    lower: DenseMatrix
    upper: DenseMatrix


def matmul(a, b: DenseMatrix) -> DenseMatrix:
    """Matrix product; the sparse-times-dense path touches only stored entries."""
    bd = as_dense_array(b)
    if isinstance(a, SparseMatrix):
        if a.cols != bd.shape[0]:
            raise InvalidArgumentError(f"inner dimensions differ: {a.cols} vs {bd.shape[0]}")
        return DenseMatrix(a.to_csr() @ bd)
    ad = as_dense_array(a)
    if ad.shape[1] != bd.shape[0]:
        raise InvalidArgumentError(f"inner dimensions differ: {ad.shape[1]} vs {bd.shape[0]}")
    return DenseMatrix(ad @ bd)


def frobenius_norm(a) -> float:
    """sqrt of the sum of squared entries."""
    if isinstance(a, SparseMatrix):
        return float(np.linalg.norm(a.values))
    return float(np.linalg.norm(as_dense_array(a)))


def svd(a: DenseMatrix) -> SvdResult:
    arr = as_dense_array(a)
    try:
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"svd failed to converge: {exc}", iterations=_SVD_ITER_CAP * min(arr.shape)
        ) from exc
    return SvdResult(DenseMatrix(u), s, DenseMatrix(vt))


def condition_number(a: DenseMatrix) -> float:
    """sigma_max / sigma_min; +inf once sigma_min drops below 1e-300."""
    s = svd(a).singular_values
    if s.size == 0 or s[-1] < SIGMA_FLOOR:
        return float("inf")
    return float(s[0] / s[-1])


def qr(a: DenseMatrix) -> QrResult:
    arr = as_dense_array(a)
    if arr.shape[0] < arr.shape[1]:
        raise InvalidArgumentError("qr requires rows >= cols")
    q, r = np.linalg.qr(arr, mode="reduced")
    deficient = bool(np.any(np.abs(np.diag(r)) == 0.0))
    return QrResult(DenseMatrix(q), DenseMatrix(r), deficient)


def lu(a: DenseMatrix) -> LuResult:
    """PA = LU with partial pivoting; exact zero pivot raises SingularMatrixError."""
    arr = as_dense_array(a)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError("lu requires a square matrix")
    lo, up, perm = _lu_arrays(arr)
    n = arr.shape[0]
    lower = np.tril(lo, -1) + np.eye(n)
    return LuResult(perm, DenseMatrix(lower), DenseMatrix(np.triu(up)))


def _lu_arrays(arr: np.ndarray):
    """Packed in-place LU; returns (packed L, packed U, perm). Internal."""
    n = arr.shape[0]
    work = arr.astype(np.float64, copy=True)
    perm = np.arange(n)
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(work[col:, col])))
        if work[pivot_row, col] == 0.0:
            raise SingularMatrixError(
                f"exactly singular matrix: no pivot in column {col}", column=col
            )
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
            perm[[col, pivot_row]] = perm[[pivot_row, col]]
        work[col + 1 :, col] /= work[col, col]
        work[col + 1 :, col + 1 :] -= np.outer(work[col + 1 :, col], work[col, col + 1 :])
    return work, work, perm


def lu_solve_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for square ndarray a via the package LU. Internal hot path."""
    packed, _, perm = _lu_arrays(a)
    n = a.shape[0]
    x = np.array(b[perm], dtype=np.float64, copy=True)
    if x.ndim == 1:
        x = x[:, None]
        squeeze = True
    else:
        squeeze = False
    for i in range(1, n):  # forward substitution, unit lower triangle
        x[i] -= packed[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):  # back substitution
        if i + 1 < n:
            x[i] -= packed[i, i + 1 :] @ x[i + 1 :]
        x[i] /= packed[i, i]
    return x[:, 0] if squeeze else x


def lu_solve(factors: LuResult, b: DenseMatrix) -> DenseMatrix:
    """Solve A x = b given lu(A)."""
    lo = factors.lower.data
    up = factors.upper.data
    n = lo.shape[0]
    bd = as_dense_array(b)
    if bd.shape[0] != n:
        raise InvalidArgumentError("right-hand side has wrong row count")
    x = bd[factors.perm].copy()
    for i in range(1, n):
        x[i] -= lo[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= up[i, i + 1 :] @ x[i + 1 :]
        x[i] /= up[i, i]
    return DenseMatrix(x)


def eigh_psd(g: np.ndarray):
    """Eigendecomposition of a symmetric matrix (used for k x k Grams)."""
    w, v = np.linalg.eigh((g + g.T) / 2.0)
    return w, v


def polar_orthonormal(t: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor of a tall matrix (closest orthonormal basis)."""
    u, _, vt = np.linalg.svd(t, full_matrices=False)
    return u @ vt
