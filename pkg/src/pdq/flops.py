"""Analytic floating-operation accounting for the solver kernels.

Counts are exact integers computed from operand dimensions (2mnk per
dense product, 2*nnz*k per sparse product, nominal Golub-Van-Loan
constants for the factorization kernels), so they are deterministic for
a given problem and configuration.

Three categories keep the scaling terms separable:

* ``product``     kernels with the data matrix A as an operand,
                  O(n*m*k) dense or O(nnz*k) sparse;
* ``block_solve`` factor-only algebra (k x k Grams, polar factors,
                  LU solves, proximal passes), O(n*k^2 + k^3);
* ``norm``        objective / residual evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass


def gemm(m: int, k: int, n: int) -> int:
    """(m x k) @ (k x n) dense product."""
    return 2 * m * k * n


def spmm(nnz: int, n: int) -> int:
    """CSR (nnz stored entries) times a dense matrix with n columns."""
    return 2 * nnz * n


def frob(m: int, n: int) -> int:
    return 2 * m * n


def thin_svd(m: int, n: int) -> int:
    """R-SVD of an m x n matrix, m >= n (nominal)."""
    m, n = max(m, n), min(m, n)
    return 6 * m * n * n + 20 * n * n * n


def lu_factor(n: int) -> int:
    return (2 * n * n * n) // 3


def lu_substitute(n: int, nrhs: int) -> int:
    return 2 * n * n * nrhs


def eigh(n: int) -> int:
    return 9 * n * n * n


def entrywise(m: int, n: int, passes: int = 1) -> int:
    return 2 * m * n * passes


@dataclass
class FlopCounts:
    """Mutable accumulator; one instance per sweep in solver metadata."""

    product: int = 0
    block_solve: int = 0
    norm: int = 0

    @property
    def total(self) -> int:
        return self.product + self.block_solve + self.norm

    def add(self, category: str, amount: int) -> None:
        setattr(self, category, getattr(self, category) + int(amount))

    def merged(self, other: "FlopCounts") -> "FlopCounts":
        return FlopCounts(
            self.product + other.product,
            self.block_solve + other.block_solve,
            self.norm + other.norm,
        )

    def to_dict(self) -> dict:
        return {
            "product": self.product,
            "block_solve": self.block_solve,
            "norm": self.norm,
            "total": self.total,
        }
