"""Seeded synthetic matrix generators for experiments and the CLI.

Every generator is deterministic for a given seed and builds one of the
structured families the experiments exercise: sparse, low-rank,
ill-conditioned (prescribed condition number), diagonally dominant, and
symmetric positive definite.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError
from .matrices import DenseMatrix, SparseMatrix

KINDS = ("sparse", "low-rank", "ill-conditioned", "diag-dominant", "spd")


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, *key])


def _seeded_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q


def gen_sparse(rows: int, cols: int, density: float, seed: int) -> SparseMatrix:
    """Bernoulli(density) mask with standard-normal values, CSR layout."""
    if not 0.0 < density <= 1.0:
        raise InvalidArgumentError("density must be in (0, 1]")
    rng = _rng(seed, 0)
    offsets = np.zeros(rows + 1, dtype=np.int64)
    all_cols = []
    all_vals = []
    for i in range(rows):
        mask = rng.random(cols) < density
        idx = np.nonzero(mask)[0]
        vals = rng.standard_normal(idx.size)
        vals[vals == 0.0] = 1.0  # keep the stored-zero invariant
        offsets[i + 1] = offsets[i] + idx.size
        all_cols.append(idx)
        all_vals.append(vals)
    cols_idx = np.concatenate(all_cols) if all_cols else np.zeros(0, dtype=np.int64)
    values = np.concatenate(all_vals) if all_vals else np.zeros(0)
    return SparseMatrix(rows, cols, offsets, cols_idx, values)


def gen_low_rank(rows: int, cols: int, rank: int, seed: int) -> DenseMatrix:
    """Product of two seeded thin Gaussian factors; numerical rank == rank."""
    if not 1 <= rank <= min(rows, cols):
        raise InvalidArgumentError("rank must be in [1, min(rows, cols)]")
    rng = _rng(seed, 1)
    left = rng.standard_normal((rows, rank))
    right = rng.standard_normal((rank, cols))
    return DenseMatrix(left @ right)


def gen_ill_conditioned(n: int, kappa: float, seed: int) -> DenseMatrix:
    """U diag(geometric spectrum 1 .. 1/kappa) V^T with seeded orthogonal U, V."""
    if kappa < 1.0:
        raise InvalidArgumentError("kappa must be >= 1")
    rng = _rng(seed, 2)
    u = _seeded_orthogonal(rng, n)
    v = _seeded_orthogonal(rng, n)
    spectrum = np.geomspace(1.0, 1.0 / kappa, n)
    return DenseMatrix((u * spectrum) @ v.T)


def gen_diag_dominant(n: int, seed: int) -> DenseMatrix:
    """Random off-diagonals; each diagonal entry is 1 + its row absolute sum."""
    rng = _rng(seed, 3)
    a = rng.standard_normal((n, n))
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, 1.0 + np.sum(np.abs(a), axis=1))
    return DenseMatrix(a)


def gen_spd(n: int, seed: int) -> DenseMatrix:
    """B^T B + 1e-6 I for seeded Gaussian B."""
    rng = _rng(seed, 4)
    b = rng.standard_normal((n, n))
    return DenseMatrix(b.T @ b + 1e-6 * np.eye(n))


def gen_matrix(
    kind: str,
    size,
    seed: int = 0,
    density: float | None = None,
    rank: int | None = None,
    kappa: float | None = None,
):
    """Dispatch on kind; ``size`` is an int or a (rows, cols) pair."""
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown generator kind {kind!r}; choose from {KINDS}")
    if isinstance(size, (tuple, list)):
        rows, cols = (int(size[0]), int(size[1])) if len(size) == 2 else (int(size[0]),) * 2
    else:
        rows = cols = int(size)
    if rows < 1 or cols < 1:
        raise InvalidArgumentError("size must be positive")

    if kind == "sparse":
        if density is None:
            raise InvalidArgumentError("sparse generator needs a density")
        return gen_sparse(rows, cols, density, seed)
    if kind == "low-rank":
        if rank is None:
            raise InvalidArgumentError("low-rank generator needs a rank")
        return gen_low_rank(rows, cols, rank, seed)
    if rows != cols:
        raise InvalidArgumentError(f"{kind} generator needs a square size")
    if kind == "ill-conditioned":
        if kappa is None:
            raise InvalidArgumentError("ill-conditioned generator needs a kappa")
        return gen_ill_conditioned(rows, kappa, seed)
    if kind == "diag-dominant":
        return gen_diag_dominant(rows, seed)
    return gen_spd(rows, seed)
